"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations

from typing import TYPE_CHECKING, Optional, Sequence, Tuple

if TYPE_CHECKING:
    from .optimizer import TrainTrace


class LowRankDPPError(RuntimeError):
    """Base class for every error raised by lrdpp."""


class ConfigError(LowRankDPPError, ValueError):
    """Raised when a configuration file, environment override or flag is invalid."""


class DataError(LowRankDPPError):
    """Raised for unreadable basket files, bad splits and corrupt model files."""


class KernelError(LowRankDPPError):
    """Raised when a trait matrix or basket is invalid for a kernel computation."""


class SingularBasketError(KernelError):
    """Raised when a basket's Gram matrix is singular where an inverse is required."""

    def __init__(self, message: str, basket: Sequence[int]) -> None:
        super().__init__(message)
        self.basket: Tuple[int, ...] = tuple(int(i) for i in basket)


class ConditioningError(LowRankDPPError):
    """Raised when the DPP cannot be conditioned on a basket."""


class TrainingError(LowRankDPPError):
    """Raised when training aborts. Carries the trace recorded so far."""

    def __init__(self, message: str, trace: Optional["TrainTrace"] = None) -> None:
        super().__init__(message)
        self.trace = trace


class BasketTooLargeError(TrainingError):
    """Raised at training start when baskets exceed the number of trait dimensions."""

    def __init__(self, message: str, baskets: Sequence[int], largest: int) -> None:
        super().__init__(message)
        self.baskets: Tuple[int, ...] = tuple(baskets)
        self.largest = largest


class EvaluationError(LowRankDPPError):
    """Raised when no evaluation instance could be scored."""


class OracleError(LowRankDPPError):
    """Raised by the brute-force reference implementations."""
