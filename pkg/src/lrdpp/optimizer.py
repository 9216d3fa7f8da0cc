"""Stochastic gradient ascent with Nesterov momentum and an annealed learning rate."""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .config import TrainConfig
from .data import BasketDataset
from .errors import BasketTooLargeError, SingularBasketError, TrainingError
from .kernel import TraitMatrix
from .likelihood import gradient, objective, popularity_weights

logger = logging.getLogger(__name__)

PathLikeOrStr = Union[os.PathLike, str]
EpochCallback = Callable[[np.ndarray], Optional[float]]


@dataclass(frozen=True)
class TrainRecord:
    """Objective snapshot taken at the end of an epoch (epoch 0 is the initial point)."""

    epoch: int
    iteration: int
    learning_rate: float
    objective: float
    test_ll: Optional[float] = None

    def to_line(self) -> str:
        line = f"epoch {self.epoch} lr {self.learning_rate!r} objective {self.objective!r}"
        if self.test_ll is not None:
            line += f" test_ll {self.test_ll!r}"
        return line


@dataclass
class TrainTrace:
    records: List[TrainRecord] = field(default_factory=list)
    converged: bool = False
    iterations_run: int = 0

    @property
    def objectives(self) -> List[float]:
        return [r.objective for r in self.records]

    def to_lines(self) -> List[str]:
        return [record.to_line() for record in self.records]

    def write(self, path: PathLikeOrStr) -> None:
        path = Path(path).expanduser()
        with path.open("w", encoding="utf-8") as fh:
            for line in self.to_lines():
                fh.write(line + "\n")


def learning_rate(t: int, cfg: TrainConfig) -> float:
    """epsilon_t = epsilon0 / (1 + t/T)"""
    if cfg.t_anneal is None:
        raise TrainingError("The annealing horizon is unresolved; call TrainConfig.resolve first")
    return cfg.epsilon0 / (1.0 + t / cfg.t_anneal)


def nag_step(
    V: np.ndarray,
    W: np.ndarray,
    grad_at_lookahead: np.ndarray,
    t: int,
    cfg: TrainConfig,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    One Nesterov update. The gradient must be evaluated at the lookahead point
    V + beta * W.
    """
    if V.shape != W.shape or V.shape != grad_at_lookahead.shape:
        raise TrainingError(
            f"Shape mismatch: V {V.shape}, W {W.shape}, gradient {grad_at_lookahead.shape}"
        )
    if not np.all(np.isfinite(grad_at_lookahead)):
        raise TrainingError(f"Non-finite gradient at iteration {t}")
    W_next = cfg.beta * W + (1.0 - cfg.beta) * learning_rate(t, cfg) * grad_at_lookahead
    return V + W_next, W_next


def converged(f_prev: float, f_curr: float, delta: float) -> bool:
    """Relative change |f_curr - f_prev| / |f_prev| <= delta."""
    if f_prev == 0.0 or not math.isfinite(f_prev) or not math.isfinite(f_curr):
        return False
    return abs(f_curr - f_prev) / abs(f_prev) <= delta


def check_basket_sizes(dataset: BasketDataset, k: int) -> None:
    """Reject baskets that cannot have nonzero probability under a rank-k kernel."""
    oversized = [n for n, basket in enumerate(dataset.baskets) if len(basket) > k]
    if oversized:
        largest = max(len(dataset.baskets[n]) for n in oversized)
        shown = ", ".join(str(n) for n in oversized[:10]) + (" ..." if len(oversized) > 10 else "")
        raise BasketTooLargeError(
            f"{len(oversized)} training baskets have more than K={k} items "
            f"(largest has {largest}; basket numbers: {shown})",
            oversized,
            largest,
        )


def train(
    dataset: BasketDataset,
    cfg: TrainConfig,
    on_epoch: Optional[EpochCallback] = None,
) -> Tuple[TraitMatrix, TrainTrace]:
    """
    Fit the trait matrix by mini-batch NAG ascent on the regularized
    log-likelihood. The full training objective is evaluated once per epoch
    for the convergence test. ``on_epoch`` receives the current traits at
    every snapshot and its return value fills the trace's test_ll column.
    """
    if dataset.N == 0:
        raise TrainingError("no baskets")
    cfg = cfg.validate().resolve(dataset.N)
    check_basket_sizes(dataset, cfg.k)

    rng = np.random.default_rng(cfg.seed)
    V = rng.normal(0.0, cfg.init_scale, size=(dataset.M, cfg.k))
    W = np.zeros_like(V)
    reg = popularity_weights(dataset, cfg.alpha)
    baskets = dataset.baskets
    N = dataset.N

    trace = TrainTrace()

    def snapshot(epoch: int, t: int, lr: float, f: float) -> None:
        test_ll = on_epoch(V) if on_epoch is not None else None
        record = TrainRecord(epoch, t, lr, f, test_ll)
        trace.records.append(record)
        logger.info(record.to_line())

    f_prev = objective(V, dataset, reg)
    if not math.isfinite(f_prev):
        raise TrainingError("Initial objective is not finite; try a different seed or init_scale", trace)
    snapshot(0, 0, learning_rate(0, cfg), f_prev)

    t = 0
    epoch = 0
    while t < cfg.max_iters:
        order = rng.permutation(N)
        for start in range(0, N, cfg.batch_size):
            if t >= cfg.max_iters:
                break
            batch = [baskets[i] for i in order[start : start + cfg.batch_size]]
            lookahead = V + cfg.beta * W
            try:
                grad = gradient(lookahead, batch, N, reg, workers=cfg.workers)
            except SingularBasketError as exc:
                trace.iterations_run = t
                raise TrainingError(f"Iteration {t}: {exc}", trace) from exc
            try:
                V, W = nag_step(V, W, grad, t, cfg)
            except TrainingError as exc:
                trace.iterations_run = t
                raise TrainingError(str(exc), trace) from exc
            t += 1

        epoch += 1
        trace.iterations_run = t
        f_curr = objective(V, dataset, reg)
        snapshot(epoch, t, learning_rate(t - 1, cfg), f_curr)
        if not math.isfinite(f_curr):
            raise TrainingError(f"Objective became {f_curr} at epoch {epoch}", trace)
        if converged(f_prev, f_curr, cfg.delta):
            trace.converged = True
            logger.info("Converged after %d iterations (%d epochs)", t, epoch)
            break
        f_prev = f_curr
    else:
        logger.warning("Stopped at max_iters=%d without converging", cfg.max_iters)

    return TraitMatrix(V, dataset.catalog), trace
