"""Seeded equivalence checks between the fast low-rank code paths and the oracles."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .conditioning import condition, next_item_probabilities
from .kernel import log_normalizer
from .likelihood import RegularizationWeights, gradient, objective
from .oracle import (
    brute_force_conditional,
    condition_full_rank,
    dense_kernel,
    enumerate_normalizer,
    finite_difference_gradient,
)

logger = logging.getLogger(__name__)

DEFAULT_TRIALS = 50

NORMALIZER_RTOL = 1.0e-9
GRADIENT_RTOL = 1.0e-5
GRADIENT_ATOL_FLOOR = 1.0e-8
# Entries smaller than this fraction of the largest reference entry are compared absolutely.
GRADIENT_FLOOR_FRACTION = 1.0e-3
CONDITIONING_ATOL = 1.0e-8
PROBABILITY_RTOL = 1.0e-9
PROBABILITY_SUM_TOL = 1.0e-12
PROBABILITY_FLOOR_FRACTION = 1.0e-3

GradientFn = Callable[..., np.ndarray]


@dataclass
class CheckResult:
    name: str
    description: str
    trials: int
    max_error: float
    tolerance: float
    failing_seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.failing_seed is None


def _random_baskets(rng: np.random.Generator, M: int, K: int, count: int) -> List[Tuple[int, ...]]:
    baskets = []
    for _ in range(count):
        size = int(rng.integers(1, min(K, M) + 1))
        baskets.append(tuple(sorted(int(i) for i in rng.choice(M, size=size, replace=False))))
    return baskets


def relative_error(actual: np.ndarray, expected: np.ndarray, floor: float = 0.0) -> float:
    """Max entrywise |a - e| / |e|; entries with |e| < floor are compared absolutely."""
    actual = np.asarray(actual, dtype=np.float64)
    expected = np.asarray(expected, dtype=np.float64)
    scale = np.abs(expected)
    denom = np.where(scale < floor, 1.0, scale) if floor > 0 else np.maximum(scale, np.finfo(float).tiny)
    return float(np.max(np.abs(actual - expected) / denom)) if actual.size else 0.0


def normalizer_error(seed: int) -> float:
    rng = np.random.default_rng(seed)
    M = int(rng.integers(1, 11))
    K = int(rng.integers(1, 5))
    V = rng.normal(size=(M, K))
    brute = enumerate_normalizer(dense_kernel(V))
    return relative_error(np.exp(log_normalizer(V)), brute)


def gradient_error(seed: int, gradient_fn: GradientFn = gradient) -> float:
    rng = np.random.default_rng(seed)
    M = int(rng.integers(2, 9))
    K = int(rng.integers(1, 4))
    alpha = float(rng.choice([0.0, 0.1, 1.0]))
    V = rng.normal(size=(M, K))
    baskets = _random_baskets(rng, M, K, int(rng.integers(1, 6)))
    reg = RegularizationWeights(rng.uniform(0.2, 2.0, size=M), alpha)
    analytic = gradient_fn(V, baskets, len(baskets), reg)
    numeric = finite_difference_gradient(lambda X: objective(X, baskets, reg), V)
    floor = max(GRADIENT_ATOL_FLOOR, GRADIENT_FLOOR_FRACTION * float(np.max(np.abs(numeric))))
    return relative_error(analytic, numeric, floor=floor)


def conditioning_error(seed: int) -> float:
    rng = np.random.default_rng(seed)
    M = int(rng.integers(2, 21))
    K = int(rng.integers(1, 7))
    V = rng.normal(size=(M, K))
    size = int(rng.integers(0, min(K, 5, M - 1) + 1))
    A = sorted(int(i) for i in rng.choice(M, size=size, replace=False))
    cm = condition(V, A)
    low_rank = cm.v_cond @ cm.v_cond.T
    full_rank = condition_full_rank(dense_kernel(V), A)
    return float(np.max(np.abs(low_rank - full_rank)))


def probability_error(seed: int) -> float:
    rng = np.random.default_rng(seed)
    M = int(rng.integers(4, 11))
    K = int(rng.integers(2, 5))
    V = rng.normal(size=(M, K))
    size = int(rng.integers(1, K))
    A = sorted(int(i) for i in rng.choice(M, size=size, replace=False))
    cm = condition(V, A)
    probs = next_item_probabilities(cm)
    table = brute_force_conditional(dense_kernel(V), A, len(A) + 1)
    expected = np.array([table[(int(b),)] for b in cm.candidates])
    sum_gap = abs(float(np.sum(probs)) - 1.0)
    if sum_gap > PROBABILITY_SUM_TOL:
        return float("inf")
    # near-zero candidates lose digits to cancellation in the dense Schur complement
    floor = max(PROBABILITY_SUM_TOL, PROBABILITY_FLOOR_FRACTION * float(np.max(expected)))
    return relative_error(probs, expected, floor=floor)


PROPERTIES: Sequence[Tuple[str, str, float]] = (
    ("normalizer", "det(I_K + V^T V) equals the subset-enumerated normalizer", NORMALIZER_RTOL),
    (
        "gradient",
        "analytic gradient matches central finite differences; entries below 1e-3 of the largest compared absolutely",
        GRADIENT_RTOL,
    ),
    ("conditioning", "low-rank conditional kernel equals both full-rank conditionals", CONDITIONING_ATOL),
    (
        "probabilities",
        "next-item probabilities match conditional k-DPP enumeration; entries below 1e-3 of the largest compared absolutely",
        PROBABILITY_RTOL,
    ),
)


def run_checks(
    seed: int = 0,
    trials: int = DEFAULT_TRIALS,
    gradient_fn: GradientFn = gradient,
) -> List[CheckResult]:
    """
    Run every property on ``trials`` instances seeded ``seed, seed+1, ...``.
    The first failing seed of each property is recorded so that
    ``lrdpp check --seed <failing> --trials 1`` reproduces it.
    """
    measures = {
        "normalizer": normalizer_error,
        "gradient": lambda s: gradient_error(s, gradient_fn),
        "conditioning": conditioning_error,
        "probabilities": probability_error,
    }
    results = []
    for name, description, tolerance in PROPERTIES:
        result = CheckResult(name, description, trials, 0.0, tolerance)
        for trial in range(trials):
            trial_seed = seed + trial
            try:
                error = measures[name](trial_seed)
            except Exception as exc:  # any crash counts as a failure of the property
                logger.debug("Property %s raised on seed %d: %s", name, trial_seed, exc)
                error = float("inf")
            result.max_error = max(result.max_error, error)
            if not error <= tolerance and result.failing_seed is None:
                result.failing_seed = trial_seed
                logger.debug("Property %s failed on seed %d (error %.3e)", name, trial_seed, error)
        results.append(result)
    return results
