"""Prediction-time and model-size comparison of low-rank and full-rank conditioning."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .conditioning import condition, next_item_probabilities
from .oracle import condition_by_inversion

logger = logging.getLogger(__name__)

DEFAULT_M_VALUES: Tuple[int, ...] = (100, 500, 1000, 2000)
DEFAULT_K = 15
DEFAULT_BASKET_SIZE = 3
DEFAULT_TRIALS = 5

BYTES_PER_ENTRY = 8


@dataclass(frozen=True)
class BenchRow:
    M: int
    K: int
    low_rank_ms: float
    full_rank_ms: float
    low_rank_bytes: int
    full_rank_bytes: int

    @property
    def speedup(self) -> float:
        return self.full_rank_ms / self.low_rank_ms if self.low_rank_ms > 0 else float("inf")


def memory_footprint(M: int, K: int) -> Tuple[int, int]:
    """Bytes needed to store V (M x K) versus a dense kernel L (M x M) as float64."""
    return M * K * BYTES_PER_ENTRY, M * M * BYTES_PER_ENTRY


def random_dense_kernel(M: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank PSD kernel B B^T / M + I with B drawn M x M."""
    B = rng.normal(size=(M, M))
    return B @ B.T / M + np.eye(M)


def _time_ms(fn, trials: int) -> float:
    start = time.perf_counter()
    for _ in range(trials):
        fn()
    return 1000.0 * (time.perf_counter() - start) / trials


def bench_one(M: int, K: int, basket_size: int, trials: int, rng: np.random.Generator) -> BenchRow:
    """
    Average time to score every candidate for one random basket, both ways.
    The low-rank path conditions an M x K trait matrix; the full-rank path
    runs the two-inversion formula on a random dense kernel.
    """
    V = rng.normal(size=(M, K)) / np.sqrt(K)
    basket = sorted(int(i) for i in rng.choice(M, size=basket_size, replace=False))
    L = random_dense_kernel(M, rng)

    def low_rank() -> np.ndarray:
        return next_item_probabilities(condition(V, basket))

    def full_rank() -> np.ndarray:
        LA = condition_by_inversion(L, basket)
        diag = np.diag(LA)
        return diag / np.sum(diag)

    low_ms = _time_ms(low_rank, trials)
    full_ms = _time_ms(full_rank, trials)
    low_bytes, full_bytes = memory_footprint(M, K)
    logger.debug("M=%d: low-rank %.3f ms, full-rank %.3f ms", M, low_ms, full_ms)
    return BenchRow(M, K, low_ms, full_ms, low_bytes, full_bytes)


def run_bench(
    m_values: Sequence[int] = DEFAULT_M_VALUES,
    k: int = DEFAULT_K,
    basket_size: int = DEFAULT_BASKET_SIZE,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
) -> List[BenchRow]:
    if basket_size > k:
        raise ValueError(f"basket_size ({basket_size}) cannot exceed k ({k})")
    rng = np.random.default_rng(seed)
    rows = []
    for M in m_values:
        if basket_size >= M:
            raise ValueError(f"basket_size ({basket_size}) must be smaller than M ({M})")
        rows.append(bench_one(int(M), k, basket_size, trials, rng))
    return rows
