"""
Training objective for the low-rank DPP and its exact gradient.

The objective is the log-likelihood of the observed baskets minus a quadratic
penalty on each trait vector, weighted inversely to the item's popularity:

    f(V) = sum_n log det(L_[n]) - N log det(L + I) - alpha/2 sum_i lambda_i ||v_i||^2
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np
import scipy.linalg as la

from .errors import KernelError, SingularBasketError
from .kernel import (
    NEG_INF,
    TraitsLike,
    check_basket,
    gram_log_det,
    item_popularity,
    log_det_basket,
    log_normalizer,
    trait_entries,
)

if TYPE_CHECKING:
    from .data import Basket, BasketDataset

logger = logging.getLogger(__name__)

# Stand-in occurrence count for items never seen in training.
UNSEEN_COUNT = 0.5


@dataclass(frozen=True)
class RegularizationWeights:
    """Per-item penalty weights lambda and the overall strength alpha."""

    lam: np.ndarray
    alpha: float = 1.0

    def __post_init__(self) -> None:
        lam = np.array(self.lam, dtype=np.float64)
        if lam.ndim != 1 or np.any(~np.isfinite(lam)) or np.any(lam <= 0):
            raise KernelError("Regularization weights must be a finite positive vector")
        if self.alpha < 0:
            raise KernelError(f"alpha must be >= 0 (got {self.alpha})")
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)


def popularity_weights(
    dataset: Union["BasketDataset", np.ndarray],
    alpha: float = 1.0,
) -> RegularizationWeights:
    """lambda_i = 1/C(i), using UNSEEN_COUNT for items with no occurrences."""
    counts = np.asarray(getattr(dataset, "counts", dataset), dtype=np.float64)
    effective = np.where(counts > 0, counts, UNSEEN_COUNT)
    return RegularizationWeights(1.0 / effective, alpha)


def penalty(V: TraitsLike, reg: RegularizationWeights) -> float:
    """alpha/2 * sum_i lambda_i ||v_i||^2"""
    entries = trait_entries(V)
    if entries.shape[0] != reg.lam.shape[0]:
        raise KernelError(f"Weights cover {reg.lam.shape[0]} items but V has {entries.shape[0]} rows")
    return 0.5 * reg.alpha * float(np.dot(reg.lam, item_popularity(entries)))


def objective(
    V: TraitsLike,
    dataset: Union["BasketDataset", Sequence["Basket"]],
    reg: RegularizationWeights,
) -> float:
    """Regularized log-likelihood; NEG_INF as soon as one basket has zero probability."""
    entries = trait_entries(V)
    baskets = getattr(dataset, "baskets", dataset)
    total = 0.0
    for basket in baskets:
        term = log_det_basket(entries, basket)
        if term == NEG_INF:
            return NEG_INF
        total += term
    return total - len(baskets) * log_normalizer(entries) - penalty(entries, reg)


def average_log_likelihood(
    V: TraitsLike,
    dataset: Union["BasketDataset", Sequence["Basket"]],
) -> float:
    """Mean per-basket log-probability, sum_n log P(A_n) / N."""
    entries = trait_entries(V)
    baskets = getattr(dataset, "baskets", dataset)
    if not baskets:
        raise KernelError("Cannot average the log-likelihood of an empty dataset")
    log_z = log_normalizer(entries)
    total = 0.0
    for basket in baskets:
        term = log_det_basket(entries, basket)
        if term == NEG_INF:
            return NEG_INF
        total += term - log_z
    return total / len(baskets)


def _data_term(entries: np.ndarray, baskets: Sequence["Basket"]) -> np.ndarray:
    """Sum over baskets of d/dV log det(L_[n]) = 2 L_[n]^{-1} V_[n] on the basket's rows."""
    M = entries.shape[0]
    grad = np.zeros_like(entries)
    for basket in baskets:
        idx = check_basket(basket, M)
        VY = entries[idx]
        G = VY @ VY.T
        if idx.size > entries.shape[1] or gram_log_det(G) == NEG_INF:
            raise SingularBasketError(f"Basket {list(basket)} has a singular kernel submatrix", basket)
        grad[idx] += 2.0 * la.cho_solve(la.cho_factor(G), VY)
    return grad


def _chunks(items: Sequence, parts: int) -> list:
    size = -(-len(items) // parts)
    return [items[i : i + size] for i in range(0, len(items), size)]


def gradient(
    V: TraitsLike,
    batch: Sequence["Basket"],
    n_total: int,
    reg: RegularizationWeights,
    workers: int = 1,
) -> np.ndarray:
    """
    Gradient of the objective at V estimated from a mini-batch.

    The data term is rescaled by n_total/|batch| so that the estimate is
    unbiased; the normalizer term carries n_total and the penalty is applied
    once at full strength. With ``workers > 1`` baskets are split across
    threads and the partial sums added, which changes floating-point
    summation order.
    """
    entries = trait_entries(V)
    batch = list(batch)

    grad = np.zeros_like(entries)
    if batch:
        if workers > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                partials = list(pool.map(lambda part: _data_term(entries, part), _chunks(batch, workers)))
            data = np.sum(partials, axis=0)
        else:
            data = _data_term(entries, batch)
        grad += (n_total / len(batch)) * data

    # B V = (I_M - V (I_K + V^T V)^{-1} V^T) V = V (I_K + V^T V)^{-1}
    K = entries.shape[1]
    C = np.eye(K) + entries.T @ entries
    BV = la.cho_solve(la.cho_factor(C), entries.T).T
    grad -= 2.0 * n_total * BV

    grad -= reg.alpha * reg.lam[:, None] * entries
    return grad
