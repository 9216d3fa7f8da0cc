"""
Conditioning a low-rank DPP on an observed basket A and scoring the next item.

With Z = I - V_A^T (V_A V_A^T)^{-1} V_A, the conditional kernel over the
remaining items is L^A = V^A (V^A)^T where V^A = V_{not A} Z, so conditioning
costs one |A| x |A| solve instead of two M x M inversions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np
import scipy.linalg as la

from .errors import ConditioningError
from .kernel import NEG_INF, TraitsLike, check_basket, gram_log_det, item_popularity, trait_entries

logger = logging.getLogger(__name__)

# Conditional mass below this fraction of the unconditioned mass is rounding noise.
MASS_RTOL = 1.0e-12


class Completion(NamedTuple):
    item: int
    probability: float


@dataclass(frozen=True)
class ConditionedModel:
    """Immutable snapshot of a DPP conditioned on ``basket``."""

    v_cond: np.ndarray
    candidates: np.ndarray
    normalizer_e1: float
    basket: tuple

    def __post_init__(self) -> None:
        self.v_cond.setflags(write=False)
        self.candidates.setflags(write=False)


def projection(V: TraitsLike, A: Sequence[int]) -> np.ndarray:
    """K x K projector onto the orthogonal complement of the row space of V_A."""
    entries = trait_entries(V)
    idx = check_basket(A, entries.shape[0])
    K = entries.shape[1]
    if idx.size == 0:
        return np.eye(K)
    VA = entries[idx]
    G = VA @ VA.T
    if idx.size > K or gram_log_det(G) == NEG_INF:
        raise ConditioningError("conditioning on zero-probability basket")
    Z = np.eye(K) - VA.T @ la.cho_solve(la.cho_factor(G), VA)
    return 0.5 * (Z + Z.T)


def condition(V: TraitsLike, A: Sequence[int]) -> ConditionedModel:
    """Project every item outside A with the basket's projector."""
    entries = trait_entries(V)
    idx = check_basket(A, entries.shape[0])
    mask = np.ones(entries.shape[0], dtype=bool)
    mask[idx] = False
    candidates = np.flatnonzero(mask)
    if candidates.size == 0:
        raise ConditioningError("no candidates: the basket already contains every catalog item")

    Z = projection(entries, idx)
    v_cond = entries[candidates] @ Z
    # trace(L^A), the first elementary symmetric polynomial of its eigenvalues
    e1 = float(np.sum(v_cond * v_cond))
    if e1 <= MASS_RTOL * float(np.sum(entries[candidates] ** 2)):
        e1 = 0.0
    return ConditionedModel(v_cond, candidates, e1, tuple(sorted(int(i) for i in idx)))


def next_item_probabilities(cm: ConditionedModel) -> np.ndarray:
    """P(b | A) = L^A_bb / e_1(eigenvalues of L^A), one entry per candidate."""
    if not cm.normalizer_e1 > 0.0:
        raise ConditioningError("no probability mass remains after conditioning")
    return item_popularity(cm.v_cond) / cm.normalizer_e1


def elementary_symmetric(values: Sequence[float], k: int) -> float:
    """
    e_k of the values by the one-pass recurrence e_j <- e_j + x * e_{j-1},
    sweeping items in ascending order.
    """
    if k < 0:
        raise ValueError(f"k must be >= 0 (got {k})")
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if k > values.size:
        return 0.0
    e = np.zeros(k + 1)
    e[0] = 1.0
    for x in values:
        e[1:] = e[1:] + x * e[:-1]
    return float(e[k])


def rank_candidates(candidates: np.ndarray, scores: np.ndarray) -> np.ndarray:
    """Order positions by score descending, ties by ascending catalog index."""
    return np.lexsort((candidates, -scores))


def complete_basket(V: TraitsLike, A: Sequence[int], top_n: int) -> List[Completion]:
    """The ``top_n`` most probable next items for basket A."""
    cm = condition(V, A)
    probs = next_item_probabilities(cm)
    order = rank_candidates(cm.candidates, probs)[: max(0, top_n)]
    return [Completion(int(cm.candidates[j]), float(probs[j])) for j in order]
