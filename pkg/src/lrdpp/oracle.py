"""
Brute-force reference implementations on dense M x M kernels.

Nothing here exploits the low-rank structure; these exist to cross-check the
fast code paths in tests and in ``lrdpp check``.
"""

from __future__ import annotations

import itertools
import logging
from typing import Callable, Dict, Sequence, Tuple

import numpy as np

from .errors import OracleError
from .kernel import TraitsLike, trait_entries

logger = logging.getLogger(__name__)

ENUMERATION_LIMIT = 20
SYMMETRY_TOL = 1.0e-12
PSD_TOL = 1.0e-8
AGREEMENT_TOL = 1.0e-8
DEFAULT_FD_STEP = 1.0e-5


def dense_kernel(V: TraitsLike) -> np.ndarray:
    """L = V V^T"""
    entries = trait_entries(V)
    return entries @ entries.T


def validate_kernel(L: np.ndarray) -> np.ndarray:
    """Check that L is a symmetric positive semi-definite square matrix."""
    L = np.asarray(L, dtype=np.float64)
    if L.ndim != 2 or L.shape[0] != L.shape[1]:
        raise OracleError(f"Kernel must be square, got shape {L.shape}")
    scale = max(1.0, float(np.max(np.abs(L)))) if L.size else 1.0
    if not np.allclose(L, L.T, rtol=0.0, atol=SYMMETRY_TOL * scale):
        raise OracleError("Kernel is not symmetric")
    if L.size and np.linalg.eigvalsh(L).min() < -PSD_TOL * scale:
        raise OracleError("Kernel is not positive semi-definite")
    return L


def _guard(M: int) -> None:
    if M > ENUMERATION_LIMIT:
        raise OracleError(f"Refusing to enumerate subsets of {M} items (limit {ENUMERATION_LIMIT})")


def _minor_det(L: np.ndarray, subset: Sequence[int]) -> float:
    if not subset:
        return 1.0
    idx = np.asarray(subset)
    return float(np.linalg.det(L[np.ix_(idx, idx)]))


def enumerate_normalizer(L: np.ndarray) -> float:
    """Sum of det(L_Y) over every subset Y, the empty set contributing 1."""
    L = validate_kernel(L)
    M = L.shape[0]
    _guard(M)
    total = 0.0
    for size in range(M + 1):
        for subset in itertools.combinations(range(M), size):
            total += _minor_det(L, subset)
    return total


def _split(L: np.ndarray, A: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    M = L.shape[0]
    A_idx = np.array(sorted(set(int(a) for a in A)), dtype=np.int64)
    if A_idx.size and (A_idx[0] < 0 or A_idx[-1] >= M):
        raise OracleError(f"Basket indices out of range for M={M}: {list(A_idx)}")
    rest = np.setdiff1d(np.arange(M), A_idx)
    return A_idx, rest


def condition_by_inversion(L: np.ndarray, A: Sequence[int]) -> np.ndarray:
    """L^A = ([(L + I_notA)^{-1}]_notA)^{-1} - I, with two M-sized inversions."""
    L = np.asarray(L, dtype=np.float64)
    A_idx, rest = _split(L, A)
    if A_idx.size == 0:
        return L.copy()
    I_rest = np.zeros_like(L)
    I_rest[rest, rest] = 1.0
    try:
        inner = np.linalg.inv(L + I_rest)
        return np.linalg.inv(inner[np.ix_(rest, rest)]) - np.eye(rest.size)
    except np.linalg.LinAlgError as exc:
        raise OracleError("Singular matrix while conditioning by inversion") from exc


def condition_by_schur(L: np.ndarray, A: Sequence[int]) -> np.ndarray:
    """L^A = L_notA - L_{notA,A} L_A^{-1} L_{A,notA}, the rank-|A| update."""
    L = np.asarray(L, dtype=np.float64)
    A_idx, rest = _split(L, A)
    if A_idx.size == 0:
        return L.copy()
    L_A = L[np.ix_(A_idx, A_idx)]
    L_rA = L[np.ix_(rest, A_idx)]
    try:
        return L[np.ix_(rest, rest)] - L_rA @ np.linalg.solve(L_A, L_rA.T)
    except np.linalg.LinAlgError as exc:
        raise OracleError("Singular L_A: cannot condition on a zero-probability basket") from exc


def condition_full_rank(L: np.ndarray, A: Sequence[int]) -> np.ndarray:
    """Condition with both full-rank formulas, insisting that they agree."""
    L = validate_kernel(L)
    A_idx, _ = _split(L, A)
    if A_idx.size and np.linalg.matrix_rank(L[np.ix_(A_idx, A_idx)], hermitian=True) < A_idx.size:
        raise OracleError("Singular L_A: cannot condition on a zero-probability basket")
    by_schur = condition_by_schur(L, A_idx)
    by_inversion = condition_by_inversion(L, A_idx)
    gap = float(np.max(np.abs(by_schur - by_inversion))) if by_schur.size else 0.0
    if gap > AGREEMENT_TOL:
        raise OracleError(f"Full-rank conditioning formulas disagree by {gap:.3e}")
    return by_schur


def brute_force_conditional(
    L: np.ndarray,
    A: Sequence[int],
    k: int,
) -> Dict[Tuple[int, ...], float]:
    """
    Conditional k-DPP over completions: for each B outside A with
    |B| = k - |A|, det(L^A_B) normalised over all such B. Keys are catalog
    indices.
    """
    L = validate_kernel(L)
    _guard(L.shape[0])
    A_idx, rest = _split(L, A)
    size = k - A_idx.size
    if size < 0:
        raise OracleError(f"k={k} is smaller than the basket size {A_idx.size}")
    LA = condition_full_rank(L, A_idx)
    table: Dict[Tuple[int, ...], float] = {}
    for positions in itertools.combinations(range(rest.size), size):
        table[tuple(int(rest[p]) for p in positions)] = _minor_det(LA, positions)
    Z = sum(table.values())
    if not Z > 0.0:
        raise OracleError("Conditional k-DPP has no probability mass")
    return {key: value / Z for key, value in table.items()}


def finite_difference_gradient(
    f: Callable[[np.ndarray], float],
    V: np.ndarray,
    step: float = DEFAULT_FD_STEP,
) -> np.ndarray:
    """Central differences (f(V + h E_ik) - f(V - h E_ik)) / 2h for every entry."""
    V = np.array(V, dtype=np.float64)
    grad = np.zeros_like(V)
    shifted = V.copy()
    for index in np.ndindex(V.shape):
        original = shifted[index]
        shifted[index] = original + step
        f_plus = f(shifted)
        shifted[index] = original - step
        f_minus = f(shifted)
        shifted[index] = original
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise OracleError(f"Objective is not finite around entry {index}")
        grad[index] = (f_plus - f_minus) / (2.0 * step)
    return grad
