"""Low-rank DPP quantities computed from the M x K trait matrix V, with L = V V^T."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional, Sequence, Union

import numpy as np
import scipy.linalg as la
from scipy.linalg import lapack

from .errors import KernelError

if TYPE_CHECKING:
    from .data import ItemCatalog

logger = logging.getLogger(__name__)

NEG_INF = float("-inf")

# Pivots below this fraction of the largest diagonal entry count as zero.
PIVOT_RTOL = 1.0e-12


@dataclass(frozen=True)
class TraitMatrix:
    """
    Learned item trait vectors. Row i of ``entries`` is item i's K-dimensional
    trait vector; the catalog maps rows back to external item ids.
    """

    entries: np.ndarray
    catalog: Optional["ItemCatalog"] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise KernelError(f"Trait matrix must be a non-empty M x K array, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise KernelError("Trait matrix contains non-finite entries")
        if self.catalog is not None and len(self.catalog) != entries.shape[0]:
            raise KernelError(
                f"Catalog has {len(self.catalog)} items but the trait matrix has {entries.shape[0]} rows"
            )
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    @property
    def K(self) -> int:
        return self.entries.shape[1]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TraitMatrix):
            return NotImplemented
        return np.array_equal(self.entries, other.entries)

    __hash__ = None  # type: ignore[assignment]


TraitsLike = Union[TraitMatrix, np.ndarray]


def trait_entries(V: TraitsLike) -> np.ndarray:
    """Return the raw float64 M x K array behind V."""
    if isinstance(V, TraitMatrix):
        return V.entries
    arr = np.asarray(V, dtype=np.float64)
    if arr.ndim != 2:
        raise KernelError(f"Trait matrix must be two-dimensional, got shape {arr.shape}")
    return arr


def check_basket(Y: Sequence[int], M: int) -> np.ndarray:
    """Validate basket indices against a catalog of size M and return them as an array."""
    idx = np.asarray(Y, dtype=np.int64).reshape(-1)
    if idx.size and (idx.min() < 0 or idx.max() >= M):
        bad = [int(i) for i in idx if i < 0 or i >= M]
        raise KernelError(f"Item index out of range for catalog of size {M}: {bad}")
    if np.unique(idx).size != idx.size:
        raise KernelError(f"Basket contains duplicate items: {sorted(int(i) for i in idx)}")
    return idx


def gram_log_det(G: np.ndarray) -> float:
    """
    Log-determinant of a small symmetric positive semi-definite matrix via
    pivoted Cholesky. Returns NEG_INF when the matrix is singular to working
    precision.
    """
    n = G.shape[0]
    if n == 0:
        return 0.0
    scale = float(np.max(np.diag(G)))
    if not scale > 0.0:
        return NEG_INF
    c, _piv, rank, info = lapack.dpstrf(G, tol=PIVOT_RTOL * scale)
    if info < 0:
        raise KernelError(f"dpstrf rejected argument {-info}")
    if rank < n:
        return NEG_INF
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def log_det_basket(V: TraitsLike, Y: Sequence[int]) -> float:
    """log det(L_Y) = log det(V_Y V_Y^T); NEG_INF when the Gram matrix is singular."""
    entries = trait_entries(V)
    idx = check_basket(Y, entries.shape[0])
    if idx.size > entries.shape[1]:
        # rank bound: L has rank <= K
        return NEG_INF
    VY = entries[idx]
    return gram_log_det(VY @ VY.T)


def log_normalizer(V: TraitsLike) -> float:
    """log det(L + I_M), computed through the K x K identity det(I_K + V^T V)."""
    entries = trait_entries(V)
    if not np.all(np.isfinite(entries)):
        raise KernelError("Trait matrix contains non-finite entries")
    K = entries.shape[1]
    C = np.eye(K) + entries.T @ entries
    c, _lower = la.cho_factor(C)
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def dpp_log_prob(V: TraitsLike, Y: Sequence[int]) -> float:
    """log P(Y) = log det(L_Y) - log det(L + I)."""
    return log_det_basket(V, Y) - log_normalizer(V)


def item_popularity(V: TraitsLike) -> np.ndarray:
    """Squared trait-vector norms, i.e. the diagonal of L."""
    entries = trait_entries(V)
    return np.einsum("ik,ik->i", entries, entries)
