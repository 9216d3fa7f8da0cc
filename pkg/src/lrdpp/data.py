"""Basket ingestion, item catalogs, train/test splits and model files."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .errors import DataError
from .kernel import TraitMatrix

logger = logging.getLogger(__name__)

PathLikeOrStr = Union[os.PathLike, str]

MODEL_MAGIC = "LRDPP1"
DEFAULT_MIN_BASKET_SIZE = 2

# A basket is a strictly increasing tuple of dense item indices.
Basket = Tuple[int, ...]


def make_basket(items: Iterable[int]) -> Basket:
    """Collapse duplicates and sort."""
    return tuple(sorted({int(i) for i in items}))


@dataclass(frozen=True)
class ItemCatalog:
    """Bijection between external item ids and dense indices in [0, M)."""

    external_ids: Tuple[str, ...]
    index_of: Mapping[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = tuple(str(i) for i in self.external_ids)
        if not ids:
            raise DataError("Item catalog must contain at least one item")
        index_of = {item_id: idx for idx, item_id in enumerate(ids)}
        if len(index_of) != len(ids):
            raise DataError("Item catalog contains duplicate ids")
        object.__setattr__(self, "external_ids", ids)
        object.__setattr__(self, "index_of", index_of)

    @property
    def M(self) -> int:
        return len(self.external_ids)

    def __len__(self) -> int:
        return len(self.external_ids)

    def index(self, item_id: str) -> int:
        try:
            return self.index_of[item_id]
        except KeyError:
            raise DataError(f"Unknown item id: {item_id}") from None

    def indices(self, item_ids: Iterable[str]) -> Basket:
        """Map external ids to a basket, reporting every unknown id at once."""
        ids = list(item_ids)
        unknown = [item_id for item_id in ids if item_id not in self.index_of]
        if unknown:
            raise DataError(f"Unknown item ids: {', '.join(unknown)}")
        return make_basket(self.index_of[item_id] for item_id in ids)

    def ids(self, basket: Iterable[int]) -> List[str]:
        return [self.external_ids[i] for i in basket]


def count_items(baskets: Sequence[Basket], M: int) -> np.ndarray:
    """C(i): the number of baskets containing item i."""
    counts = np.zeros(M, dtype=np.int64)
    for basket in baskets:
        counts[list(basket)] += 1
    return counts


@dataclass(frozen=True)
class BasketDataset:
    """Observed baskets over a shared catalog, with per-item occurrence counts."""

    baskets: Tuple[Basket, ...]
    catalog: ItemCatalog
    counts: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        baskets = tuple(make_basket(b) for b in self.baskets)
        M = self.catalog.M
        for n, basket in enumerate(baskets):
            if basket and (basket[0] < 0 or basket[-1] >= M):
                raise DataError(f"Basket {n} references an item outside the catalog of size {M}")
        counts = count_items(baskets, M)
        counts.setflags(write=False)
        object.__setattr__(self, "baskets", baskets)
        object.__setattr__(self, "counts", counts)

    @property
    def N(self) -> int:
        return len(self.baskets)

    @property
    def M(self) -> int:
        return self.catalog.M

    def __len__(self) -> int:
        return len(self.baskets)

    def sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.baskets], dtype=np.int64)


def parse_baskets(
    lines: Iterable[str],
    min_basket_size: int = DEFAULT_MIN_BASKET_SIZE,
) -> BasketDataset:
    """
    Parse comma-separated baskets, one per line.

    Duplicate ids within a line are collapsed, baskets with fewer than
    ``min_basket_size`` distinct items are dropped, and the catalog is built
    from the items of the retained baskets in order of first appearance.
    Blank lines are ignored.
    """
    raw: List[List[str]] = []
    dropped = 0
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = [token.strip() for token in line.split(",")]
        if any(not token for token in tokens):
            raise DataError(f"Line {lineno}: empty item id")
        distinct = list(dict.fromkeys(tokens))
        if len(distinct) < min_basket_size:
            dropped += 1
            continue
        raw.append(distinct)

    if not raw:
        raise DataError("no baskets")

    index_of: Dict[str, int] = {}
    for tokens in raw:
        for token in tokens:
            index_of.setdefault(token, len(index_of))
    catalog = ItemCatalog(tuple(index_of))
    baskets = tuple(make_basket(index_of[t] for t in tokens) for tokens in raw)

    logger.debug("Parsed %d baskets over %d items (%d dropped)", len(baskets), catalog.M, dropped)
    return BasketDataset(baskets, catalog)


def read_baskets(path: PathLikeOrStr, min_basket_size: int = DEFAULT_MIN_BASKET_SIZE) -> BasketDataset:
    """Read a basket file from disk."""
    path = Path(path).expanduser()
    if not path.exists():
        raise FileNotFoundError(f"Basket file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        try:
            return parse_baskets(fh, min_basket_size)
        except DataError as exc:
            raise DataError(f"{path}: {exc}") from exc


def write_baskets(dataset: BasketDataset, path: PathLikeOrStr) -> None:
    """Write baskets back out in the text format, using external ids."""
    path = Path(path).expanduser()
    with path.open("w", encoding="utf-8") as fh:
        for basket in dataset.baskets:
            fh.write(",".join(dataset.catalog.ids(basket)) + "\n")


def split(
    dataset: BasketDataset,
    train_fraction: float,
    seed: int,
) -> Tuple[BasketDataset, BasketDataset]:
    """
    Randomly partition baskets into train and test halves sharing one catalog.
    Each half keeps the original basket order and recounts its own items.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must lie strictly between 0 and 1 (got {train_fraction})")
    if dataset.N == 0:
        raise DataError("no baskets")

    rng = np.random.default_rng(seed)
    order = rng.permutation(dataset.N)
    n_train = int(round(train_fraction * dataset.N))
    if n_train == 0 or n_train == dataset.N:
        raise DataError(
            f"Splitting {dataset.N} baskets with train_fraction={train_fraction} leaves one side empty"
        )

    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    train = BasketDataset(tuple(dataset.baskets[i] for i in train_idx), dataset.catalog)
    test = BasketDataset(tuple(dataset.baskets[i] for i in test_idx), dataset.catalog)
    return train, test


def concat_datasets(named: Mapping[str, BasketDataset]) -> BasketDataset:
    """
    Join datasets with disjoint catalogs into one. Item ids are namespaced as
    ``<name>/<id>`` so identical ids from different sources stay distinct.
    """
    if not named:
        raise DataError("no baskets")
    ids: List[str] = []
    baskets: List[Basket] = []
    for name, dataset in named.items():
        offset = len(ids)
        ids.extend(f"{name}/{item_id}" for item_id in dataset.catalog.external_ids)
        baskets.extend(tuple(i + offset for i in basket) for basket in dataset.baskets)
    return BasketDataset(tuple(baskets), ItemCatalog(tuple(ids)))


def reindex(dataset: BasketDataset, catalog: ItemCatalog) -> BasketDataset:
    """Express a dataset's baskets in another catalog's indices."""
    unknown = [item_id for item_id in dataset.catalog.external_ids if item_id not in catalog.index_of]
    if unknown:
        shown = ", ".join(unknown[:10]) + (" ..." if len(unknown) > 10 else "")
        raise DataError(f"Catalog mismatch: {len(unknown)} item ids are not in the model catalog ({shown})")
    mapping = np.array([catalog.index_of[item_id] for item_id in dataset.catalog.external_ids])
    baskets = tuple(make_basket(mapping[list(b)]) for b in dataset.baskets)
    return BasketDataset(baskets, catalog)


def save_model(V: TraitMatrix, path: PathLikeOrStr) -> None:
    """
    Write a trait matrix as: magic line, M and K header lines, one catalog id
    per line, then M*K little-endian float64 values in row-major order.
    """
    if V.catalog is None:
        raise DataError("Cannot save a trait matrix without a catalog")
    path = Path(path).expanduser()
    header = "\n".join([MODEL_MAGIC, str(V.M), str(V.K), *V.catalog.external_ids]) + "\n"
    payload = np.ascontiguousarray(V.entries, dtype="<f8").tobytes()
    with path.open("wb") as fh:
        fh.write(header.encode("utf-8"))
        fh.write(payload)


def load_model(path: PathLikeOrStr) -> TraitMatrix:
    """Read a model file written by save_model, validating its shape."""
    path = Path(path).expanduser()
    if not path.exists():
        raise FileNotFoundError(f"Model file not found: {path}")
    blob = path.read_bytes()

    pos = 0
    lines: List[str] = []

    def next_line() -> str:
        nonlocal pos
        end = blob.find(b"\n", pos)
        if end < 0:
            raise DataError(f"{path}: truncated header")
        line = blob[pos:end].decode("utf-8")
        pos = end + 1
        return line

    magic = next_line()
    if magic != MODEL_MAGIC:
        raise DataError(f"{path}: unsupported model format {magic[:16]!r} (expected {MODEL_MAGIC})")
    try:
        M = int(next_line())
        K = int(next_line())
    except ValueError as exc:
        raise DataError(f"{path}: malformed M/K header") from exc
    if M < 1 or K < 1:
        raise DataError(f"{path}: invalid shape M={M}, K={K}")
    for _ in range(M):
        lines.append(next_line())

    payload = blob[pos:]
    expected = M * K * 8
    if len(payload) != expected:
        row_bytes = M * 8
        if len(payload) > 0 and len(payload) % row_bytes == 0:
            raise DataError(
                f"{path}: shape mismatch, header says {M}x{K} but payload holds {M}x{len(payload) // row_bytes}"
            )
        raise DataError(f"{path}: truncated payload ({len(payload)} of {expected} bytes)")

    entries = np.frombuffer(payload, dtype="<f8").reshape(M, K).astype(np.float64)
    return TraitMatrix(entries, ItemCatalog(tuple(lines)))


def save_counts(catalog: ItemCatalog, counts: np.ndarray, path: PathLikeOrStr) -> None:
    """Write per-item training counts as ``<id> <count>`` lines."""
    path = Path(path).expanduser()
    with path.open("w", encoding="utf-8") as fh:
        for item_id, count in zip(catalog.external_ids, counts):
            fh.write(f"{item_id} {int(count)}\n")


def load_counts(catalog: ItemCatalog, path: PathLikeOrStr) -> np.ndarray:
    """Read counts written by save_counts into the given catalog's order."""
    path = Path(path).expanduser()
    counts = np.zeros(catalog.M, dtype=np.int64)
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            item_id, _, value = line.rstrip("\n").rpartition(" ")
            try:
                counts[catalog.index(item_id)] = int(value)
            except ValueError as exc:
                raise DataError(f"{path}: line {lineno}: malformed count") from exc
    return counts
