"""Shared fixtures: seeded generators and baskets drawn from a known small DPP."""

import itertools
from pathlib import Path

import numpy as np
import pytest

from lrdpp.data import BasketDataset, ItemCatalog


def sample_baskets(V, n, rng, min_size=2):
    """Draw n baskets of size min_size..K with probability proportional to det(L_Y)."""
    M, K = V.shape
    L = V @ V.T
    subsets = [s for size in range(min_size, K + 1) for s in itertools.combinations(range(M), size)]
    weights = np.array([np.linalg.det(L[np.ix_(s, s)]) for s in subsets])
    weights = np.clip(weights, 0.0, None)
    weights /= weights.sum()
    picks = rng.choice(len(subsets), size=n, p=weights)
    return [subsets[i] for i in picks]


def synthetic_dataset(M=8, K=3, n=100, seed=0):
    """Return (true V, dataset) for a small DPP sampled by enumeration."""
    rng = np.random.default_rng(seed)
    V = rng.normal(size=(M, K))
    baskets = sample_baskets(V, n, rng)
    catalog = ItemCatalog(tuple(f"item{i}" for i in range(M)))
    return V, BasketDataset(tuple(baskets), catalog)


def write_basket_file(path: Path, dataset: BasketDataset) -> Path:
    path.write_text(
        "\n".join(",".join(dataset.catalog.ids(b)) for b in dataset.baskets) + "\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def synthetic():
    return synthetic_dataset()


@pytest.fixture
def make_synthetic():
    return synthetic_dataset


@pytest.fixture
def basket_file(tmp_path, synthetic):
    _, dataset = synthetic
    return write_basket_file(tmp_path / "toys.txt", dataset)
