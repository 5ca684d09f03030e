"""Seeded synthetic datasets standing in for the real exploration corpora."""

from __future__ import annotations

import numpy as np

from ..backend import Dataset
from ..schema import Attribute, DomainSchema


def single_attribute_schema(size: int, name: str = "v") -> DomainSchema:
    return DomainSchema((Attribute(name, "int_range", size),))


def uniform_dataset(schema: DomainSchema, n_rows: int, seed: int) -> Dataset:
    rng = np.random.default_rng(seed)
    cols = [rng.integers(0, a.size, n_rows) for a in schema.attributes]
    return Dataset(schema, np.stack(cols, axis=1).astype(np.int64))


def zipf_dataset(schema: DomainSchema, n_rows: int, seed: int, exponent: float = 1.1) -> Dataset:
    """Skewed counts: cell probability proportional to rank^-exponent."""
    rng = np.random.default_rng(seed)
    cols = []
    for a in schema.attributes:
        weights = (np.arange(1, a.size + 1, dtype=np.float64)) ** (-exponent)
        weights /= weights.sum()
        cols.append(rng.choice(a.size, size=n_rows, p=weights))
    return Dataset(schema, np.stack(cols, axis=1).astype(np.int64))


def planted_sparse_dataset(
    schema: DomainSchema, n_rows: int, seed: int, sparse_frac: float = 0.25
) -> Dataset:
    """Uniform data with one contiguous near-empty region per attribute."""
    rng = np.random.default_rng(seed)
    cols = []
    for a in schema.attributes:
        width = max(1, int(a.size * sparse_frac))
        start = int(rng.integers(0, a.size - width + 1))
        weights = np.ones(a.size)
        weights[start : start + width] = 0.01
        weights /= weights.sum()
        cols.append(rng.choice(a.size, size=n_rows, p=weights))
    return Dataset(schema, np.stack(cols, axis=1).astype(np.int64))
