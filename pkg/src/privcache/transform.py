"""Full-rank transform: remap strategy rows onto disjoint domain buckets.

The bucket set supports every processed row, grows by at most one bucket per
row when rows are tree nodes, and the mapped strategy matrix is full rank in
that case. Buckets are kept as boolean masks and ordered by first domain
index so mapped forms are deterministic.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .schema import SchemaError


def transformation_buckets(rows: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Disjoint buckets supporting every row (the transformation matrix rows)."""
    buckets: list[np.ndarray] = []
    seen: list[np.ndarray] = []
    for row in rows:
        if any(np.array_equal(row, done) for done in seen):
            continue
        seen.append(row)
        if not buckets:
            buckets = [row.copy()]
            continue
        hits = [t for t in buckets if (t & row).any()]
        if not hits:
            buckets.append(row.copy())
            continue
        kept = [t for t in buckets if not (t & row).any()]
        pieces: list[np.ndarray] = []
        for t in hits:
            inter = t & row
            pieces.append(inter)
            rest = t & ~row
            if rest.any():
                pieces.append(rest)
        covered = np.zeros_like(row)
        for t in hits:
            covered |= t & row
        remainder = row & ~covered
        if remainder.any():
            pieces.append(remainder)
        buckets = kept + pieces
    buckets.sort(key=_first_index)
    return buckets


def _first_index(mask: np.ndarray) -> int:
    return int(np.argmax(mask))


def transform_strategy(rows: Sequence[np.ndarray]) -> tuple[np.ndarray, list[np.ndarray]]:
    """Mapped strategy A' with A'[i, j] = 1 iff bucket j is inside row i."""
    buckets = transformation_buckets(rows)
    mapped = map_rows(rows, buckets)
    return mapped, buckets


def map_rows(rows: Sequence[np.ndarray], buckets: Sequence[np.ndarray]) -> np.ndarray:
    """Map 0/1 rows onto the bucket partition by containment.

    Every row must be a disjoint union of buckets (true for strategy rows by
    construction and for workload rows supported by the strategy).
    """
    mapped = np.zeros((len(rows), len(buckets)))
    for i, row in enumerate(rows):
        covered = np.zeros_like(row)
        for j, bucket in enumerate(buckets):
            inter = bucket & row
            if not inter.any():
                continue
            if not np.array_equal(inter, bucket):
                raise SchemaError("row straddles a bucket; partition does not support it")
            mapped[i, j] = 1.0
            covered |= bucket
        if not np.array_equal(covered, row):
            raise SchemaError("row not covered by the bucket partition")
    return mapped


def map_vector(buckets: Sequence[np.ndarray], counts: np.ndarray) -> np.ndarray:
    """x' = T x: per-bucket totals of the raw count vector."""
    return np.array([counts[b].sum() for b in buckets], dtype=np.float64)
