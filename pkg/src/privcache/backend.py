"""In-memory counting store: CSV ingestion and marginal data vectors.

Stands in for the unmodified DBMS: it serves exact ground-truth counts and
nothing else. Vectors are materialized lazily per attribute set and cached.
"""

from __future__ import annotations

import csv
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .schema import DomainSchema, DomainView, SchemaError


@dataclass
class Dataset:
    """Rows encoded as domain indices, one column per schema attribute."""

    schema: DomainSchema
    rows: np.ndarray  # shape (row_count, len(schema.attributes)), dtype int64
    dropped: int = 0  # lenient-mode rows discarded at ingestion

    @property
    def row_count(self) -> int:
        return int(self.rows.shape[0])

    @staticmethod
    def from_records(schema: DomainSchema, records: Iterable[Mapping]) -> "Dataset":
        """Build from mappings of attribute name -> domain index."""
        names = schema.names
        data = []
        for rec in records:
            row = []
            for attr in schema.attributes:
                idx = int(rec[attr.name])
                if not 0 <= idx < attr.size:
                    raise SchemaError(f"index {idx} outside domain of {attr.name!r}")
                row.append(idx)
            data.append(row)
        arr = np.array(data, dtype=np.int64).reshape(len(data), len(names))
        return Dataset(schema, arr)


def ingest_csv(path: str, schema: DomainSchema, mode: str = "strict") -> Dataset:
    """Load an RFC-4180 CSV with a header row into a Dataset.

    strict: any out-of-domain or unparseable cell is an error naming the row
    and column. lenient: such rows are dropped and counted.
    """
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown ingestion mode {mode!r}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise SchemaError(f"{path}: empty file (no header row)")
        missing = [a.name for a in schema.attributes if a.name not in reader.fieldnames]
        if missing:
            raise SchemaError(f"{path}: missing columns {missing}")
        data = []
        dropped = 0
        for line_no, rec in enumerate(reader, start=2):
            row = []
            try:
                for attr in schema.attributes:
                    raw = rec.get(attr.name)
                    if raw is None:
                        raise SchemaError(f"missing cell in column {attr.name!r}")
                    row.append(attr.index_of(raw))
            except SchemaError as exc:
                if mode == "strict":
                    raise SchemaError(f"{path}:{line_no}: {exc}") from exc
                dropped += 1
                continue
            data.append(row)
    arr = np.array(data, dtype=np.int64).reshape(len(data), len(schema.attributes))
    return Dataset(schema, arr, dropped=dropped)


class VectorRegistry:
    """Lazily materialized marginal count vectors, one per sorted attribute set."""

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self._vectors: dict[tuple[str, ...], np.ndarray] = {}
        self._lock = threading.Lock()

    def view(self, attr_names: Iterable[str]) -> DomainView:
        return self.dataset.schema.view(attr_names)

    def vector(self, attr_names: Iterable[str]) -> np.ndarray:
        """Marginal counts over the sorted attribute set, row-major order."""
        key = tuple(sorted(set(attr_names)))
        with self._lock:
            cached = self._vectors.get(key)
        if cached is not None:
            return cached
        vec = materialize_vector(self.dataset, key)
        with self._lock:
            return self._vectors.setdefault(key, vec)

    def materialized_sets(self) -> list[tuple[str, ...]]:
        with self._lock:
            return sorted(self._vectors)


def materialize_vector(dataset: Dataset, attr_names: Sequence[str]) -> np.ndarray:
    """Joint marginal counts for the sorted attribute set."""
    view = dataset.schema.view(attr_names)
    names = view.names
    schema_names = dataset.schema.names
    cols = [schema_names.index(n) for n in names]
    if dataset.row_count == 0:
        return np.zeros(view.size, dtype=np.int64)
    coords = [dataset.rows[:, c] for c in cols]
    flat = np.ravel_multi_index(coords, view.sizes)
    return np.bincount(flat, minlength=view.size).astype(np.int64)
