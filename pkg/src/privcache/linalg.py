"""Matrix plumbing for 0/1 query rows over a finite domain.

Rows are kept as boolean masks; dense float matrices are materialized only
for the pseudoinverse and error computations on the mapped (bucketed) forms,
which stay small.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .schema import SchemaError

# Singular values below this fraction of the largest are treated as zero.
PINV_RCOND = 1e-10


def l1_norm(masks: Sequence[np.ndarray]) -> int:
    """Maximum column sum of the stacked 0/1 rows (max overlap depth)."""
    if len(masks) == 0:
        return 0
    total = np.zeros(masks[0].shape[0], dtype=np.int64)
    for m in masks:
        total += m
    return int(total.max())


def evaluate_rows(masks: Sequence[np.ndarray], counts: np.ndarray) -> np.ndarray:
    """Exact integer answers: one count per row."""
    if len(masks) == 0:
        return np.zeros(0, dtype=np.int64)
    if masks[0].shape[0] != counts.shape[0]:
        raise SchemaError(
            f"dimension mismatch: rows over {masks[0].shape[0]} cells, data over {counts.shape[0]}"
        )
    return np.array([int(counts[m].sum()) for m in masks], dtype=np.int64)


def pseudoinverse(matrix: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse with a fixed relative singular-value cutoff."""
    return np.linalg.pinv(matrix, rcond=PINV_RCOND)


def solve_workload(w_mapped: np.ndarray, a_mapped: np.ndarray, noisy: np.ndarray) -> np.ndarray:
    """Workload estimate W' A'+ y from noisy strategy responses."""
    if a_mapped.shape[0] != noisy.shape[0]:
        raise SchemaError("strategy responses do not match strategy rows")
    return w_mapped @ (pseudoinverse(a_mapped) @ noisy)


def reconstruction_matrix(w_mapped: np.ndarray, a_mapped: np.ndarray) -> np.ndarray:
    """W' A'+, the per-row coefficients applied to strategy responses."""
    if w_mapped.shape[1] != a_mapped.shape[1]:
        raise SchemaError("workload and strategy are over different partitions")
    return w_mapped @ pseudoinverse(a_mapped)
