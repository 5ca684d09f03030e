"""Strategy expander: graft accurate cached rows onto the instant strategy.

Extra cached rows that overlap the strategy add consistency constraints the
pseudoinverse can exploit, which can shrink the paid budget. Candidates are
taken in ascending order of cached scale (shallower nodes first on ties,
since parent constraints drive the gain), stop at the paid scale or the
expansion limit, and the engine keeps the expanded strategy only when its
estimated budget actually wins.
"""

from __future__ import annotations

from typing import Callable, Mapping, Sequence

import numpy as np

from .cache import CacheEntry
from .schema import RowKey

DEFAULT_EXPANSION_LIMIT = 16


def generate_expanded_strategy(
    row_keys: Sequence[RowKey],
    snapshot: Mapping[RowKey, CacheEntry],
    b_paid: float,
    mask_for: Callable[[RowKey], np.ndarray],
    depth_for: Callable[[RowKey], int],
    limit: int = DEFAULT_EXPANSION_LIMIT,
) -> list[RowKey]:
    """Expanded row list: the original rows plus selected cached rows.

    A cached row qualifies while the expansion stays within `limit` added
    rows, its scale does not exceed b_paid, and it overlaps at least one
    original row (on tree nodes: is an ancestor or descendant of one).
    """
    if limit < 0:
        raise ValueError("expansion limit must be non-negative")
    base = list(row_keys)
    base_set = set(base)
    base_masks = [mask_for(k) for k in base]
    candidates = sorted(
        (e for k, e in snapshot.items() if k not in base_set),
        key=lambda e: (e.b, depth_for(e.key), e.key),
    )
    expanded = list(base)
    for entry in candidates:
        if len(expanded) >= len(base) + limit or entry.b > b_paid:
            break
        mask = mask_for(entry.key)
        if any((mask & bm).any() for bm in base_masks):
            expanded.append(entry.key)
    return expanded
