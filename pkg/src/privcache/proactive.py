"""Proactive querying: fill the cache at zero marginal budget.

Extra uncached tree nodes are perturbed together with the paid strategy at
the same scale. The selection keeps the L1 norm of (paid rows + proactive
rows) equal to the paid norm, so the Laplace release costs exactly the paid
budget. Nodes of the whole instant strategy (free rows included) count
against the path budget, which keeps the selection conservative and matches
the reference behaviour on hierarchical strategies.
"""

from __future__ import annotations

from collections import Counter
from typing import Sequence

from .schema import RowKey
from .tree import CombinedNode, CombinedTree


def compute_subtree_norms(tree: CombinedTree, marked: Sequence[RowKey]) -> dict[RowKey, int]:
    """Subtree norm per node: marked nodes on the heaviest node-to-leaf path."""
    marks = _mark_counts(tree, marked)
    norms: dict[RowKey, int] = {}

    def visit(node: CombinedNode) -> int:
        best_child = max((visit(child) for child in node.children), default=0)
        norms[node.key] = marks.get(node.key, 0) + best_child
        return norms[node.key]

    visit(tree.root)
    return norms


def search_proactive_nodes(
    tree: CombinedTree,
    strategy_keys: Sequence[RowKey],
    paid_keys: Sequence[RowKey],
    cached_keys: Sequence[RowKey],
    budget: int,
) -> list[RowKey]:
    """Top-down selection of uncached nodes to fetch at the paid scale.

    budget is the L1 norm of the paid rows; the remaining counter r is
    decremented per marked or selected node along each path, and a node is
    selected only when its subtree norm stays below r.
    """
    marks = _mark_counts(tree, strategy_keys)
    cached = set(cached_keys)
    norms = compute_subtree_norms(tree, strategy_keys)
    selected: list[RowKey] = []

    def visit(node: CombinedNode, r: int) -> None:
        hits = marks.get(node.key, 0)
        if hits:
            r -= hits
        elif node.key not in cached and norms[node.key] < r:
            selected.append(node.key)
            r -= 1
        if r > 0:
            for child in node.children:
                visit(child, r)

    if budget > 0:
        visit(tree.root, budget)
    paid = set(paid_keys)
    return [k for k in selected if k not in paid]


def _mark_counts(tree: CombinedTree, rows: Sequence[RowKey]) -> Counter:
    """Covering-node marks per row, with multiplicity.

    Rows that are tree nodes mark themselves. A row finer than the tree's
    chain order allows is marked through its disjoint covering pieces; any
    root-to-leaf path then crosses exactly one marked piece per row it
    intersects, preserving the per-path counts the budget argument needs.
    Shared pieces keep one count per covered row.
    """
    marks: Counter = Counter()
    for row in rows:
        pieces = tree.cover(row)
        if not pieces:
            raise ValueError(f"row {row} not representable on the combined tree")
        for piece in pieces:
            marks[piece.key] += 1
    return marks
