"""k-ary range decomposition trees and workload-to-strategy generation.

The global strategy over an attribute is a complete k-ary tree of range
nodes; every strategy row any mechanism ever perturbs is a node of it.
Multi-attribute strategies are cross products of per-attribute nodes, and
a per-workload combined tree hosts them for proactive querying.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .schema import DomainView, Interval, RowKey, SchemaError


@dataclass
class TreeNode:
    """One range node of a strategy tree."""

    id: int
    lo: int
    hi: int
    depth: int
    parent: Optional[int] = None
    children: list = field(default_factory=list)

    @property
    def interval(self) -> Interval:
        return (self.lo, self.hi)

    @property
    def size(self) -> int:
        return self.hi - self.lo

    @property
    def is_leaf(self) -> bool:
        return not self.children


class StrategyTree:
    """Complete k-ary tree over one attribute's domain [0, size).

    Domains whose size is not a power of k split children as evenly as
    possible with the larger shares on the left; every leaf is a unit range.
    """

    def __init__(self, attr_name: str, size: int, k: int):
        if k < 2:
            raise SchemaError(f"tree arity must be >= 2, got {k}")
        if size < 1:
            raise SchemaError("domain must be non-empty")
        self.attr_name = attr_name
        self.size = size
        self.k = k
        self.nodes: list[TreeNode] = []
        self._by_interval: dict[Interval, TreeNode] = {}
        self.root = self._build(0, size, 0, None)

    def _build(self, lo: int, hi: int, depth: int, parent: Optional[int]) -> TreeNode:
        node = TreeNode(len(self.nodes), lo, hi, depth, parent)
        self.nodes.append(node)
        self._by_interval[(lo, hi)] = node
        size = hi - lo
        if size > 1:
            shares = min(self.k, size)
            base, extra = divmod(size, shares)
            start = lo
            for i in range(shares):
                width = base + (1 if i < extra else 0)
                child = self._build(start, start + width, depth + 1, node.id)
                node.children.append(child.id)
                start += width
        return node

    @property
    def height(self) -> int:
        """Number of levels (so the L1 norm of the full tree)."""
        return 1 + max(n.depth for n in self.nodes)

    def node(self, node_id: int) -> TreeNode:
        return self.nodes[node_id]

    def node_for(self, interval: Interval) -> Optional[TreeNode]:
        return self._by_interval.get(interval)

    def decompose(self, lo: int, hi: int, node: Optional[TreeNode] = None) -> list[TreeNode]:
        """Minimal set of tree nodes whose disjoint union is [lo, hi)."""
        if node is None:
            node = self.root
            if not (node.lo <= lo < hi <= node.hi):
                raise SchemaError(
                    f"range [{lo}, {hi}) outside tree domain [{node.lo}, {node.hi})"
                )
        if (lo, hi) == node.interval:
            return [node]
        out: list[TreeNode] = []
        for cid in node.children:
            child = self.nodes[cid]
            olo, ohi = max(lo, child.lo), min(hi, child.hi)
            if olo < ohi:
                out.extend(self.decompose(olo, ohi, child))
        return out

    def export_nodes(self) -> list[dict]:
        """JSON-friendly node list for the UI."""
        return [
            {
                "id": n.id,
                "range": {self.attr_name: [n.lo, n.hi]},
                "parent": n.parent,
                "children": list(n.children),
            }
            for n in self.nodes
        ]


def generate_strategy(
    workload_keys: Sequence[RowKey],
    trees: Mapping[str, StrategyTree],
    view: DomainView,
) -> list[RowKey]:
    """Instant strategy: union of per-query decompositions, first-seen order.

    Single-interval queries decompose on their attribute's tree; marginals
    over several attributes decompose per attribute and take the cross
    product of the node sets. Duplicate rows across queries are merged.
    """
    seen: set[RowKey] = set()
    ordered: list[RowKey] = []
    for key in workload_keys:
        for row in decompose_marginal(key, trees, view):
            if row not in seen:
                seen.add(row)
                ordered.append(row)
    return ordered


def decompose_marginal(
    key: RowKey, trees: Mapping[str, StrategyTree], view: DomainView
) -> list[RowKey]:
    """Cross product of the per-attribute minimal decompositions of one marginal."""
    view.validate_key(key)
    per_attr: list[list[Interval]] = []
    for attr, (lo, hi) in zip(view.attributes, key):
        nodes = trees[attr.name].decompose(lo, hi)
        per_attr.append([n.interval for n in nodes])
    rows: list[RowKey] = [()]
    for intervals in per_attr:
        rows = [r + (iv,) for r in rows for iv in intervals]
    return rows


def row_depth(key: RowKey, trees: Mapping[str, StrategyTree], view: DomainView) -> int:
    """Sum of per-attribute node depths; used for parent-first tie-breaks."""
    total = 0
    for attr, interval in zip(view.attributes, key):
        node = trees[attr.name].node_for(interval)
        if node is None:
            raise SchemaError(f"interval {interval} on {attr.name!r} is not a tree node")
        total += node.depth
    return total


@dataclass
class CombinedNode:
    """Node of the per-workload combined tree over an attribute set."""

    key: RowKey
    children: list = field(default_factory=list)


class CombinedTree:
    """Strategy tree for a multi-attribute workload.

    Per-attribute trees are chained in ascending order of the granularity the
    current strategy needs: the next attribute's tree is attached under the
    frontier (needed-depth) nodes of the previous one, and the last attribute
    keeps its full tree. For a single attribute this is just that tree.
    """

    def __init__(
        self,
        trees: Mapping[str, StrategyTree],
        view: DomainView,
        strategy_keys: Sequence[RowKey],
    ):
        self.view = view
        self._trees = [trees[a.name] for a in view.attributes]
        depths = self._needed_depths(strategy_keys)
        order = sorted(range(len(self._trees)), key=lambda i: (depths[i], i))
        # Last attribute in the chain keeps its full tree.
        limits = {i: depths[i] for i in order[:-1]}
        limits[order[-1]] = self._trees[order[-1]].height - 1
        self._order = order
        self._limits = limits
        self.root = self._expand(0, self.view.full_key())

    def _needed_depths(self, strategy_keys: Sequence[RowKey]) -> list[int]:
        depths = [0] * len(self._trees)
        for key in strategy_keys:
            for i, interval in enumerate(key):
                node = self._trees[i].node_for(interval)
                if node is None:
                    raise SchemaError(
                        f"row interval {interval} is not a node of the "
                        f"{self.view.attributes[i].name!r} tree"
                    )
                depths[i] = max(depths[i], node.depth)
        return depths

    def _expand(self, chain_pos: int, key: RowKey, tree_node: Optional[TreeNode] = None) -> CombinedNode:
        attr_idx = self._order[chain_pos]
        tree = self._trees[attr_idx]
        if tree_node is None:
            tree_node = tree.root
        node = CombinedNode(key)
        at_frontier = tree_node.is_leaf or tree_node.depth >= self._limits[attr_idx]
        if not at_frontier:
            for cid in tree_node.children:
                child = tree.node(cid)
                child_key = _replace(key, attr_idx, child.interval)
                node.children.append(self._expand(chain_pos, child_key, child))
        else:
            nxt = chain_pos + 1
            # Skip unit-domain attributes: their root is already the frontier.
            while nxt < len(self._order) and self._trees[self._order[nxt]].root.is_leaf:
                nxt += 1
            if nxt < len(self._order):
                next_idx = self._order[nxt]
                next_tree = self._trees[next_idx]
                for cid in next_tree.root.children:
                    child = next_tree.node(cid)
                    child_key = _replace(key, next_idx, child.interval)
                    node.children.append(self._expand(nxt, child_key, child))
        return node

    def cover(self, key: RowKey) -> list[CombinedNode]:
        """Disjoint set of combined nodes whose union is the given row."""
        return self._cover(self.root, key)

    def _cover(self, node: CombinedNode, key: RowKey) -> list[CombinedNode]:
        if _contains(key, node.key):
            return [node]
        out: list[CombinedNode] = []
        for child in node.children:
            if _intersects(child.key, key):
                out.extend(self._cover(child, key))
        return out


def _replace(key: RowKey, idx: int, interval: Interval) -> RowKey:
    return key[:idx] + (interval,) + key[idx + 1 :]


def _contains(outer: RowKey, inner: RowKey) -> bool:
    return all(olo <= ilo and ihi <= ohi for (olo, ohi), (ilo, ihi) in zip(outer, inner))


def _intersects(a: RowKey, b: RowKey) -> bool:
    return all(max(alo, blo) < min(ahi, bhi) for (alo, ahi), (blo, bhi) in zip(a, b))
