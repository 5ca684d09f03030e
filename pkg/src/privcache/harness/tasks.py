"""Interactive exploration tasks: BFS, DFS, and randomized range queries.

Clients are small state machines driven by the noisy answers they receive
from whichever system they query, so each system explores its own trace.
A scheduler interleaves multiple clients by sampling them with replacement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..engine import Rejected, WorkloadRequest
from ..schema import ExpectedSquaredError, RangeQuery, WorstError
from ..tree import StrategyTree

# Client alpha is alpha_s * |D| with alpha_s drawn from this grid.
ALPHA_FRACTIONS = (0.01, 0.06, 0.11, 0.16)
DEFAULT_BETA = 0.05


@dataclass
class TraceEntry:
    workload_idx: int
    epsilon: float
    mechanism: str
    accepted: bool
    client: int = 0
    queries: int = 0

    @property
    def category(self) -> str:
        """Free / MMM / RP / SE partition used by the frequency tables."""
        if not self.accepted:
            return "Rejected"
        return "Free" if self.epsilon == 0.0 else self.mechanism


class BFSClient:
    """Level-by-level drill-down into sufficiently populated ranges."""

    def __init__(self, tree: StrategyTree, threshold: float, alpha: float,
                 beta: float = DEFAULT_BETA):
        self.tree = tree
        self.threshold = threshold
        self.requirement = WorstError(alpha, beta)
        self.frontier: list = [tree.root]

    @property
    def done(self) -> bool:
        return not self.frontier

    def next_request(self) -> WorkloadRequest:
        queries = tuple(
            RangeQuery({self.tree.attr_name: n.interval}) for n in self.frontier
        )
        return WorkloadRequest(queries, self.requirement)

    def consume(self, responses: Sequence[float]) -> None:
        next_frontier = []
        for node, noisy in zip(self.frontier, responses):
            if noisy >= self.threshold and not node.is_leaf:
                next_frontier.extend(self.tree.node(c) for c in node.children)
        self.frontier = next_frontier


class DFSClient:
    """Descent toward low-count regions, with seeded random backtracking.

    Terminates on a noisy count that is positive and at most the low
    threshold. At a dead end the client backtracks a random number of steps
    and resumes with the best not-yet-tried node at that level.
    """

    def __init__(self, tree: StrategyTree, low_threshold: float, alpha: float,
                 beta: float = DEFAULT_BETA, seed: int = 0, max_steps: int = 60):
        self.tree = tree
        self.low_threshold = low_threshold
        self.requirement = WorstError(alpha, beta)
        self.rng = np.random.default_rng(seed)
        self.max_steps = max_steps
        self.steps = 0
        self.current = tree.root
        # Per visited level: children ordered by noisy count and the next
        # index to try on backtracking.
        self.path: list[tuple[list, int]] = []
        self.finished = False

    @property
    def done(self) -> bool:
        return self.finished or self.steps >= self.max_steps or self.current.is_leaf and not self.path

    def next_request(self) -> WorkloadRequest:
        queries = tuple(
            RangeQuery({self.tree.attr_name: self.tree.node(c).interval})
            for c in self.current.children
        )
        return WorkloadRequest(queries, self.requirement)

    def consume(self, responses: Sequence[float]) -> None:
        self.steps += 1
        children = [self.tree.node(c) for c in self.current.children]
        order = sorted(range(len(children)), key=lambda i: responses[i])
        ranked = [(children[i], responses[i]) for i in order]
        positive = [(n, v) for n, v in ranked if v > 0]
        if positive and positive[0][1] <= self.low_threshold:
            self.finished = True
            return
        for node, value in positive:
            if not node.is_leaf:
                self.path.append((ranked, 1))
                self.current = node
                return
        self._backtrack()

    def _backtrack(self) -> None:
        while self.path:
            steps = int(self.rng.integers(1, len(self.path) + 1))
            self.path = self.path[: len(self.path) - steps]
            if not self.path:
                break
            ranked, next_idx = self.path[-1]
            while next_idx < len(ranked):
                node, value = ranked[next_idx]
                next_idx += 1
                if value > 0 and not node.is_leaf:
                    self.path[-1] = (ranked, next_idx)
                    self.current = node
                    return
            self.path.pop()
        self.finished = True


class RRQClient:
    """Single randomized range queries with expected-squared-error targets."""

    def __init__(self, domain_size: int, count: int, seed: int,
                 mean_start: float = 500.0, sd_start: float = 10.0,
                 mean_len: float = 320.0, sd_len: float = 10.0,
                 mean_target: float = 250_000.0, sd_target: float = 25_000.0):
        self.m = domain_size
        self.count = count
        self.rng = np.random.default_rng(seed)
        self.issued = 0
        self.params = (mean_start, sd_start, mean_len, sd_len, mean_target, sd_target)

    @property
    def done(self) -> bool:
        return self.issued >= self.count

    def next_request(self) -> WorkloadRequest:
        mu_s, sd_s, mu_l, sd_l, mu_t, sd_t = self.params
        start = int(np.clip(round(self.rng.normal(mu_s, sd_s)), 0, self.m - 1))
        length = max(1, int(round(self.rng.normal(mu_l, sd_l))))
        end = min(self.m, start + length)
        target = max(1.0, float(self.rng.normal(mu_t, sd_t)))
        self.issued += 1
        return WorkloadRequest(
            (RangeQuery({"v": (start, end)}),), ExpectedSquaredError(target)
        )

    def consume(self, responses: Sequence[float]) -> None:
        pass


def run_clients(system, clients: Sequence, seed: int) -> list[TraceEntry]:
    """Interleave clients by sampling with replacement until all are done."""
    rng = np.random.default_rng(seed)
    trace: list[TraceEntry] = []
    idx = 0
    while True:
        pending = [i for i, c in enumerate(clients) if not c.done]
        if not pending:
            return trace
        who = int(rng.choice(pending))
        client = clients[who]
        request = client.next_request()
        result = system.process(request)
        if isinstance(result, Rejected):
            trace.append(TraceEntry(idx, 0.0, "rejected", False, who, len(request.queries)))
            return trace  # budget exhausted; stop the experiment run
        trace.append(TraceEntry(idx, result.epsilon, result.mechanism, True, who,
                                len(request.queries)))
        client.consume(result.responses)
        idx += 1


def run_bfs(system, tree: StrategyTree, threshold: float, alpha: float,
            beta: float = DEFAULT_BETA) -> list[TraceEntry]:
    return run_clients(system, [BFSClient(tree, threshold, alpha, beta)], seed=0)


def run_dfs(system, tree: StrategyTree, low_threshold: float, alpha: float,
            beta: float = DEFAULT_BETA, seed: int = 0) -> list[TraceEntry]:
    return run_clients(system, [DFSClient(tree, low_threshold, alpha, beta, seed=seed)], seed=0)


def run_rrq(system, domain_size: int = 1000, count: int = 50_000,
            seed: int = 0) -> list[TraceEntry]:
    return run_clients(system, [RRQClient(domain_size, count, seed)], seed=0)


@dataclass
class ClientSpec:
    """Per-client parameters drawn once per run and shared across systems."""

    kind: str
    threshold: float
    alpha: float
    beta: float
    seed: int


def draw_client_specs(kind: str, count: int, row_count: int, seed: int,
                      beta: float = DEFAULT_BETA) -> list[ClientSpec]:
    rng = np.random.default_rng(seed)
    specs = []
    for i in range(count):
        alpha = float(rng.choice(ALPHA_FRACTIONS)) * row_count
        if kind == "bfs":
            threshold = float(rng.uniform(0.05, 0.3)) * row_count
        else:
            threshold = float(rng.uniform(0.01, 0.1)) * row_count
        specs.append(ClientSpec(kind, threshold, alpha, beta, int(rng.integers(2**31))))
    return specs


def make_clients(specs: Sequence[ClientSpec], tree: StrategyTree) -> list:
    clients = []
    for spec in specs:
        if spec.kind == "bfs":
            clients.append(BFSClient(tree, spec.threshold, spec.alpha, spec.beta))
        elif spec.kind == "dfs":
            clients.append(DFSClient(tree, spec.threshold, spec.alpha, spec.beta,
                                     seed=spec.seed))
        else:
            raise ValueError(f"unknown client kind {spec.kind!r}")
    return clients


def cumulative_epsilons(trace: Sequence[TraceEntry]) -> np.ndarray:
    return np.cumsum([t.epsilon for t in trace if t.accepted])


def frequency_table(trace: Sequence[TraceEntry]) -> dict:
    table = {"Free": 0, "MMM": 0, "RP": 0, "SE": 0}
    for entry in trace:
        if entry.accepted:
            table[entry.category] = table.get(entry.category, 0) + 1
    return table
