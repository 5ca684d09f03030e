"""End-to-end engine: strategy generation, mechanism choice, budget ledger.

Per workload: build the mapped forms, estimate the budget for the matrix
mechanism, its strategy-expanded variant, and relax-privacy, answer with the
cheapest, and account the charge against the lifetime budget. Processing is
strictly serialized; everything is a deterministic function of (seed,
dataset, request history).
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence, Union

import numpy as np

from . import expander, mmm, proactive, relax
from .backend import Dataset, VectorRegistry, ingest_csv
from .cache import CacheRegistry
from .calibration import MCConfig, derive_seed
from .linalg import l1_norm
from .schema import (
    AccuracyRequirement,
    DomainSchema,
    RangeQuery,
    RowKey,
    SchemaError,
    Workload,
    requirement_from_json,
)
from .tree import CombinedTree, StrategyTree, generate_strategy, row_depth
from .transform import map_rows, transform_strategy


@dataclass
class EngineConfig:
    total_budget: float = 1.0
    seed: int = 0
    k_arity: int = 2
    mc_samples: int = 10_000
    phi: float = 1e-4
    se_limit: int = expander.DEFAULT_EXPANSION_LIMIT
    enable_se: bool = True
    enable_pq: bool = True
    enable_rp: bool = True
    dataset_path: Optional[str] = None
    schema_path: Optional[str] = None

    @staticmethod
    def from_json(path: str) -> "EngineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        known = {f for f in EngineConfig.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return EngineConfig(**doc)


@dataclass
class LedgerRecord:
    workload_id: int
    mechanism: str
    epsilon: float
    accepted: bool


class BudgetLedger:
    """Total budget, consumed budget, and the per-workload charge log."""

    def __init__(self, total: float):
        if total < 0:
            raise ValueError("total budget must be non-negative")
        self.total = float(total)
        self.consumed = 0.0
        self.records: list[LedgerRecord] = []

    @property
    def remaining(self) -> float:
        return self.total - self.consumed

    def would_exceed(self, epsilon: float) -> bool:
        return epsilon + self.consumed >= self.total

    def charge(self, workload_id: int, mechanism: str, epsilon: float) -> None:
        if epsilon < 0:
            raise ValueError("charges must be non-negative")
        self.consumed += epsilon
        assert self.consumed <= self.total, "ledger overran the total budget"
        self.records.append(LedgerRecord(workload_id, mechanism, float(epsilon), True))

    def log_rejection(self, workload_id: int, mechanism: str, epsilon: float) -> None:
        self.records.append(LedgerRecord(workload_id, mechanism, float(epsilon), False))

    def snapshot(self) -> dict:
        return {
            "total": self.total,
            "consumed": self.consumed,
            "records": [asdict(r) for r in self.records],
        }


@dataclass
class WorkloadRequest:
    queries: Sequence[RangeQuery]
    requirement: AccuracyRequirement
    client: Optional[str] = None

    def workload(self) -> Workload:
        return Workload(tuple(self.queries))

    @staticmethod
    def from_json(doc: dict) -> "WorkloadRequest":
        queries = []
        for i, q in enumerate(doc.get("queries", [])):
            intervals = {}
            for attr, bounds in q.items():
                lo, hi = bounds[0], bounds[1]
                if lo != int(lo) or hi != int(hi):
                    raise SchemaError(f"query {i}: bounds on {attr!r} must be integers")
                lo, hi = int(lo), int(hi)
                if lo >= hi:
                    raise SchemaError(f"query {i}: interval [{lo}, {hi}) on {attr!r} is empty")
                intervals[attr] = (lo, hi)
            if not intervals:
                raise SchemaError(f"query {i}: no intervals")
            queries.append(RangeQuery(intervals))
        if not queries:
            raise SchemaError("workload has no queries")
        return WorkloadRequest(tuple(queries), requirement_from_json(doc["accuracy"]),
                               client=doc.get("client"))


@dataclass
class Answered:
    responses: np.ndarray
    epsilon: float
    mechanism: str
    free_rows: int
    paid_rows: int
    timestamp: int
    # plan summary: the budget each mechanism estimated for this workload
    estimates: dict = field(default_factory=dict)


@dataclass
class Rejected:
    required_epsilon: float
    remaining_budget: float


_MECHANISM_ORDER = {"MMM": 0, "SE": 1, "RP": 2}


class Engine:
    """Serialized query-answering loop over one dataset and one ledger."""

    def __init__(self, schema: DomainSchema, dataset: Dataset, config: EngineConfig):
        self.schema = schema
        self.config = config
        self.registry = VectorRegistry(dataset)
        self.caches = CacheRegistry()
        self.ledger = BudgetLedger(config.total_budget)
        self.trees = {
            a.name: StrategyTree(a.name, a.size, config.k_arity) for a in schema.attributes
        }
        self.seed = config.seed
        self.workload_count = 0
        self._lock = threading.Lock()
        self._mask_cache: dict = {}

    @staticmethod
    def from_config(config: EngineConfig) -> "Engine":
        if not config.schema_path or not config.dataset_path:
            raise ValueError("config needs schema_path and dataset_path")
        schema = DomainSchema.from_json(config.schema_path)
        dataset = ingest_csv(config.dataset_path, schema)
        return Engine(schema, dataset, config)

    # -- plumbing ----------------------------------------------------------

    def _mc_config(self) -> MCConfig:
        return MCConfig(sample_count=self.config.mc_samples, seed=self.seed)

    def _mask(self, attrs: tuple, key: RowKey) -> np.ndarray:
        cached = self._mask_cache.get((attrs, key))
        if cached is None:
            cached = self.schema.view(attrs).mask(key)
            self._mask_cache[(attrs, key)] = cached
        return cached

    def _exact_counts(self, attrs: tuple, keys: Sequence[RowKey]) -> dict:
        vector = self.registry.vector(attrs)
        return {k: int(vector[self._mask(attrs, k)].sum()) for k in keys}

    def reset(self, seed: Optional[int] = None, total_budget: Optional[float] = None) -> None:
        """Fresh ledger, empty caches, deterministic RNG streams."""
        with self._lock:
            if seed is not None:
                self.seed = seed
                self.config.seed = seed
            if total_budget is not None:
                self.config.total_budget = total_budget
            self.caches.clear()
            self.ledger = BudgetLedger(self.config.total_budget)
            self.workload_count = 0

    # -- Algorithm: one workload ------------------------------------------

    def process(self, request: WorkloadRequest) -> Union[Answered, Rejected]:
        with self._lock:
            return self._process_locked(request)

    def _process_locked(self, request: WorkloadRequest) -> Union[Answered, Rejected]:
        workload = request.workload()
        attrs = workload.attr_names
        view = self.schema.view(attrs)
        workload_keys = workload.keys(view)
        wl_id = self.workload_count
        self.workload_count += 1

        row_keys = generate_strategy(workload_keys, self.trees, view)
        row_masks = [self._mask(attrs, k) for k in row_keys]
        a_mapped, buckets = transform_strategy(row_masks)
        w_mapped = map_rows([self._mask(attrs, k) for k in workload_keys], buckets)

        cache = self.caches.cache(attrs)
        snapshot = cache.valid_entries()
        mc = self._mc_config()

        plan_mmm = mmm.estimate_privacy_budget(
            snapshot, row_keys, row_masks, a_mapped, w_mapped, request.requirement,
            phi=self.config.phi, config=mc, seed_material=self.seed,
        )

        # Free workloads are answered from cache outright; no other module
        # can beat a zero charge and nothing needs the budget check.
        if plan_mmm.epsilon == 0.0:
            return self._answer(wl_id, attrs, view, cache, plan_mmm, {"MMM": 0.0})

        candidates: list = [plan_mmm]
        if self.config.enable_se:
            expanded = expander.generate_expanded_strategy(
                row_keys, snapshot, plan_mmm.b_paid,
                mask_for=lambda k: self._mask(attrs, k),
                depth_for=lambda k: row_depth(k, self.trees, view),
                limit=self.config.se_limit,
            )
            if len(expanded) > len(row_keys):
                se_masks = [self._mask(attrs, k) for k in expanded]
                a_se, buckets_se = transform_strategy(se_masks)
                w_se = map_rows([self._mask(attrs, k) for k in workload_keys], buckets_se)
                candidates.append(
                    mmm.estimate_privacy_budget(
                        snapshot, expanded, se_masks, a_se, w_se, request.requirement,
                        phi=self.config.phi, config=mc, seed_material=self.seed,
                        mechanism="SE", mark_keys=row_keys,
                    )
                )
        if self.config.enable_rp:
            plan_rp = relax.estimate_privacy_budget(
                cache, row_keys, row_masks, a_mapped, w_mapped, request.requirement,
                mask_for=lambda k: self._mask(attrs, k),
                phi=self.config.phi, config=mc, seed_material=self.seed,
            )
            if plan_rp is not None:
                candidates.append(plan_rp)

        best = min(candidates, key=lambda p: (p.epsilon, _MECHANISM_ORDER[p.mechanism]))
        estimates = {p.mechanism: p.epsilon for p in candidates}
        assert best.epsilon == min(estimates.values()), "choice must be the argmin"

        if self.ledger.would_exceed(best.epsilon):
            self.ledger.log_rejection(wl_id, best.mechanism, best.epsilon)
            return Rejected(best.epsilon, self.ledger.remaining)

        return self._answer(wl_id, attrs, view, cache, best, estimates)

    def _answer(self, wl_id, attrs, view, cache, plan, estimates) -> Answered:
        rng = np.random.default_rng(derive_seed(self.seed, b"answer", attrs, wl_id))
        if isinstance(plan, relax.RPPlan):
            counts = self._exact_counts(attrs, plan.group_keys) if not plan.free else {}
            responses, epsilon = relax.answer_workload(cache, plan, counts, rng)
            free_rows, paid_rows = (len(plan.row_keys), 0) if plan.free else (0, len(plan.row_keys))
        else:
            pq_keys: list = []
            if self.config.enable_pq and plan.paid_keys:
                combined = CombinedTree(self.trees, view, plan.mark_keys)
                pq_keys = proactive.search_proactive_nodes(
                    combined, plan.mark_keys, plan.paid_keys,
                    cached_keys=list(cache.valid_entries()), budget=plan.paid_norm,
                )
                union = [self._mask(attrs, k) for k in list(plan.paid_keys) + pq_keys]
                assert l1_norm(union) == plan.paid_norm, "proactive rows changed the paid norm"
            counts = self._exact_counts(attrs, list(plan.paid_keys) + pq_keys)
            responses, epsilon = mmm.answer_workload(cache, plan, counts, rng, pq_keys)
            free_rows, paid_rows = plan.free_count, plan.paid_count
        self.ledger.charge(wl_id, plan.mechanism, epsilon)
        return Answered(responses, epsilon, plan.mechanism, free_rows, paid_rows, wl_id,
                        estimates)

    # -- introspection for the service layer -------------------------------

    def budget_view(self) -> dict:
        return {
            "total": self.ledger.total,
            "consumed": self.ledger.consumed,
            "remaining": self.ledger.remaining,
            "history": [
                {"id": r.workload_id, "mechanism": r.mechanism, "epsilon": r.epsilon,
                 "accepted": r.accepted}
                for r in self.ledger.records
            ],
        }

    def tree_export(self, attrs: Sequence[str]) -> list[dict]:
        nodes = []
        for name in sorted(set(attrs)):
            if name not in self.trees:
                raise SchemaError(f"unknown attribute {name!r}")
            nodes.extend(self.trees[name].export_nodes())
        return nodes

    def cache_stats(self, attrs: Sequence[str]) -> dict:
        for name in sorted(set(attrs)):
            self.schema.attribute(name)
        cache = self.caches.existing(attrs)
        if cache is None:
            return {"entries": 0, "by_timestamp": {}, "best_scale": None}
        return cache.stats()

    def save_state(self, path: str) -> None:
        state = {
            "version": 1,
            "seed": self.seed,
            "workload_count": self.workload_count,
            "ledger": self.ledger.snapshot(),
            "caches": self.caches.snapshot(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(state, fh)

    def load_state(self, path: str) -> None:
        with open(path, "r", encoding="utf-8") as fh:
            state = json.load(fh)
        if state.get("version") != 1:
            raise ValueError("unsupported engine state version")
        with self._lock:
            self.seed = state["seed"]
            self.workload_count = state["workload_count"]
            self.caches = CacheRegistry.from_snapshot(state["caches"])
            ledger = BudgetLedger(state["ledger"]["total"])
            for rec in state["ledger"]["records"]:
                if rec["accepted"]:
                    ledger.charge(rec["workload_id"], rec["mechanism"], rec["epsilon"])
                else:
                    ledger.log_rejection(rec["workload_id"], rec["mechanism"], rec["epsilon"])
            self.ledger = ledger
