"""Desk-scale replications: paired-system comparisons and the ablation study.

Each run draws one synthetic dataset and one set of client parameters, then
plays the same clients against each system independently; traces diverge
where systems answer with different noise, which is the point of the
comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..calibration import derive_seed
from ..engine import Engine, EngineConfig
from .baselines import CachelessSystem, NaiveCacheSystem
from .synth import single_attribute_schema, zipf_dataset
from .tasks import (
    RRQClient,
    TraceEntry,
    cumulative_epsilons,
    draw_client_specs,
    frequency_table,
    make_clients,
    run_clients,
)

# Large enough that experiment traces never hit the budget cap; the runs
# compare cumulative spend, not rejection behaviour.
EXPERIMENT_BUDGET = 1e9
EXPERIMENT_MC_SAMPLES = 2000


def _engine(schema, dataset, seed, **overrides) -> Engine:
    cfg = EngineConfig(
        total_budget=EXPERIMENT_BUDGET, seed=seed, mc_samples=EXPERIMENT_MC_SAMPLES
    )
    for key, value in overrides.items():
        setattr(cfg, key, value)
    return Engine(schema, dataset, cfg)


@dataclass
class ComparisonRun:
    traces: dict = field(default_factory=dict)  # system name -> list[TraceEntry]

    def cumulative(self, system: str) -> np.ndarray:
        return cumulative_epsilons(self.traces[system])

    def final(self, system: str) -> float:
        cum = self.cumulative(system)
        return float(cum[-1]) if len(cum) else 0.0


def bfs_comparison(
    runs: int = 20,
    clients: int = 5,
    domain: int = 64,
    rows: int = 2000,
    seed: int = 2024,
    systems: Sequence[str] = ("engine", "cacheless"),
) -> list[ComparisonRun]:
    """Multi-client BFS on seeded Zipf data, one ComparisonRun per seed."""
    schema = single_attribute_schema(domain)
    out = []
    for r in range(runs):
        data_seed = derive_seed(seed, b"data", r)
        run_seed = derive_seed(seed, b"run", r) % (2**31)
        dataset = zipf_dataset(schema, rows, data_seed)
        specs = draw_client_specs("bfs", clients, rows, run_seed)
        run = ComparisonRun()
        for system_name in systems:
            engine = _engine(schema, dataset, run_seed)
            system = _wrap(system_name, engine)
            tree = engine.trees[schema.attributes[0].name]
            run.traces[system_name] = run_clients(system, make_clients(specs, tree), run_seed)
        out.append(run)
    return out


def rrq_comparison(
    count: int = 2000,
    domain: int = 1000,
    rows: int = 20_000,
    seed: int = 77,
    systems: Sequence[str] = ("engine", "naive_cache"),
) -> ComparisonRun:
    """Randomized range queries against the engine and a baseline."""
    schema = single_attribute_schema(domain)
    dataset = zipf_dataset(schema, rows, derive_seed(seed, b"data"))
    run_seed = derive_seed(seed, b"run") % (2**31)
    run = ComparisonRun()
    for system_name in systems:
        engine = _engine(schema, dataset, run_seed)
        system = _wrap(system_name, engine)
        client = RRQClient(domain, count, run_seed)
        run.traces[system_name] = run_clients(system, [client], run_seed)
    return run


ABLATION_CONFIGS = {
    "all_on": {},
    "se_off": {"enable_se": False},
    "rp_off": {"enable_rp": False},
    "pq_off": {"enable_pq": False},
}


def bfs_ablation(
    runs: int = 20,
    clients: int = 5,
    domain: int = 64,
    rows: int = 2000,
    seed: int = 4242,
    configs: Optional[dict] = None,
) -> list[ComparisonRun]:
    """BFS with single modules disabled, paired seeds across configurations."""
    configs = ABLATION_CONFIGS if configs is None else configs
    schema = single_attribute_schema(domain)
    out = []
    for r in range(runs):
        data_seed = derive_seed(seed, b"data", r)
        run_seed = derive_seed(seed, b"run", r) % (2**31)
        dataset = zipf_dataset(schema, rows, data_seed)
        specs = draw_client_specs("bfs", clients, rows, run_seed)
        run = ComparisonRun()
        for name, overrides in configs.items():
            engine = _engine(schema, dataset, run_seed, **overrides)
            tree = engine.trees[schema.attributes[0].name]
            run.traces[name] = run_clients(engine, make_clients(specs, tree), run_seed)
        out.append(run)
    return out


def frequency_tables(runs: Sequence[ComparisonRun]) -> dict:
    tables: dict = {}
    for run in runs:
        for system, trace in run.traces.items():
            table = tables.setdefault(system, {"Free": 0, "MMM": 0, "RP": 0, "SE": 0})
            for name, count in frequency_table(trace).items():
                table[name] = table.get(name, 0) + count
    return tables


def _wrap(system_name: str, engine: Engine):
    if system_name == "engine":
        return engine
    if system_name == "cacheless":
        return CachelessSystem(engine)
    if system_name == "naive_cache":
        return NaiveCacheSystem(engine)
    raise ValueError(f"unknown system {system_name!r}")
