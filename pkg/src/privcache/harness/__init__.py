"""Desk-scale evaluation harness: tasks, baselines, experiments, CSV output."""

from .baselines import CachelessSystem, NaiveCacheSystem
from .experiments import (
    ABLATION_CONFIGS,
    ComparisonRun,
    bfs_ablation,
    bfs_comparison,
    frequency_tables,
    rrq_comparison,
)
from .io import write_freq_csv, write_runs_csv
from .synth import (
    planted_sparse_dataset,
    single_attribute_schema,
    uniform_dataset,
    zipf_dataset,
)
from .tasks import (
    BFSClient,
    DFSClient,
    RRQClient,
    TraceEntry,
    cumulative_epsilons,
    frequency_table,
    run_bfs,
    run_clients,
    run_dfs,
    run_rrq,
)

__all__ = [
    "ABLATION_CONFIGS",
    "BFSClient",
    "CachelessSystem",
    "ComparisonRun",
    "DFSClient",
    "NaiveCacheSystem",
    "RRQClient",
    "TraceEntry",
    "bfs_ablation",
    "bfs_comparison",
    "cumulative_epsilons",
    "frequency_table",
    "frequency_tables",
    "planted_sparse_dataset",
    "run_bfs",
    "run_clients",
    "run_dfs",
    "run_rrq",
    "rrq_comparison",
    "single_attribute_schema",
    "uniform_dataset",
    "write_freq_csv",
    "write_runs_csv",
    "zipf_dataset",
]
