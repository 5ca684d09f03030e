"""CSV outputs for experiment runs."""

from __future__ import annotations

import csv
from typing import Mapping, Sequence

from .tasks import TraceEntry


def write_runs_csv(path: str, runs: Mapping[str, Sequence[Sequence[TraceEntry]]]) -> None:
    """runs.csv: (run, workload_idx, system, epsilon, cum_epsilon, mechanism)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["run", "workload_idx", "system", "epsilon", "cum_epsilon", "mechanism"])
        for system, traces in runs.items():
            for run_idx, trace in enumerate(traces):
                cum = 0.0
                for entry in trace:
                    if entry.accepted:
                        cum += entry.epsilon
                    writer.writerow([
                        run_idx, entry.workload_idx, system,
                        f"{entry.epsilon:.8f}", f"{cum:.8f}", entry.category,
                    ])


def write_freq_csv(path: str, tables: Mapping[str, Mapping[str, int]]) -> None:
    """freq.csv: (system, Free, MMM, RP, SE)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["system", "Free", "MMM", "RP", "SE"])
        for system, table in tables.items():
            writer.writerow([system] + [table.get(k, 0) for k in ("Free", "MMM", "RP", "SE")])
