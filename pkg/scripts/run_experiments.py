"""Run the desk-scale experiments and emit runs.csv / freq.csv.

Usage:
  python scripts/run_experiments.py comparison out_dir [--runs 20] [--clients 5]
  python scripts/run_experiments.py ablation   out_dir [--runs 20] [--clients 5]
  python scripts/run_experiments.py rrq        out_dir [--count 2000]

Plot the curves afterwards with scripts/plot_results.py out_dir/runs.csv plot.png
"""

import argparse
import os

from privcache.harness import (
    bfs_ablation,
    bfs_comparison,
    frequency_tables,
    rrq_comparison,
    write_freq_csv,
    write_runs_csv,
)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("mode", choices=["comparison", "ablation", "rrq"])
    parser.add_argument("out_dir")
    parser.add_argument("--runs", type=int, default=20)
    parser.add_argument("--clients", type=int, default=5)
    parser.add_argument("--count", type=int, default=2000)
    parser.add_argument("--seed", type=int, default=2024)
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    if args.mode == "comparison":
        runs = bfs_comparison(runs=args.runs, clients=args.clients, seed=args.seed)
    elif args.mode == "ablation":
        runs = bfs_ablation(runs=args.runs, clients=args.clients, seed=args.seed)
    else:
        runs = [rrq_comparison(count=args.count, seed=args.seed)]

    systems = sorted(runs[0].traces)
    write_runs_csv(os.path.join(args.out_dir, "runs.csv"),
                   {name: [r.traces[name] for r in runs] for name in systems})
    write_freq_csv(os.path.join(args.out_dir, "freq.csv"), frequency_tables(runs))
    for name in systems:
        finals = [r.final(name) for r in runs]
        print(f"{name}: mean final cumulative epsilon {sum(finals) / len(finals):.4f}")
    print(f"wrote {args.out_dir}/runs.csv and {args.out_dir}/freq.csv")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
