"""Plot cumulative-budget curves from a harness runs.csv.

Usage: python scripts/plot_results.py runs.csv out.png
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    runs_csv, out_png = sys.argv[1], sys.argv[2]

    series = defaultdict(lambda: defaultdict(list))  # system -> run -> cum curve
    with open(runs_csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            series[row["system"]][int(row["run"])].append(float(row["cum_epsilon"]))

    fig, ax = plt.subplots(figsize=(7, 4.5))
    for system, runs in sorted(series.items()):
        longest = max(len(c) for c in runs.values())
        padded = np.full((len(runs), longest), np.nan)
        for i, curve in enumerate(runs.values()):
            padded[i, : len(curve)] = curve
            padded[i, len(curve):] = curve[-1]
        mean = np.nanmean(padded, axis=0)
        ax.plot(range(1, longest + 1), mean, label=system)
    ax.set_xlabel("workload index")
    ax.set_ylabel("mean cumulative privacy budget")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_png, dpi=130)
    print(f"wrote {out_png}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
