#!/usr/bin/env python3
"""Render a fundamental-diagram figure from exported CSVs.

Reads the fd.csv (and, when present, fd_binned.csv) written by
``pedflow analyze`` or ``scripts/run_protocol.py`` and saves a scatter
of (density, velocity) points colored by run, with binned means on top.

Usage:
    python scripts/plot_fd.py out/protocol/fd.csv --out fd.png
"""

import argparse
import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_fd(path):
    runs = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            runs.setdefault(row["run"], []).append(
                (float(row["rho"]), float(row["v"])))
    return runs


def read_binned(path):
    bins = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            bins.append((float(row["rho_bin_center"]), float(row["v_mean"]),
                         float(row["v_std"])))
    return bins


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("fd_csv", help="fd.csv produced by the analyzer")
    parser.add_argument("--out", default="fd.png", help="output image (default fd.png)")
    args = parser.parse_args(argv)

    runs = read_fd(args.fd_csv)
    if not runs:
        print("no diagram points to plot", file=sys.stderr)
        return 1

    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=130)
    for run_id in sorted(runs):
        rho, v = zip(*runs[run_id])
        ax.scatter(rho, v, s=14, alpha=0.55, label=run_id)

    binned_path = os.path.join(os.path.dirname(args.fd_csv) or ".", "fd_binned.csv")
    if os.path.exists(binned_path):
        bins = read_binned(binned_path)
        ax.errorbar([b[0] for b in bins], [b[1] for b in bins],
                    yerr=[b[2] for b in bins], color="black", marker="s",
                    markersize=4, linewidth=1.2, capsize=3, label="binned mean")

    ax.set_xlabel("density [1/m]")
    ax.set_ylabel("velocity [m/s]")
    ax.set_xlim(left=0.0)
    ax.set_ylim(bottom=0.0)
    ax.grid(alpha=0.3)
    if len(runs) <= 8:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(args.out)
    total = sum(len(points) for points in runs.values())
    print(f"plotted {total} crossings from {len(runs)} runs -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
