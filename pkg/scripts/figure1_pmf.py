"""
PMF panels for six parameter sets, written as a CSV and (if matplotlib is
available) a 2x3 bar-chart PNG.

    python3 scripts/figure1_pmf.py [--x-max 30] [--out pmf_panels]
"""

import argparse
import csv

from nbrig import NbrigParams
from nbrig.dist import pmf_recursive_table

# (label, r, alpha, m)
PANELS = [
    ("a", 0.5, 0.5, 0.5),
    ("b", 0.5, 1.0, 0.5),
    ("c", 0.5, 2.0, 0.5),
    ("d", 5.0, 1.0, 1.5),
    ("e", 5.0, 1.0, 2.0),
    ("f", 5.0, 2.0, 5.0),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--x-max", type=int, default=30)
    ap.add_argument("--out", default="pmf_panels")
    args = ap.parse_args()

    tables = {lab: pmf_recursive_table(args.x_max, NbrigParams.of(r, a, m)) for lab, r, a, m in PANELS}
    with open(f"{args.out}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"] + [f"{lab}:r={r},alpha={a},m={m}" for lab, r, a, m in PANELS])
        for x in range(args.x_max + 1):
            w.writerow([x] + [f"{tables[lab][x]:.10g}" for lab, *_ in PANELS])
    print(f"wrote {args.out}.csv")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not installed; skipping the figure")
        return
    fig, axes = plt.subplots(2, 3, figsize=(12, 6), sharex=True)
    for ax, (lab, r, a, m) in zip(axes.flat, PANELS):
        ax.bar(range(args.x_max + 1), tables[lab], color="0.35")
        ax.set_title(f"({lab}) r={r}, alpha={a}, m={m}", fontsize=9)
    fig.tight_layout()
    fig.savefig(f"{args.out}.png", dpi=120)
    print(f"wrote {args.out}.png")


if __name__ == "__main__":
    main()
