"""Plot any trajectory CSV produced by the simulator or the CLI.

Detects the format from the header:
  t,x_1,...,x_n,y_1,...,y_n   wide per-node trajectories
  t,node,k,x,y                long per-cluster trajectories
  t,node,theta_x,theta_y      long first-moment trajectories

Usage:
  python demos/plot_trajectories.py <trajectory.csv> [out.png] [--clusters 1,10,40]
"""

import argparse
import sys

import numpy as np


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csv", help="trajectory CSV path")
    ap.add_argument("out", nargs="?", default=None, help="output image (default: <csv>.png)")
    ap.add_argument(
        "--clusters", default="1,10,40",
        help="cluster degrees to plot for long cluster CSVs (comma-separated)",
    )
    args = ap.parse_args(argv)

    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(args.csv, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(args.csv, delimiter=",", skiprows=1)
    data = np.atleast_2d(data)
    out = args.out or (args.csv.rsplit(".", 1)[0] + ".png")

    fig, ax = plt.subplots(figsize=(9, 5))
    if header[:3] == ["t", "node", "k"]:
        wanted = [int(k) for k in args.clusters.split(",")]
        node0 = data[data[:, 1] == 0]
        for k in wanted:
            rows = node0[node0[:, 2] == k]
            ax.plot(rows[:, 0], rows[:, 3], lw=1.4, label=f"x, k={k}")
            ax.plot(rows[:, 0], rows[:, 4], lw=1.4, ls="--", label=f"y, k={k}")
        ax.set_ylabel("cluster committed fractions (node 0)")
        ax.legend(fontsize=8, ncol=3)
    elif header[:3] == ["t", "node", "theta_x"]:
        times = np.unique(data[:, 0])
        nodes = np.unique(data[:, 1]).astype(int)
        tx = data[:, 2].reshape(len(times), len(nodes))
        ty = data[:, 3].reshape(len(times), len(nodes))
        ax.plot(times, tx, color="tab:red", lw=0.7, alpha=0.6)
        ax.plot(times, ty, color="tab:blue", lw=0.7, alpha=0.6)
        ax.set_ylabel("link probabilities theta_x (red), theta_y (blue)")
    elif header[0] == "t" and header[1].startswith("x_"):
        n = (len(header) - 1) // 2
        ax.plot(data[:, 0], data[:, 1 : n + 1], color="tab:blue", lw=0.7, ls="--", alpha=0.6)
        ax.plot(data[:, 0], data[:, n + 1 :], color="tab:red", lw=0.7, alpha=0.6)
        ax.set_ylabel("committed fractions x (dashed blue), y (red)")
    else:
        print(f"unrecognized header: {header}", file=sys.stderr)
        return 2
    ax.set_xlabel("time")
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
