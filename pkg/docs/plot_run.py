"""Plot a run log: trajectories on the left, tracking error on the right.

Usage: python docs/plot_run.py runs/sim1.csv [out.png]
"""

import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def main(argv):
    if not argv:
        print(__doc__)
        return 2
    path = argv[0]
    out = argv[1] if len(argv) > 1 else path.rsplit(".", 1)[0] + ".png"
    names = open(path, encoding="utf-8").readline().strip().split(",")
    cols = {n: i for i, n in enumerate(names)}
    numeric = [i for i, n in enumerate(names) if n != "status"]
    data = np.genfromtxt(path, delimiter=",", skip_header=1,
                         usecols=numeric)
    idx = {names[c]: j for j, c in enumerate(numeric)}

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.5))
    ax1.plot(data[:, idx["x_v"]], data[:, idx["y_v"]], label="vehicle",
             color="tab:orange")
    ax1.plot(data[:, idx["x"]], data[:, idx["y"]], label="quadcopter",
             color="tab:blue")
    ax1.set_aspect("equal")
    ax1.set_xlabel("x [m]")
    ax1.set_ylabel("y [m]")
    ax1.legend()
    ax1.set_title("trajectories")

    t = data[:, idx["t"]]
    ax2.plot(t, data[:, idx["error"]], color="tab:red")
    ax2.set_xlabel("t [s]")
    ax2.set_ylabel("tracking error [m]")
    ax2.set_title("tracking distance error")
    ax2.grid(alpha=0.3)

    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
