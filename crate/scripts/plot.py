#!/usr/bin/env python3
"""Plot the CSV tables written by sip-dyn.

usage: plot.py OUT_DIR [OUT_DIR ...]

Each OUT_DIR is a directory produced by `sip-dyn <command> --out OUT_DIR`.
Whatever tables it contains are drawn into OUT_DIR/plot.png.
"""

import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


def floats(rows, k):
    return [float(r[k]) for r in rows]


def trajectory(ax, path):
    head, rows = read(path)
    t = floats(rows, 0)
    for k in range(1, 4):
        ax.plot(t, floats(rows, k), label=head[k])
    ax.set_xlabel("t")
    ax.legend()


def branches(ax, path):
    _, rows = read(path)
    by_id = defaultdict(list)
    for r in rows:
        by_id[r[5]].append(r)
    for rs in by_id.values():
        # split each branch into runs of equal stability
        run = [rs[0]]
        for r in rs[1:]:
            if r[4] != run[-1][4]:
                draw_run(ax, run)
                run = [run[-1]]
            run.append(r)
        draw_run(ax, run)
    ax.set_xlabel("parameter")
    ax.set_ylabel("S")


def draw_run(ax, run):
    style = "-" if run[-1][4] == "1" else "--"
    ax.plot([float(r[0]) for r in run], [float(r[1]) for r in run], "k" + style, lw=1)


def curve(ax, path):
    head, rows = read(path)
    ax.plot(floats(rows, 0), floats(rows, 1), "b-", lw=1)
    ax.set_xlabel(head[0])
    ax.set_ylabel(head[1])


def regions(ax, path):
    _, rows = read(path)
    colors = {"coexistence": "tab:green", "infection_free": "tab:blue",
              "collapse": "tab:red", "undecided": "0.7"}
    groups = defaultdict(lambda: ([], []))
    for r in rows:
        xs, ys = groups[r[2]]
        xs.append(float(r[0]))
        ys.append(float(r[1]))
    for label, (xs, ys) in sorted(groups.items()):
        ax.scatter(xs, ys, s=6, marker="s", c=colors.get(label, "k"), label=label)
    ax.set_xlabel("L")
    ax.set_ylabel("r")
    ax.legend(fontsize="small", loc="upper left", bbox_to_anchor=(1.01, 1.0))


def threshold(ax, path):
    _, rows = read(path)
    ax.plot(floats(rows, 0), floats(rows, 1))
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("r")
    ax.set_ylabel("h(r)")


def percapita(ax, path):
    head, rows = read(path)
    s = floats(rows, 0)
    for k in range(1, len(head)):
        ax.plot(s, floats(rows, k), label=head[k])
    ax.axhline(0.0, color="k", lw=0.5)
    ax.set_xlabel("S")
    ax.legend()


def equilibria(ax, path):
    _, rows = read(path)
    for r in rows:
        if r[4] == "1":
            mark = "o" if r[5] == "stable" else "x"
            ax.plot(float(r[1]), float(r[3]), mark, label=r[0])
    ax.set_xlabel("S")
    ax.set_ylabel("P")
    ax.legend(fontsize="small")


TABLES = {
    "trajectory.csv": trajectory,
    "branches.csv": branches,
    "curve.csv": curve,
    "regions.csv": regions,
    "threshold.csv": threshold,
    "percapita.csv": percapita,
    "equilibria.csv": equilibria,
}


def main(dirs):
    if not dirs:
        sys.exit(__doc__)
    for d in map(Path, dirs):
        found = [(name, fn) for name, fn in TABLES.items() if (d / name).exists()]
        if not found:
            print(f"{d}: no tables", file=sys.stderr)
            continue
        fig, axes = plt.subplots(1, len(found), figsize=(6 * len(found), 4.5), squeeze=False)
        for ax, (name, fn) in zip(axes[0], found):
            fn(ax, d / name)
            ax.set_title(name)
        fig.tight_layout()
        fig.savefig(d / "plot.png", dpi=120)
        plt.close(fig)
        print(d / "plot.png")


if __name__ == "__main__":
    main(sys.argv[1:])
