"""PNG figures for the CLI commands, drawn from the same rows as the CSV."""
from __future__ import annotations

from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _by(rows, key_idx):
    groups = defaultdict(list)
    for r in rows:
        groups[r[key_idx]].append(r)
    return groups


def _bound(ax, header, rows):
    curve = [r for r in rows if r[2] != "reference"]
    xs = [r[0] for r in curve]
    ys = [max(r[1], 1e-300) for r in curve]
    label = curve[0][2] + (f" ({curve[0][3]})" if curve and curve[0][3] else "") if curve else ""
    ax.semilogy(xs, ys, marker=".", label=label)
    for r in rows:
        if r[2] == "reference":
            ax.axvline(r[0], color="k", ls="--", lw=0.8, label="reference")
    ax.set_xlabel("gap to capacity [bits]")
    ax.set_ylabel("outage bound")
    ax.set_ylim(top=1.5)


def _simulate(ax, header, rows):
    for sc, rs in _by(rows, 1).items():
        xs = [r[0] for r in rs]
        ys = [r[2] for r in rs]
        # zero estimates cannot sit on a log axis; drop them from the line
        pts = [(x, y) for x, y in zip(xs, ys) if y > 0]
        if pts:
            ax.semilogy(*zip(*pts), marker=".", label=sc)
    ax.set_xlabel("gap to capacity [bits]")
    ax.set_ylabel("empirical worst-case outage")


def _multicast(ax, header, rows):
    ax.plot([r[0] for r in rows], [r[1] for r in rows], marker="o")
    ax.set_xlabel("number of users K")
    ax.set_ylabel("guaranteed rate [bits]")


def _pdf(ax, header, rows):
    for sc, rs in _by(rows, 0).items():
        lo = [r[1] for r in rs]
        width = rs[0][2] - rs[0][1]
        ax.bar(lo, [r[3] / width for r in rs], width=width, align="edge", alpha=0.5, label=sc)
    ax.set_xlabel("rate [bits]")
    ax.set_ylabel("density")


def _rates(ax, header, rows):
    ax.bar([r[0] for r in rows], [r[1] for r in rows])
    ax.set_ylabel("total rate [bits]")


_DRAW = {"bound": _bound, "simulate": _simulate, "multicast": _multicast, "pdf": _pdf, "rates": _rates}


def render(command, header, rows, path) -> None:
    """Draw the rows of ``command`` and save to ``path``."""
    fig, ax = plt.subplots(figsize=(6, 4))
    try:
        _DRAW[command](ax, header, rows)
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        ax.grid(True, which="both", alpha=0.3)
        fig.tight_layout()
        fig.savefig(path, dpi=120)
    finally:
        plt.close(fig)
