"""Figures for verification reports: the lifted graph and the minor exponents."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .lift import LiftedChain, ring_tree_index  # noqa: E402

RC = {
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def lift_layout(lc: LiftedChain) -> dict[int, tuple[float, float]]:
    """Node positions for T.

    Rings: tree [i, j] goes at angle ~ i and radius ~ (j - i) mod n, so the
    [i, i] and [i, i-1] families form the inner and outer oriented rings.
    Otherwise trees are clustered around their root on a large circle.
    """
    g = lc.graph
    n = g.n
    pos = {}
    if g.is_ring():
        for (i, j), k in ring_tree_index(lc).items():
            off = (j - i) % n
            angle = 2 * math.pi * (i - 1) / n + 0.35 * off / n
            r = 1.0 + off
            pos[k] = (r * math.cos(angle), r * math.sin(angle))
        return pos
    groups: dict[int, list[int]] = {}
    for k, root in enumerate(lc.projection):
        groups.setdefault(root, []).append(k)
    big = 3.0 + 0.15 * lc.size / n
    for root, members in groups.items():
        cx = big * math.cos(2 * math.pi * (root - 1) / n)
        cy = big * math.sin(2 * math.pi * (root - 1) / n)
        small = 0.3 + 0.08 * len(members)
        for a, k in enumerate(members):
            t = 2 * math.pi * a / max(len(members), 1)
            pos[k] = (cx + small * math.cos(t), cy + small * math.sin(t))
    return pos


def plot_lift(lc: LiftedChain, path: str | Path, names: Mapping | None = None) -> Path:
    pos = lift_layout(lc)
    labelled = lc.size <= 40
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 6))
        cmap = plt.get_cmap("tab10")
        for tr in lc.transitions:
            (x0, y0), (x1, y1) = pos[tr.source], pos[tr.target]
            ax.annotate(
                "", xy=(x1, y1), xytext=(x0, y0),
                arrowprops=dict(arrowstyle="->", lw=0.6, color="0.45",
                                shrinkA=6, shrinkB=6, connectionstyle="arc3,rad=0.08"),
            )
            if labelled:
                lab = names.get(tr.label, str(tr.label)) if names else str(tr.label)
                ax.text(0.55 * x0 + 0.45 * x1, 0.55 * y0 + 0.45 * y1, lab,
                        fontsize=5, color="0.3", ha="center", va="center")
        xs = [pos[k][0] for k in range(lc.size)]
        ys = [pos[k][1] for k in range(lc.size)]
        colors = [cmap((r - 1) % 10) for r in lc.projection]
        ax.scatter(xs, ys, s=60 if labelled else 12, c=colors, zorder=3, edgecolors="k", linewidths=0.4)
        if labelled:
            for k in range(lc.size):
                ax.text(pos[k][0], pos[k][1] + 0.18, str(lc.projection[k]), fontsize=6, ha="center")
        ax.set_aspect("equal")
        ax.axis("off")
        ax.set_title(f"lifted graph T, {lc.graph.describe()}, |T|={lc.size}")
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return Path(path)


def plot_exponents(report: Mapping, path: str | Path) -> Path:
    """Bar chart of minor exponents: measured per subset, or the claim per rank."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3))
        mults = report.get("multiplicities") or []
        if mults:
            labels = ["{" + ",".join(map(str, m["subset"])) + "}" for m in mults]
            values = [m["exponent"] for m in mults]
            ax.bar(range(len(values)), values, color="C0")
            ax.set_xticks(range(len(values)), labels, rotation=90, fontsize=6)
            ax.set_xlabel("kept vertex set")
        elif report.get("claim"):
            exps = report["claim"]["exponents"]
            ks = sorted(int(k) for k in exps)
            ax.bar(ks, [exps[str(k)] for k in ks], color="C1")
            ax.set_xticks(ks)
            ax.set_xlabel("rank k (claimed exponent of m_k)")
        ax.set_ylabel("exponent")
        ax.set_title(f"{report['graph']['family']} n={report['graph']['n']}: "
                     f"verdict {report.get('verdict')}")
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)
    return Path(path)


def write_figures(lc: LiftedChain, report: Mapping, directory: str | Path) -> list[str]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    stem = f"{lc.graph.name}_n{lc.graph.n}"
    out = [
        plot_lift(lc, d / f"{stem}_lift.png"),
        plot_exponents(report, d / f"{stem}_exponents.png"),
    ]
    return [p.name for p in out]
