"""Figure rendering for gap sweeps, interaction graphs, and placements.

All functions write image files (Agg backend) and return the path; they are
used by the CLI report path to drop figures next to the CSV/JSON output.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .mapping import HardwareGraph, InducedGraph
from .penalty import FitResult, SweepRow

_PNG_META = {"Software": "trapcodes"}


def plot_gap_sweep(
    rows: list[SweepRow],
    path: str,
    fits: dict[str, FitResult] | None = None,
    x_axis: str = "m",
) -> str:
    """Semi-log gap-versus-size plot, one series per l, with optional fit
    curves overlaid."""
    fig, ax = plt.subplots(figsize=(6, 4.2))
    series: dict[int, list[SweepRow]] = {}
    for r in rows:
        if r.gap is not None:
            series.setdefault(r.l, []).append(r)
    for l, pts in sorted(series.items()):
        xs = [getattr(r, x_axis) for r in pts]
        ys = [r.gap for r in pts]
        ax.plot(xs, ys, "o-", ms=4, label=f"l={l}")
    if fits:
        import numpy as np

        all_x = [getattr(r, x_axis) for r in rows if r.gap is not None]
        grid = np.linspace(min(all_x), max(all_x), 200)
        for name, f in fits.items():
            ys = f.a * grid ** (-f.nu) if f.model == "power" else f.a * np.exp(-f.nu * grid)
            ax.plot(grid, ys, "--", lw=1, label=f"{name}: {f.model}, nu={f.nu:.3f}")
    ax.set_yscale("log")
    ax.set_xlabel(x_axis)
    ax.set_ylabel("penalty gap")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
    return path


def _hardware_positions(g: HardwareGraph) -> dict[int, tuple[float, float]]:
    if g.positions:
        return g.positions
    n = g.n
    return {
        v: (math.cos(2 * math.pi * i / n), math.sin(2 * math.pi * i / n))
        for i, v in enumerate(g.vertices)
    }


def plot_hardware(g: HardwareGraph, path: str) -> str:
    """Hardware layout with vertex labels."""
    pos = _hardware_positions(g)
    fig, ax = plt.subplots(figsize=(5, 5))
    for u, v in g.edges:
        ax.plot([pos[u][0], pos[v][0]], [pos[u][1], pos[v][1]], "-", color="0.6", lw=1.2, zorder=1)
    for v in g.vertices:
        ax.scatter(*pos[v], s=260, color="#dce6f2", edgecolor="#3b6ea5", zorder=2)
        ax.annotate(str(v), pos[v], ha="center", va="center", fontsize=8, zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(g.name)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
    return path


def _induced_positions(g: InducedGraph) -> dict[int, tuple[float, float]]:
    try:
        import networkx as nx

        G = nx.Graph()
        G.add_nodes_from(g.vertices)
        G.add_edges_from(g.edges)
        return {v: tuple(p) for v, p in nx.spring_layout(G, seed=11).items()}
    except ImportError:
        n = g.n
        return {
            v: (math.cos(2 * math.pi * v / n), math.sin(2 * math.pi * v / n))
            for v in g.vertices
        }


_LABEL_COLOR = {"X": "#1f77b4", "Z": "#ff7f0e", "XX": "#d4b106", "ZZ": "#d4b106", "gauge": "#2ca02c"}


def plot_induced(g: InducedGraph, path: str) -> str:
    """Induced interaction graph; edge color tracks the dominant label."""
    pos = _induced_positions(g)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for u, v in g.edges:
        labels = g.labels[(u, v)]
        color = next((_LABEL_COLOR[k] for k in ("gauge", "X", "Z", "XX", "ZZ") if k in labels), "0.5")
        ax.plot([pos[u][0], pos[v][0]], [pos[u][1], pos[v][1]], "-", color=color, lw=1.2, zorder=1)
    for v in g.vertices:
        ax.scatter(*pos[v], s=240, color="#f2e8dc", edgecolor="#8c5e2a", zorder=2)
        ax.annotate(str(v), pos[v], ha="center", va="center", fontsize=8, zorder=3)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_mapping(
    induced: InducedGraph, hardware: HardwareGraph, placement: list[int], path: str
) -> str:
    """Placement drawn on the hardware layout.

    Hardware edges appear in grey; induced edges are drawn between the host
    vertices, green when they land on a hardware edge and red otherwise.
    Labels show 'qubit@node'.
    """
    pos = _hardware_positions(hardware)
    hw_edges = set(hardware.edges)
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    for u, v in hardware.edges:
        ax.plot([pos[u][0], pos[v][0]], [pos[u][1], pos[v][1]], "-", color="0.85", lw=1.0, zorder=1)
    host = {q + 1: placement[q] for q in range(len(placement))}
    for u, v in induced.edges:
        a, b = host[u], host[v]
        direct = (min(a, b), max(a, b)) in hw_edges
        ax.plot(
            [pos[a][0], pos[b][0]],
            [pos[a][1], pos[b][1]],
            "-" if direct else "--",
            color="#2ca02c" if direct else "#d62728",
            lw=1.4,
            zorder=2,
        )
    for q, node in host.items():
        ax.scatter(*pos[node], s=320, color="#dce6f2", edgecolor="#3b6ea5", zorder=3)
        ax.annotate(f"{q}@{node}", pos[node], ha="center", va="center", fontsize=7, zorder=4)
    for node in set(hardware.vertices) - set(host.values()):
        ax.scatter(*pos[node], s=160, color="white", edgecolor="0.6", zorder=3)
        ax.annotate(str(node), pos[node], ha="center", va="center", fontsize=7, color="0.5", zorder=4)
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_META)
    plt.close(fig)
    return path
