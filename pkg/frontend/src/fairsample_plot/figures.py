"""Figure rendering: anneal traces, stacked category fractions, rank curves.

Every renderer writes both an SVG and a PNG next to each other.  SVG output
is byte-stable across runs: the hash salt is pinned and no timestamp is
embedded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fairsample-plot"

import matplotlib.pyplot as plt

from .io import (CATEGORIES, SchemaError, read_rank_set, read_study,
                 read_trace)

KINDS = ("trace", "stacked", "rank")

CATEGORY_COLORS = {
    "fair": "#2a9d8f",
    "soft": "#e9c46a",
    "hard": "#e76f51",
    "highord": "#8d99ae",
}


@dataclass(frozen=True)
class FigureSpec:
    kind: str                       # trace | stacked | rank
    inputs: tuple[str, ...]
    out: str                        # extension-less base path
    columns: str | None = None      # trace sidecar with bitstring labels
    labels: tuple[str, ...] | None = None
    title: str = ""
    style: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("no input files")


def _save(fig, out_base: str) -> tuple[str, str]:
    base = Path(out_base)
    base.parent.mkdir(parents=True, exist_ok=True)
    svg = str(base.with_suffix(".svg"))
    png = str(base.with_suffix(".png"))
    fig.savefig(svg, metadata={"Date": None})
    fig.savefig(png, dpi=150)
    plt.close(fig)
    return svg, png


def plot_trace(spec: FigureSpec) -> tuple[str, str]:
    """Per-ground-state probability against the anneal fraction t/T."""
    if len(spec.inputs) != 1:
        raise SchemaError("trace figures take exactly one CSV")
    data = read_trace(spec.inputs[0], spec.columns)
    T = data.times[-1]
    if T <= 0:
        raise SchemaError(f"{spec.inputs[0]}: final time must be positive")
    x = [t / T for t in data.times]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for series, label in zip(data.probabilities, data.labels):
        ax.plot(x, series, label=label, linewidth=1.4)
    ax.plot(x, data.p_total, color="black", linestyle="--", linewidth=1.0,
            label="total")
    ax.set_xlabel(spec.style.get("xlabel", "t / T"))
    ax.set_ylabel(spec.style.get("ylabel",
                                 "orbit probability" if data.gauge
                                 else "state probability"))
    ax.set_xlim(0.0, 1.0)
    ax.set_ylim(bottom=0.0)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=7, ncol=2)
    fig.tight_layout()
    return _save(fig, spec.out)


def plot_stacked(spec: FigureSpec) -> tuple[str, str]:
    """One panel per (n_spins, degeneracy): stacked category fractions over
    driver order."""
    if len(spec.inputs) != 1:
        raise SchemaError("stacked figures take exactly one CSV")
    rows = read_study(spec.inputs[0])
    panels = sorted({(r.n_spins, r.degeneracy) for r in rows})
    fig, axes = plt.subplots(1, len(panels),
                             figsize=(2.2 * len(panels) + 1.2, 3.0),
                             sharey=True, squeeze=False)
    for ax, (ns, deg) in zip(axes[0], panels):
        cell = sorted((r for r in rows
                       if (r.n_spins, r.degeneracy) == (ns, deg)),
                      key=lambda r: r.driver_order)
        orders = [r.driver_order for r in cell]
        bottom = [0.0] * len(cell)
        for cat in CATEGORIES:
            vals = [r.fractions[cat] for r in cell]
            ax.bar(orders, vals, bottom=bottom, width=0.8,
                   color=CATEGORY_COLORS[cat], label=cat)
            bottom = [b + v for b, v in zip(bottom, vals)]
        ax.set_title(f"N={ns}, k={deg}", fontsize=8)
        ax.set_xlabel(spec.style.get("xlabel", "driver order n"))
        ax.set_xticks(orders)
        ax.set_ylim(0.0, 1.0)
    axes[0][0].set_ylabel(spec.style.get("ylabel", "category fraction"))
    handles, labels = axes[0][0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="upper center", ncol=4, fontsize=7,
               frameon=False)
    if spec.title:
        fig.suptitle(spec.title, y=0.99)
    fig.tight_layout(rect=(0, 0, 1, 0.9))
    return _save(fig, spec.out)


def plot_rank(spec: FigureSpec) -> tuple[str, str]:
    """Rank-ordered ground-state probability per engine, with error bars
    and the fair-sampling reference at 1/k."""
    curves = read_rank_set(spec.inputs, spec.labels)
    k = len(curves[0].p_mean)
    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    for curve in curves:
        ax.errorbar(range(1, k + 1), curve.p_mean, yerr=curve.p_stderr,
                    marker="o", markersize=3.5, capsize=2.5, linewidth=1.2,
                    label=curve.label)
    ax.axhline(1.0 / k, color="gray", linestyle=":", linewidth=1.0,
               label=f"fair (1/{k})")
    ax.set_xlabel(spec.style.get("xlabel", "rank"))
    ax.set_ylabel(spec.style.get("ylabel", "ground-state probability"))
    ax.set_xticks(range(1, k + 1))
    ax.set_ylim(bottom=0.0)
    if spec.title:
        ax.set_title(spec.title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, spec.out)


RENDERERS = {
    "trace": plot_trace,
    "stacked": plot_stacked,
    "rank": plot_rank,
}


def render(spec: FigureSpec) -> tuple[str, str]:
    return RENDERERS[spec.kind](spec)
