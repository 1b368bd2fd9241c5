"""Render the six figure analogues from experiment CSVs.

The figure layer never recomputes physics: every curve is read from a CSV
emitted by the experiment runner, grouped and averaged for presentation
only.  The single exception, stated in its recipe, is the analytic
reference curve R(g) of the single-parameter dephasing model drawn over the
rate-vs-coupling figure, which is re-evaluated from its closed formula.

Rendering is a pure function of the CSV contents and the recipe: fixed
styles, no timestamps, identical bytes on re-run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# deterministic SVG element ids; without a fixed salt every render differs
matplotlib.rcParams["svg.hashsalt"] = "channel-figures"

import matplotlib.pyplot as plt
import numpy as np

FIGURE_IDS = (1, 2, 3, 4, 5, 6)

_REQUIRED_COLUMNS = {
    1: ("N", "Nq", "seed", "S_e", "R"),
    2: ("coupling", "eta", "seed", "R"),
    3: ("K", "seed", "L", "C_norm"),
    4: ("K", "Nq", "seed", "S_e"),
    5: ("omega0", "K_transmit", "L", "seed", "max_trace_distance"),
    6: ("K", "seed", "Q"),
}


class MissingColumnError(ValueError):
    """A CSV lacks a column the requested figure needs."""


class EmptyDataError(ValueError):
    """A CSV has a header but no data rows."""


@dataclass(frozen=True)
class FigureRecipe:
    """What to draw: figure id (1-6 analogue), input CSV, output path."""

    figure_id: int
    csv_paths: tuple[str, ...]
    out_path: str
    title: str = ""
    dpi: int = 150

    def __post_init__(self):
        if self.figure_id not in FIGURE_IDS:
            raise ValueError(f"figure id must be one of {FIGURE_IDS}, got {self.figure_id}")
        if len(self.csv_paths) != 1:
            raise ValueError(f"figure {self.figure_id} takes exactly one CSV input")


@dataclass
class Table:
    """A parsed CSV: column names and string cells, with typed accessors."""

    path: str
    columns: list[str]
    rows: list[list[str]] = field(repr=False)

    def floats(self, column: str) -> np.ndarray:
        i = self.columns.index(column)
        return np.array([float(r[i]) for r in self.rows])

    def strings(self, column: str) -> list[str]:
        i = self.columns.index(column)
        return [r[i] for r in self.rows]


def read_table(path: str | Path, required: tuple[str, ...]) -> Table:
    text = Path(path).read_text().strip()
    lines = text.splitlines() if text else []
    if not lines:
        raise EmptyDataError(f"{path}: no header row")
    columns = lines[0].split(",")
    missing = [c for c in required if c not in columns]
    if missing:
        raise MissingColumnError(
            f"{path}: missing column(s) {', '.join(missing)};"
            f" file has {', '.join(columns)}"
        )
    rows = [line.split(",") for line in lines[1:]]
    if not rows:
        raise EmptyDataError(f"{path}: no data rows")
    return Table(str(path), columns, rows)


def reference_dephasing_rate(g: np.ndarray) -> np.ndarray:
    """Analytic R(g) of the stochastic dephasing model (0 log 0 := 0)."""
    g = np.asarray(g, dtype=float)
    out = np.zeros_like(g)
    for coeff in ((2.0 - g) / 2.0, g / 2.0):
        pos = coeff > 0
        out[pos] -= coeff[pos] * np.log2(coeff[pos])
    return out


def _group_mean(keys: np.ndarray, x: np.ndarray, y: np.ndarray):
    """Mean of y per (key, x) pair, returned per unique key."""
    for key in sorted(set(keys.tolist())):
        sel = keys == key
        xs = np.array(sorted(set(x[sel].tolist())))
        ys = np.array([y[sel & (x == xv)].mean() for xv in xs])
        yield key, xs, ys


def _render_entropy_scan(table: Table, axes):
    ax_top, ax_bottom = axes
    dims = table.floats("N")
    nq = table.floats("Nq")
    se = table.floats("S_e")
    rate = table.floats("R")
    for dim, xs, ys in _group_mean(dims, nq, se):
        ax_top.plot(xs, ys, marker="o", ms=3, label=f"N = {int(dim)}")
    for dim, xs, ys in _group_mean(dims, nq, rate):
        ax_bottom.plot(xs, ys, marker="o", ms=3)
    ax_top.set_ylabel("entropy exchange [bits]")
    ax_top.legend(fontsize=8)
    ax_bottom.set_xlabel("channel uses")
    ax_bottom.set_ylabel("rate per use")
    ax_bottom.set_ylim(bottom=0)


def _render_rate_vs_eta(table: Table, ax):
    couplings = np.array(table.strings("coupling"))
    eta = table.floats("eta")
    rate = table.floats("R")
    styles = {"kicked_quadratic": "--o", "continuous_sin_p": "-s"}
    for name, xs, ys in _group_mean(couplings, eta, rate):
        ax.plot(xs, ys, styles.get(name, "-"), ms=3, label=name.replace("_", " "))
    ax.set_xlabel("coupling strength")
    ax.set_ylabel("entropy exchange rate")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8, loc="lower right")
    inset = ax.inset_axes([0.55, 0.12, 0.4, 0.35])
    g = np.linspace(0.0, 1.0, 201)
    inset.plot(g, reference_dephasing_rate(g), "k-", lw=1)
    inset.set_xlabel("g", fontsize=7)
    inset.set_ylabel("R(g)", fontsize=7)
    inset.tick_params(labelsize=6)


def _render_autocorrelation(table: Table, ax):
    k_vals = table.floats("K")
    lag = table.floats("L")
    c_norm = table.floats("C_norm")
    for k, xs, ys in _group_mean(k_vals, lag, c_norm):
        style = "-" if k > 0 else "--"
        ax.plot(xs, ys, style, lw=1.2, label=f"K = {k:g}")
    ax.set_xlabel("map iterations")
    ax.set_ylabel("C(L)/C(0)")
    ax.set_ylim(bottom=0)
    ax.legend(fontsize=8)


def _render_regular_growth(table: Table, ax):
    k_vals = table.floats("K")
    nq = table.floats("Nq")
    se = table.floats("S_e")
    styles = ["-o", "--s", ":^"]
    for i, (k, xs, ys) in enumerate(_group_mean(k_vals, nq, se)):
        ax.plot(np.log2(xs), ys, styles[i % 3], ms=3, label=f"K = {k:g}")
    ax.set_xlabel("log2(channel uses)")
    ax.set_ylabel("entropy exchange [bits]")
    ax.legend(fontsize=8)


def _render_forgetfulness(table: Table, axes):
    kinds = np.array(table.strings("omega0"))
    k_transmit = table.floats("K_transmit")
    lag = table.floats("L")
    dist = table.floats("max_trace_distance")
    panels = sorted(set(kinds.tolist()))
    for ax, kind in zip(axes, panels):
        sel = kinds == kind
        for k, xs, ys in _group_mean(k_transmit[sel], lag[sel], dist[sel]):
            style = "-o" if k > 0 else "--s"
            ax.semilogy(xs, np.maximum(ys, 1e-6), style, ms=3, label=f"K = {k:g}")
        ax.set_title(f"initial state: {kind}", fontsize=9)
        ax.set_xlabel("idle uses")
        ax.legend(fontsize=8)
    axes[0].set_ylabel("max trace distance")
    for ax in axes[len(panels):]:
        ax.set_visible(False)


def _render_capacity_transition(table: Table, ax):
    k_vals = table.floats("K")
    q = table.floats("Q")
    xs = np.array(sorted(set(k_vals.tolist())))
    ys = np.array([q[k_vals == k].mean() for k in xs])
    ax.axvspan(-4.0, 0.0, color="0.9", label="regular window")
    ax.plot(xs, ys, "ko-", ms=4)
    ax.set_xlabel("chaos parameter K")
    ax.set_ylabel("capacity estimate Q")
    ax.set_ylim(0, 1.05)
    ax.legend(fontsize=8, loc="lower left")


def render(recipe: FigureRecipe) -> str:
    """Draw one figure analogue; returns the written path.

    Raises MissingColumnError / EmptyDataError before anything is written.
    """
    table = read_table(recipe.csv_paths[0], _REQUIRED_COLUMNS[recipe.figure_id])

    if recipe.figure_id == 1:
        fig, axes = plt.subplots(2, 1, figsize=(5.2, 5.6), sharex=True)
        _render_entropy_scan(table, axes)
    elif recipe.figure_id == 5:
        fig, axes = plt.subplots(1, 2, figsize=(7.4, 3.4), sharey=True)
        _render_forgetfulness(table, axes)
    else:
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        {
            2: _render_rate_vs_eta,
            3: _render_autocorrelation,
            4: _render_regular_growth,
            6: _render_capacity_transition,
        }[recipe.figure_id](table, ax)

    if recipe.title:
        fig.suptitle(recipe.title, fontsize=10)
    fig.tight_layout()
    out = Path(recipe.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    # strip volatile metadata so re-rendering is byte-identical
    metadata = {"Date": None} if out.suffix == ".svg" else {}
    fig.savefig(out, dpi=recipe.dpi, metadata=metadata)
    plt.close(fig)
    return str(out)
