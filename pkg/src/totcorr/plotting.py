"""SVG scatter plots of normalised sweep values."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib
from matplotlib.figure import Figure

from .experiments import SweepRecord, column
from .measures.kinds import MeasureKind, parse_measure

MARKER_GID = "markers"
_SVG_META = {"Date": None}


def _kind(m: MeasureKind | str) -> MeasureKind:
    return m if isinstance(m, MeasureKind) else parse_measure(m)


def _scatter(ax, records, x: MeasureKind, y: MeasureKind, gid: str) -> None:
    xs, ys = column(records, x.name), column(records, y.name)
    sc = ax.scatter(xs, ys, s=3, c="tab:blue", alpha=0.5, linewidths=0)
    sc.set_gid(gid)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1)
    ax.set_aspect("equal")
    ax.set_xlabel(f"{x.label} (normalised)")
    ax.set_ylabel(f"{y.label} (normalised)")


def _save(fig: Figure, out) -> Path:
    out = Path(out)
    # fixed ids so identical inputs give identical files
    with matplotlib.rc_context({"svg.hashsalt": "totcorr", "svg.fonttype": "path"}):
        fig.savefig(out, format="svg", metadata=_SVG_META)
    return out


def render_scatter(records: Sequence[SweepRecord], x: MeasureKind | str, y: MeasureKind | str, out) -> Path:
    """One marker per record, both axes on [0, 1].

    Markers sit in the SVG group with id ``markers``, one ``<use>`` element each.
    """
    x, y = _kind(x), _kind(y)
    fig = Figure(figsize=(4.2, 4.2))
    ax = fig.add_subplot()
    _scatter(ax, records, x, y, MARKER_GID)
    fig.tight_layout()
    return _save(fig, out)


def render_panels(records: Sequence[SweepRecord], x: MeasureKind | str, ys: Sequence[MeasureKind | str], out,
                  ncols: int = 3) -> Path:
    """Grid of scatters, each measure in ``ys`` against ``x``; panel ``k`` uses gid ``markers-k``."""
    x = _kind(x)
    ys = [_kind(y) for y in ys]
    nrows = max(1, -(-len(ys) // ncols))
    fig = Figure(figsize=(3.4 * ncols, 3.4 * nrows))
    for k, y in enumerate(ys):
        ax = fig.add_subplot(nrows, ncols, k + 1)
        _scatter(ax, records, x, y, f"{MARKER_GID}-{k}")
        ax.set_title(f"({chr(ord('a') + k)})", loc="left", fontsize=9)
    fig.tight_layout()
    return _save(fig, out)
