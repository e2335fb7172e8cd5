"""Matplotlib figures for barcodes, training curves and benchmark reports.

Every figure is written with the Agg backend and without a ``Software``
metadata chunk so that the PNG bytes depend only on the data.
"""

from __future__ import annotations

import io
import math
from contextlib import contextmanager

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from covercraft.io import atomic_write  # noqa: E402
from covercraft.persistence import Barcode  # noqa: E402

DIM_COLORS = ("#1b6ca8", "#d1495b", "#2e8b57", "#edae49", "#6a4c93")


@contextmanager
def figure_style():
    rc = {
        "figure.dpi": 100,
        "savefig.dpi": 150,
        "font.size": 9,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "svg.hashsalt": "covercraft",
    }
    with plt.rc_context(rc):
        yield


def _save(fig, path):
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata={"Software": None}, bbox_inches="tight")
    plt.close(fig)
    atomic_write(path, buf.getvalue())


def plot_barcode(bc: Barcode, path, title: str | None = None):
    """One horizontal bar per interval, grouped by dimension; infinite bars end in an arrow."""
    bars = sorted(bc.bars, key=lambda bar: (bar[0], bar[1], bar[2]))
    finite = [x for _, b, e in bars for x in (b, e) if math.isfinite(x)]
    hi = max(finite) if finite else 1.0
    lo = min(finite) if finite else 0.0
    cap = hi + 0.1 * max(hi - lo, 1.0)
    with figure_style():
        fig, ax = plt.subplots(figsize=(6, max(2.0, 0.12 * len(bars) + 1.0)))
        seen = set()
        for row, (d, b, e) in enumerate(bars):
            color = DIM_COLORS[d % len(DIM_COLORS)]
            end = e if math.isfinite(e) else cap
            label = f"H{d}" if d not in seen else None
            seen.add(d)
            ax.hlines(row, b, end, color=color, lw=2.5, label=label)
            if not math.isfinite(e):
                ax.plot([cap], [row], marker=">", color=color, ms=5)
        ax.set_yticks([])
        ax.set_xlabel("filtration value")
        if bars:
            ax.legend(loc="lower right", frameon=False)
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_loss_history(history: list[dict], path, title: str | None = None):
    """Total loss and its terms per epoch, log scale."""
    keys = [("total", "total"), ("m", "measure"), ("g_loss", "geometry"), ("t0", "topology"), ("r", "regularization")]
    with figure_style():
        fig, ax = plt.subplots(figsize=(6, 3.5))
        epochs = range(len(history))
        for key, label in keys:
            values = [max(rec.get(key, 0.0), 1e-16) for rec in history]
            if history:
                ax.plot(epochs, values, label=label, lw=2.0 if key == "total" else 1.0)
        ax.set_yscale("log")
        ax.set_xlabel("epoch")
        ax.set_ylabel("loss")
        if history:
            ax.legend(frameon=False, fontsize=8)
        if title:
            ax.set_title(title)
        _save(fig, path)


def plot_bench(rows: list[dict], path, title: str | None = None):
    """Recovery quotient per (dataset, method, budget), annotated with the complex size."""
    with figure_style():
        fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(rows) + 2.0), 3.5))
        labels = [f"{r['dataset']}\n{r['method']}@{r['budget']}" for r in rows]
        xs = range(len(rows))
        heights = [float(r["quotient"]) for r in rows]
        ax.bar(xs, heights, color=[DIM_COLORS[i % len(DIM_COLORS)] for i in xs])
        for x, r in zip(xs, rows):
            ax.annotate(str(r["simplices"]), (x, float(r["quotient"])), ha="center", va="bottom", fontsize=7)
        ax.set_xticks(list(xs))
        ax.set_xticklabels(labels, fontsize=7)
        ax.set_ylim(0, 1.1)
        ax.set_ylabel("recovery quotient")
        if title:
            ax.set_title(title)
        _save(fig, path)
