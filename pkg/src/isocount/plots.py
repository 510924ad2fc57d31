"""PNG figures for CLI reports (matplotlib, headless backend)."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.tight_layout()
    # fixed metadata keeps the bytes stable across runs
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)
    return path


def bar_figure(path: str, labels: Sequence[str], values: Sequence[float], *, title: str = "",
               ylabel: str = "", errors: Sequence[float] | None = None,
               reference: Sequence[float] | None = None, reference_label: str = "expected") -> str:
    """Bars with optional error bars and a second series of reference values."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.6 * len(labels) + 2), 3.5))
    x = range(len(labels))
    width = 0.4 if reference is not None else 0.7
    offset = width / 2 if reference is not None else 0.0
    ax.bar([i - offset for i in x], values, width, yerr=errors, capsize=3, label="measured")
    if reference is not None:
        ax.bar([i + offset for i in x], reference, width, label=reference_label, alpha=0.7)
        ax.legend()
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=45 if len(labels) > 4 else 0, ha="right" if len(labels) > 4 else "center")
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def scatter_figure(path: str, xs: Sequence[float], ys: Sequence[float], *, title: str = "",
                   xlabel: str = "", ylabel: str = "", hline: float | None = None,
                   vline: float | None = None, logx: bool = False) -> str:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.scatter(xs, ys, s=6, alpha=0.5)
    if hline is not None:
        ax.axhline(hline, color="red", linestyle="--", linewidth=1)
    if vline is not None:
        ax.axvline(vline, color="gray", linestyle=":", linewidth=1)
    if logx:
        ax.set_xscale("log")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def errorbar_figure(path: str, labels: Sequence[str], values: Sequence[float], errors: Sequence[float],
                    reference: float, *, title: str = "", ylabel: str = "") -> str:
    """Point estimates with error bars against one horizontal reference value."""
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    x = list(range(len(labels)))
    ax.errorbar(x, values, yerr=errors, fmt="o", capsize=4)
    ax.axhline(reference, color="red", linestyle="--", linewidth=1)
    ax.set_xticks(x)
    ax.set_xticklabels(labels)
    ax.set_xlim(-0.5, len(labels) - 0.5)
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    return _save(fig, path)
