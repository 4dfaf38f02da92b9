"""Convergence-curve and dictionary-mosaic figures."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .io import PlotDataError, read_itkm_matrix, read_metrics_csv


@dataclass(frozen=True)
class PlotSpec:
    """One convergence figure from one or more metrics CSVs.

    ``inputs`` maps a series label prefix to a CSV path; within each CSV
    the rows are further grouped by algorithm.  ``metric`` selects the
    y-axis: 'd_asym' (log scale) or 'recovery_rate' (linear).
    """

    inputs: dict[str, str | Path]
    output: str | Path
    metric: str = "d_asym"
    title: str | None = None

    def __post_init__(self):
        if self.metric not in ("d_asym", "recovery_rate"):
            raise PlotDataError(f"unsupported metric {self.metric!r}")
        if not self.inputs:
            raise PlotDataError("at least one input CSV is required")


def _series(rows: list[dict], metric: str) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Per-algorithm (iteration, trial-mean) curves; init rows (iter -1) included."""
    out = {}
    for algo in sorted({r["algorithm"] for r in rows}):
        by_iter: dict[int, list[float]] = {}
        for r in rows:
            if r["algorithm"] == algo and math.isfinite(r[metric]):
                by_iter.setdefault(r["iter"], []).append(r[metric])
        iters = np.array(sorted(by_iter))
        means = np.array([np.mean(by_iter[i]) for i in iters])
        out[algo] = (iters, means)
    return out


def plot_convergence(spec: PlotSpec) -> Path:
    """Render trial-averaged metric curves; returns the output path."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    plotted = 0
    for label, path in spec.inputs.items():
        rows = read_metrics_csv(path)
        for algo, (iters, means) in _series(rows, spec.metric).items():
            name = f"{label} {algo}".strip() if label else algo
            ax.plot(iters, means, marker=".", label=name)
            plotted += 1
    if plotted == 0:
        plt.close(fig)
        raise PlotDataError("no series to plot")
    ax.set_xlabel("iteration")
    if spec.metric == "d_asym":
        ax.set_yscale("log")
        ax.set_ylabel("distance to generating dictionary")
    else:
        ax.set_ylabel("recovery rate")
        ax.set_ylim(0.0, 1.05)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    if spec.title:
        ax.set_title(spec.title)
    out = Path(spec.output)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out


def mosaic_array(atoms: np.ndarray, patch_edge: int) -> np.ndarray:
    """Tile each atom as a min-max-scaled p x p image in a near-square grid."""
    d, K = atoms.shape
    p = patch_edge
    if d != p * p:
        raise PlotDataError(f"atoms of length {d} cannot be reshaped to {p}x{p}")
    cols = math.ceil(math.sqrt(K))
    rows = math.ceil(K / cols)
    grid = np.ones((rows * (p + 1) - 1, cols * (p + 1) - 1))  # 1-pixel white gutters
    for k in range(K):
        tile = atoms[:, k].reshape(p, p)
        lo, hi = tile.min(), tile.max()
        tile = (tile - lo) / (hi - lo) if hi - lo > 1e-15 else np.full_like(tile, 0.5)
        r, c = divmod(k, cols)
        grid[r * (p + 1) : r * (p + 1) + p, c * (p + 1) : c * (p + 1) + p] = tile
    return grid


def plot_mosaic(dictionary_path: str | Path, patch_edge: int, output: str | Path) -> Path:
    """Render an ITKM dictionary file as an atom mosaic; returns the output path."""
    atoms = read_itkm_matrix(dictionary_path)
    grid = mosaic_array(atoms, patch_edge)
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.imshow(grid, cmap="gray", vmin=0.0, vmax=1.0, interpolation="nearest")
    ax.set_axis_off()
    out = Path(output)
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return out
