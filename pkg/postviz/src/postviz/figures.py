"""Figure generation from run directories: enstrophy series and field maps."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .rundir import RunDirectory, RunDirectoryError


def _window_mask(t: np.ndarray, window) -> np.ndarray:
    lo, hi = window
    return (t >= lo) & (t <= hi)


def plot_enstrophy(
    run_dirs,
    out_path,
    window=None,
    zoom=None,
) -> Path:
    """Overlaid per-layer enstrophy histories with zoomed-in right panels.

    One curve per run directory in each panel, labeled from the manifest.
    ``window`` restricts the left panels (defaults to the full series);
    ``zoom`` selects the right panels (defaults to the latter half of the
    window). An empty selection is an error rather than an empty plot.
    """
    runs = [d if isinstance(d, RunDirectory) else RunDirectory(d) for d in run_dirs]
    if not runs:
        raise RunDirectoryError("need at least one run directory")

    series = [run.enstrophy_series() for run in runs]
    if window is None:
        t0 = min(s[0][0] for s in series)
        t1 = max(s[0][-1] for s in series)
        window = (t0, t1)
    if zoom is None:
        zoom = (window[0] + 0.75 * (window[1] - window[0]), window[1])

    fig, axes = plt.subplots(2, 2, figsize=(11, 7))
    panels = [
        (axes[0, 0], 1, window, "top layer"),
        (axes[0, 1], 1, zoom, "top layer (zoom)"),
        (axes[1, 0], 2, window, "bottom layer"),
        (axes[1, 1], 2, zoom, "bottom layer (zoom)"),
    ]
    for ax, layer, win, title in panels:
        drew = False
        for run, (t, e1, e2) in zip(runs, series):
            mask = _window_mask(t, win)
            if not mask.any():
                continue
            values = e1 if layer == 1 else e2
            ax.plot(t[mask], values[mask], label=run.label, linewidth=1.0)
            drew = True
        if not drew:
            plt.close(fig)
            raise RunDirectoryError(f"no samples fall inside the window {win}")
        ax.set_xlabel("t")
        ax.set_ylabel(f"enstrophy E{layer}")
        ax.set_title(title)
        ax.set_xlim(*win)
    axes[0, 0].legend(fontsize=8)
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path


def plot_field(run_dir, name: str, out_path, diff_with=None) -> Path:
    """Heatmap of one field dump with its own color bar.

    With ``diff_with`` (another run directory), renders the absolute
    difference between the two runs' dumps of the same field instead.
    """
    run = run_dir if isinstance(run_dir, RunDirectory) else RunDirectory(run_dir)
    field = run.field(name)
    data = field.values
    title = f"{name}  [{run.label}]"
    cmap = "RdBu_r"
    if diff_with is not None:
        other = diff_with if isinstance(diff_with, RunDirectory) else RunDirectory(diff_with)
        other_field = other.field(name)
        if other_field.values.shape != data.shape:
            raise RunDirectoryError(
                f"field {name!r}: shapes differ "
                f"({data.shape} vs {other_field.values.shape})"
            )
        data = np.abs(data - other_field.values)
        title = f"|{name} difference|  [{run.label} vs {other.label}]"
        cmap = "magma"

    fig, ax = plt.subplots(figsize=(5, 5 * (field.yf - field.y0) / (field.xf - field.x0)))
    im = ax.imshow(
        data, origin="lower", extent=field.extent, aspect="equal", cmap=cmap,
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, shrink=0.9)
    ax.set_title(title, fontsize=9)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    out_path = Path(out_path)
    fig.savefig(out_path, dpi=130)
    plt.close(fig)
    return out_path
