"""Wind-driven double-gyre benchmark: canned configurations and statistics.

Both cases run on [0, 1] x [-1, 1] (L = 2) under the steady zonal forcing
F1 = sin(pi y), F2 = 0, starting from rest, with time step 2.5e-5 over the
horizon [0, 100] and time averages over [20, 100]. A resolved run uses the
256x512 mesh (h about three times below the Munk scale); the filtered
models target the coarser meshes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .filtering import FilterConfig
from .grid import BoundaryCondition, GridSpec
from .physics import PhysicalParams
from .timeloop import StepConfig

__all__ = [
    "CASES",
    "COARSE_MESHES",
    "DNS_MESH",
    "BenchmarkCase",
    "EnstrophyStats",
    "make_case",
    "default_alpha",
    "enstrophy_stats",
    "series_l2_error",
    "reference_stats",
]

DOMAIN = dict(x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
DT = 2.5e-5
T_END = 100.0
AVG_WINDOW = (20.0, 100.0)
DNS_MESH = (256, 512)
COARSE_MESHES = ((64, 128), (32, 64), (16, 32), (8, 16))

CASES = {
    "case1": PhysicalParams(Ro=0.001, Re=450.0, Fr=0.1, sigma=0.005, delta=0.5, L=2.0),
    "case2": PhysicalParams(Ro=0.001, Re=450.0, Fr=0.1, sigma=0.01, delta=0.1, L=2.0),
}

# Filtering radius per case, as a multiple of the mesh size h.
ALPHA_OVER_H = {"case1": math.sqrt(2.0), "case2": 1.0}


def wind_forcing(x, y):
    """Steady double-gyre wind-stress curl acting on the top layer."""
    return np.sin(np.pi * y)


@dataclass(frozen=True)
class BenchmarkCase:
    """A fully specified, runnable benchmark configuration."""

    name: str
    grid: GridSpec
    params: PhysicalParams
    filter: FilterConfig
    dt: float = DT
    t_end: float = T_END
    window: tuple[float, float] = AVG_WINDOW

    def step_config(self, solver_tol: float | None = None,
                    solver_max_iter: int | None = None) -> StepConfig:
        kwargs = {}
        if solver_tol is not None:
            kwargs["solver_tol"] = solver_tol
        return StepConfig(
            dt=self.dt,
            params=self.params,
            filter=self.filter,
            forcing1=wind_forcing,
            forcing2=0.0,
            q1_bc=BoundaryCondition.of_y(),
            solver_max_iter=solver_max_iter,
            **kwargs,
        )


def default_alpha(name: str, mesh: tuple[int, int]) -> float:
    """Case-specific filtering radius, O(h): sqrt(2) h or h."""
    h = (DOMAIN["xf"] - DOMAIN["x0"]) / mesh[0]
    return ALPHA_OVER_H[name] * h


def make_case(
    name: str,
    mesh: tuple[int, int] | str,
    filter_mode: str = "none",
    alpha: float | None = None,
) -> BenchmarkCase:
    """Assemble a runnable configuration for one benchmark run.

    ``mesh`` is (nx, ny) or a string like "32x64"; it must be the resolved
    mesh or one of the supported coarse meshes. When a filter is requested
    and alpha is not given, the case default (sqrt(2) h for case 1, h for
    case 2) is used.
    """
    if name not in CASES:
        raise ValueError(f"unknown case {name!r}; choose from {sorted(CASES)}")
    if isinstance(mesh, str):
        try:
            nx, ny = (int(v) for v in mesh.lower().split("x"))
        except ValueError:
            raise ValueError(f"bad mesh spec {mesh!r}, expected like '32x64'") from None
        mesh = (nx, ny)
    if mesh != DNS_MESH and mesh not in COARSE_MESHES:
        known = [DNS_MESH, *COARSE_MESHES]
        raise ValueError(f"unsupported mesh {mesh}; choose from {known}")
    grid = GridSpec(nx=mesh[0], ny=mesh[1], **DOMAIN)
    if filter_mode == "none":
        fconf = FilterConfig(mode="none", alpha=0.0)
    else:
        if alpha is None:
            alpha = default_alpha(name, mesh)
        fconf = FilterConfig(mode=filter_mode, alpha=alpha)
    return BenchmarkCase(name=name, grid=grid, params=CASES[name], filter=fconf)


@dataclass(frozen=True)
class EnstrophyStats:
    """Average and extrema of a sampled enstrophy series over a window."""

    average: float
    minimum: float
    maximum: float
    l2_error: float | None = None

    def __post_init__(self):
        if not (self.minimum <= self.average <= self.maximum):
            raise ValueError("statistics violate min <= average <= max")


def _window_mask(times: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    ta, tb = window
    return (times >= ta - 1e-12) & (times <= tb + 1e-12)


def series_l2_error(
    times: np.ndarray,
    values: np.ndarray,
    ref_times: np.ndarray,
    ref_values: np.ndarray,
    window: tuple[float, float] | None = None,
) -> float:
    """Rectangle-rule L2 distance between two series on common sample times."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    ref_times = np.asarray(ref_times, dtype=float)
    ref_values = np.asarray(ref_values, dtype=float)
    if times.shape != ref_times.shape or not np.allclose(times, ref_times, atol=1e-9):
        raise ValueError("series are sampled on different time grids")
    if window is not None:
        mask = _window_mask(times, window)
        times, values, ref_values = times[mask], values[mask], ref_values[mask]
    if times.size < 2:
        raise ValueError("need at least two common samples")
    dt_sample = float(times[1] - times[0])
    diff = values - ref_values
    return math.sqrt(float(np.vdot(diff, diff)) * dt_sample)


def enstrophy_stats(
    times,
    values,
    window: tuple[float, float] = AVG_WINDOW,
    ref_times=None,
    ref_values=None,
) -> EnstrophyStats:
    """Window statistics of one enstrophy series, optionally vs a reference."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mask = _window_mask(times, window)
    if not mask.any():
        raise ValueError(f"no samples fall inside the window {window}")
    sel = values[mask]
    err = None
    if ref_times is not None:
        err = series_l2_error(times, values, ref_times, ref_values, window=window)
    return EnstrophyStats(
        average=float(sel.mean()),
        minimum=float(sel.min()),
        maximum=float(sel.max()),
        l2_error=err,
    )


def reference_stats() -> dict:
    """Published reference statistics shipped with the package.

    These are quoted benchmark numbers used for tolerance checks; they are
    not produced by this implementation.
    """
    with resources.files("qg2").joinpath("data/reference_enstrophy.json").open() as fh:
        return json.load(fh)
