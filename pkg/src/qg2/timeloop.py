"""Segregated BDF1 time integrator, state management, and diagnostics.

Each time step advances the coupled system through six sub-solves, strictly
in order: top-layer vorticity transport (implicit, convecting flux frozen at
the previous stream function), top-layer filter, top-layer stream-function
inversion, then the same three for the bottom layer. The bottom-layer
transport consumes the freshly updated top-layer stream function; the
per-layer convecting fluxes always come from the previous time level.

The loop keeps no hidden state: with the filter disabled the trajectory is
bitwise identical to a loop without the filter sub-steps, and two runs with
the same configuration produce identical outputs.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from . import filtering, fvops, linsolve
from .filtering import FilterConfig
from .grid import (
    BoundaryCondition,
    GridSpec,
    NonFiniteFieldError,
    ScalarField,
    read_fld,
    write_fld,
    y_field,
)
from .physics import PhysicalParams

__all__ = [
    "SimState",
    "StepConfig",
    "Accumulators",
    "RunSinks",
    "Stepper",
    "StepConvergenceError",
    "initialize",
    "step",
    "run",
    "enstrophy",
    "invert_kinematic",
    "write_checkpoint",
    "read_checkpoint",
]

DEFAULT_ENSTROPHY_STRIDE = 0.1

_STATE_FIELDS = ("q1", "q2", "qbar1", "qbar2", "psi1", "psi2")


class StepConvergenceError(RuntimeError):
    """An inner solve failed to converge; carries step name and residual."""

    def __init__(self, step_name: str, iterations: int, residual: float):
        self.step_name = step_name
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"{step_name}: no convergence after {iterations} iterations "
            f"(relative residual {residual:.3e})"
        )


@dataclass(frozen=True)
class SimState:
    """Prognostic fields of both layers at one time level."""

    q1: ScalarField
    q2: ScalarField
    qbar1: ScalarField
    qbar2: ScalarField
    psi1: ScalarField
    psi2: ScalarField
    t: float

    def __post_init__(self):
        grid = self.q1.grid
        for name in _STATE_FIELDS[1:]:
            if getattr(self, name).grid != grid:
                raise ValueError(f"state field {name} lives on a different grid")

    @property
    def grid(self) -> GridSpec:
        return self.q1.grid

    def fields(self) -> dict[str, ScalarField]:
        return {name: getattr(self, name) for name in _STATE_FIELDS}


@dataclass(frozen=True)
class StepConfig:
    """Everything one time step needs besides the state itself.

    forcing1/forcing2 are vectorized functions of (x, y); the vorticity
    boundary conditions may differ between layers (they do in the
    verification runs). Stream functions are held at zero on the boundary.
    """

    dt: float
    params: PhysicalParams
    filter: FilterConfig = FilterConfig()
    forcing1: Callable | float = 0.0
    forcing2: Callable | float = 0.0
    q1_bc: BoundaryCondition = field(default_factory=BoundaryCondition.of_y)
    q2_bc: BoundaryCondition | None = None
    qbar1_bc: BoundaryCondition | None = None
    qbar2_bc: BoundaryCondition | None = None
    solver_tol: float = linsolve.DEFAULT_TOL
    solver_max_iter: int | None = None

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")


def _sample_forcing(grid: GridSpec, forcing) -> np.ndarray:
    if callable(forcing):
        X, Y = grid.meshgrid()
        return np.broadcast_to(np.asarray(forcing(X, Y), dtype=float), grid.shape).copy()
    if isinstance(forcing, ScalarField):
        return forcing.values.copy()
    arr = np.asarray(forcing, dtype=float)
    if arr.ndim == 0:
        return np.full(grid.shape, float(arr))
    return arr.reshape(grid.shape).copy()


class Stepper:
    """Precomputed operators and the fast per-step advance for one config."""

    def __init__(self, grid: GridSpec, config: StepConfig):
        if grid.nx < 2 or grid.ny < 2:
            raise ValueError("time stepping needs at least 2x2 cells")
        self.grid = grid
        self.config = config
        p = config.params
        self.dt = config.dt
        self.re = p.Re
        self.sigma = p.sigma
        self.c1 = p.Fr / p.delta
        self.c2 = p.Fr / (1.0 - p.delta)
        self.k1 = p.Fr / (p.Re * p.delta)
        self.k2 = p.Fr / (p.Re * (1.0 - p.delta))

        self.q1_bc = config.q1_bc
        self.q2_bc = config.q2_bc if config.q2_bc is not None else config.q1_bc
        self.qbar1_bc = config.qbar1_bc if config.qbar1_bc is not None else self.q1_bc
        self.qbar2_bc = config.qbar2_bc if config.qbar2_bc is not None else self.q2_bc
        self.psi_bc = BoundaryCondition.constant(0.0)

        self.f1 = _sample_forcing(grid, config.forcing1)
        self.f2 = _sample_forcing(grid, config.forcing2)
        self.yv = y_field(grid).values

        # Constant diffusion rows of the transport solves, scaled by -1/Re so
        # they add directly into the implicit matrix.
        inv_dt = 1.0 / self.dt
        self._diff = {}
        for layer, bc in ((1, self.q1_bc), (2, self.q2_bc)):
            rows = fvops.laplacian_stencil(grid, bc, 1.0)
            self._diff[layer] = {
                "diag": inv_dt - rows.diag / self.re,
                "east": -rows.east / self.re,
                "west": -rows.west / self.re,
                "north": -rows.north / self.re,
                "south": -rows.south / self.re,
                # Op(q) includes +bc/(-Re)... the equation moves it to the rhs:
                # rhs += bc_term / Re.
                "rhs": rows.bc_term / self.re,
            }

        # Laplacian rows for the explicit stream-function terms (homogeneous
        # Dirichlet, so no affine part).
        self._lap_psi = fvops.laplacian_stencil(grid, self.psi_bc, 1.0)

        # Constant SPD systems of the stream-function inversions; the
        # LinearSystem objects are reused with an in-place rhs update (the
        # six solves of a step are strictly sequential, so sharing the rhs
        # buffer is safe).
        kx, ky = fvops.constant_diffusivity_faces(grid, p.Ro)
        self._psi_rows = {
            1: fvops.spd_diffusion_rows(grid, self.psi_bc, kx, ky, mass=self.c1),
            2: fvops.spd_diffusion_rows(grid, self.psi_bc, kx, ky, mass=self.c2),
        }
        self._psi_sys = {
            layer: linsolve.system_from_rows(rows, np.zeros(grid.shape), symmetric=True)
            for layer, rows in self._psi_rows.items()
        }
        for sys_ in self._psi_sys.values():
            sys_.validate()

        self.tol = config.solver_tol
        self.max_iter = config.solver_max_iter

    # -- building blocks (also used by tests and the verification harness) --

    def fluxes(self, psi: ScalarField) -> fvops.FaceFluxField:
        return fvops.face_fluxes(psi)

    def transport_system(
        self,
        layer: int,
        qn: ScalarField,
        psi_own: ScalarField,
        psi_other: ScalarField,
        forcing_scale: float = 1.0,
    ) -> linsolve.LinearSystem:
        """Implicit convection-diffusion system for one layer.

        psi_own is the same-layer stream function at the previous time level
        (it provides the convecting flux and the lagged coupling terms);
        psi_other is the opposite layer's stream function as consumed by the
        printed scheme: previous level for layer 1, fresh level for layer 2.
        """
        flux = self.fluxes(psi_own)
        bc = self.q1_bc if layer == 1 else self.q2_bc
        conv = fvops.convection_stencil(flux, bc)
        d = self._diff[layer]

        if layer == 1:
            forcing = self.f1
            w = self.k1 * (psi_own.values - psi_other.values)  # -k1*(psi2-psi1)
        else:
            forcing = self.f2
            w = (self.k2 - self.sigma) * psi_own.values - self.k2 * psi_other.values
        rhs = forcing * forcing_scale + qn.values / self.dt + d["rhs"] - conv.bc_term
        rhs += self._lap_psi.apply_matrix(w)

        return linsolve.LinearSystem(
            grid=self.grid,
            diag=conv.diag + d["diag"],
            east=conv.east + d["east"],
            west=conv.west + d["west"],
            north=conv.north + d["north"],
            south=conv.south + d["south"],
            rhs=rhs,
            symmetric=False,
            checked=True,  # assembled here; diagonal dominated by 1/dt
        )

    def psi_system(self, layer: int, qbar: ScalarField, psi_other: ScalarField) -> linsolve.LinearSystem:
        """SPD kinematic inversion for one layer's stream function."""
        c = self.c1 if layer == 1 else self.c2
        system = self._psi_sys[layer]
        # rhs = (y + c*psi_other - qbar) - bc_term, updated in place
        rhs = system.rhs
        np.multiply(psi_other.values, c, out=rhs)
        rhs += self.yv
        rhs -= qbar.values
        rhs -= self._psi_rows[layer].bc_term
        return system

    def _solve(self, name: str, system: linsolve.LinearSystem, guess: ScalarField,
               stats: list) -> ScalarField:
        sol, report = linsolve.solve(system, guess, tol=self.tol, max_iter=self.max_iter)
        stats.append((name, report.iterations, report.final_relative_residual))
        if not report.converged:
            raise StepConvergenceError(name, report.iterations, report.final_relative_residual)
        return sol

    def _filter(self, name: str, q_new: ScalarField, bc_q, bc_bar, guess, stats) -> ScalarField:
        if self.config.filter.is_identity:
            return q_new
        qbar, report = filtering.filtered_step(
            q_new, bc_q, self.config.filter, bc_filtered=bc_bar,
            initial_guess=guess, tol=self.tol, max_iter=self.max_iter,
        )
        stats.append((name, report.iterations, report.final_relative_residual))
        if not report.converged:
            raise StepConvergenceError(name, report.iterations, report.final_relative_residual)
        return qbar

    # -- one full step --

    def advance(self, state: SimState, stats: list | None = None,
                guesses: dict | None = None) -> SimState:
        """Steps 1-6 in order; returns the state at t + dt.

        ``guesses`` optionally maps field names to warm-start iterates for
        the inner solves (the time loop passes extrapolated previous
        states). Guesses only affect iteration counts, not the solution.
        """
        if stats is None:
            stats = []
        if guesses is None:
            guesses = {}
        q1n = self._solve(
            "step1 top-layer vorticity",
            self.transport_system(1, state.q1, state.psi1, state.psi2),
            guesses.get("q1", state.q1), stats,
        )
        qb1n = self._filter("step2 top-layer filter", q1n, self.q1_bc,
                            self.qbar1_bc, guesses.get("qbar1", state.qbar1), stats)
        p1n = self._solve(
            "step3 top-layer stream function",
            self.psi_system(1, qb1n, state.psi2),
            guesses.get("psi1", state.psi1), stats,
        )
        q2n = self._solve(
            "step4 bottom-layer vorticity",
            self.transport_system(2, state.q2, state.psi2, p1n),
            guesses.get("q2", state.q2), stats,
        )
        qb2n = self._filter("step5 bottom-layer filter", q2n, self.q2_bc,
                            self.qbar2_bc, guesses.get("qbar2", state.qbar2), stats)
        p2n = self._solve(
            "step6 bottom-layer stream function",
            self.psi_system(2, qb2n, p1n),
            guesses.get("psi2", state.psi2), stats,
        )
        return SimState(q1n, q2n, qb1n, qb2n, p1n, p2n, state.t + self.dt)


def initialize(grid: GridSpec, params: PhysicalParams, config: StepConfig | None = None) -> SimState:
    """Rest state: vorticities equal the planetary field y, streams at rest."""
    del params, config  # the rest state is parameter-independent
    y = y_field(grid)
    zero = ScalarField.zeros(grid)
    return SimState(q1=y, q2=y, qbar1=y, qbar2=y, psi1=zero, psi2=zero, t=0.0)


def step(state: SimState, config: StepConfig, stepper: Stepper | None = None) -> SimState:
    """Advance one time step. Builds a fresh Stepper unless one is passed."""
    if stepper is None:
        stepper = Stepper(state.grid, config)
    return stepper.advance(state)


def enstrophy(state: SimState) -> tuple[float, float]:
    """Layer enstrophies, integrals of the unfiltered vorticities squared."""
    return (
        fvops.integral_of_square(state.q1),
        fvops.integral_of_square(state.q2),
    )


def invert_kinematic(
    stepper: Stepper,
    qbar1: ScalarField,
    qbar2: ScalarField,
    psi1: ScalarField | None = None,
    psi2: ScalarField | None = None,
    tol: float = 1e-13,
    max_sweeps: int = 200,
) -> tuple[ScalarField, ScalarField]:
    """Jointly consistent stream functions for given filtered vorticities.

    Alternates the two per-layer inversions until the pair stops moving;
    the coupling is a contraction so this converges geometrically. Used to
    start verification runs from vorticity data alone.
    """
    grid = stepper.grid
    p1 = psi1 if psi1 is not None else ScalarField.zeros(grid)
    p2 = psi2 if psi2 is not None else ScalarField.zeros(grid)
    stats: list = []
    for _ in range(max_sweeps):
        p1_new = stepper._solve("kinematic psi1", stepper.psi_system(1, qbar1, p2), p1, stats)
        p2_new = stepper._solve("kinematic psi2", stepper.psi_system(2, qbar2, p1_new), p2, stats)
        move = max(
            float(np.max(np.abs(p1_new.values - p1.values))),
            float(np.max(np.abs(p2_new.values - p2.values))),
        )
        scale = max(float(np.max(np.abs(p1_new.values))), float(np.max(np.abs(p2_new.values))), 1e-30)
        p1, p2 = p1_new, p2_new
        if move <= tol * scale:
            break
    return p1, p2


@dataclass
class Accumulators:
    """Running sums for time averages plus the sampled enstrophy series.

    Average sums only accept samples whose time lies inside the window
    (window=None disables averaging); the enstrophy series covers the whole
    run at the configured stride (an infinite stride disables sampling).
    """

    window: tuple[float, float] | None
    enstrophy_stride: float = DEFAULT_ENSTROPHY_STRIDE
    count: int = 0
    sum_q1: np.ndarray | None = None
    sum_q2: np.ndarray | None = None
    sum_psi1: np.ndarray | None = None
    sum_psi2: np.ndarray | None = None
    times: list = field(default_factory=list)
    e1: list = field(default_factory=list)
    e2: list = field(default_factory=list)

    def _ensure(self, grid: GridSpec) -> None:
        if self.sum_q1 is None:
            self.sum_q1 = np.zeros(grid.shape)
            self.sum_q2 = np.zeros(grid.shape)
            self.sum_psi1 = np.zeros(grid.shape)
            self.sum_psi2 = np.zeros(grid.shape)

    def add_average_sample(self, state: SimState) -> None:
        if self.window is None:
            raise ValueError("averaging is disabled for this accumulator")
        ta, tb = self.window
        if not (ta <= state.t <= tb):
            raise ValueError(f"sample at t={state.t} lies outside the window [{ta}, {tb}]")
        self._ensure(state.grid)
        self.sum_q1 += state.q1.values
        self.sum_q2 += state.q2.values
        self.sum_psi1 += state.psi1.values
        self.sum_psi2 += state.psi2.values
        self.count += 1

    def add_enstrophy_sample(self, state: SimState) -> tuple[float, float]:
        e1, e2 = enstrophy(state)
        self.times.append(state.t)
        self.e1.append(e1)
        self.e2.append(e2)
        return e1, e2

    def averages(self, grid: GridSpec) -> dict[str, ScalarField]:
        if self.count == 0:
            raise ValueError("no samples accumulated; the averaging window was never entered")
        inv = 1.0 / self.count
        return {
            "q1": ScalarField(grid, self.sum_q1 * inv, copy=False),
            "q2": ScalarField(grid, self.sum_q2 * inv, copy=False),
            "psi1": ScalarField(grid, self.sum_psi1 * inv, copy=False),
            "psi2": ScalarField(grid, self.sum_psi2 * inv, copy=False),
        }

    def series(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.asarray(self.times), np.asarray(self.e1), np.asarray(self.e2)


@dataclass
class RunSinks:
    """File outputs of a run; all optional."""

    enstrophy_csv: Path | str | None = None
    snapshot_times: tuple = ()
    snapshot_dir: Path | str | None = None
    checkpoint_every_steps: int = 0
    checkpoint_dir: Path | str | None = None
    solver_log_csv: Path | str | None = None


_CSV_FMT = "%.17g"


def _write_state(dirpath: Path, state: SimState) -> None:
    dirpath.mkdir(parents=True, exist_ok=True)
    for name, fld in state.fields().items():
        write_fld(dirpath / f"{name}.fld", fld, time=state.t)


def write_checkpoint(
    dirpath: Path | str,
    state: SimState,
    acc: Accumulators,
    t_origin: float,
    step_index: int,
    prev_state: SimState | None = None,
) -> None:
    """Full restartable dump: six fields, averaging sums, enstrophy series.

    The previous time level is stored too (when available) so the
    warm-start extrapolation, and with it the exact iteration sequence,
    survives a restart; resumed trajectories are bit-identical to
    uninterrupted ones.
    """
    dirpath = Path(dirpath)
    _write_state(dirpath, state)
    if prev_state is not None:
        _write_state(dirpath / "prev", prev_state)
    meta = {
        "t": _CSV_FMT % state.t,
        "t_origin": _CSV_FMT % t_origin,
        "step_index": str(step_index),
        "avg_count": str(acc.count),
        "window_a": _CSV_FMT % (acc.window[0] if acc.window else math.nan),
        "window_b": _CSV_FMT % (acc.window[1] if acc.window else math.nan),
        "enstrophy_stride": _CSV_FMT % acc.enstrophy_stride,
        "has_prev": "1" if prev_state is not None else "0",
    }
    with open(dirpath / "meta.txt", "w") as fh:
        for k, v in meta.items():
            fh.write(f"{k} = {v}\n")
    if acc.count > 0:
        for name, arr in (("q1", acc.sum_q1), ("q2", acc.sum_q2),
                          ("psi1", acc.sum_psi1), ("psi2", acc.sum_psi2)):
            write_fld(dirpath / f"sum_{name}.fld", ScalarField(state.grid, arr), time=state.t)
    with open(dirpath / "enstrophy.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "E1", "E2"])
        for t, e1, e2 in zip(acc.times, acc.e1, acc.e2):
            writer.writerow([_CSV_FMT % t, _CSV_FMT % e1, _CSV_FMT % e2])


def read_checkpoint(
    dirpath: Path | str,
) -> tuple[SimState, Accumulators, float, int, SimState | None]:
    """Inverse of write_checkpoint; restart is bit-exact."""
    dirpath = Path(dirpath)
    meta = {}
    with open(dirpath / "meta.txt") as fh:
        for line in fh:
            if "=" in line:
                k, v = line.split("=", 1)
                meta[k.strip()] = v.strip()
    fields = {}
    t = float(meta["t"])
    for name in _STATE_FIELDS:
        fields[name], _ = read_fld(dirpath / f"{name}.fld")
    state = SimState(t=t, **fields)
    prev_state = None
    if meta.get("has_prev") == "1":
        prev_fields = {}
        for name in _STATE_FIELDS:
            prev_fields[name], pt = read_fld(dirpath / "prev" / f"{name}.fld")
        prev_state = SimState(t=pt, **prev_fields)
    wa, wb = float(meta["window_a"]), float(meta["window_b"])
    window = None if math.isnan(wa) else (wa, wb)
    acc = Accumulators(
        window=window,
        enstrophy_stride=float(meta["enstrophy_stride"]),
        count=int(meta["avg_count"]),
    )
    if acc.count > 0:
        acc.sum_q1 = read_fld(dirpath / "sum_q1.fld")[0].values.copy()
        acc.sum_q2 = read_fld(dirpath / "sum_q2.fld")[0].values.copy()
        acc.sum_psi1 = read_fld(dirpath / "sum_psi1.fld")[0].values.copy()
        acc.sum_psi2 = read_fld(dirpath / "sum_psi2.fld")[0].values.copy()
    with open(dirpath / "enstrophy.csv") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            acc.times.append(float(row[0]))
            acc.e1.append(float(row[1]))
            acc.e2.append(float(row[2]))
    return state, acc, float(meta["t_origin"]), int(meta["step_index"]), prev_state


def _window_step_range(t_origin: float, dt: float,
                       window: tuple[float, float] | None) -> tuple[int, int]:
    if window is None:
        return 1, 0
    ta, tb = window
    n_lo = math.ceil((ta - t_origin) / dt - 1e-9)
    n_hi = math.floor((tb - t_origin) / dt + 1e-9)
    return n_lo, n_hi


def run(
    state: SimState,
    config: StepConfig,
    t_end: float,
    accumulators: Accumulators | None = None,
    sinks: RunSinks | None = None,
    t_origin: float | None = None,
    step_origin: int = 0,
    prev_state: SimState | None = None,
    progress: Callable | None = None,
) -> tuple[SimState, Accumulators]:
    """March the state to t_end, collecting diagnostics along the way.

    Time at global step n is always computed as t_origin + n*dt, so a run
    resumed from a checkpoint (which records t_origin, the step index, and
    the previous time level for warm starts) reproduces the uninterrupted
    trajectory exactly. Partial outputs are flushed before any abort
    propagates.

    Inner solves are warm-started from the linear extrapolation of the two
    most recent time levels, which only changes iteration counts, never the
    converged solutions.
    """
    if not t_end > state.t:
        raise ValueError(f"t_end={t_end} must exceed the current time {state.t}")
    dt = config.dt
    if t_origin is None:
        t_origin = state.t
    nsteps = int(round((t_end - state.t) / dt))
    if nsteps < 1:
        raise ValueError(f"t_end - t = {t_end - state.t} is below one time step {dt}")

    if accumulators is None:
        accumulators = Accumulators(window=(state.t, t_end))
    sinks = sinks or RunSinks()
    stepper = Stepper(state.grid, config)

    n_lo, n_hi = _window_step_range(t_origin, dt, accumulators.window)
    if math.isfinite(accumulators.enstrophy_stride):
        stride_steps = max(1, int(round(accumulators.enstrophy_stride / dt)))
    else:
        stride_steps = 0
    snapshot_steps = {
        int(round((ts - t_origin) / dt)): ts for ts in sinks.snapshot_times
    }

    ens_fh = log_fh = None
    ens_writer = log_writer = None
    try:
        if sinks.enstrophy_csv is not None:
            fresh = step_origin == 0 or not os.path.exists(sinks.enstrophy_csv)
            ens_fh = open(sinks.enstrophy_csv, "w" if fresh else "a", newline="")
            ens_writer = csv.writer(ens_fh)
            if fresh:
                ens_writer.writerow(["t", "E1", "E2"])
                for t, e1, e2 in zip(accumulators.times, accumulators.e1, accumulators.e2):
                    ens_writer.writerow([_CSV_FMT % t, _CSV_FMT % e1, _CSV_FMT % e2])
        if sinks.solver_log_csv is not None:
            log_fh = open(sinks.solver_log_csv, "w" if step_origin == 0 else "a", newline="")
            log_writer = csv.writer(log_fh)
            if step_origin == 0:
                log_writer.writerow(["step_index", "solve", "iterations", "relative_residual"])

        def sample_enstrophy(current: SimState) -> None:
            e1, e2 = accumulators.add_enstrophy_sample(current)
            if ens_writer is not None:
                ens_writer.writerow([_CSV_FMT % current.t, _CSV_FMT % e1, _CSV_FMT % e2])
                ens_fh.flush()

        if step_origin == 0 and stride_steps:
            sample_enstrophy(state)
        if step_origin in snapshot_steps and sinks.snapshot_dir is not None:
            _write_state(Path(sinks.snapshot_dir) / f"t{snapshot_steps[step_origin]:g}", state)

        stats: list = []
        prev = prev_state
        for local in range(1, nsteps + 1):
            n = step_origin + local
            stats.clear()
            guesses = None
            if prev is not None:
                guesses = {
                    name: 2.0 * getattr(state, name).values - getattr(prev, name).values
                    for name in _STATE_FIELDS
                }
            fields_state = stepper.advance(state, stats, guesses)
            t_n = t_origin + n * dt
            prev = state
            state = replace(fields_state, t=t_n)

            if log_writer is not None:
                for name, iters, res in stats:
                    log_writer.writerow([n, name, iters, _CSV_FMT % res])

            if n_lo <= n <= n_hi:
                accumulators.add_average_sample(state)
            if stride_steps and n % stride_steps == 0:
                sample_enstrophy(state)
            if n in snapshot_steps and sinks.snapshot_dir is not None:
                _write_state(Path(sinks.snapshot_dir) / f"t{snapshot_steps[n]:g}", state)
            if (
                sinks.checkpoint_every_steps
                and sinks.checkpoint_dir is not None
                and n % sinks.checkpoint_every_steps == 0
            ):
                write_checkpoint(
                    Path(sinks.checkpoint_dir) / f"checkpoint_{n:09d}",
                    state, accumulators, t_origin, n, prev_state=prev,
                )
            if progress is not None:
                progress(n, state)
    finally:
        if ens_fh is not None:
            ens_fh.close()
        if log_fh is not None:
            log_fh.close()

    return state, accumulators
