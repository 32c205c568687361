"""Manufactured-solution verification harness.

A steady polynomial solution on the unit square [-0.5, 0.5]^2 with known
forcings drives the full time-dependent solver (filter off); after a unit of
simulated time the discrete solution is compared against the exact fields on
a sequence of halved meshes, producing relative L2 errors and convergence
rates for both stream functions and both vorticities.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

from .filtering import FilterConfig
from .grid import BoundaryCondition, GridSpec, ScalarField, l2_relative_error
from .physics import PhysicalParams
from .timeloop import Accumulators, SimState, StepConfig, Stepper, invert_kinematic, run

__all__ = [
    "MMSConfig",
    "VARIABLES",
    "parameter_sets",
    "exact_psi",
    "exact_q",
    "exact_forcing",
    "q_boundary",
    "ConvergenceResult",
    "run_convergence_study",
    "write_report_csv",
    "format_report",
]

VARIABLES = ("psi1", "psi2", "q1", "q2")


def parameter_sets() -> dict[str, PhysicalParams]:
    """The six canonical verification parameter sets.

    One family fixes Ro = 1 and raises Re, the other fixes Re = 1 and lowers
    Ro; pairs across the families share the same Munk scale.
    """
    common = dict(Fr=0.1, sigma=0.0, delta=0.2, L=1.0)
    return {
        "ro1-re10": PhysicalParams(Ro=1.0, Re=10.0, **common),
        "ro1-re100": PhysicalParams(Ro=1.0, Re=100.0, **common),
        "ro1-re1000": PhysicalParams(Ro=1.0, Re=1000.0, **common),
        "re1-ro0.1": PhysicalParams(Ro=0.1, Re=1.0, **common),
        "re1-ro0.01": PhysicalParams(Ro=0.01, Re=1.0, **common),
        "re1-ro0.001": PhysicalParams(Ro=0.001, Re=1.0, **common),
    }


@dataclass(frozen=True)
class MMSConfig:
    """Amplitudes, parameters, and run settings of one verification case.

    The domain is fixed to [-0.5, 0.5]^2. The time step is dt_coarsest on
    the first mesh and halves with h so the convective CFL number stays
    fixed across the sequence. The inner solver tolerance sits far below
    the finest mesh's discretization error so algebraic error never
    pollutes the measured rates.
    """

    params: PhysicalParams
    a1: float = 1.0
    a2: float = 2.0
    meshes: tuple[int, ...] = (32, 64, 128, 256)
    dt_coarsest: float = 1e-3
    t_end: float = 1.0
    solver_tol: float = 1e-12

    def __post_init__(self):
        if not (self.a1 > 0 and self.a2 > 0):
            raise ValueError("amplitudes must be positive")
        if len(self.meshes) < 1:
            raise ValueError("at least one mesh is required")

    def amplitude(self, layer: int) -> float:
        if layer == 1:
            return self.a1
        if layer == 2:
            return self.a2
        raise ValueError(f"layer must be 1 or 2, got {layer}")

    def grid(self, n: int) -> GridSpec:
        return GridSpec(nx=n, ny=n, x0=-0.5, xf=0.5, y0=-0.5, yf=0.5)

    def dt_for(self, n: int) -> float:
        return self.dt_coarsest * self.meshes[0] / n


def exact_psi(layer: int, amplitude: float):
    """Stream function A (x^2 - 1/4)(y^2 - 1/4); vanishes on the boundary."""
    if layer not in (1, 2):
        raise ValueError(f"layer must be 1 or 2, got {layer}")
    a = float(amplitude)

    def psi(x, y):
        return a * (x * x - 0.25) * (y * y - 0.25)

    return psi


def exact_q(layer: int, config: MMSConfig):
    """Potential vorticity consistent with the exact stream functions."""
    p = config.params
    a_own = config.amplitude(layer)
    a_other = config.amplitude(3 - layer)
    coup = p.Fr / p.delta if layer == 1 else p.Fr / (1.0 - p.delta)
    ro = p.Ro

    def q(x, y):
        bowl = x * x + y * y - 0.5
        prod = (x * x - 0.25) * (y * y - 0.25)
        return 2.0 * a_own * ro * bowl + y + coup * (a_other - a_own) * prod

    return q


def exact_forcing(layer: int, config: MMSConfig):
    """Forcing that makes the exact fields a steady solution.

    The cross-layer coupling cancels against the diffusion of the coupling
    part of q, so only the self-advection terms and a constant survive. The
    bottom layer additionally carries the bottom-friction contribution
    through the (y^2 - 1/4) factor; benchmark verification runs use
    sigma = 0.
    """
    p = config.params
    a = config.amplitude(layer)
    ro, re = p.Ro, p.Re
    sig = p.sigma if layer == 2 else 0.0

    def forcing(x, y):
        eight = 8.0 * ro * a * a * x * y
        return (
            eight * (x * x - 0.25)
            - (eight + 2.0 * a * x - 2.0 * a * sig) * (y * y - 0.25)
            - 8.0 * a * ro / re
        )

    return forcing


def q_boundary(layer: int, config: MMSConfig) -> BoundaryCondition:
    """Dirichlet trace of the exact vorticity, evaluated at face centers."""
    return BoundaryCondition(exact_q(layer, config))


def step_config(config: MMSConfig, n: int) -> StepConfig:
    return StepConfig(
        dt=config.dt_for(n),
        params=config.params,
        filter=FilterConfig(mode="none", alpha=0.0),
        forcing1=exact_forcing(1, config),
        forcing2=exact_forcing(2, config),
        q1_bc=q_boundary(1, config),
        q2_bc=q_boundary(2, config),
        solver_tol=config.solver_tol,
    )


def initial_state(config: MMSConfig, n: int) -> SimState:
    """Exact vorticities; stream functions from the solver's own inversion.

    Inverting the discrete kinematic relations (rather than sampling the
    exact stream functions) avoids an O(h^2) inconsistency spike on the
    first step; the two choices agree within discretization error.
    """
    grid = config.grid(n)
    q1 = ScalarField.from_function(grid, exact_q(1, config))
    q2 = ScalarField.from_function(grid, exact_q(2, config))
    stepper = Stepper(grid, step_config(config, n))
    psi1, psi2 = invert_kinematic(stepper, q1, q2)
    return SimState(q1=q1, q2=q2, qbar1=q1, qbar2=q2, psi1=psi1, psi2=psi2, t=0.0)


@dataclass
class ConvergenceResult:
    """Per-variable errors and rates over a mesh sequence."""

    case: str
    meshes: list[int]
    errors: dict[str, list[float]] = field(default_factory=dict)
    rates: dict[str, list[float | None]] = field(default_factory=dict)

    def compute_rates(self) -> None:
        self.rates = {}
        for var, errs in self.errors.items():
            out: list[float | None] = [None]
            for coarse, fine in zip(errs, errs[1:]):
                out.append(math.log2(coarse / fine) if fine > 0 else float("inf"))
            self.rates[var] = out


def run_single_mesh(config: MMSConfig, n: int, t_end: float | None = None) -> dict[str, float]:
    """Run one mesh to t_end and return the four relative L2 errors."""
    grid = config.grid(n)
    state = initial_state(config, n)
    cfg = step_config(config, n)
    acc = Accumulators(window=None, enstrophy_stride=math.inf)
    state, _ = run(state, cfg, t_end if t_end is not None else config.t_end, accumulators=acc)
    exact = {
        "psi1": ScalarField.from_function(grid, exact_psi(1, config.a1)),
        "psi2": ScalarField.from_function(grid, exact_psi(2, config.a2)),
        "q1": ScalarField.from_function(grid, exact_q(1, config)),
        "q2": ScalarField.from_function(grid, exact_q(2, config)),
    }
    return {var: l2_relative_error(getattr(state, var), exact[var]) for var in VARIABLES}


def run_convergence_study(config: MMSConfig, case: str = "custom",
                          progress=None) -> ConvergenceResult:
    """Errors and rates over the configured mesh sequence."""
    result = ConvergenceResult(case=case, meshes=list(config.meshes))
    result.errors = {var: [] for var in VARIABLES}
    for n in config.meshes:
        errs = run_single_mesh(config, n)
        for var in VARIABLES:
            result.errors[var].append(errs[var])
        if progress is not None:
            progress(n, errs)
    result.compute_rates()
    return result


def write_report_csv(result: ConvergenceResult, path) -> None:
    """Machine-readable report: one row per (mesh, variable)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mesh_size", "var", "error", "rate"])
        for k, n in enumerate(result.meshes):
            for var in VARIABLES:
                rate = result.rates[var][k]
                writer.writerow([
                    f"1/{n}", var,
                    "%.17g" % result.errors[var][k],
                    "" if rate is None else "%.2f" % rate,
                ])


def format_report(result: ConvergenceResult) -> str:
    """Text table shaped like the published convergence tables."""
    lines = [f"case: {result.case}"]
    header = f"{'mesh':>8} |"
    for var in VARIABLES:
        header += f" {var:>9} {'rate':>5} |"
    lines.append(header)
    lines.append("-" * len(header))
    for k, n in enumerate(result.meshes):
        row = f"{'1/' + str(n):>8} |"
        for var in VARIABLES:
            err = result.errors[var][k]
            rate = result.rates[var][k]
            rate_s = "" if rate is None else f"{rate:5.2f}"
            row += f" {err:9.2E} {rate_s:>5} |"
        lines.append(row)
    return "\n".join(lines) + "\n"
