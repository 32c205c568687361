"""Pentadiagonal linear systems and their iterative solution.

Symmetric positive definite systems (stream-function inversion, low-pass
filter) are solved with Jacobi-preconditioned conjugate gradients; the
nonsymmetric convection-diffusion systems use Jacobi-preconditioned
BiCGStab. Both methods are free of randomness and use fixed-order
reductions, so repeated solves of the same system are bit-identical.
Convergence is judged on the true residual ||b - A x||_2 / ||b||_2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fvops import StencilRows
from .grid import GridError, GridSpec, ScalarField

__all__ = [
    "LinearSystem",
    "SolveReport",
    "SolverBreakdownError",
    "system_from_rows",
    "solve",
    "to_dense",
]

DEFAULT_TOL = 1e-8


class SolverBreakdownError(RuntimeError):
    """An iterative solve hit a vanishing inner product before converging."""


@dataclass
class SolveReport:
    iterations: int
    final_relative_residual: float
    converged: bool


@dataclass
class LinearSystem:
    """A x = rhs with A stored as five per-cell diagonals.

    The ``symmetric`` tag selects the solver; when set, east(i,j) must equal
    west(i+1,j) and north(i,j) must equal south(i,j+1) on every interior
    adjacency. ``checked`` records that validate() already passed, so hot
    loops that reuse a system skip the structural re-check.
    """

    grid: GridSpec
    diag: np.ndarray
    east: np.ndarray
    west: np.ndarray
    north: np.ndarray
    south: np.ndarray
    rhs: np.ndarray
    symmetric: bool = False
    checked: bool = False

    def validate(self) -> None:
        if not np.all(self.diag != 0.0):
            raise ValueError("linear system has zero diagonal entries")
        if self.symmetric:
            if not (
                np.array_equal(self.east[:, :-1], self.west[:, 1:])
                and np.array_equal(self.north[:-1, :], self.south[1:, :])
            ):
                raise ValueError("system tagged symmetric has asymmetric couplings")
        self.checked = True

    def matvec(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        if out is None:
            out = np.empty_like(v)
        if _kernels.HAVE_NUMBA:
            _kernels.matvec(self.diag, self.east, self.west, self.north, self.south,
                            v, out)
            return out
        np.multiply(self.diag, v, out=out)
        out[:, :-1] += self.east[:, :-1] * v[:, 1:]
        out[:, 1:] += self.west[:, 1:] * v[:, :-1]
        out[:-1, :] += self.north[:-1, :] * v[1:, :]
        out[1:, :] += self.south[1:, :] * v[:-1, :]
        return out


def system_from_rows(rows: StencilRows, rhs: np.ndarray, symmetric: bool = False) -> LinearSystem:
    """System M x = rhs - bc_term for the affine operator Op(x) = M x + bc_term."""
    return LinearSystem(
        grid=rows.grid,
        diag=rows.diag,
        east=rows.east,
        west=rows.west,
        north=rows.north,
        south=rows.south,
        rhs=rhs - rows.bc_term,
        symmetric=symmetric,
    )


def _norm(v: np.ndarray) -> float:
    return math.sqrt(float(np.vdot(v, v)))


def _cg(system: LinearSystem, x: np.ndarray, tol_abs: float, max_iter: int,
        residual_history: list | None, iterate_history: list | None = None) -> tuple[int, float, bool]:
    """Jacobi-preconditioned conjugate gradients.

    Returns (iterations, ||r||, residual_is_true): the last flag tells the
    caller whether the reported norm came from an explicit b - A x.
    """
    b = system.rhs
    minv = 1.0 / system.diag
    r = b - system.matvec(x)
    rnorm = _norm(r)
    iters = 0
    if rnorm <= tol_abs:
        return iters, rnorm, True
    z = minv * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    ap = np.empty_like(x)
    tmp = np.empty_like(x)
    while iters < max_iter:
        system.matvec(p, out=ap)
        pap = float(np.vdot(p, ap))
        if pap <= 0.0:
            raise SolverBreakdownError(
                f"conjugate gradients: nonpositive curvature p'Ap={pap:.3e} "
                f"at iteration {iters} (system not SPD?)"
            )
        alpha = rz / pap
        x += np.multiply(p, alpha, out=tmp)
        r -= np.multiply(ap, alpha, out=tmp)
        iters += 1
        rnorm = _norm(r)
        if residual_history is not None:
            residual_history.append(rnorm)
        if iterate_history is not None:
            iterate_history.append(x.copy())
        if rnorm <= tol_abs:
            break
        z = np.multiply(minv, r, out=z)
        rz_new = float(np.vdot(r, z))
        beta = rz_new / rz
        rz = rz_new
        p *= beta
        p += z
    return iters, rnorm, False


def _bicgstab(system: LinearSystem, x: np.ndarray, tol_abs: float, max_iter: int,
              residual_history: list | None) -> tuple[int, float, bool]:
    """Jacobi-preconditioned BiCGStab; same return convention as _cg."""
    b = system.rhs
    minv = 1.0 / system.diag
    r = b - system.matvec(x)
    rnorm = _norm(r)
    iters = 0
    if rnorm <= tol_abs:
        return iters, rnorm, True
    r0 = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros_like(x)
    p = np.zeros_like(x)
    phat = np.empty_like(x)
    shat = np.empty_like(x)
    t = np.empty_like(x)
    tmp = np.empty_like(x)
    tiny = 1e-300
    while iters < max_iter:
        rho_new = float(np.vdot(r0, r))
        if abs(rho_new) < tiny or abs(omega) < tiny:
            raise SolverBreakdownError(
                f"bicgstab: vanishing inner product (rho={rho_new:.3e}, "
                f"omega={omega:.3e}) at iteration {iters}, residual {rnorm:.3e}"
            )
        beta = (rho_new / rho) * (alpha / omega)
        rho = rho_new
        # p = r + beta*(p - omega*v)
        p -= np.multiply(v, omega, out=tmp)
        p *= beta
        p += r
        phat = np.multiply(minv, p, out=phat)
        system.matvec(phat, out=v)
        denom = float(np.vdot(r0, v))
        if abs(denom) < tiny:
            raise SolverBreakdownError(
                f"bicgstab: vanishing r0'v at iteration {iters}, residual {rnorm:.3e}"
            )
        alpha = rho / denom
        s = r  # reuse storage: r becomes s = r - alpha*v
        s -= np.multiply(v, alpha, out=tmp)
        iters += 1
        snorm = _norm(s)
        if snorm <= tol_abs:
            x += np.multiply(phat, alpha, out=tmp)
            rnorm = snorm
            if residual_history is not None:
                residual_history.append(rnorm)
            break
        shat = np.multiply(minv, s, out=shat)
        system.matvec(shat, out=t)
        tt = float(np.vdot(t, t))
        if tt < tiny:
            raise SolverBreakdownError(
                f"bicgstab: vanishing t't at iteration {iters}, residual {snorm:.3e}"
            )
        omega = float(np.vdot(t, s)) / tt
        x += np.multiply(phat, alpha, out=tmp)
        x += np.multiply(shat, omega, out=tmp)
        r = s
        r -= np.multiply(t, omega, out=tmp)
        rnorm = _norm(r)
        if residual_history is not None:
            residual_history.append(rnorm)
        if rnorm <= tol_abs:
            break
    return iters, rnorm, False


def solve(
    system: LinearSystem,
    initial_guess: ScalarField | np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    residual_history: list | None = None,
    iterate_history: list | None = None,
) -> tuple[ScalarField, SolveReport]:
    """Solve to relative residual ||b - A x|| / ||b|| <= tol.

    Symmetric systems go through conjugate gradients, nonsymmetric ones
    through BiCGStab, both diagonally preconditioned. Warm starts via
    ``initial_guess`` are supported and encouraged inside time loops.
    Non-convergence is reported through the returned SolveReport, not
    raised; breakdowns raise SolverBreakdownError.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not system.checked:
        system.validate()
    grid = system.grid
    if max_iter is None:
        max_iter = 10 * grid.ncells

    if initial_guess is None:
        x = np.zeros(grid.shape)
    elif isinstance(initial_guess, ScalarField):
        if initial_guess.grid != grid:
            raise GridError("initial guess lives on a different grid")
        x = initial_guess.values.copy()
    else:
        x = np.array(initial_guess, dtype=float).reshape(grid.shape)

    bnorm = _norm(system.rhs)
    if bnorm == 0.0:
        report = SolveReport(iterations=0, final_relative_residual=0.0, converged=True)
        return ScalarField(grid, np.zeros(grid.shape), copy=False), report

    tol_abs = tol * bnorm
    use_compiled = (
        _kernels.HAVE_NUMBA and residual_history is None and iterate_history is None
    )
    total_iters = 0
    # The recursive residual can drift from the true one; confirm on the
    # true residual and restart (at most a few times) if it disagrees.
    for _ in range(4):
        budget = max_iter - total_iters
        if use_compiled:
            kern = _kernels.cg if system.symmetric else _kernels.bicgstab
            iters, rnorm, status = kern(
                system.diag, system.east, system.west, system.north, system.south,
                system.rhs, x, tol_abs, budget,
            )
            if status == 2:
                if rnorm <= tol_abs:
                    total_iters += iters
                    true_res = rnorm
                    break
                raise SolverBreakdownError(
                    f"{'cg' if system.symmetric else 'bicgstab'}: vanishing inner "
                    f"product at iteration {total_iters + iters}, residual {rnorm:.3e}"
                )
            is_true = status == 0
        elif system.symmetric:
            iters, rnorm, is_true = _cg(system, x, tol_abs, budget, residual_history,
                                        iterate_history)
        else:
            iters, rnorm, is_true = _bicgstab(system, x, tol_abs, budget, residual_history)
        total_iters += iters
        if is_true:
            true_res = rnorm
        else:
            true_res = _norm(system.rhs - system.matvec(x))
        if true_res <= tol_abs or total_iters >= max_iter:
            break
    rel = true_res / bnorm
    report = SolveReport(
        iterations=total_iters,
        final_relative_residual=rel,
        converged=bool(rel <= tol),
    )
    return ScalarField(grid, x, copy=False), report


def to_dense(system: LinearSystem) -> np.ndarray:
    """Explicit dense matrix of the stencil (test oracle; small grids only).

    Row/column ordering follows the row-major cell index k = j*nx + i.
    """
    grid = system.grid
    n = grid.ncells
    if n > 4096:
        raise ValueError(f"to_dense limited to 4096 cells, got {n}")
    nx = grid.nx
    a = np.zeros((n, n))
    for j in range(grid.ny):
        for i in range(nx):
            k = j * nx + i
            a[k, k] = system.diag[j, i]
            if i + 1 < nx:
                a[k, k + 1] = system.east[j, i]
            if i > 0:
                a[k, k - 1] = system.west[j, i]
            if j + 1 < grid.ny:
                a[k, k + nx] = system.north[j, i]
            if j > 0:
                a[k, k - nx] = system.south[j, i]
    return a
