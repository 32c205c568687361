"""Second-order finite-volume operators on the structured grid.

All assembled rows are in per-unit-volume form (the division by the cell
measure h^2 is folded into the coefficients). Dirichlet boundary faces are
closed with the one-sided gradient over the half-cell distance h/2: exact
for linear fields, first-order consistent at the wall, and globally second
order (the flux errors telescope). The same closure serves the plain
Laplacian and the symmetric variable-coefficient diffusion rows, so the
elliptic systems built from the latter stay symmetric positive definite.

Cell-center gradients use the Green-Gauss form with exact boundary face
values; this closure is exact on linear fields up to the wall, and makes the
face fluxes derived from any stream function discretely divergence-free in
every cell, boundary cells included.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import BoundaryCondition, GridError, GridSpec, ScalarField

__all__ = [
    "StencilRows",
    "FaceFluxField",
    "laplacian_stencil",
    "explicit_laplacian",
    "face_fluxes",
    "convection_stencil",
    "cell_gradient",
    "gradient_magnitude",
    "integral_of_square",
    "spd_diffusion_rows",
    "constant_diffusivity_faces",
    "face_diffusivity_from_cells",
]


def _require_stencil_grid(grid: GridSpec) -> None:
    if grid.nx < 2 or grid.ny < 2:
        raise GridError(f"stencil operators need at least 2x2 cells, got {grid.nx}x{grid.ny}")


@dataclass
class StencilRows:
    """Per-cell rows of a 5-point affine operator: Op(f) = M f + bc_term.

    diag/east/west/north/south are (ny, nx) coefficient arrays; entries for
    missing neighbors are zero. bc_term carries the contribution of the
    Dirichlet boundary data.
    """

    grid: GridSpec
    diag: np.ndarray
    east: np.ndarray
    west: np.ndarray
    north: np.ndarray
    south: np.ndarray
    bc_term: np.ndarray

    def apply_matrix(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """M v without the boundary term."""
        out = np.multiply(self.diag, v, out=out)
        out[:, :-1] += self.east[:, :-1] * v[:, 1:]
        out[:, 1:] += self.west[:, 1:] * v[:, :-1]
        out[:-1, :] += self.north[:-1, :] * v[1:, :]
        out[1:, :] += self.south[1:, :] * v[:-1, :]
        return out

    def apply(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Full affine action M v + bc_term."""
        out = self.apply_matrix(v, out=out)
        out += self.bc_term
        return out


def laplacian_stencil(grid: GridSpec, bc: BoundaryCondition, coeff: float = 1.0) -> StencilRows:
    """Rows approximating coeff * Laplacian with Dirichlet data ``bc``.

    Interior rows are the standard 5-point central stencil, exact on
    polynomials of total degree <= 2. At a boundary face the missing
    neighbor is replaced by the face-Dirichlet closure with flux
    coeff * (g_face - f_P) / (h/2) / h.
    """
    _require_stencil_grid(grid)
    ny, nx = grid.shape
    h2 = grid.h * grid.h
    c = coeff / h2

    diag = np.zeros((ny, nx))
    east = np.zeros((ny, nx))
    west = np.zeros((ny, nx))
    north = np.zeros((ny, nx))
    south = np.zeros((ny, nx))
    bc_term = np.zeros((ny, nx))

    # Interior faces: (f_nb - f_P)/h^2 per face.
    east[:, :-1] += c
    diag[:, :-1] -= c
    west[:, 1:] += c
    diag[:, 1:] -= c
    north[:-1, :] += c
    diag[:-1, :] -= c
    south[1:, :] += c
    diag[1:, :] -= c

    # Boundary faces: half-cell one-sided closure, 2(g - f_P)/h^2.
    g = bc.edge_values(grid)
    diag[:, 0] -= 2.0 * c
    bc_term[:, 0] += 2.0 * c * g["west"]

    diag[:, -1] -= 2.0 * c
    bc_term[:, -1] += 2.0 * c * g["east"]

    diag[0, :] -= 2.0 * c
    bc_term[0, :] += 2.0 * c * g["south"]

    diag[-1, :] -= 2.0 * c
    bc_term[-1, :] += 2.0 * c * g["north"]

    return StencilRows(grid, diag, east, west, north, south, bc_term)


def explicit_laplacian(field: ScalarField, bc: BoundaryCondition, coeff: float = 1.0) -> ScalarField:
    """coeff * Laplacian of a known field, same stencil as laplacian_stencil."""
    rows = laplacian_stencil(field.grid, bc, coeff)
    return ScalarField(field.grid, rows.apply(field.values), copy=False)


def _grad_x(v: np.ndarray, gw: np.ndarray, ge: np.ndarray, h: float) -> np.ndarray:
    """d/dx at cell centers, Green-Gauss with exact boundary face values."""
    out = np.empty_like(v)
    out[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2.0 * h)
    out[:, 0] = (v[:, 1] + v[:, 0] - 2.0 * gw) / (2.0 * h)
    out[:, -1] = (2.0 * ge - v[:, -1] - v[:, -2]) / (2.0 * h)
    return out


def _grad_y(v: np.ndarray, gs: np.ndarray, gn: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(v)
    out[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2.0 * h)
    out[0, :] = (v[1, :] + v[0, :] - 2.0 * gs) / (2.0 * h)
    out[-1, :] = (2.0 * gn - v[-1, :] - v[-2, :]) / (2.0 * h)
    return out


def cell_gradient(field: ScalarField, bc: BoundaryCondition) -> tuple[np.ndarray, np.ndarray]:
    """(df/dx, df/dy) at cell centers; exact on linear fields up to the wall."""
    _require_stencil_grid(field.grid)
    g = bc.edge_values(field.grid)
    h = field.grid.h
    return (
        _grad_x(field.values, g["west"], g["east"], h),
        _grad_y(field.values, g["south"], g["north"], h),
    )


def gradient_magnitude(field: ScalarField, bc: BoundaryCondition) -> ScalarField:
    """Pointwise |grad f| at cell centers."""
    fx, fy = cell_gradient(field, bc)
    return ScalarField(field.grid, np.hypot(fx, fy), copy=False)


@dataclass
class FaceFluxField:
    """Volumetric fluxes (curl Psi . A) through cell faces.

    phi_x has shape (ny, nx+1): flux in +x through the vertical face between
    cells (i-1, j) and (i, j); columns 0 and nx are the physical boundary.
    phi_y has shape (ny+1, nx) for the horizontal faces. Boundary faces carry
    the flux implied by psi = 0 on the boundary, which is zero.
    """

    grid: GridSpec
    phi_x: np.ndarray
    phi_y: np.ndarray


def face_fluxes(psi: ScalarField, grid: GridSpec | None = None) -> FaceFluxField:
    """Face fluxes of the velocity u = (dpsi/dy, -dpsi/dx).

    Cell-center velocities come from the Green-Gauss gradient with psi = 0 on
    the boundary; interior face velocities are the arithmetic mean of the two
    adjacent cells, times the face length. Physical boundary faces get the
    flux of the boundary trace, which vanishes for psi = 0 (impermeability).
    The resulting flux field is discretely divergence-free in every cell.
    """
    if grid is not None and grid != psi.grid:
        raise GridError("grid argument disagrees with the field's grid")
    grid = psi.grid
    _require_stencil_grid(grid)
    ny, nx = grid.shape
    h = grid.h
    zeros_y = np.zeros(ny)
    zeros_x = np.zeros(nx)
    ux = _grad_y(psi.values, zeros_x, zeros_x, h)
    uy = -_grad_x(psi.values, zeros_y, zeros_y, h)

    phi_x = np.zeros((ny, nx + 1))
    phi_x[:, 1:nx] = 0.5 * (ux[:, :-1] + ux[:, 1:]) * h
    phi_y = np.zeros((ny + 1, nx))
    phi_y[1:ny, :] = 0.5 * (uy[:-1, :] + uy[1:, :]) * h
    return FaceFluxField(grid, phi_x, phi_y)


def convection_stencil(flux: FaceFluxField, bc: BoundaryCondition) -> StencilRows:
    """Rows of the convection operator sum_f phi_f q_f / h^2.

    Face values q_f are arithmetic means of the adjacent cells; at boundary
    faces q_f is the Dirichlet face value and lands in the affine term.
    """
    grid = flux.grid
    _require_stencil_grid(grid)
    ny, nx = grid.shape
    h2 = grid.h * grid.h
    px, py = flux.phi_x, flux.phi_y

    diag = np.zeros((ny, nx))
    east = np.zeros((ny, nx))
    west = np.zeros((ny, nx))
    north = np.zeros((ny, nx))
    south = np.zeros((ny, nx))
    bc_term = np.zeros((ny, nx))

    # Interior faces: out through east/north (+), in through west/south (-).
    ex = px[:, 1:nx] / (2.0 * h2)
    diag[:, :-1] += ex
    east[:, :-1] += ex
    diag[:, 1:] -= ex
    west[:, 1:] -= ex
    ey = py[1:ny, :] / (2.0 * h2)
    diag[:-1, :] += ey
    north[:-1, :] += ey
    diag[1:, :] -= ey
    south[1:, :] -= ey

    # Boundary faces: q_f = g, affine contribution only.
    g = bc.edge_values(grid)
    bc_term[:, 0] -= px[:, 0] * g["west"] / h2
    bc_term[:, -1] += px[:, nx] * g["east"] / h2
    bc_term[0, :] -= py[0, :] * g["south"] / h2
    bc_term[-1, :] += py[ny, :] * g["north"] / h2

    return StencilRows(grid, diag, east, west, north, south, bc_term)


def integral_of_square(field: ScalarField) -> float:
    """Integral of f^2 over the domain by the midpoint rule, sum f^2 h^2."""
    return float(np.vdot(field.values, field.values)) * field.grid.cell_area


def constant_diffusivity_faces(grid: GridSpec, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Uniform face diffusivity arrays, shapes (ny, nx+1) and (ny+1, nx)."""
    ny, nx = grid.shape
    return np.full((ny, nx + 1), float(kappa)), np.full((ny + 1, nx), float(kappa))


def face_diffusivity_from_cells(grid: GridSpec, a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Face diffusivities by arithmetic mean of adjacent cells.

    Boundary faces take the one-sided adjacent cell value.
    """
    ny, nx = grid.shape
    kx = np.empty((ny, nx + 1))
    kx[:, 1:nx] = 0.5 * (a[:, :-1] + a[:, 1:])
    kx[:, 0] = a[:, 0]
    kx[:, nx] = a[:, -1]
    ky = np.empty((ny + 1, nx))
    ky[1:ny, :] = 0.5 * (a[:-1, :] + a[1:, :])
    ky[0, :] = a[0, :]
    ky[ny, :] = a[-1, :]
    return kx, ky


def spd_diffusion_rows(
    grid: GridSpec,
    bc: BoundaryCondition,
    kappa_x: np.ndarray,
    kappa_y: np.ndarray,
    mass: float | np.ndarray = 0.0,
) -> StencilRows:
    """Rows of Op(u) = -div(kappa grad u) + mass * u, symmetric form.

    kappa_x/kappa_y are face diffusivities. Boundary faces use the one-sided
    gradient over the half-cell distance, (g - u_P)/(h/2), which keeps the
    assembled matrix symmetric positive definite for kappa >= 0, mass >= 0
    (Dirichlet everywhere). The Dirichlet data enters bc_term with a minus
    sign so that Op(u) = M u + bc_term.
    """
    _require_stencil_grid(grid)
    ny, nx = grid.shape
    h2 = grid.h * grid.h

    diag = np.zeros((ny, nx))
    east = np.zeros((ny, nx))
    west = np.zeros((ny, nx))
    north = np.zeros((ny, nx))
    south = np.zeros((ny, nx))
    bc_term = np.zeros((ny, nx))

    kx_in = kappa_x[:, 1:nx] / h2
    diag[:, :-1] += kx_in
    diag[:, 1:] += kx_in
    east[:, :-1] -= kx_in
    west[:, 1:] -= kx_in
    ky_in = kappa_y[1:ny, :] / h2
    diag[:-1, :] += ky_in
    diag[1:, :] += ky_in
    north[:-1, :] -= ky_in
    south[1:, :] -= ky_in

    g = bc.edge_values(grid)
    diag[:, 0] += 2.0 * kappa_x[:, 0] / h2
    bc_term[:, 0] -= 2.0 * kappa_x[:, 0] * g["west"] / h2
    diag[:, -1] += 2.0 * kappa_x[:, nx] / h2
    bc_term[:, -1] -= 2.0 * kappa_x[:, nx] * g["east"] / h2
    diag[0, :] += 2.0 * kappa_y[0, :] / h2
    bc_term[0, :] -= 2.0 * kappa_y[0, :] * g["south"] / h2
    diag[-1, :] += 2.0 * kappa_y[ny, :] / h2
    bc_term[-1, :] -= 2.0 * kappa_y[ny, :] * g["north"] / h2

    diag += mass
    return StencilRows(grid, diag, east, west, north, south, bc_term)
