"""Uniform cell-centered Cartesian grid, scalar fields, and Dirichlet boundary data.

The grid is collocated and stores interior cell values only; there is no ghost
layer. Boundary conditions are passed explicitly to the discrete operators,
which close their stencils with face-center Dirichlet values located h/2 away
from the first cell center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "GridError",
    "NonFiniteFieldError",
    "GridSpec",
    "ScalarField",
    "BoundaryCondition",
    "cell_center",
    "y_field",
    "l2_relative_error",
    "write_fld",
    "read_fld",
]


class GridError(ValueError):
    """Invalid grid geometry or mismatched grids."""


class NonFiniteFieldError(FloatingPointError):
    """A field contains NaN or Inf values."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid of nx-by-ny square cells on [x0, xf] x [y0, yf].

    Cell (i, j) is centered at (x0 + (i + 1/2) hx, y0 + (j + 1/2) hy).
    Only square cells (hx == hy) are supported; every configuration of
    interest has meshes like 256x512 on [0,1]x[-1,1], i.e. h = 1/256 in
    both directions.
    """

    nx: int
    ny: int
    x0: float = 0.0
    xf: float = 1.0
    y0: float = 0.0
    yf: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise GridError(f"cell counts must be positive, got nx={self.nx}, ny={self.ny}")
        if not self.xf > self.x0:
            raise GridError(f"xf must exceed x0, got [{self.x0}, {self.xf}]")
        if not self.yf > self.y0:
            raise GridError(f"yf must exceed y0, got [{self.y0}, {self.yf}]")
        hx = (self.xf - self.x0) / self.nx
        hy = (self.yf - self.y0) / self.ny
        if not math.isclose(hx, hy, rel_tol=1e-12):
            raise GridError(f"cells must be square, got hx={hx!r}, hy={hy!r}")

    @property
    def hx(self) -> float:
        return (self.xf - self.x0) / self.nx

    @property
    def hy(self) -> float:
        return (self.yf - self.y0) / self.ny

    @property
    def h(self) -> float:
        """Common cell width (cells are square)."""
        return self.hx

    @property
    def shape(self) -> tuple[int, int]:
        """Array shape (ny, nx): row-major by y-row."""
        return (self.ny, self.nx)

    @property
    def ncells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def x_centers(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.hx

    def y_centers(self) -> np.ndarray:
        return self.y0 + (np.arange(self.ny) + 0.5) * self.hy

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """(X, Y) arrays of cell-center coordinates, shape (ny, nx)."""
        return np.meshgrid(self.x_centers(), self.y_centers())


def cell_center(grid: GridSpec, i: int, j: int) -> tuple[float, float]:
    """Coordinates of the center of cell (i, j)."""
    if not (0 <= i < grid.nx and 0 <= j < grid.ny):
        raise GridError(f"cell index ({i}, {j}) out of range for {grid.nx}x{grid.ny} grid")
    return (grid.x0 + (i + 0.5) * grid.hx, grid.y0 + (j + 0.5) * grid.hy)


class ScalarField:
    """Cell-centered scalar samples on a grid.

    Values are stored as a read-only (ny, nx) float array; field objects are
    immutable once built, which makes them safe to share across threads.
    Construction rejects NaN/Inf values.
    """

    __slots__ = ("grid", "values")

    def __init__(self, grid: GridSpec, values, *, copy: bool = True):
        arr = np.array(values, dtype=float, copy=copy)
        if arr.shape != grid.shape:
            arr = arr.reshape(grid.shape)
        if not np.isfinite(arr).all():
            raise NonFiniteFieldError("field contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarField is immutable")

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> "ScalarField":
        """Sample fn(x, y) at every cell center."""
        X, Y = grid.meshgrid()
        return cls(grid, np.asarray(fn(X, Y), dtype=float), copy=False)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), copy=False)

    @classmethod
    def full(cls, grid: GridSpec, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(value)), copy=False)


def y_field(grid: GridSpec) -> ScalarField:
    """Field whose value in each cell is the y-coordinate of its center."""
    vals = np.broadcast_to(grid.y_centers()[:, None], grid.shape)
    return ScalarField(grid, vals)


def _require_same_grid(a: ScalarField, b: ScalarField) -> None:
    if a.grid != b.grid:
        raise GridError("fields live on different grids")


def l2_relative_error(a: ScalarField, b: ScalarField) -> float:
    """Cell-measure-weighted relative L2 distance ||a - b|| / ||b||.

    The h^2 cell measures cancel in the ratio but are kept for clarity.
    """
    _require_same_grid(a, b)
    area = a.grid.cell_area
    diff = a.values - b.values
    num = math.sqrt(float(np.vdot(diff, diff)) * area)
    den = math.sqrt(float(np.vdot(b.values, b.values)) * area)
    if den == 0.0:
        raise ZeroDivisionError("reference field has zero norm")
    return num / den


class BoundaryCondition:
    """Dirichlet boundary data g(x, y), evaluated at boundary-face centers.

    ``value`` is either a constant or a vectorized callable of (x, y).
    The three families in use are g = 0 (stream functions), g(x, y) = y
    (vorticities in the double-gyre benchmark), and polynomial traces for
    the verification runs. Edge samples are memoized per grid; callers
    treat the returned arrays as read-only.
    """

    __slots__ = ("value", "_edge_cache")

    def __init__(self, value: float | Callable):
        self.value = value
        self._edge_cache: dict = {}

    @classmethod
    def constant(cls, c: float) -> "BoundaryCondition":
        return cls(float(c))

    @classmethod
    def of_y(cls) -> "BoundaryCondition":
        return cls(lambda x, y: y)

    def _eval(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if callable(self.value):
            out = np.asarray(self.value(x, y), dtype=float)
            return np.broadcast_to(out, x.shape).astype(float, copy=False)
        return np.full(x.shape, float(self.value))

    def edge_values(self, grid: GridSpec) -> dict[str, np.ndarray]:
        """Face-center samples on the four edges.

        Returns arrays keyed by 'west'/'east' (length ny, along y) and
        'south'/'north' (length nx, along x).
        """
        cached = self._edge_cache.get(grid)
        if cached is not None:
            return cached
        xc = grid.x_centers()
        yc = grid.y_centers()
        out = {
            "west": self._eval(np.full(grid.ny, grid.x0), yc),
            "east": self._eval(np.full(grid.ny, grid.xf), yc),
            "south": self._eval(xc, np.full(grid.nx, grid.y0)),
            "north": self._eval(xc, np.full(grid.nx, grid.yf)),
        }
        for arr in out.values():
            arr.setflags(write=False)
        self._edge_cache[grid] = out
        return out


_FLD_FMT = "%.17g"


def write_fld(path, field: ScalarField, time: float = 0.0) -> None:
    """Write a field in the plain-text dump format.

    Header line: ``nx ny x0 xf y0 yf time``; then ny lines of nx values,
    row-major by y. 17 significant digits guarantee a bit-exact round-trip.
    """
    g = field.grid
    header = " ".join(
        [str(g.nx), str(g.ny)]
        + [_FLD_FMT % v for v in (g.x0, g.xf, g.y0, g.yf, float(time))]
    )
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in field.values:
            fh.write(" ".join(_FLD_FMT % v for v in row) + "\n")


def read_fld(path) -> tuple[ScalarField, float]:
    """Read a field dump written by :func:`write_fld`. Returns (field, time)."""
    with open(path) as fh:
        head = fh.readline().split()
        if len(head) != 7:
            raise ValueError(f"{path}: bad header, expected 7 entries, got {len(head)}")
        nx, ny = int(head[0]), int(head[1])
        x0, xf, y0, yf, time = (float(v) for v in head[2:])
        grid = GridSpec(nx=nx, ny=ny, x0=x0, xf=xf, y0=y0, yf=yf)
        vals = np.loadtxt(fh, dtype=float, ndmin=2)
    if vals.shape != grid.shape:
        raise ValueError(f"{path}: expected {grid.shape} values, got {vals.shape}")
    return ScalarField(grid, vals, copy=False), time
