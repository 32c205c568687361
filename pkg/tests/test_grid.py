import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qg2.grid import (
    BoundaryCondition,
    GridError,
    GridSpec,
    NonFiniteFieldError,
    ScalarField,
    cell_center,
    l2_relative_error,
    read_fld,
    write_fld,
    y_field,
)


class TestGridSpec:
    def test_rejects_non_square_cells(self):
        with pytest.raises(GridError, match="square"):
            GridSpec(nx=2, ny=2, x0=0.0, xf=1.0, y0=0.0, yf=2.0)

    def test_rejects_bad_bounds(self):
        with pytest.raises(GridError):
            GridSpec(nx=2, ny=2, x0=1.0, xf=0.0)
        with pytest.raises(GridError):
            GridSpec(nx=0, ny=2)

    def test_benchmark_mesh_is_square_celled(self):
        g = GridSpec(nx=256, ny=512, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        assert g.h == pytest.approx(1.0 / 256, rel=0, abs=0)


class TestCellCenter:
    def test_first_cell_midpoint(self):
        g = GridSpec(nx=2, ny=2)
        assert cell_center(g, 0, 0) == (0.25, 0.25)

    def test_symmetry(self):
        g = GridSpec(nx=2, ny=2)
        assert cell_center(g, 1, 1) == (0.75, 0.75)

    def test_benchmark_corner_cell(self):
        g = GridSpec(nx=256, ny=512, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        x, y = cell_center(g, 0, 0)
        assert x == pytest.approx(1.0 / 512, rel=1e-15)
        assert y == pytest.approx(-1.0 + 1.0 / 512, rel=1e-15)

    def test_out_of_range(self):
        g = GridSpec(nx=2, ny=2)
        with pytest.raises(GridError):
            cell_center(g, 2, 0)
        with pytest.raises(GridError):
            cell_center(g, 0, -1)

    @given(
        nx=st.integers(1, 64),
        ny=st.integers(1, 64),
    )
    @settings(max_examples=40, deadline=None)
    def test_affine_round_trip(self, nx, ny):
        # square cells: pick bounds so hx == hy exactly
        g = GridSpec(nx=nx, ny=ny, x0=0.0, xf=float(nx), y0=0.0, yf=float(ny))
        for i in (0, nx // 2, nx - 1):
            for j in (0, ny // 2, ny - 1):
                x, y = cell_center(g, i, j)
                assert round((x - g.x0) / g.hx - 0.5) == i
                assert round((y - g.y0) / g.hy - 0.5) == j


class TestYField:
    def test_two_rows(self):
        g = GridSpec(nx=1, ny=2, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        assert y_field(g).values[:, 0] == pytest.approx([-0.5, 0.5])

    def test_columns_on_unit_square(self):
        g = GridSpec(nx=2, ny=2, x0=-0.5, xf=0.5, y0=-0.5, yf=0.5)
        assert y_field(g).values[:, 0] == pytest.approx([-0.25, 0.25])
        assert y_field(g).values[:, 1] == pytest.approx([-0.25, 0.25])

    def test_odd_symmetry_integral(self):
        g = GridSpec(nx=16, ny=32, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        total = y_field(g).values.sum() * g.cell_area
        assert abs(total) < 1e-14

    def test_matches_cell_center(self):
        g = GridSpec(nx=5, ny=7, x0=0.0, xf=5.0, y0=-3.0, yf=4.0)
        vals = y_field(g).values
        for j in range(g.ny):
            for i in range(g.nx):
                assert vals[j, i] == cell_center(g, i, j)[1]


class TestScalarField:
    def test_rejects_nan(self):
        g = GridSpec(nx=2, ny=2)
        vals = np.zeros((2, 2))
        vals[0, 1] = np.nan
        with pytest.raises(NonFiniteFieldError):
            ScalarField(g, vals)

    def test_values_read_only(self):
        g = GridSpec(nx=2, ny=2)
        f = ScalarField.zeros(g)
        with pytest.raises(ValueError):
            f.values[0, 0] = 1.0


class TestL2RelativeError:
    def test_identical_fields(self):
        g = GridSpec(nx=4, ny=4)
        f = ScalarField.from_function(g, lambda x, y: x + y)
        assert l2_relative_error(f, f) == 0.0

    def test_double_field(self):
        g = GridSpec(nx=4, ny=4)
        b = ScalarField.from_function(g, lambda x, y: np.cos(x * y) + 0.3)
        a = ScalarField(g, 2.0 * b.values)
        assert l2_relative_error(a, b) == pytest.approx(1.0, rel=1e-14)

    def test_grid_mismatch(self):
        a = ScalarField.zeros(GridSpec(nx=4, ny=4))
        b = ScalarField.zeros(GridSpec(nx=8, ny=8))
        with pytest.raises(GridError):
            l2_relative_error(a, b)

    def test_zero_reference(self):
        g = GridSpec(nx=4, ny=4)
        with pytest.raises(ZeroDivisionError):
            l2_relative_error(ScalarField.zeros(g), ScalarField.zeros(g))

    @given(scale=st.floats(min_value=1e-6, max_value=1e6))
    @settings(max_examples=30, deadline=None)
    def test_scaling_invariance(self, scale):
        g = GridSpec(nx=8, ny=8)
        rng = np.random.default_rng(7)
        a = ScalarField(g, rng.normal(size=g.shape))
        b = ScalarField(g, rng.normal(size=g.shape) + 2.0)
        base = l2_relative_error(a, b)
        scaled = l2_relative_error(
            ScalarField(g, scale * a.values), ScalarField(g, scale * b.values)
        )
        assert scaled == pytest.approx(base, rel=1e-12)


class TestBoundaryCondition:
    def test_constant_edges(self):
        g = GridSpec(nx=3, ny=2, x0=0.0, xf=3.0, y0=0.0, yf=2.0)
        e = BoundaryCondition.constant(4.5).edge_values(g)
        assert np.all(e["west"] == 4.5) and e["south"].shape == (3,)

    def test_of_y_edges(self):
        g = GridSpec(nx=2, ny=4, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        e = BoundaryCondition.of_y().edge_values(g)
        assert e["west"] == pytest.approx([-0.75, -0.25, 0.25, 0.75])
        assert np.all(e["south"] == -1.0)
        assert np.all(e["north"] == 1.0)

    def test_callable_trace(self):
        g = GridSpec(nx=4, ny=4, x0=-0.5, xf=0.5, y0=-0.5, yf=0.5)
        e = BoundaryCondition(lambda x, y: 2 * x + y).edge_values(g)
        assert e["east"] == pytest.approx(1.0 + g.y_centers())


class TestFldFormat:
    def test_bit_exact_round_trip(self, tmp_path):
        g = GridSpec(nx=5, ny=3, x0=0.0, xf=5.0, y0=-1.5, yf=1.5)
        rng = np.random.default_rng(13)
        f = ScalarField(g, rng.normal(size=g.shape) * 1e-7)
        path = tmp_path / "field.fld"
        write_fld(path, f, time=0.1234567890123456789)
        back, t = read_fld(path)
        assert back.grid == g
        assert np.array_equal(back.values, f.values)
        assert t == float("%.17g" % 0.1234567890123456789)

    def test_header_contents(self, tmp_path):
        g = GridSpec(nx=2, ny=2, x0=0.0, xf=1.0, y0=-1.0, yf=0.0)
        path = tmp_path / "f.fld"
        write_fld(path, ScalarField.zeros(g), time=2.0)
        head = path.read_text().splitlines()[0].split()
        assert head[0] == "2" and head[1] == "2"
        assert [float(v) for v in head[2:]] == [0.0, 1.0, -1.0, 0.0, 2.0]

    def test_shape_mismatch_detected(self, tmp_path):
        path = tmp_path / "bad.fld"
        path.write_text("2 2 0 1 0 1 0\n1.0 2.0\n")
        with pytest.raises(ValueError):
            read_fld(path)
