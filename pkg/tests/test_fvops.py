import math

import numpy as np
import pytest

from qg2 import fvops
from qg2.grid import BoundaryCondition, GridSpec, ScalarField, y_field

BC0 = BoundaryCondition.constant(0.0)


def unit_grid(n):
    return GridSpec(nx=n, ny=n, x0=0.0, xf=1.0, y0=0.0, yf=1.0)


class TestLaplacian:
    def test_quadratic_exact_interior(self):
        g = unit_grid(8)
        fn = lambda x, y: x * x
        lap = fvops.explicit_laplacian(
            ScalarField.from_function(g, fn), BoundaryCondition(fn), 1.0
        )
        assert np.abs(lap.values[1:-1, 1:-1] - 2.0).max() < 1e-12

    def test_mixed_quadratic_exact_interior(self):
        g = GridSpec(nx=10, ny=10, x0=-1.0, xf=1.0, y0=-1.0, yf=1.0)
        fn = lambda x, y: 3 * x * x - x * y + 2 * y * y + x - 7
        lap = fvops.explicit_laplacian(
            ScalarField.from_function(g, fn), BoundaryCondition(fn), 2.0
        )
        assert np.abs(lap.values[1:-1, 1:-1] - 2.0 * (6.0 + 4.0)).max() < 1e-11

    def test_constant_annihilated_everywhere(self):
        g = unit_grid(6)
        lap = fvops.explicit_laplacian(
            ScalarField.full(g, 3.7), BoundaryCondition.constant(3.7), 1.0
        )
        assert np.abs(lap.values).max() < 1e-12

    def test_linear_annihilated_everywhere(self):
        g = unit_grid(6)
        fn = lambda x, y: 2 * x - 3 * y + 1
        lap = fvops.explicit_laplacian(
            ScalarField.from_function(g, fn), BoundaryCondition(fn), 1.0
        )
        assert np.abs(lap.values).max() < 1e-12

    def test_sine_convergence(self):
        fn = lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y)
        errs = {}
        for n in (64, 128):
            g = unit_grid(n)
            f = ScalarField.from_function(g, fn)
            lap = fvops.explicit_laplacian(f, BC0, 1.0)
            errs[n] = np.abs(lap.values + 2 * np.pi**2 * f.values).max()
        assert errs[64] < 5e-3
        assert 3.5 < errs[64] / errs[128] < 4.5

    def test_stencil_matches_explicit(self):
        g = unit_grid(9)
        fn = lambda x, y: np.exp(x) * np.cos(y)
        f = ScalarField.from_function(g, fn)
        bc = BoundaryCondition(fn)
        rows = fvops.laplacian_stencil(g, bc, 0.3)
        assert np.array_equal(
            rows.apply(f.values), fvops.explicit_laplacian(f, bc, 0.3).values
        )


class TestFaceFluxes:
    def test_zero_psi(self):
        g = unit_grid(8)
        fl = fvops.face_fluxes(ScalarField.zeros(g))
        assert np.all(fl.phi_x == 0.0) and np.all(fl.phi_y == 0.0)

    def test_uniform_velocity_interior(self):
        # psi = y gives u = (1, 0); faces away from the y-walls see phi = h
        g = GridSpec(nx=8, ny=8, x0=0.0, xf=1.0, y0=-0.5, yf=0.5)
        fl = fvops.face_fluxes(ScalarField.from_function(g, lambda x, y: y))
        assert np.allclose(fl.phi_x[1:-1, 1:-1], g.h, rtol=1e-13)
        assert np.abs(fl.phi_y[1:-1, 1:-1]).max() < 1e-14

    def test_discretely_divergence_free(self):
        g = GridSpec(nx=32, ny=32, x0=-0.5, xf=0.5, y0=-0.5, yf=0.5)
        psi = ScalarField.from_function(g, lambda x, y: (x * x - 0.25) * (y * y - 0.25))
        fl = fvops.face_fluxes(psi)
        div = (fl.phi_x[:, 1:] - fl.phi_x[:, :-1]) + (fl.phi_y[1:, :] - fl.phi_y[:-1, :])
        assert np.abs(div).max() < 1e-13

    def test_boundary_faces_carry_no_flux(self):
        g = unit_grid(16)
        rng = np.random.default_rng(3)
        psi = ScalarField(g, rng.normal(size=g.shape))
        fl = fvops.face_fluxes(psi)
        assert np.all(fl.phi_x[:, [0, -1]] == 0.0)
        assert np.all(fl.phi_y[[0, -1], :] == 0.0)


class TestConvection:
    def test_zero_flux_zero_operator(self):
        g = unit_grid(8)
        fl = fvops.face_fluxes(ScalarField.zeros(g))
        conv = fvops.convection_stencil(fl, BC0)
        rng = np.random.default_rng(5)
        assert np.all(conv.apply(rng.normal(size=g.shape)) == 0.0)

    def test_constant_transported_by_uniform_flux(self):
        g = unit_grid(8)
        h = g.h
        phi_x = np.full((8, 9), h)
        phi_y = np.zeros((9, 8))
        fl = fvops.FaceFluxField(g, phi_x, phi_y)
        conv = fvops.convection_stencil(fl, BoundaryCondition.constant(2.5))
        out = conv.apply(np.full(g.shape, 2.5))
        assert np.abs(out).max() < 1e-12

    def test_telescoping_to_boundary_transport(self):
        g = GridSpec(nx=16, ny=16, x0=0.0, xf=1.0, y0=0.0, yf=1.0)
        rng = np.random.default_rng(11)
        fl = fvops.FaceFluxField(
            g, rng.normal(size=(16, 17)), rng.normal(size=(17, 16))
        )
        bc = BoundaryCondition(lambda x, y: np.sin(3 * x) + np.cos(2 * y))
        conv = fvops.convection_stencil(fl, bc)
        q = rng.normal(size=g.shape)
        total = conv.apply(q).sum() * g.cell_area
        e = bc.edge_values(g)
        boundary = (
            (fl.phi_x[:, -1] * e["east"]).sum()
            - (fl.phi_x[:, 0] * e["west"]).sum()
            + (fl.phi_y[-1, :] * e["north"]).sum()
            - (fl.phi_y[0, :] * e["south"]).sum()
        )
        assert total == pytest.approx(boundary, rel=1e-12)

    def test_skew_symmetry_surrogate(self):
        g = GridSpec(nx=16, ny=16, x0=-0.5, xf=0.5, y0=-0.5, yf=0.5)
        rng = np.random.default_rng(17)
        psi = ScalarField.from_function(
            g, lambda x, y: np.sin(2 * np.pi * x) * np.cos(np.pi * y)
        )
        fl = fvops.face_fluxes(psi)
        conv = fvops.convection_stencil(fl, BC0)
        q = rng.normal(size=g.shape)
        cq = conv.apply(q)
        quad = float(np.vdot(q, cq)) * g.cell_area
        scale = float(np.abs(q * cq).sum()) * g.cell_area
        assert abs(quad) / scale < 1e-10


class TestGradient:
    def test_x_field_unit_gradient(self):
        g = unit_grid(8)
        fn = lambda x, y: x
        mag = fvops.gradient_magnitude(
            ScalarField.from_function(g, fn), BoundaryCondition(fn)
        )
        assert np.abs(mag.values - 1.0).max() < 1e-12

    def test_constant_zero_gradient(self):
        g = unit_grid(8)
        mag = fvops.gradient_magnitude(
            ScalarField.full(g, 5.0), BoundaryCondition.constant(5.0)
        )
        assert np.abs(mag.values).max() < 1e-13

    def test_y_field_calibration(self):
        # one-sided closure must match the interior for linear fields
        g = GridSpec(nx=8, ny=16, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        mag = fvops.gradient_magnitude(y_field(g), BoundaryCondition.of_y())
        assert np.abs(mag.values - 1.0).max() < 1e-12

    def test_general_linear_exact(self):
        g = GridSpec(nx=6, ny=6, x0=-2.0, xf=1.0, y0=0.0, yf=3.0)
        fn = lambda x, y: 3 * x - 4 * y + 2
        fx, fy = fvops.cell_gradient(ScalarField.from_function(g, fn), BoundaryCondition(fn))
        assert np.abs(fx - 3.0).max() < 1e-12
        assert np.abs(fy + 4.0).max() < 1e-12


class TestIntegralOfSquare:
    def test_unit_field_area(self):
        g = GridSpec(nx=8, ny=16, x0=0.0, xf=1.0, y0=-1.0, yf=1.0)
        assert fvops.integral_of_square(ScalarField.full(g, 1.0)) == pytest.approx(2.0)

    def test_y_squared_integral(self):
        g = GridSpec(nx=64, ny=64, x0=-0.5, xf=0.5, y0=-0.5, yf=0.5)
        val = fvops.integral_of_square(y_field(g))
        assert val == pytest.approx(1.0 / 12.0, abs=1e-4)

    def test_zero_field(self):
        g = unit_grid(4)
        assert fvops.integral_of_square(ScalarField.zeros(g)) == 0.0


class TestSpdDiffusionRows:
    def test_symmetric_structure(self):
        g = unit_grid(12)
        rng = np.random.default_rng(23)
        a = rng.uniform(0.1, 1.0, size=g.shape)
        kx, ky = fvops.face_diffusivity_from_cells(g, a)
        rows = fvops.spd_diffusion_rows(g, BC0, kx, ky, mass=1.0)
        assert np.array_equal(rows.east[:, :-1], rows.west[:, 1:])
        assert np.array_equal(rows.north[:-1, :], rows.south[1:, :])

    def test_matches_laplacian_for_unit_diffusivity(self):
        g = unit_grid(7)
        fn = lambda x, y: np.sin(x) + y * y
        bc = BoundaryCondition(fn)
        f = ScalarField.from_function(g, fn)
        kx, ky = fvops.constant_diffusivity_faces(g, 1.0)
        spd = fvops.spd_diffusion_rows(g, bc, kx, ky, mass=0.0)
        lap = fvops.laplacian_stencil(g, bc, 1.0)
        assert np.allclose(spd.apply(f.values), -lap.apply(f.values), atol=1e-12)

    def test_face_diffusivity_means(self):
        g = GridSpec(nx=3, ny=2, x0=0.0, xf=3.0, y0=0.0, yf=2.0)
        a = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        kx, ky = fvops.face_diffusivity_from_cells(g, a)
        assert kx[0, 1] == 1.5 and kx[1, 2] == 5.5
        assert kx[0, 0] == 1.0 and kx[0, 3] == 3.0
        assert ky[1, 0] == 2.5 and ky[0, 0] == 1.0 and ky[2, 2] == 6.0
