import math

import numpy as np
import pytest

from nonharmonic.model import (
    FrequencyWindow,
    GeometryError,
    ModelSpec,
    ModelSystem,
    SpatialGrid,
    bracket,
    eigenvalue,
    eval_u,
    eval_v,
    make_system,
    verify_eigenpair,
    wz_check,
)


def richardson_derivative(fn, x, step=1e-3):
    """Fourth-order Richardson-extrapolated central difference."""
    d1 = (fn(x + step) - fn(x - step)) / (2 * step)
    d2 = (fn(x + step / 2) - fn(x - step / 2)) / step
    return (4 * d2 - d1) / 3


class TestModelSpec:
    def test_h_must_be_positive(self):
        with pytest.raises(ValueError):
            ModelSpec(h=0.0)
        with pytest.raises(ValueError):
            ModelSpec(h=-1.0)

    def test_operator_order_fixed(self):
        with pytest.raises(ValueError):
            ModelSpec(h=2.0, operator_order=2)

    def test_normalized_u_has_unit_norm(self):
        # composite quadrature of |u_0|^2 = c^2 h^{2x}
        spec = ModelSpec(h=3.0, normalize_u=True)
        xs = np.linspace(0.0, 1.0, 20001)
        vals = np.abs(eval_u(spec, 0, xs)) ** 2
        norm_sq = np.trapezoid(vals, xs)
        assert abs(norm_sq - 1.0) < 1e-8

    def test_unnormalized_c_is_one(self):
        assert ModelSpec(h=5.0).c == 1.0


class TestEigenvalue:
    def test_periodic_case_j0(self):
        assert eigenvalue(ModelSpec(h=1.0), 0) == 0

    def test_periodic_case_j1(self):
        assert eigenvalue(ModelSpec(h=1.0), 1) == pytest.approx(2 * math.pi)

    def test_h_e_j0_matches_derivative_oracle(self):
        # u_0(x) = e^x; check -i u_0' = lambda_0 u_0 pointwise
        spec = ModelSpec(h=math.e)
        lam = eigenvalue(spec, 0)
        assert lam == pytest.approx(-1j, abs=1e-15)
        for x in [0.1, 0.37, 0.82]:
            du = richardson_derivative(lambda t: eval_u(spec, 0, t), x)
            assert abs(-1j * du - lam * eval_u(spec, 0, x)) < 1e-10

    def test_bracket_lower_bound_and_linear_growth(self):
        spec = ModelSpec(h=2.0)
        js = np.arange(-64, 65)
        brs = bracket(spec, js)
        assert np.all(brs >= 1.0)
        # linear growth: bracket(2j)/bracket(j) -> 2
        assert bracket(spec, 64) / bracket(spec, 32) == pytest.approx(2.0, rel=1e-3)


class TestEigenfunctions:
    def test_periodic_values(self):
        spec = ModelSpec(h=1.0)
        assert eval_u(spec, 0, 0.3) == pytest.approx(1.0)
        assert eval_v(spec, 0, 0.3) == pytest.approx(1.0)

    def test_h4_midpoint(self):
        spec = ModelSpec(h=4.0)
        assert eval_u(spec, 0, 0.5) == pytest.approx(2.0)
        assert eval_v(spec, 0, 0.5) == pytest.approx(0.5)

    def test_boundary_condition(self):
        spec = ModelSpec(h=3.5)
        for j in [-3, 0, 7]:
            assert eval_u(spec, j, 1.0) == pytest.approx(3.5 * eval_u(spec, j, 0.0))

    def test_pairing_u2_v5_vanishes(self, system_h2):
        # uniform-grid quadrature of e^{-6 pi i x} is exact
        u2 = system_h2.u_table[:, system_h2.window.position(2)]
        v5 = system_h2.v_table[:, system_h2.window.position(5)]
        val = np.sum(u2 * np.conj(v5)) / system_h2.grid.n_x
        assert abs(val) < 1e-12

    def test_sup_bound(self, system_h4):
        # sup |u_j| <= c * max(1, h), uniformly in j
        c = system_h4.spec.c
        bound = c * max(1.0, system_h4.spec.h)
        assert np.max(np.abs(system_h4.u_table)) <= bound + 1e-12


class TestGeometry:
    def test_oversampling_enforced(self):
        with pytest.raises(GeometryError):
            ModelSystem(ModelSpec(h=2.0), FrequencyWindow(64), SpatialGrid(256))

    def test_window_symmetric(self):
        w = FrequencyWindow(5)
        assert w.size == 11
        assert list(w.indices) == list(range(-5, 6))

    def test_grid_spacing(self):
        g = SpatialGrid(512)
        assert g.spacing == pytest.approx(1 / 512)
        assert g.nodes[0] == 0.0
        assert g.nodes[-1] == pytest.approx(1.0 - 1 / 512)


class TestBiorthogonality:
    @pytest.mark.parametrize("h", [1.0, 2.0, 4.0])
    def test_defect_below_1e12(self, h):
        system = make_system(h=h, J=64, n_x=512)
        assert system.biorthogonality_defect() <= 1e-12

    def test_normalized_family_stays_biorthogonal(self):
        system = make_system(h=3.0, J=32, n_x=256, normalize_u=True)
        assert system.biorthogonality_defect() <= 1e-12


class TestEigenResidual:
    def test_periodic_mode(self, system_h1):
        assert verify_eigenpair(system_h1, 3) < 1e-10

    def test_h2_zero_mode(self, system_h2):
        assert verify_eigenpair(system_h2, 0) < 1e-10

    def test_h2_highest_mode(self, system_h2):
        assert verify_eigenpair(system_h2, system_h2.window.J) < 1e-8

    def test_residual_across_window(self, system_h2):
        worst = max(verify_eigenpair(system_h2, int(j)) for j in system_h2.window.indices[::8])
        assert worst < 1e-8


class TestWZ:
    def test_periodic_infima(self, system_h1):
        report = wz_check(system_h1)
        assert np.allclose(report.inf_u, 1.0)
        assert np.allclose(report.inf_v, 1.0)
        assert abs(report.exponent) < 0.01
        assert report.verdict

    def test_h4_infima(self, system_h4):
        report = wz_check(system_h4)
        # inf over the grid of h^{-x} is attained at x = 1 - 1/N_x
        expected_v = 4.0 ** (-(system_h4.grid.n_x - 1) / system_h4.grid.n_x)
        assert np.allclose(report.inf_u, 1.0)
        assert np.allclose(report.inf_v, expected_v, rtol=1e-12)
        assert np.all(report.inf_v >= 0.25)

    def test_fitted_exponent_h2_j32(self):
        system = make_system(h=2.0, J=32, n_x=256)
        report = wz_check(system)
        assert abs(report.exponent) <= 0.01


class TestEigendataExport:
    def test_csv_roundtrip(self, tmp_path, system_h2):
        path = tmp_path / "eigen.csv"
        system_h2.export_eigendata_csv(path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "j,re_lambda,im_lambda,bracket"
        assert len(lines) == system_h2.window.size + 1
        first = lines[1].split(",")
        assert int(first[0]) == -64
        assert float(first[1]) == pytest.approx(2 * math.pi * -64)
        assert float(first[2]) == pytest.approx(-math.log(2.0))
