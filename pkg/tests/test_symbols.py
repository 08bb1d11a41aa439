import math

import numpy as np
import pytest

from nonharmonic.model import GeometryError, make_system
from nonharmonic.symbols import (
    SymbolFamilySpec,
    build_symbol,
    catalogue,
    d_derivative,
    delta_backward,
    delta_forward,
    delta_kernel_oracle,
    elliptic_demo,
    from_values,
    hypoellipticity_check,
    load_symbol_csv,
    m_ellipticity_check,
    multiplier_power,
    seminorm_estimate,
    separable,
    shifted,
    stirling1_signed_matrix,
    stirling2_matrix,
    taylor_inverse_matrix,
    taylor_matrix,
)
from nonharmonic.weights import standard_weight


def index_symbol(system, weight, order=0.0):
    """sigma(x, j) = j with a claimed order."""
    vals = np.broadcast_to(
        system.window.indices.astype(complex), (system.grid.n_x, system.window.size)
    ).copy()
    return from_values(vals, system, weight, order=order, tag="index")


class TestDeltaForward:
    def test_index_symbol_gives_one(self, system_h2, weight_h2):
        sym = index_symbol(system_h2, weight_h2)
        out = delta_forward(sym, 1)
        assert np.allclose(out.values, 1.0)
        assert out.indices[-1] == system_h2.window.J - 1

    def test_constant_in_j_vanishes(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 0.0)
        for alpha in (1, 2):
            assert np.allclose(delta_forward(sym, alpha).values, 0.0)

    def test_window_too_small(self, weight_h2):
        small = make_system(h=2.0, J=1, n_x=16)
        sym = multiplier_power(small, standard_weight(small.spec), 0.0)
        with pytest.raises(GeometryError):
            delta_forward(sym, 3)

    def test_order_bookkeeping(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 2.0)
        assert delta_forward(sym, 2).order == pytest.approx(2.0 - 2 * sym.rho)


class TestDeltaBackward:
    def test_shrinks_lower_edge(self, system_h2, weight_h2):
        sym = index_symbol(system_h2, weight_h2)
        out = delta_backward(sym, 1)
        assert np.allclose(out.values, -1.0)
        assert out.indices[0] == -system_h2.window.J + 1

    def test_matches_binomial_form(self, system_h2, weight_h2, rng):
        vals = rng.standard_normal((system_h2.grid.n_x, system_h2.window.size))
        sym = from_values(vals.astype(complex), system_h2, weight_h2, order=0.0)
        out = delta_backward(sym, 2)
        expected = vals[:, :-2] - 2 * vals[:, 1:-1] + vals[:, 2:]
        assert np.allclose(out.values, expected)


class TestKernelOracle:
    def test_constant_symbol_vanishes(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 0.0)
        vals = delta_kernel_oracle(sym, 1, [0, 37, 255])
        assert np.max(np.abs(vals)) < 1e-10

    def test_index_symbol_gives_one(self, system_h2, weight_h2):
        sym = index_symbol(system_h2, weight_h2)
        vals = delta_kernel_oracle(sym, 1, [5, 100])
        assert np.max(np.abs(vals - 1.0)) < 1e-8

    def test_elliptic_demo_matches_forward_difference(self, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 2.0)
        xs = np.arange(0, system_h2.grid.n_x, system_h2.grid.n_x // 16)
        oracle = delta_kernel_oracle(sym, 1, xs)
        direct = delta_forward(sym, 1).values[xs]
        scale = max(np.max(np.abs(direct)), 1.0)
        assert np.max(np.abs(oracle - direct)) < 1e-8 * scale

    @pytest.mark.parametrize("alpha", [1, 2])
    def test_catalogue_agreement(self, system_h2, weight_h2, alpha):
        xs = np.arange(0, system_h2.grid.n_x, system_h2.grid.n_x // 16)
        for name, sym in catalogue(system_h2, weight_h2).items():
            oracle = delta_kernel_oracle(sym, alpha, xs)
            direct = delta_forward(sym, alpha).values[xs]
            scale = max(np.max(np.abs(direct)), 1.0)
            assert np.max(np.abs(oracle - direct)) < 1e-8 * scale, name


class TestStirling:
    def test_second_kind_values(self):
        S = stirling2_matrix(4)
        assert S[3, 2] == 3
        assert S[4, 2] == 7
        assert all(S[n, n] == 1 for n in range(5))
        assert all(S[n, 1] == 1 for n in range(1, 5))

    def test_first_kind_values(self):
        s = stirling1_signed_matrix(4)
        assert s[3, 1] == 2
        assert s[3, 2] == -3
        assert s[4, 1] == -6

    def test_mutual_inverse(self):
        S = stirling2_matrix(6).astype(float)
        s = stirling1_signed_matrix(6).astype(float)
        assert np.allclose(S @ s, np.eye(7))

    @pytest.mark.parametrize("beta_max", [2, 3, 4])
    @pytest.mark.parametrize("conjugate", [False, True])
    def test_taylor_inverse_closed_form_vs_solve(self, beta_max, conjugate):
        # brute triangular solve of [(+-2 pi i)^b S(b, a)] against identity;
        # agreement to a few ulps (the solve's own rounding)
        M = taylor_matrix(beta_max, conjugate=conjugate)
        brute = np.linalg.solve(M, np.eye(beta_max + 1, dtype=complex))
        closed = taylor_inverse_matrix(beta_max, conjugate=conjugate)
        eps = np.finfo(float).eps
        assert np.max(np.abs(brute - closed)) < 64 * eps * np.max(np.abs(brute))


class TestDDerivative:
    def test_beta_zero_identity(self, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 1.0)
        out = d_derivative(sym, 0)
        assert np.array_equal(out.values, sym.values)

    def test_first_order_on_complex_exponential(self, system_h2, weight_h2):
        # D^(1) = (2 pi i)^{-1} d/dx fixes e^{2 pi i x}
        x = system_h2.x
        vals = np.broadcast_to(
            np.exp(2j * math.pi * x)[:, None],
            (system_h2.grid.n_x, system_h2.window.size),
        ).copy()
        sym = from_values(vals, system_h2, weight_h2, order=0.0)
        out = d_derivative(sym, 1)
        assert np.max(np.abs(out.values - vals)) < 1e-12

    def test_falling_factorial_eigenrelation(self, system_h2, weight_h2):
        # D^(b) e^{2 pi i K x} = K (K-1) ... (K-b+1) e^{2 pi i K x}
        x = system_h2.x
        for K in (-2, 1, 3):
            vals = np.broadcast_to(
                np.exp(2j * math.pi * K * x)[:, None],
                (system_h2.grid.n_x, system_h2.window.size),
            ).copy()
            sym = from_values(vals, system_h2, weight_h2, order=0.0)
            for b in (1, 2, 3):
                falling = 1.0
                for i in range(b):
                    falling *= K - i
                out = d_derivative(sym, b)
                assert np.max(np.abs(out.values - falling * vals)) < 1e-10 * max(
                    abs(falling), abs(K) ** b, 1.0
                )

    def test_x_independent_killed_for_beta_ge_1(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 2.0)
        for b in (1, 2):
            assert np.max(np.abs(d_derivative(sym, b).values)) < 1e-10

    def test_fd_mode_matches_spectral_on_smooth_profile(self, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 0.0)
        sp = d_derivative(sym, 1, mode="spectral")
        fd = d_derivative(sym, 1, mode="fd")
        assert np.max(np.abs(sp.values - fd.values)) < 1e-6

    def test_csv_symbol_requires_explicit_fd_mode(self, tmp_path, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 0.0)
        path = tmp_path / "tab.csv"
        sym.export_csv(path)
        tab = load_symbol_csv(path, system_h2, weight_h2, order=0.0)
        with pytest.raises(ValueError):
            d_derivative(tab, 1)
        out = d_derivative(tab, 1, mode="fd")
        exact = d_derivative(sym, 1, mode="spectral")
        assert np.max(np.abs(out.values - exact.values)) < 1e-6


class TestSeminorms:
    def test_constant_symbol_member(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 0.0)
        report = seminorm_estimate(sym)
        assert report.member_M
        assert all(r.sup_ratio <= 1.0 + 1e-12 for r in report.rows)

    def test_multiplier_power_2_member_and_stable(self, weight_h2):
        sups = {}
        for J in (64, 128):
            system = make_system(h=2.0, J=J, n_x=1024)
            weight = standard_weight(system.spec)
            sym = multiplier_power(system, weight, 2.0)
            report = seminorm_estimate(sym)
            assert report.member_M, J
            sups[J] = report.row(1, 0, 0).sup_ratio
        assert abs(sups[128] - sups[64]) <= 0.10 * sups[64]

    def test_index_symbol_not_member_at_order_zero(self, system_h2, weight_h2):
        sym = index_symbol(system_h2, weight_h2, order=0.0)
        report = seminorm_estimate(sym, alpha_max=1, beta_max=0)
        row = report.row(0, 0, 0)
        assert row.tail_slope > 0.5
        assert not report.member_S

    def test_product_of_members_is_member(self, system_h2, weight_h2):
        # pointwise product of orders m1, m2 passes the m1 + m2 scan
        a = elliptic_demo(system_h2, weight_h2, 1.0)
        b = separable(system_h2, weight_h2, "cos", 2.0)
        prod = from_values(
            a.values * b.values, system_h2, weight_h2, order=3.0, tag="product"
        )
        assert seminorm_estimate(prod, alpha_max=2, beta_max=2).member_M

    def test_delta_d_shifts_order(self, system_h2, weight_h2):
        # Delta^1 D^(1) sigma of order 2 passes the order 2 - rho scan
        sym = elliptic_demo(system_h2, weight_h2, 2.0)
        shifted_sym = delta_forward(d_derivative(sym, 1), 1)
        assert seminorm_estimate(shifted_sym, alpha_max=2, beta_max=1).member_M

    def test_membership_invariant_under_window_doubling(self):
        for J in (32, 64):
            system = make_system(h=2.0, J=J, n_x=8 * J)
            weight = standard_weight(system.spec)
            for name, sym in catalogue(system, weight).items():
                report = seminorm_estimate(sym, alpha_max=2, beta_max=1)
                assert report.member_M, (name, J)

    def test_lower_order_symbol_passes_higher_order_scan(self, system_h2, weight_h2):
        # class inclusion: an order-1 member also sits in the order-2 class
        sym = elliptic_demo(system_h2, weight_h2, 1.0)
        relabeled = from_values(sym.values, system_h2, weight_h2, order=2.0)
        assert seminorm_estimate(relabeled, alpha_max=2, beta_max=1).member_M


class TestEllipticity:
    def test_elliptic_demo_2(self, system_h2, weight_h2):
        report = m_ellipticity_check(elliptic_demo(system_h2, weight_h2, 2.0), R=8)
        assert report.verdict
        assert report.c_est >= 1.0 - 1e-12

    def test_separable_sin_vanishes_on_grid(self, system_h2, weight_h2):
        sym = separable(system_h2, weight_h2, "sin", 2.0)
        report = m_ellipticity_check(sym, R=8)
        assert not report.verdict
        assert report.c_est < 1e-12

    def test_multiplier_ratio_identically_one(self, system_h2, weight_h2):
        report = m_ellipticity_check(multiplier_power(system_h2, weight_h2, 1.5), R=4)
        assert report.c_est == pytest.approx(1.0, abs=1e-12)

    def test_empty_shell_rejected(self, system_h2, weight_h2):
        with pytest.raises(GeometryError):
            m_ellipticity_check(
                multiplier_power(system_h2, weight_h2, 1.0), R=system_h2.window.J + 1
            )


class TestHypoellipticity:
    def test_multiplier_tight_constants(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 2.0)
        report = hypoellipticity_check(sym, m=2.0, ell=2.0, R=8)
        assert report.verdict
        assert report.c1_fit == pytest.approx(1.0, abs=1e-12)
        assert report.c2_fit == pytest.approx(1.0, abs=1e-12)

    def test_elliptic_demo_full_order(self, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 2.0)
        report = hypoellipticity_check(sym, m=2.0, ell=2.0, R=8)
        assert report.verdict
        assert report.c1_fit >= 1.0 - 1e-12
        assert report.c2_fit <= 3.0 + 1e-12

    def test_tuned_counterexample_fails_domination(self, system_h2, weight_h2):
        # near-vanishing symbol: derivative bound |D sigma| <= C |sigma| breaks
        sym = shifted(system_h2, weight_h2, "sin", 1e-3)
        report = hypoellipticity_check(sym, m=0.0, ell=0.0, R=4)
        assert not report.verdict
        assert max(report.domination.values()) > 100.0


class TestFamiliesAndIO:
    def test_elliptic_demo_definition(self, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 2.0)
        x = system_h2.x
        lam = weight_h2(system_h2.window.indices)
        expected = np.outer(2.0 + np.sin(2 * math.pi * x), lam**2)
        assert np.allclose(sym.values, expected)

    def test_shifted_definition(self, system_h2, weight_h2):
        sym = shifted(system_h2, weight_h2, "cos", 0.5)
        lam = weight_h2(system_h2.window.indices)
        x = system_h2.x
        expected = 0.5 + np.outer(np.cos(2 * math.pi * x), 1.0 / lam)
        assert np.allclose(sym.values, expected)
        assert sym.order == 0.0

    def test_unknown_family_rejected(self, system_h2, weight_h2):
        with pytest.raises(ValueError):
            build_symbol(SymbolFamilySpec("bogus"), system_h2, weight_h2)

    def test_csv_roundtrip(self, tmp_path, system_h2, weight_h2):
        sym = elliptic_demo(system_h2, weight_h2, 1.0)
        path = tmp_path / "sym.csv"
        sym.export_csv(path)
        back = load_symbol_csv(path, system_h2, weight_h2, order=1.0)
        assert np.array_equal(back.indices, sym.indices)
        assert np.max(np.abs(back.values - sym.values)) == 0.0

    def test_restrict(self, system_h2, weight_h2):
        sym = multiplier_power(system_h2, weight_h2, 1.0)
        sub = sym.restrict(-8, 8)
        assert sub.n_j == 17
        assert sub.indices[0] == -8
        with pytest.raises(GeometryError):
            sym.restrict(-100, 0)

    def test_extended_window_build(self, weight_h2):
        system = make_system(h=2.0, J=16, n_x=256)
        weight = standard_weight(system.spec)
        idx = np.arange(-20, 21)
        sym = build_symbol(
            SymbolFamilySpec("elliptic_demo", m=1.0), system, weight, indices=idx
        )
        assert sym.n_j == 41
