"""The verification battery: one function per acceptance criterion.

Each criterion returns a dict with a boolean "pass" plus the measured
quantities, so the battery can be asserted by the test suite, reported by
the CLI, and hashed for the determinism check.  Tolerances are fixed
here, not configurable: they are the contract.
"""

from __future__ import annotations

import hashlib
import math

import numpy as np

from .analysis import (
    apriori_estimate_check,
    compactness_test,
    garding_consistency,
    garding_verify,
    gohberg_distance,
    resolvent_solve_multiplier,
    strong_solve,
)
from .calculus import (
    assemble_matrix,
    compose_symbols,
    parametrix,
    quantize_apply,
    symbol_from_operator,
)
from .model import make_system
from .reporting import payload_bytes
from .symbols import (
    catalogue,
    delta_forward,
    delta_kernel_oracle,
    elliptic_demo,
    multiplier_power,
    seminorm_estimate,
    shifted,
    taylor_inverse_matrix,
    taylor_matrix,
)
from .transform import (
    GridFunction,
    coeff_norm,
    forward_L,
    random_band_limited,
    riesz_bounds,
)
from .weights import standard_weight

# quality band for asymptotic-expansion measurements: away from the window
# edge (> J/2) and from the origin kink of the discrete weight (< 8)
LOW_MODE_EXCLUSION = 8


def _gauss_norm_sq(system, coeffs, panels=192, nodes=12):
    """Independent L2 norm of sum coeffs_j u_j via Gauss-Legendre panels."""
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    width = 1.0 / panels
    starts = np.arange(panels) * width
    x = (starts[:, None] + 0.5 * width * (xg[None, :] + 1.0)).ravel()
    w = np.tile(0.5 * width * wg, panels)
    phases = np.exp(2j * math.pi * np.outer(x, system.window.indices))
    weight_x = system.spec.c * system.spec.h**x
    vals = weight_x * (phases @ coeffs)
    return float(np.sum(w * np.abs(vals) ** 2))


def criterion_1_biorthogonality_plancherel(seed: int = 12345) -> dict:
    """Biorthogonality defect and Plancherel pairing against quadrature."""
    tol_bio, tol_pair = 1e-12, 1e-10
    per_h = {}
    ok = True
    for h in (1.0, 2.0, 4.0):
        system = make_system(h=h, J=64, n_x=512)
        defect = system.biorthogonality_defect()
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(200):
            f = random_band_limited(system, rng)
            a = forward_L(f).values
            pairing = np.sum(a * np.conj(system.gram_u @ a)).real
            oracle = _gauss_norm_sq(system, a)
            worst = max(worst, abs(pairing - oracle) / oracle)
        per_h[str(h)] = {"biorthogonality_defect": defect, "worst_pairing_error": worst}
        ok = ok and defect <= tol_bio and worst <= tol_pair
    return {
        "name": "biorthogonality_plancherel",
        "pass": bool(ok),
        "tolerances": {"biorthogonality": tol_bio, "pairing": tol_pair},
        "per_h": per_h,
    }


def criterion_2_riesz_bounds(seed: int = 12345) -> dict:
    """Frame-bound sandwich [1/h, 1] for the unnormalized h = 2 family."""
    system = make_system(h=2.0, J=64, n_x=512)
    report = riesz_bounds(system, samples=500, seed=seed)
    ok = report.m1 >= 0.5 - 1e-9 and report.m2 <= 1.0 + 1e-9
    return {
        "name": "riesz_bounds",
        "pass": bool(ok),
        "m1": report.m1,
        "m2": report.m2,
        "samples": report.samples,
        "seed": report.seed,
    }


def criterion_3_difference_equivalence() -> dict:
    """Kernel-quadrature difference oracle against the forward difference."""
    system = make_system(h=2.0, J=64, n_x=512)
    weight = standard_weight(system.spec)
    xs = np.arange(0, system.grid.n_x, system.grid.n_x // 16)
    worst = 0.0
    per_symbol = {}
    for name, sym in catalogue(system, weight).items():
        for alpha in (1, 2):
            oracle = delta_kernel_oracle(sym, alpha, xs)
            direct = delta_forward(sym, alpha).values[xs]
            scale = max(np.max(np.abs(direct)), 1.0)
            err = float(np.max(np.abs(oracle - direct)) / scale)
            per_symbol[f"{name}:alpha={alpha}"] = err
            worst = max(worst, err)
    return {
        "name": "difference_operator_equivalence",
        "pass": bool(worst <= 1e-8),
        "worst_relative_error": worst,
        "per_symbol": per_symbol,
    }


def criterion_4_taylor_inversion() -> dict:
    """Closed-form Stirling inverse against the brute triangular solve."""
    eps = np.finfo(float).eps
    worst = 0.0
    for conjugate in (False, True):
        M = taylor_matrix(4, conjugate=conjugate)
        brute = np.linalg.solve(M, np.eye(5, dtype=complex))
        closed = taylor_inverse_matrix(4, conjugate=conjugate)
        scale = np.max(np.abs(brute))
        worst = max(worst, float(np.max(np.abs(brute - closed)) / scale))
    return {
        "name": "taylor_operator_inversion",
        "pass": bool(worst <= 64 * eps),
        "worst_relative_error": worst,
        "tolerance": 64 * eps,
    }


def criterion_5_quantization_round_trip() -> dict:
    """symbol recovery after quantization reproduces every catalogue symbol."""
    system = make_system(h=2.0, J=64, n_x=512)
    weight = standard_weight(system.spec)
    worst = 0.0
    for name, sym in catalogue(system, weight).items():
        recovered = symbol_from_operator(
            lambda f, s=sym: quantize_apply(s, f), system, weight, order=sym.order
        )
        scale = max(sym.sup_abs(), 1.0)
        worst = max(worst, float(np.max(np.abs(recovered.values - sym.values)) / scale))
    return {
        "name": "quantization_round_trip",
        "pass": bool(worst <= 1e-10),
        "worst_relative_error": worst,
    }


def criterion_6_composition_multiplier_exact() -> dict:
    """Right-multiplier composition is exact at the matrix level."""
    system = make_system(h=2.0, J=64, n_x=512)
    weight = standard_weight(system.spec)
    sym_a = elliptic_demo(system, weight, 1.0)
    sym_b = multiplier_power(system, weight, 2.0)
    comp = compose_symbols(sym_a, sym_b, 1)
    m_comp = assemble_matrix(comp)
    prod = assemble_matrix(sym_a).values @ assemble_matrix(sym_b).values
    cols = [system.window.position(int(j)) for j in comp.indices]
    ref = np.linalg.norm(prod, 2)
    defect = float(np.linalg.norm(m_comp.values - prod[:, cols], 2) / ref)
    return {
        "name": "composition_multiplier_exactness",
        "pass": bool(defect <= 1e-10),
        "relative_defect": defect,
    }


def criterion_7_composition_asymptotics() -> dict:
    """Matrix defect on the quality band decreases strictly in the order."""
    system = make_system(h=2.0, J=64, n_x=512)
    weight = standard_weight(system.spec)
    sym = elliptic_demo(system, weight, 1.0)
    prod = assemble_matrix(sym).values @ assemble_matrix(sym).values
    J = system.window.J
    cols = [j for j in range(-J // 2, J // 2 + 1) if abs(j) >= LOW_MODE_EXCLUSION]
    pos = [system.window.position(j) for j in cols]
    defects = []
    for n in (1, 2, 3):
        comp = compose_symbols(sym, sym, n)
        block = assemble_matrix(comp).column_block(cols)
        defects.append(float(np.linalg.norm(block - prod[:, pos], 2)))
    strict = defects[0] > defects[1] > defects[2]
    ratio_ok = defects[2] <= 0.2 * defects[0]
    return {
        "name": "composition_asymptotics",
        "pass": bool(strict and ratio_ok),
        "defects": defects,
        "band": [LOW_MODE_EXCLUSION, J // 2],
        "ratio_n3_over_n1": defects[2] / defects[0],
    }


def criterion_8_parametrix() -> dict:
    """Multiplier exactness, residual monotonicity, reciprocal membership."""
    system = make_system(h=2.0, J=64, n_x=512)
    weight = standard_weight(system.spec)

    mult = multiplier_power(system, weight, 2.0)
    mult_res = parametrix(mult, n_terms=1, R=8)
    # x-independent case: exact on the whole plateau |j| >= 2R, edge included
    b_mat = assemble_matrix(mult_res.sigma_b)
    m_mat = assemble_matrix(mult)
    worst_plateau = 0.0
    for j in range(-system.window.J, system.window.J + 1):
        if abs(j) < 16:
            continue
        e = np.zeros(system.window.size, dtype=complex)
        e[system.window.position(j)] = 1.0
        diff = b_mat.matvec(m_mat.matvec(e)) - e
        worst_plateau = max(
            worst_plateau, coeff_norm(system, diff) / coeff_norm(system, e)
        )
    mult_exact = worst_plateau <= 1e-10

    sym = elliptic_demo(system, weight, 2.0)
    residuals = [
        parametrix(sym, n_terms=n, R=8).max_mode_residual for n in (1, 2, 3)
    ]
    monotone = residuals[0] >= residuals[1] >= residuals[2]

    sigma0 = parametrix(sym, n_terms=1, R=8).terms[0]
    membership = seminorm_estimate(sigma0, alpha_max=2, beta_max=2).member_M

    return {
        "name": "parametrix",
        "pass": bool(mult_exact and monotone and membership),
        "multiplier_max_residual": worst_plateau,
        "elliptic_residuals": residuals,
        "reciprocal_member": bool(membership),
    }


def criterion_9_garding(seed: int = 12345) -> dict:
    """Sharp diagonal case, window stability, and the sampled inequality."""
    system = make_system(h=1.0, J=64, n_x=512)
    weight = standard_weight(system.spec)

    mult = multiplier_power(system, weight, 2.0)
    mult_report = garding_verify(mult)
    mult_ok = (
        abs(mult_report.c1 - 1.0) <= 1e-9
        and mult_report.c2 == 0.0
        and mult_report.margin >= -1e-12
    )

    c1s = {}
    for J in (32, 64):
        sub = make_system(h=1.0, J=J, n_x=8 * J)
        w = standard_weight(sub.spec)
        rep = garding_verify(elliptic_demo(sub, w, 2.0))
        c1s[J] = rep.c1
    stable = c1s[64] > 0 and abs(c1s[64] - c1s[32]) <= 0.20 * c1s[32]

    sym = elliptic_demo(system, weight, 2.0)
    report = garding_verify(sym)
    direct = garding_consistency(sym, report, samples=500, seed=seed)

    return {
        "name": "garding",
        "pass": bool(mult_ok and stable and direct["ok"]),
        "multiplier": mult_report.to_dict(),
        "c1_by_window": {str(k): v for k, v in c1s.items()},
        "direct_check": direct,
    }


def criterion_10_gohberg_compactness() -> dict:
    """Singular-value floor for the shifted family; decay for the compact one."""
    system = make_system(h=1.0, J=64, n_x=512)
    weight = standard_weight(system.spec)

    sym = shifted(system, weight, "cos", 0.5)
    report = gohberg_distance(sym)
    sv = report.singular_values
    quarter = sv.size // 4
    floor_ok = bool(np.all(sv[:quarter] >= 0.45))

    decay = multiplier_power(system, weight, -0.5)
    decay_report = compactness_test(decay)
    d_hat = decay_report.shell_suprema
    monotone = all(b < a for a, b in zip(d_hat, d_hat[1:]))
    sv2 = decay_report.singular_values
    sv_ok = sv2[sv2.size // 2] <= 0.1 * sv2[0]

    return {
        "name": "gohberg_compactness",
        "pass": bool(floor_ok and monotone and sv_ok
                     and decay_report.verdict == "compact-consistent"),
        "shifted_min_quarter_sv": float(np.min(sv[:quarter])),
        "decay_shell_suprema": d_hat,
        "decay_mid_over_top_sv": float(sv2[sv2.size // 2] / sv2[0]),
        "decay_verdict": decay_report.verdict,
    }


def criterion_11_resolvent_strong_solution(seed: int = 12345) -> dict:
    """Residual contracts for both solvers and cross-method agreement."""
    system2 = make_system(h=2.0, J=64, n_x=512)
    weight2 = standard_weight(system2.spec)
    rng = np.random.default_rng(seed)

    mult = multiplier_power(system2, weight2, 2.0)
    f = random_band_limited(system2, rng)
    u = resolvent_solve_multiplier(mult, -1.0, f)
    lhs = quantize_apply(mult, u)
    res_vec = forward_L(
        GridFunction(lhs.values + u.values - f.values, system2)
    ).values
    resolvent_residual = coeff_norm(system2, res_vec) / coeff_norm(
        system2, forward_L(f).values
    )

    system1 = make_system(h=1.0, J=64, n_x=512)
    weight1 = standard_weight(system1.spec)
    sym = elliptic_demo(system1, weight1, 2.0)
    lam0 = garding_verify(sym, check_constructive=False).c2
    lam = lam0 + 1.0
    g = random_band_limited(system1, np.random.default_rng(seed + 1), band=32)
    dense = strong_solve(sym, lam, g, method="dense", lambda_floor=lam0)
    iterative = strong_solve(
        sym, lam, g, method="parametrix_iteration", lambda_floor=lam0
    )
    interior = np.abs(system1.window.indices) <= system1.window.J // 2
    da = forward_L(dense.u).values[interior]
    ia = forward_L(iterative.u).values[interior]
    agreement = float(np.max(np.abs(da - ia)) / max(np.max(np.abs(da)), 1e-300))

    ok = (
        resolvent_residual <= 1e-10
        and dense.residual_history[-1] <= 1e-8
        and iterative.converged
        and agreement <= 1e-6
    )
    return {
        "name": "resolvent_strong_solution",
        "pass": bool(ok),
        "resolvent_residual": resolvent_residual,
        "dense_residual": dense.residual_history[-1],
        "lambda_0": lam0,
        "iterations": iterative.iterations,
        "iteration_history": iterative.residual_history,
        "interior_agreement": agreement,
    }


def criterion_12_apriori(seed: int = 12345) -> dict:
    """Two-sided estimate constants stable under window doubling."""
    values = {}
    for J in (32, 64):
        system = make_system(h=1.0, J=J, n_x=8 * J)
        weight = standard_weight(system.spec)
        sym = elliptic_demo(system, weight, 2.0)
        report = apriori_estimate_check(sym, samples=150, seed=seed)
        values[J] = (report.c_est, report.d_est)
    ok = all(v > 0 and math.isfinite(v) for pair in values.values() for v in pair)
    for i in (0, 1):
        ok = ok and abs(values[64][i] - values[32][i]) <= 0.20 * values[32][i]
    return {
        "name": "apriori_estimate",
        "pass": bool(ok),
        "by_window": {str(k): list(v) for k, v in values.items()},
    }


BATTERY = [
    criterion_1_biorthogonality_plancherel,
    criterion_2_riesz_bounds,
    criterion_3_difference_equivalence,
    criterion_4_taylor_inversion,
    criterion_5_quantization_round_trip,
    criterion_6_composition_multiplier_exact,
    criterion_7_composition_asymptotics,
    criterion_8_parametrix,
    criterion_9_garding,
    criterion_10_gohberg_compactness,
    criterion_11_resolvent_strong_solution,
    criterion_12_apriori,
]


def run_battery(seed: int = 12345) -> dict:
    """Criteria 1-12 with the given master seed."""
    results = {}
    for index, fn in enumerate(BATTERY, start=1):
        kwargs = {"seed": seed} if "seed" in fn.__code__.co_varnames else {}
        results[f"criterion_{index:02d}"] = fn(**kwargs)
    return results


def run_suite(seed: int = 12345) -> dict:
    """Full battery plus the determinism criterion (re-run and byte-compare)."""
    first = run_battery(seed)
    second = run_battery(seed)
    b1 = payload_bytes(first)
    b2 = payload_bytes(second)
    h1 = hashlib.sha256(b1).hexdigest()
    determinism = {
        "name": "determinism",
        "pass": bool(b1 == b2),
        "payload_sha256": h1,
        "rerun_sha256": hashlib.sha256(b2).hexdigest(),
    }
    results = dict(first)
    results["criterion_13"] = determinism
    results["all_pass"] = bool(all(v["pass"] for v in results.values() if isinstance(v, dict)))
    return results
