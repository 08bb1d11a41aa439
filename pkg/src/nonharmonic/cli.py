"""Batch experiment runner.

Every analysis is a subcommand reading one validated JSON config and
writing a deterministic payload.json (plus CSV series and SVG figures on
request) into the output directory.  Exit codes: 0 success, 1 a numerical
verdict or precondition failed (the report says which), 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .analysis import (
    HypothesisError,
    SingularResolventError,
    compactness_test,
    garding_consistency,
    garding_verify,
    resolvent_solve_multiplier,
    sobolev_discrepancy_report,
    sobolev_interpolation_check,
    strong_solve,
)
from .calculus import (
    EllipticityError,
    adjoint_symbol,
    assemble_matrix,
    compose_symbols,
    parametrix,
    quantize_apply,
    quantize_apply_star,
)
from .config import DEFAULT_CONFIG, ConfigError, load_config, resolve_config
from .model import ModelSystem, FrequencyWindow, ModelSpec, SpatialGrid, verify_eigenpair, wz_check
from .reporting import write_payload, write_run_meta, write_series_csv
from .suite import run_suite
from .symbols import (
    SymbolFamilySpec,
    build_symbol,
    hypoellipticity_check,
    m_ellipticity_check,
    seminorm_estimate,
)
from .transform import (
    KIND_LSTAR,
    forward_L,
    inverse_L,
    random_band_limited,
    riesz_bounds,
    span_norm,
    truncation_report,
)
from .weights import (
    check_difference_axiom,
    check_growth,
    smoothed_integer_weight,
    standard_weight,
    user_table_weight,
)


class TaskFailure(RuntimeError):
    """A task-level numerical verdict or precondition failed (exit 1).

    Carries whatever diagnostics were computed before the failure so the
    payload still documents the negative verdict.
    """

    def __init__(self, message: str, partial: dict | None = None):
        super().__init__(message)
        self.partial = partial or {}


def build_model(cfg: dict) -> ModelSystem:
    m = cfg["model"]
    return ModelSystem(
        ModelSpec(h=m["h"], normalize_u=m["normalize_u"]),
        FrequencyWindow(m["J"]),
        SpatialGrid(m["N_x"]),
    )


def build_weight(cfg: dict, system: ModelSystem):
    w = cfg["weight"]
    if w["kind"] == "standard":
        return standard_weight(system.spec)
    if w["kind"] == "smoothed_integer":
        return smoothed_integer_weight()
    return user_table_weight(w["path"], mu0=w["mu0"], mu1=w["mu1"], mu=w["mu"])


def build_sym(cfg: dict, system: ModelSystem, weight, block: str = "symbol"):
    s = cfg[block] if block in cfg else cfg["task"]["symbol_b"]
    spec = SymbolFamilySpec(
        family=s["family"],
        m=s.get("m", 0.0),
        profile=s.get("profile", "one"),
        shift=s.get("shift", 0.0),
        rho=s.get("rho", 1.0),
        csv_path=s.get("csv"),
    )
    return build_symbol(spec, system, weight)


# -- tasks -----------------------------------------------------------------------
# each returns (results dict, series list); series entries are
# (name, columns, plot options)


def task_system(cfg, seed):
    system = build_model(cfg)
    wz = wz_check(system)
    sample_modes = [int(j) for j in system.window.indices[:: max(system.window.J // 4, 1)]]
    residuals = {str(j): verify_eigenpair(system, j) for j in sample_modes}
    results = {
        "biorthogonality_defect": system.biorthogonality_defect(),
        "eigen_residuals": residuals,
        "worst_eigen_residual": max(residuals.values()),
        "wz": {
            "inf_u": float(np.min(wz.inf_u)),
            "inf_v": float(np.min(wz.inf_v)),
            "exponent": wz.exponent,
            "verdict": wz.verdict,
        },
    }
    rows = system.eigendata_rows()
    series = [
        (
            "eigendata",
            {
                "j": [r[0] for r in rows],
                "re_lambda": [r[1] for r in rows],
                "im_lambda": [r[2] for r in rows],
                "bracket": [r[3] for r in rows],
            },
            {"x_column": "j"},
        )
    ]
    return results, series


def task_transform(cfg, seed):
    from .transform import forward_Lstar, inverse_Lstar

    system = build_model(cfg)
    rng = np.random.default_rng(seed)
    task = cfg["task"]
    worst_l = worst_star = 0.0
    for _ in range(task["samples"]):
        f = random_band_limited(system, rng, band=task["band"])
        back = inverse_L(forward_L(f))
        worst_l = max(worst_l, float(np.max(np.abs(back.values - f.values)) / f.sup_norm()))
        g = random_band_limited(system, rng, band=task["band"], kind=KIND_LSTAR)
        back2 = inverse_Lstar(forward_Lstar(g))
        worst_star = max(
            worst_star, float(np.max(np.abs(back2.values - g.values)) / g.sup_norm())
        )
    riesz = riesz_bounds(system, samples=task["samples"], seed=seed)
    sample = random_band_limited(system, rng)
    results = {
        "round_trip_L": worst_l,
        "round_trip_Lstar": worst_star,
        "riesz": {"m1": riesz.m1, "m2": riesz.m2, "samples": riesz.samples, "seed": seed},
        "truncation_of_band_limited_sample": truncation_report(sample),
    }
    return results, []


def task_weights(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    idx = system.window.indices
    growth = check_growth(weight, idx)
    diff = check_difference_axiom(weight, idx, alpha_max=cfg["task"]["alpha_max"])
    results = {
        "growth": {
            "c0_fit": growth.c0_fit,
            "c1_fit": growth.c1_fit,
            "verdict": growth.verdict,
        },
        "difference_axiom": {
            "ratios": {f"alpha={a},gamma={g}": v for (a, g), v in diff.ratios.items()},
            "effective_window": list(diff.effective_window),
            "verdict": diff.verdict,
        },
    }
    series = [
        (
            "weight_table",
            {"j": [int(j) for j in idx], "lambda": [float(v) for v in weight(idx)]},
            {"x_column": "j", "logy": True},
        )
    ]
    return results, series


def task_symbol(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    task = cfg["task"]
    # tabulated symbols have no periodic analytic generator
    derivative_mode = "fd" if cfg["symbol"]["family"] == "csv" else "spectral"
    report = seminorm_estimate(
        sym,
        alpha_max=task["alpha_max"],
        beta_max=task["beta_max"],
        derivative_mode=derivative_mode,
    )
    results = {"seminorms": report.to_dict(), "order": sym.order, "rho": sym.rho}
    if task["ellipticity_R"] < int(np.max(np.abs(sym.indices))):
        ell = m_ellipticity_check(sym, R=task["ellipticity_R"])
        results["ellipticity"] = ell.to_dict()
    if task["hypoellipticity_ell"] is not None:
        hypo = hypoellipticity_check(
            sym,
            m=sym.order,
            ell=task["hypoellipticity_ell"],
            R=task["ellipticity_R"],
            derivative_mode=derivative_mode,
        )
        results["hypoellipticity"] = hypo.to_dict()
    return results, []


def task_apply(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    rng = np.random.default_rng(seed)
    f = random_band_limited(system, rng, band=cfg["task"]["band"])
    out = quantize_apply(sym, f)
    results = {
        "input_norm": span_norm(f),
        "output_norm": span_norm(out),
        "seed": seed,
    }
    series = [
        (
            "applied_function",
            {
                "x": [float(v) for v in system.x],
                "re_in": [float(v) for v in f.values.real],
                "im_in": [float(v) for v in f.values.imag],
                "re_out": [float(v) for v in out.values.real],
                "im_out": [float(v) for v in out.values.imag],
            },
            {"x_column": "x"},
        )
    ]
    return results, series


def task_compose(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym_a = build_sym(cfg, system, weight)
    sym_b = (
        build_sym(cfg, system, weight, block="task.symbol_b")
        if cfg["task"].get("symbol_b")
        else sym_a
    )
    n_max = cfg["task"]["truncation_terms"]
    prod = assemble_matrix(sym_a).values @ assemble_matrix(sym_b).values
    J = system.window.J
    cols = [j for j in range(-J // 2, J // 2 + 1) if abs(j) >= 8]
    pos = [system.window.position(j) for j in cols]
    defects = []
    for n in range(1, n_max + 1):
        comp = compose_symbols(sym_a, sym_b, n)
        block = assemble_matrix(comp).column_block(cols)
        defects.append(float(np.linalg.norm(block - prod[:, pos], 2)))
    results = {
        "defects_by_order": defects,
        "band": [8, J // 2],
        "reference_norm": float(np.linalg.norm(prod[:, pos], 2)),
    }
    series = [
        (
            "composition_defect",
            {"n_terms": list(range(1, n_max + 1)), "defect": defects},
            {"x_column": "n_terms", "logy": True},
        )
    ]
    return results, series


def task_adjoint(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    rng = np.random.default_rng(seed)
    band = min(system.window.J // 2, 24)
    f = random_band_limited(system, rng, band=band)
    g = random_band_limited(system, rng, band=band, kind=KIND_LSTAR)
    from .transform import grid_inner

    lhs = grid_inner(quantize_apply(sym, f), g)
    n_max = cfg["task"]["truncation_terms"]
    defects = []
    for n in range(1, n_max + 1):
        adj = adjoint_symbol(sym, n)
        rhs = grid_inner(f, quantize_apply_star(adj, g))
        defects.append(abs(lhs - rhs))
    results = {
        "pairing_defects_by_order": defects,
        "pairing_value": {"re": lhs.real, "im": lhs.imag},
        "seed": seed,
    }
    series = [
        (
            "adjoint_defect",
            {"n_terms": list(range(1, n_max + 1)), "defect": defects},
            {"x_column": "n_terms", "logy": True},
        )
    ]
    return results, series


def task_parametrix(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    task = cfg["task"]
    try:
        res = parametrix(sym, n_terms=task["truncation_terms"], R=task["cutoff_radius"])
    except EllipticityError as exc:
        raise TaskFailure(f"parametrix: {exc}") from exc
    results = res.to_dict()
    # term symbols are written as CSV side files next to the payload
    files = [
        (f"parametrix_term_{ell}.csv", term.export_csv)
        for ell, term in enumerate(res.terms)
    ]
    files.append(("parametrix_combined.csv", res.sigma_b.export_csv))
    results["term_files"] = [name for name, _ in files]
    modes = sorted(res.mode_residuals)
    series = [
        (
            "parametrix_mode_residuals",
            {
                "j": modes,
                "residual": [res.mode_residuals[j] for j in modes],
            },
            {"x_column": "j", "logy": True},
        )
    ]
    return results, series, files


def task_garding(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    try:
        report = garding_verify(sym)
    except HypothesisError as exc:
        raise TaskFailure(f"garding: {exc}") from exc
    results = report.to_dict()
    if not report.verdict:
        raise TaskFailure(
            "garding: no positive lower-bound constant found", partial=results
        )
    results["direct_check"] = garding_consistency(
        sym, report, samples=cfg["task"]["samples"], seed=seed
    )
    interp = sobolev_interpolation_check(
        system,
        weight,
        s=cfg["task"]["sobolev_s"],
        t=cfg["task"]["sobolev_t"],
        eps_ladder=cfg["task"]["eps_ladder"],
        samples=min(cfg["task"]["samples"], 200),
        seed=seed,
    )
    results["interpolation"] = interp.to_dict()
    results["sobolev_norm_discrepancy"] = sobolev_discrepancy_report(
        system, weight, s=cfg["task"]["sobolev_s"] / 2.0, samples=50, seed=seed
    )
    return results, []


def task_compact(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    report = compactness_test(sym, shells=cfg["task"]["shells"])
    results = report.to_dict()
    series = [
        (
            "shell_suprema",
            {"shell": report.shells, "d_hat": report.shell_suprema},
            {"x_column": "shell", "logy": True},
        ),
        (
            "singular_values",
            {
                "k": list(range(report.singular_values.size)),
                "sigma_k": [float(s) for s in report.singular_values],
            },
            {"x_column": "k", "logy": True},
        ),
    ]
    return results, series


def task_resolvent(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    lam = cfg["task"]["lambda"]
    rng = np.random.default_rng(seed)
    f = random_band_limited(system, rng, band=cfg["task"]["band"])
    try:
        u = resolvent_solve_multiplier(sym, lam, f)
    except (SingularResolventError, ValueError) as exc:
        raise TaskFailure(f"resolvent: {exc}") from exc
    lhs = quantize_apply(sym, u)
    from .transform import GridFunction, coeff_norm

    res_vec = forward_L(GridFunction(lhs.values - lam * u.values - f.values, system))
    rel = coeff_norm(system, res_vec.values) / coeff_norm(system, forward_L(f).values)
    results = {"lambda": lam, "relative_residual": rel, "seed": seed}
    if rel > 1e-10:
        raise TaskFailure(
            f"resolvent: residual {rel:.3e} above contract 1e-10", partial=results
        )
    return results, []


def task_solve(cfg, seed):
    system = build_model(cfg)
    weight = build_weight(cfg, system)
    sym = build_sym(cfg, system, weight)
    task = cfg["task"]
    rng = np.random.default_rng(seed)
    f = random_band_limited(system, rng, band=task["band"])
    result = strong_solve(sym, task["lambda"], f, method=task["solver_method"])
    results = result.to_dict()
    results["seed"] = seed
    if not result.converged:
        raise TaskFailure(
            f"solve: method {task['solver_method']} did not reach tolerance "
            f"(last residual {result.residual_history[-1]:.3e})",
            partial=results,
        )
    series = [
        (
            "solve_residual_history",
            {
                "iteration": list(range(1, len(result.residual_history) + 1)),
                "residual": result.residual_history,
            },
            {"x_column": "iteration", "logy": True},
        )
    ]
    return results, series


def task_suite(cfg, seed):
    results = run_suite(seed)
    for key in sorted(k for k in results if k.startswith("criterion")):
        entry = results[key]
        print(f"{key}: {'PASS' if entry['pass'] else 'FAIL'}  ({entry['name']})")
    if not results["all_pass"]:
        raise TaskFailure("suite: at least one criterion failed")
    return results, []


TASKS = {
    "system": task_system,
    "transform": task_transform,
    "weights": task_weights,
    "symbol": task_symbol,
    "apply": task_apply,
    "compose": task_compose,
    "adjoint": task_adjoint,
    "parametrix": task_parametrix,
    "garding": task_garding,
    "compact": task_compact,
    "resolvent": task_resolvent,
    "solve": task_solve,
    "suite": task_suite,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonharmonic",
        description="Pseudo-differential calculus experiments on the model system",
    )
    sub = parser.add_subparsers(dest="task", required=True)
    for name in TASKS:
        p = sub.add_parser(name, help=f"run the {name} task")
        p.add_argument("--config", type=Path, default=None, help="JSON config path")
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--format", choices=["json", "csv"], default="csv",
                       help="json: payload only; csv: also write series files")
        p.add_argument("--plots", choices=["on", "off"], default="off",
                       help="render SVG figures from the CSV series")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else resolve_config(DEFAULT_CONFIG)
    except ConfigError as exc:
        json.dump({"config_errors": exc.errors}, sys.stderr, indent=2)
        sys.stderr.write("\n")
        return 2
    seed = args.seed if args.seed is not None else cfg["seed"]
    cfg = dict(cfg)
    cfg["seed"] = seed
    out_dir = args.out or Path("runs") / args.task
    t0 = time.perf_counter()
    try:
        outcome = TASKS[args.task](cfg, seed)
        results, series = outcome[0], outcome[1]
        files = outcome[2] if len(outcome) > 2 else []
    except TaskFailure as exc:
        elapsed = time.perf_counter() - t0
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        failure = {"error": str(exc)}
        if exc.partial:
            failure["diagnostics"] = exc.partial
        write_payload(out, args.task, cfg, failure)
        write_run_meta(out, {"task": elapsed})
        print(f"error: {exc}", file=sys.stderr)
        return 1
    elapsed = time.perf_counter() - t0
    payload_path = write_payload(out_dir, args.task, cfg, results)
    write_run_meta(out_dir, {"task": elapsed})
    if args.format == "csv" or args.plots == "on":
        from .plots import plot_series_csv

        for name, columns, plot_kwargs in series:
            csv_path = write_series_csv(out_dir, name, columns)
            if args.plots == "on":
                plot_series_csv(csv_path, title=name.replace("_", " "), **plot_kwargs)
        for name, writer in files:
            writer(Path(out_dir) / name)
    print(f"wrote {payload_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
