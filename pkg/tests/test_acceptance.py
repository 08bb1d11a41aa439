"""Acceptance battery: each criterion asserted at its contractual tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line
per criterion.  The same functions back the ``suite`` CLI subcommand.
"""

import pytest

from nonharmonic.reporting import payload_bytes
from nonharmonic.suite import (
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
    run_battery,
)

SEED = 12345


def report(index, result):
    status = "PASS" if result["pass"] else "FAIL"
    print(f"criterion {index:2d} [{result['name']}]: {status}")
    return result


def test_criterion_01_biorthogonality_plancherel():
    result = report(1, criterion_1_biorthogonality_plancherel(seed=SEED))
    for h, entry in result["per_h"].items():
        assert entry["biorthogonality_defect"] <= 1e-12, h
        assert entry["worst_pairing_error"] <= 1e-10, h
    assert result["pass"]


def test_criterion_02_riesz_bounds():
    result = report(2, criterion_2_riesz_bounds(seed=SEED))
    assert result["m1"] >= 0.5 - 1e-9
    assert result["m2"] <= 1.0 + 1e-9
    assert result["samples"] == 500
    assert result["pass"]


def test_criterion_03_difference_operator_equivalence():
    result = report(3, criterion_3_difference_equivalence())
    assert result["worst_relative_error"] <= 1e-8
    assert result["pass"]


def test_criterion_04_taylor_operator_inversion():
    result = report(4, criterion_4_taylor_inversion())
    assert result["worst_relative_error"] <= result["tolerance"]
    assert result["pass"]


def test_criterion_05_quantization_round_trip():
    result = report(5, criterion_5_quantization_round_trip())
    assert result["worst_relative_error"] <= 1e-10
    assert result["pass"]


def test_criterion_06_composition_multiplier_exactness():
    result = report(6, criterion_6_composition_multiplier_exact())
    assert result["relative_defect"] <= 1e-10
    assert result["pass"]


def test_criterion_07_composition_asymptotics():
    result = report(7, criterion_7_composition_asymptotics())
    d = result["defects"]
    assert d[0] > d[1] > d[2]
    assert d[2] <= 0.2 * d[0]
    assert result["pass"]


def test_criterion_08_parametrix():
    result = report(8, criterion_8_parametrix())
    assert result["multiplier_max_residual"] <= 1e-10
    r = result["elliptic_residuals"]
    assert r[0] >= r[1] >= r[2]
    assert result["reciprocal_member"]
    assert result["pass"]


def test_criterion_09_garding():
    result = report(9, criterion_9_garding(seed=SEED))
    mult = result["multiplier"]
    assert abs(mult["c1"] - 1.0) <= 1e-9
    assert mult["c2"] == 0.0
    assert mult["margin"] >= -1e-12
    c1 = result["c1_by_window"]
    assert c1["64"] > 0
    assert abs(c1["64"] - c1["32"]) <= 0.20 * c1["32"]
    assert result["direct_check"]["ok"]
    assert result["pass"]


def test_criterion_10_gohberg_compactness():
    result = report(10, criterion_10_gohberg_compactness())
    assert result["shifted_min_quarter_sv"] >= 0.45
    d = result["decay_shell_suprema"]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert result["decay_mid_over_top_sv"] <= 0.1
    assert result["pass"]


def test_criterion_11_resolvent_strong_solution():
    result = report(11, criterion_11_resolvent_strong_solution(seed=SEED))
    assert result["resolvent_residual"] <= 1e-10
    assert result["dense_residual"] <= 1e-8
    assert result["interior_agreement"] <= 1e-6
    assert result["pass"]


def test_criterion_12_apriori_estimate():
    result = report(12, criterion_12_apriori(seed=SEED))
    by_window = result["by_window"]
    for key in ("32", "64"):
        c, d = by_window[key]
        assert 0.0 < c <= d
    assert result["pass"]


@pytest.mark.slow
def test_criterion_13_determinism():
    b1 = payload_bytes(run_battery(SEED))
    b2 = payload_bytes(run_battery(SEED))
    status = "PASS" if b1 == b2 else "FAIL"
    print(f"criterion 13 [determinism]: {status}")
    assert b1 == b2
