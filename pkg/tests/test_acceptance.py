"""The ten acceptance criteria at their stated tolerances.

Reference values below are closed-form and frozen here; the runners in
``eulab.acceptance`` only measure.
"""
import math

import pytest

from eulab import acceptance

from conftest import ACCEPTANCE_LINES

TWO_PI_SQ = 2 * math.pi ** 2  # |S^3|


def _run(n):
    res = acceptance.CRITERIA[n]()
    print(res.line)
    ACCEPTANCE_LINES.append(res.line)
    return res


def test_criterion_1_example_flow():
    r = _run(1)
    v = r.values
    assert v["closed_f_err"] < 1e-9 and v["closed_g_err"] < 1e-9
    assert abs(v["closed_B1"] - 1.5) < 1e-9
    assert v["closed_twist_err"] < 1e-9
    assert v["spline_f_err"] < 1e-6 and abs(v["spline_B1"] - 1.5) < 1e-6
    assert v["tau"] >= 7.9
    assert r.passed, r.failures


def test_criterion_2_eigenfields_and_dual_form():
    r = _run(2)
    assert r.values["u1_err"] < 1e-12 and r.values["u2_err"] < 1e-12
    assert r.values["dual_form_err"] < 1e-10
    assert r.passed, r.failures


def test_criterion_3_bernoulli_identity():
    r = _run(3)
    assert r.values["s3_residual"] < 1e-8 and r.values["t3_residual"] < 1e-8
    assert r.passed, r.failures


def test_criterion_4_return_map_equivalence():
    r = _run(4)
    assert r.values["sup_error"] < 1e-7
    assert r.passed, r.failures


def test_criterion_5_resonance_location():
    r = _run(5)
    assert abs(r.values["c_1_2"] - 0.5) < 1e-10
    assert abs(r.values["c_2_5"] - 1 / 3) < 1e-10
    assert r.values["no_resonance_3_4"]
    assert r.passed, r.failures


def test_criterion_6_elliptic_point_pipeline():
    r = _run(6)
    v = r.values
    assert v["period"] == 5 and abs(v["p"]) == 2
    assert v["residual"] < 1e-9
    fp = v["fixed_point"]
    assert fp["verdict"] == "elliptic-nondegenerate"
    assert not any(fp["resonance_flags"])
    assert abs(fp["alpha"]) > 3 * fp["alpha_sigma"]
    assert v["probe"]["verdict"] == "KAM-stable-evidence"
    assert r.passed, r.failures


@pytest.mark.slow
def test_criterion_7_knotted_kappa():
    r = _run(7)
    v = r.values
    assert v["lambda"] > 0 and v["kappa_2_5"] == v["lambda"]
    assert v["island_orbits"] >= 10
    assert v["lambda_stderr"] < v["lambda"] / 3
    assert v["kappa0"] <= TWO_PI_SQ - v["lambda"]
    assert abs(v["integrable_kappa0_fraction"] - 1.0) <= 0.02
    assert r.passed, r.failures


def test_criterion_8_suspension_recovery():
    r = _run(8)
    v = r.values
    assert v["sup_0.001"] < 5e-6
    assert v["divergence_sup"] < 1e-12
    assert v["identical_outside_support"]
    assert r.passed, r.failures


@pytest.mark.slow
def test_criterion_9_transport_invariance():
    r = _run(9)
    assert all(row["agree"] for row in r.values["s3_rows"])
    assert all(row["agree"] for row in r.values["t3_rows"])
    assert r.passed, r.failures


def test_criterion_10_property_suites():
    r = _run(10)
    v = r.values
    assert v["area_residual_map"] < 1e-8
    assert v["area_residual_numeric"] < 1e-6
    assert v["intersection_ok"]
    assert v["rotation_scaling_err"] < 1e-8
    assert v["deterministic_threads"]
    assert r.passed, r.failures
