import math
import warnings

import numpy as np
import pytest

from eulab.kam import (CHAOTIC, INVARIANT_CURVE, ISLAND_CHAIN, OTHER, UNKNOT, GridSpec, IsotopyClass,
                       PrecisionWarning, class_of, classify_orbit, compare_estimates, grid_points,
                       kappa_estimate, knot_class, torus_knot)
from eulab.twistmaps import rigid_rotation, standard_map

TWO_PI = 2 * math.pi


def test_knot_class_examples():
    assert knot_class(TWO_PI * 2, 5) == IsotopyClass("torus-knot", 2, 5)
    assert knot_class(-TWO_PI * 2, 5) == IsotopyClass("torus-knot", 2, 5)
    assert knot_class(TWO_PI * 1, 2) == UNKNOT
    assert knot_class(0.0, 3) == UNKNOT
    assert str(knot_class(TWO_PI * 3, 2)) == "torus-knot(2,3)"


def test_torus_knot_symmetry():
    for p, q in [(2, 3), (3, 5), (2, 7), (4, 9)]:
        assert torus_knot(p, q) == torus_knot(q, p)
        assert torus_knot(p, q).nontrivial
    with pytest.warns(UserWarning):
        assert torus_knot(2, 4) == OTHER


def test_class_of():
    assert class_of(INVARIANT_CURVE, 0, 0, "s3") == UNKNOT
    assert class_of(INVARIANT_CURVE, 0, 0, "t3").tag == "t3-horizontal"
    assert class_of(ISLAND_CHAIN, -2, 5, "s3") == IsotopyClass("torus-knot", 2, 5)
    assert class_of(CHAOTIC, 0, 0, "s3") is None


def test_grid_points_deterministic():
    spec = GridSpec(8, 4)
    a = grid_points(spec, 0.1, 0.9, seed=7)
    b = grid_points(spec, 0.1, 0.9, seed=7)
    c = grid_points(spec, 0.1, 0.9, seed=8)
    assert np.array_equal(a[0], b[0]) and not np.array_equal(a[0], c[0])
    th, rr, cell = a
    assert np.all((th >= 0) & (th < TWO_PI)) and np.all((rr > 0.1) & (rr < 0.9))
    assert abs(cell * 32 - TWO_PI * 0.8) < 1e-12


def test_classify_orbits():
    inv = classify_orbit(rigid_rotation(TWO_PI * (math.sqrt(5) - 1) / 2), (0.0, 0.5), N=2000)
    assert inv.verdict == INVARIANT_CURVE and inv.ergodic
    rat = classify_orbit(rigid_rotation(TWO_PI * 0.4), (0.0, 0.5), N=2000)
    assert rat.verdict == INVARIANT_CURVE and not rat.ergodic
    assert classify_orbit(standard_map(6.0), (1.0, 0.3), N=4000).verdict == CHAOTIC


def test_integrable_kappa_is_unknotted(twist):
    k = kappa_estimate(twist, GridSpec(12, 12), N=2000, seed=3)
    assert abs(k.total_volume - 2 * math.pi ** 2) < 1e-12
    assert k.lam == 0.0
    # near-rational orbits drop out of the ergodic count; the rest is unknotted
    assert 0.9 < k.fraction("unknot") <= 1.0 + 1e-9
    assert k.counts[INVARIANT_CURVE] == 144


def test_kappa_stderr_warning(perturbed):
    # island and curve orbits carry unequal weights, so the error is nonzero
    with pytest.warns(PrecisionWarning):
        kappa_estimate(perturbed[1], GridSpec(4, 4, 0.3, 0.37), N=1000, stderr_target=1e-9)


def test_compare_estimates_identical(twist):
    k = kappa_estimate(twist, GridSpec(6, 6), N=1000)
    rows, agree = compare_estimates(k, k)
    assert agree and all(r["difference"] == 0.0 for r in rows)
