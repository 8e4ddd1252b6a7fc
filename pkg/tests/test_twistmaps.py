import math

import numpy as np
import pytest

from eulab.errors import AmplitudeError, NoResonanceError, NotFoundError, ValidationError
from eulab.twistmaps import (GeneratingPerturbation, PeriodicOrbit, TwistMap, area_residual, classify,
                             find_periodic, find_resonance, integrable_polar, iterate, linear_map, perturb,
                             plane_rotation, rational_approx, rigid_rotation, rotation_number, standard_map,
                             twist_fit)

TWO_PI = 2 * math.pi
GOLDEN = (math.sqrt(5) - 1) / 2


def origin(q=1):
    return PeriodicOrbit(q, 0, np.zeros(q), np.zeros(q), 0.0)


def test_iterate_example(twist):
    orb = iterate(twist, (0.0, 0.25), 3)
    assert np.allclose(orb.theta, [0, -TWO_PI / 3, -2 * TWO_PI / 3, -TWO_PI], atol=1e-12)
    assert np.all(orb.rho == 0.25) and not orb.escaped


def test_iterate_escape():
    orb = iterate(standard_map(1.5, -1.0, 1.0), (1.0, 0.9), 50)
    assert orb.escaped and orb.exit_index is not None


def test_winding_examples(twist):
    assert abs(float(twist.winding(np.array(0.5))) + math.pi) < 1e-13
    assert abs(float(twist.winding(np.array(0.25))) + TWO_PI / 3) < 1e-13


def test_rotation_number_golden():
    rn = rotation_number(rigid_rotation(TWO_PI * GOLDEN), (0.0, 0.5), N=2000)
    assert abs(rn.value - GOLDEN) < 1e-12 and rn.converged
    with pytest.raises(ValidationError):
        rotation_number(rigid_rotation(1.0), (0.0, 0.5), N=10)


def test_resonances(twist):
    (c, p), = find_resonance(twist, 1, 2)
    assert abs(c - 0.5) < 1e-12 and p == -1
    (c, p), = find_resonance(twist, 2, 5)
    assert abs(c - 1 / 3) < 1e-12 and p == -2
    with pytest.raises(NoResonanceError):
        find_resonance(twist, 3, 4)
    with pytest.raises(ValidationError):
        find_resonance(twist, 2, 4)


def test_find_periodic_on_integrable_circle(twist):
    orbits = find_periodic(twist, 2, 0.5, n_seeds=4)
    # every point of the resonant circle is periodic; distinct seeds give distinct orbits
    assert all(o.q == 2 and o.p == -1 and o.residual < 1e-12 for o in orbits)
    assert all(np.allclose(o.rho, 0.5) for o in orbits)


def test_find_periodic_perturbed(perturbed):
    _, pi = perturbed
    orbits = find_periodic(pi, 5, 1 / 3)
    assert len(orbits) == 2
    kinds = sorted(classify(pi, o, fit=False).verdict for o in orbits)
    assert kinds == ["elliptic-nondegenerate", "hyperbolic"]


def test_find_periodic_not_found():
    with pytest.raises(NotFoundError):
        find_periodic(standard_map(0.0, -10, 10), 1, 0.5, n_seeds=4)


def test_classify_linear_maps():
    cat = classify(linear_map([[2, 1], [1, 1]]), origin())
    assert cat.verdict == "hyperbolic" and abs(cat.lam.real - (3 + math.sqrt(5)) / 2) < 1e-6
    rot = classify(plane_rotation(1.0), origin(), fit=False)
    assert rot.verdict == "elliptic-nondegenerate" and abs(rot.omega - 1.0) < 1e-8
    quarter = classify(plane_rotation(math.pi / 2), origin(), fit=False)
    assert quarter.verdict == "elliptic-resonant" and quarter.resonance[3]
    shear = classify(linear_map([[1, 1], [0, 1]]), origin())
    assert shear.verdict == "parabolic"


def test_twist_fit_integrable_polar():
    tf = twist_fit(integrable_polar(1.0, 0.5), origin())
    assert abs(tf.omega - 1.0) < 1e-6
    assert abs(tf.alpha - 0.5) < 1e-3 * 0.5
    # a pure rotation has no twist
    pure = classify(plane_rotation(1.0), origin())
    assert pure.verdict == "elliptic-degenerate-twist"


def test_perturbation_gates(twist):
    with pytest.raises(AmplitudeError):
        perturb(twist, GeneratingPerturbation(5.0, 5, 1 / 3))
    with pytest.raises(ValidationError):
        perturb(twist, GeneratingPerturbation(1e-3, 5, 0.02))


def test_area_preservation(perturbed, rng):
    _, pi = perturbed
    th = rng.uniform(0, TWO_PI, 10)
    rr = rng.uniform(0.25, 0.42, 10)
    assert area_residual(pi, th, rr) < 1e-6
    assert area_residual(pi, th, rr, q=5) < 1e-5


def test_perturbation_is_local(perturbed, rng):
    base, pi = perturbed
    th = rng.uniform(0, TWO_PI, 50)
    rr = rng.uniform(0.5, 0.9, 50)
    assert np.array_equal(np.array(pi(th, rr)), np.array(base(th, rr)))


def test_rational_approx():
    assert rational_approx(0.4) == __import__("fractions").Fraction(2, 5)
    assert rational_approx(GOLDEN) is None
