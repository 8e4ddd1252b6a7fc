import math

import numpy as np
import pytest

from eulab.errors import EvaluationError, ValidationError
from eulab.profiles import Profile


def test_polynomial_derivatives():
    p = Profile.from_expression("1 + 2*rho - rho**3")
    x = np.linspace(0, 1, 11)
    assert np.allclose(p(x), 1 + 2 * x - x ** 3)
    assert np.allclose(p(x, 1), 2 - 3 * x ** 2)
    assert np.allclose(p(x, 2), -6 * x)
    assert np.allclose(p(x, 3), -6.0)


def test_trig_expression():
    p = Profile.from_expression("2*cos(z) + 0.5*sin(3*z)", "t3")
    z = np.linspace(0, 2 * math.pi, 17)
    assert np.max(np.abs(p(z) - (2 * np.cos(z) + 0.5 * np.sin(3 * z)))) < 1e-12
    assert np.max(np.abs(p(z, 1) - (-2 * np.sin(z) + 1.5 * np.cos(3 * z)))) < 1e-11


def test_rejects_non_polynomial():
    with pytest.raises(ValidationError):
        Profile.from_expression("exp(rho)")
    with pytest.raises(ValidationError):
        Profile.from_expression("rho*z")


def test_spline_exact_on_cubic():
    x = np.linspace(0, 1, 21)
    s = Profile.spline(x, x ** 3 - x)
    t = np.linspace(0, 1, 101)
    # not-a-knot splines reproduce cubics
    assert np.max(np.abs(s(t) - (t ** 3 - t))) < 1e-12
    assert np.max(np.abs(s(t, 1) - (3 * t ** 2 - 1))) < 1e-10


def test_periodic_spline_needs_equal_ends():
    with pytest.raises(ValidationError):
        Profile.spline([0, 1, 2, 2 * math.pi], [0, 1, 2, 3], periodic=True)


def test_bad_derivative_order():
    with pytest.raises(EvaluationError):
        Profile.constant(1.0)(0.5, 4)


def test_from_json_forms():
    assert Profile.from_json(2.5)(0.3) == 2.5
    assert Profile.from_json("rho")(0.3) == 0.3
    sp = Profile.from_json({"nodes": [0, 0.3, 0.6, 1], "values": [0, 0.3, 0.6, 1]})
    assert abs(sp(0.5) - 0.5) < 1e-14
