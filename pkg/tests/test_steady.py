import math

import numpy as np
import pytest

from eulab.errors import ValidationError
from eulab.geometry import VolumePreservingDiffeo
from eulab.profiles import Profile
from eulab.steady import (ChartField, ShearProfileS3, ShearProfileT3, bernoulli, bernoulli_identity_residual,
                          check_nondegenerate_s3, check_nondegenerate_t3, curl, divergence, eval_field,
                          lie_bracket, profile_from_json, pushforward_field, random_chart_points, velocity_field,
                          vorticity_field)


def s3(f1, f2):
    return ShearProfileS3(Profile.from_expression(str(f1)), Profile.from_expression(str(f2)))


def test_eval_field_examples(s3_profile):
    assert np.allclose(eval_field(s3_profile, (0.0, 0.0, 0.5)), [1.5, -1.5, 0.0])
    assert np.allclose(eval_field(s3(0, 0), (1.0, 2.0, 0.3)), 0.0)
    assert np.allclose(eval_field(s3(0, 1), (0.0, 0.0, 0.3)), [1.0, 1.0, 0.0])


def test_curl_example(s3_profile):
    w = curl(s3_profile)
    x = np.linspace(0, 1, 51)
    assert np.allclose(w.f(x), -4 * x, atol=1e-14)
    assert np.allclose(w.g(x), 2 + 4 * x, atol=1e-14)
    assert np.allclose(w.f(x), w.A1(x) + w.A2(x))
    assert np.allclose(w.g(x), w.A2(x) - w.A1(x))


def test_curl_linear(rng):
    p1, p2 = s3("rho**2", "1 - rho"), s3("3*rho", "rho**3")
    a, b = 1.7, -0.4
    comb = p1.combine(a, p2, b)
    x = rng.uniform(0, 1, 64)
    for name in ("A1", "A2"):
        lhs = getattr(curl(comb), name)(x)
        rhs = a * getattr(curl(p1), name)(x) + b * getattr(curl(p2), name)(x)
        assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_bernoulli_example(s3_profile):
    B = bernoulli(s3_profile)
    assert B(0.0) == 0.0
    assert abs(B(0.5) - 0.625) < 1e-12
    assert abs(B(1.0) - 1.5) < 1e-12


def test_nondegeneracy_examples(s3_profile):
    rep = check_nondegenerate_s3(s3_profile)
    assert rep.nondegenerate and abs(rep.twist_min - 8) < 1e-9 and rep.tau <= rep.twist_min
    const = check_nondegenerate_s3(s3(2.0, 0))
    assert not const.nondegenerate and const.twist_min < 1e-12
    assert not check_nondegenerate_s3(s3(0, 0)).nondegenerate


def test_t3_example(t3_profile):
    w = curl(t3_profile)
    z = np.linspace(0, 2 * math.pi, 33)
    assert np.allclose(w.wx(z), -np.cos(z), atol=1e-14)
    assert np.allclose(w.wy(z), -2 * np.sin(z), atol=1e-14)
    assert np.allclose(np.abs(w.twist(z)), 2.0, atol=1e-12)
    B = bernoulli(t3_profile)
    assert np.allclose(B(z) - B(0.0), 0.5 * (1 + 3 * np.cos(z) ** 2) - 2.0, atol=1e-14)
    rep = check_nondegenerate_t3(t3_profile, tau_request=2.0 - 1e-6)
    assert rep.nondegenerate
    crit = sorted(round(c[0], 6) for c in rep.critical_points)
    assert np.allclose(crit, [0, math.pi / 2, math.pi, 3 * math.pi / 2][:len(crit)], atol=1e-6)


def test_t3_degenerate_examples():
    circ = ShearProfileT3(Profile.from_expression("cos(z)", "t3"), Profile.from_expression("sin(z)", "t3"))
    assert check_nondegenerate_t3(circ).morse_bott_ok is False
    flat = ShearProfileT3(Profile.constant(1.0), Profile.constant(0.0))
    assert not check_nondegenerate_t3(flat).nondegenerate


def test_bernoulli_identity(s3_profile, t3_profile, rng):
    pts = random_chart_points("s3", 100, rng, 1e-3, 1 - 1e-3)
    assert bernoulli_identity_residual(s3_profile, pts) < 1e-8
    assert bernoulli_identity_residual(s3(0, 0), pts) == 0.0
    assert bernoulli_identity_residual(t3_profile, random_chart_points("t3", 100, rng)) < 1e-8


def test_divergence_and_bracket(s3_profile, rng):
    pts = random_chart_points("s3", 64, rng)
    u, w = velocity_field(s3_profile), vorticity_field(s3_profile)
    assert np.max(np.abs(divergence(u, pts))) < 1e-12
    assert np.max(np.abs(divergence(w, pts))) < 1e-12
    assert np.max(np.abs(lie_bracket(u, w, pts))) < 1e-10


def test_pushforward(s3_profile, rng):
    w = vorticity_field(s3_profile)
    assert pushforward_field(w, VolumePreservingDiffeo.identity()) is w
    moved = pushforward_field(w, VolumePreservingDiffeo.s3_rotation(0.9))
    pts = random_chart_points("s3", 50, rng)
    assert np.max(np.abs(moved(pts) - w(pts))) < 1e-12
    with pytest.raises(ValidationError):
        pushforward_field(w, VolumePreservingDiffeo.t3_shear("sin(z)", "0"))


def test_profile_json_roundtrip():
    prof = profile_from_json({"domain": "s3", "kind": "closed-form", "f1": "1 + rho", "f2": "0"})
    assert isinstance(prof, ShearProfileS3)
    assert abs(curl(prof).f(0.25) + 1.0) < 1e-15
    with pytest.raises(ValidationError):
        profile_from_json({"domain": "s3", "f1": "1"})
    with pytest.raises(ValidationError):
        profile_from_json({"domain": "r3", "f1": "1", "f2": "0"})


def test_chart_field_vector(s3_profile):
    w = ChartField(s3_profile)
    v = w(np.array([[0.1, 0.2, 0.25]]))
    assert np.allclose(v, [[-1.0, 3.0, 0.0]])
