import csv
import math

import numpy as np
import pytest

from eulab.dynamics import (NumericReturnMap, SectionSpec, analytic_return_map, return_map, section_orbits,
                            trace)
from eulab.errors import SectionError, ValidationError
from eulab.profiles import Profile
from eulab.steady import ChartField, ShearProfileS3, bernoulli

TWO_PI = 2 * math.pi


def test_trace_conserves_rho_and_bernoulli(s3_profile):
    w = ChartField(s3_profile, mode=1)
    tr = trace(w, (0.2, 0.1, 0.3), 20.0, tol=1e-11)
    assert tr.status == "ok"
    assert np.max(np.abs(tr.y[:, 2] - 0.3)) < 1e-12
    B = bernoulli(s3_profile)
    assert np.max(np.abs(B(tr.y[:, 2]) - B(0.3))) < 1e-12
    # shear flow: angles move linearly in time with slopes (f, g) at rho = 0.3
    slope = (tr.y[-1, :2] - tr.y[0, :2]) / tr.t[-1]
    assert np.allclose(slope, [-1.2, 3.2], atol=1e-9)


def test_return_map_example(s3_profile):
    rp = return_map(ChartField(s3_profile, mode=1), SectionSpec(), (0.0, 0.25))
    assert abs(rp.theta % TWO_PI - 4 * math.pi / 3) < 1e-10
    assert abs(rp.rho - 0.25) < 1e-13
    assert abs(rp.time - TWO_PI / 3.0) < 1e-10


def test_analytic_map_matches_ode(s3_profile, twist, rng):
    num = NumericReturnMap(ChartField(s3_profile, mode=1), a=0.05, b=0.95)
    th = rng.uniform(0, TWO_PI, 20)
    rr = rng.uniform(0.05, 0.95, 20)
    t1, r1, st = num.step(th, rr)
    t2, r2 = twist(th, rr)
    assert np.all(st == 0)
    assert np.max(np.abs(t1 - t2)) < 1e-9 and np.max(np.abs(r1 - r2)) < 1e-12


def test_reverse_field_inverts(s3_profile, twist, rng):
    rev = ShearProfileS3(Profile.poly([-1.0, -1.0]), Profile.constant(0.0))
    back = NumericReturnMap(ChartField(rev, mode=1), SectionSpec(direction=-1), a=0.05, b=0.95)
    th = rng.uniform(0, TWO_PI, 10)
    rr = rng.uniform(0.1, 0.9, 10)
    t1, r1 = twist(th, rr)
    t0, r0, st = back.step(t1, r1)
    assert np.all(st == 0)
    assert np.max(np.abs(t0 - th)) < 1e-9 and np.max(np.abs(r0 - rr)) < 1e-12


def test_section_tangent_is_rejected(t3_profile):
    with pytest.raises(SectionError):
        analytic_return_map(t3_profile, 0.0, 3.0)
    with pytest.raises(ValidationError):
        SectionSpec("phi").index("s3")


def test_section_orbits_csv(s3_profile, tmp_path):
    orb = section_orbits(ChartField(s3_profile, mode=1), SectionSpec(), [0.0, 1.0], [0.25, 0.5], 5)
    path = tmp_path / "orb.csv"
    orb.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert tuple(rows[0]) == ("seed_id", "iter", "theta1_unreduced", "rho", "transit_time")
    assert len(rows) == 1 + 2 * 6
    assert float(rows[1][4]) == 0.0
    assert abs(float(rows[2][4]) - TWO_PI / 3) < 1e-10
    assert abs(float(rows[3][2]) - 2 * (-TWO_PI / 3)) < 1e-9
