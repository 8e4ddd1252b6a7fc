import numpy as np
import pytest

from eulab.dynamics import analytic_return_map
from eulab.errors import ValidationError
from eulab.kernels.ode import field_eval_np
from eulab.profiles import Profile
from eulab.steady import ChartField, ShearProfileS3, divergence, random_chart_points
from eulab.suspension import SuspendedField, is_perturbed, suspend, verify_suspension
from eulab.twistmaps import GeneratingPerturbation, perturb


@pytest.fixture(scope="module")
def w(s3_profile):
    return ChartField(s3_profile, mode=1)


def test_zero_eps_gives_plain_field(twist, w):
    flat = perturb(twist, GeneratingPerturbation(0.0, 5, 1 / 3))
    out = suspend(flat, w)
    assert not isinstance(out, SuspendedField) and not is_perturbed(out)
    assert not is_perturbed(suspend(twist, w))


def test_base_mismatch_rejected(perturbed):
    other = ChartField(ShearProfileS3(Profile.poly([1.0, 2.0]), Profile.constant(0.0)), mode=1)
    with pytest.raises(ValidationError):
        suspend(perturbed[1], other)
    with pytest.raises(ValidationError):
        suspend(perturbed[1], ChartField(other.profile, mode=0))


def test_divergence_free_and_local(perturbed, w, rng):
    w_hat = suspend(perturbed[1], w)
    assert is_perturbed(w_hat)
    pts = random_chart_points("s3", 200, rng, 0.25, 0.42)
    assert np.max(np.abs(divergence(w_hat, pts))) < 1e-9
    far = random_chart_points("s3", 200, rng, 0.5, 0.95)
    assert np.array_equal(field_eval_np(w_hat.descriptor(), far), field_eval_np(w.descriptor(), far))


def test_return_map_matches(perturbed, w):
    w_hat = suspend(perturbed[1], w)
    rep = verify_suspension(w_hat, perturbed[1], grid=(6, 6), tol=1e-12, a=0.25, b=0.42)
    # invariant: sup residual below max(10 tol, 1e-6 eps) at a tight integrator tolerance
    assert rep.flagged == 0
    assert rep.sup < max(10 * 1e-12, 1e-6 * perturbed[1].pert.eps)
    assert rep.map_gap > 0 and rep.field_gap > 0


def test_to_json(perturbed, w):
    meta = suspend(perturbed[1], w).to_json()["perturbation"]
    assert meta["q"] == 5 and meta["p"] == -2 and meta["eps"] == 1e-3
