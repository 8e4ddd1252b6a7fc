import math

import numpy as np
import pytest

from eulab.errors import ChartDomainError, NearLinkError
from eulab.geometry import (HOPF, AmbientPoint, ChartPointS3, VolumePreservingDiffeo, apply_diffeo, chart_array,
                            chart_of, embed, embed_array, pushforward_vector, volume_density)


def test_embed_examples():
    a = embed((0.0, 0.0, 0.5))
    assert np.allclose(a.as_array(), [math.sqrt(0.5), 0, math.sqrt(0.5), 0], atol=1e-15)
    b = embed((math.pi / 2, 0.0, 0.25))
    assert np.allclose(b.as_array(), [0, 0.5, math.sqrt(0.75), 0], atol=1e-15)


@pytest.mark.parametrize("rho", [0.0, 1.0, -0.1])
def test_embed_rejects_link(rho):
    with pytest.raises(ChartDomainError):
        embed((0.0, 0.0, rho))


def test_chart_of_examples():
    p = chart_of(AmbientPoint(math.sqrt(0.5), 0.0, math.sqrt(0.5), 0.0))
    assert (p.theta1, p.theta2) == (0.0, 0.0) and abs(p.rho - 0.5) < 1e-15
    q = chart_of(AmbientPoint(0.0, 0.5, math.sqrt(0.75), 0.0))
    assert abs(q.theta1 - math.pi / 2) < 1e-15 and abs(q.rho - 0.25) < 1e-15
    with pytest.raises(NearLinkError):
        chart_of(AmbientPoint(1.0, 0.0, 0.0, 0.0))


def test_roundtrip_and_sphere(rng):
    n = 10_000
    t1, t2 = rng.uniform(0, 2 * math.pi, (2, n))
    rho = rng.uniform(1e-5, 1 - 1e-5, n)
    v = embed_array(t1, t2, rho)
    assert np.max(np.abs(np.linalg.norm(v, axis=1) - 1)) < 1e-12
    back = chart_array(v)
    assert np.max(np.abs(embed_array(*back.T) - v)) < 1e-10
    assert np.max(np.abs(v[:, 0] ** 2 + v[:, 1] ** 2 - rho)) < 1e-15


def test_hopf_basis_and_density():
    assert tuple(HOPF.u1) == (1.0, -1.0, 0.0)
    assert tuple(HOPF.u2) == (1.0, 1.0, 0.0)
    assert volume_density("s3") == 0.5 and volume_density("t3") == 1.0


def test_chart_point_validation():
    with pytest.raises(ChartDomainError):
        ChartPointS3(0.0, 0.0, 1.5)


def test_diffeo_examples(rng):
    ident = VolumePreservingDiffeo.s3_rotation(0.0)
    p = np.array([0.3, 1.2, 0.4])
    assert np.array_equal(apply_diffeo(ident, p), p)
    sh = VolumePreservingDiffeo.t3_shear("sin(z)", "0")
    assert np.allclose(sh.apply([0.0, 0.0, math.pi / 2]), [1.0, 0.0, math.pi / 2], atol=1e-15)
    pts = rng.uniform(0, 2 * math.pi, (200, 3))
    assert np.max(np.abs(sh.jacobian_det(pts) - 1)) < 1e-10
    assert np.max(np.abs(sh.inverse(sh.apply(pts)) - pts)) < 1e-10


def test_s3_rotation_flows_u1():
    phi = VolumePreservingDiffeo.s3_rotation(0.7, "u1")
    out = phi.apply([0.0, 0.0, 0.3])
    assert np.allclose(out, [0.7, -0.7, 0.3])
    v = pushforward_vector(phi, [0.0, 0.0, 0.3], [1.0, 2.0, 0.0])
    assert np.allclose(v, [1.0, 2.0, 0.0])
