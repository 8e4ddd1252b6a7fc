"""numba and numpy kernels must agree."""
import numpy as np
import pytest

from eulab import kernels
from eulab._backend import HAS_NUMBA, resolve
from eulab.dynamics import MAX_PERIODS, TRANSVERSALITY_FLOOR
from eulab.kam import DEFAULT_OPTIONS
from eulab.kernels.fields import map_step, map_step_np
from eulab.kernels.ode import field_eval, field_eval_np
from eulab.steady import ChartField
from eulab.suspension import suspend

pytestmark = pytest.mark.skipif(not HAS_NUMBA, reason="numba not installed")


def test_resolve():
    assert resolve("numpy") == "numpy"
    with pytest.raises(ValueError):
        resolve("cuda")


@pytest.mark.parametrize("which", ["base", "perturbed"])
def test_map_step_parity(perturbed, rng, which):
    pi = perturbed[0] if which == "base" else perturbed[1]
    bd = pi.descriptor()
    th = rng.uniform(0, 2 * np.pi, 200)
    rr = rng.uniform(0.3, 0.45, 200)
    t1, r1, s1 = map_step_np(bd, th, rr)
    for j in range(th.size):
        t2, r2, s2 = map_step(bd, th[j], rr[j])
        assert s2 == s1[j]
        assert abs(t2 - t1[j]) < 1e-12 and abs(r2 - r1[j]) < 1e-14


def test_field_eval_parity(s3_profile, perturbed, rng):
    fields = [ChartField(s3_profile, mode=1), suspend(perturbed[1], ChartField(s3_profile, mode=1))]
    pts = np.column_stack([rng.uniform(0, 6.3, 300), rng.uniform(0, 6.3, 300), rng.uniform(0.3, 0.45, 300)])
    for f in fields:
        fd = f.descriptor()
        ref = field_eval_np(fd, pts)
        out = np.empty(3)
        for j in range(pts.shape[0]):
            field_eval(fd, pts[j, 0], pts[j, 1], pts[j, 2], out)
            assert np.allclose(out, ref[j], rtol=1e-13, atol=1e-13)


def test_map_stats_parity(perturbed):
    pi = perturbed[1]
    th = np.linspace(0.1, 6.0, 8)
    rr = np.linspace(0.3, 0.45, 8)
    ys = np.zeros(8)
    opts = DEFAULT_OPTIONS.kernel_opts()
    a = kernels.map_stats(pi.descriptor(), th, rr, 2000, pi.a, pi.b, ys, opts, backend="numba")
    b = kernels.map_stats(pi.descriptor(), th, rr, 2000, pi.a, pi.b, ys, opts, backend="numpy")
    # orbits are identical up to rounding, so the statistics agree closely
    assert np.allclose(a, b, rtol=1e-6, atol=1e-9, equal_nan=True)


def test_ode_returns_parity(s3_profile, rng):
    fd = ChartField(s3_profile, mode=1).descriptor(1)
    a0 = rng.uniform(0, 6.3, 16)
    r0 = rng.uniform(0.1, 0.9, 16)
    args = (fd, 1, 1, 0.0, a0, r0, 1e-12, TRANSVERSALITY_FLOOR, 1e-6, 1 - 1e-6, MAX_PERIODS)
    da1, rr1, tt1, st1, _ = kernels.ode_returns(*args, backend="numba")
    da2, rr2, tt2, st2, _ = kernels.ode_returns(*args, backend="numpy")
    assert np.array_equal(st1, st2)
    assert np.max(np.abs(da1 - da2)) < 1e-10
    assert np.max(np.abs(tt1 - tt2)) < 1e-10
    assert np.max(np.abs(rr1 - rr2)) < 1e-12


def test_threads_do_not_change_results(perturbed):
    pi = perturbed[1]
    th = np.linspace(0, 6, 70)
    rr = np.linspace(0.3, 0.45, 70)
    ys = np.zeros(70)
    opts = DEFAULT_OPTIONS.kernel_opts()
    a = kernels.map_stats(pi.descriptor(), th, rr, 1000, pi.a, pi.b, ys, opts, threads=1)
    b = kernels.map_stats(pi.descriptor(), th, rr, 1000, pi.a, pi.b, ys, opts, threads=3)
    assert np.array_equal(a, b, equal_nan=True)
