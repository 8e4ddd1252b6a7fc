"""Hot loops with numba and numpy implementations.

The dispatchers below pick the implementation from ``backend`` (``"numba"``
or ``"numpy"``, default from ``EULAB_NUMBA``).  The numba path splits seed
ensembles into fixed batches and runs them on a thread pool; the kernels
release the GIL and write disjoint output slices, so results do not depend
on the number of threads.
"""
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .._backend import NUMBA, resolve
from . import annulus, ode, orbits
from .fields import map_step, map_step_np
from .ode import field_eval_np
from .orbits import NSTATS

BATCH = 32


def default_threads():
    return os.cpu_count() or 1


def _run_batches(fn, m, threads):
    """Call ``fn(lo, hi)`` over fixed index batches, possibly in parallel."""
    spans = [(s, min(m, s + BATCH)) for s in range(0, m, BATCH)]
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(spans) <= 1:
        for lo, hi in spans:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(lambda sp: fn(*sp), spans))


def _f64(x):
    return np.ascontiguousarray(x, dtype=float)


def map_orbits(bd, th0s, r0s, n, alo, ahi, backend=None):
    th0s, r0s = _f64(th0s), _f64(r0s)
    if resolve(backend) == NUMBA:
        m = th0s.size
        th = np.full((m, n + 1), np.nan)
        rr = np.full((m, n + 1), np.nan)
        counts = np.zeros(m, dtype=np.int64)
        annulus.orbits_map_batch(bd, th0s, r0s, n, alo, ahi, th, rr, counts)
        for j in range(m):
            th[j, counts[j] + 1:] = np.nan
            rr[j, counts[j] + 1:] = np.nan
        return th, rr, counts
    return annulus.orbits_map_np(bd, th0s, r0s, n, alo, ahi)


def map_stats(bd, th0s, r0s, n, alo, ahi, yscale, opts, backend=None, threads=None):
    th0s, r0s, yscale = _f64(th0s), _f64(r0s), _f64(yscale)
    K, M, qmax, lock_tol, ridge = opts
    if resolve(backend) != NUMBA:
        return annulus.map_stats_np(bd, th0s, r0s, n, alo, ahi, yscale, K, M, qmax, lock_tol, ridge)
    out = np.empty((th0s.size, NSTATS))

    def work(lo, hi):
        annulus.map_stats_batch(bd, th0s[lo:hi], r0s[lo:hi], n, alo, ahi, yscale[lo:hi],
                                K, M, qmax, lock_tol, ridge, out[lo:hi])

    _run_batches(work, th0s.size, threads)
    return out


def orbit_stats(th, rr, counts, n, yscale, opts, backend=None):
    """Statistics of precomputed orbits (rows of ``th``, ``rr``)."""
    K, M, qmax, lock_tol, ridge = opts
    th, rr, yscale = _f64(th), _f64(rr), _f64(yscale)
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    if resolve(backend) == NUMBA:
        out = np.empty((th.shape[0], NSTATS))
        orbits.stats_batch(th, rr, counts, n, yscale, K, M, qmax, lock_tol, ridge, out)
        return out
    return orbits.stats_batch_np(th, rr, counts, n, yscale, K, M, qmax, lock_tol, ridge)


def ode_returns(fd, sec, direction, s0, a0s, r0s, tol, floor, rlo, rhi, maxfac, backend=None, threads=None):
    a0s, r0s = _f64(a0s), _f64(r0s)
    if resolve(backend) != NUMBA:
        return ode.return_once_np(fd, a0s, s0, r0s, sec, direction, tol, floor, rlo, rhi, maxfac)
    m = a0s.size
    da, r1, tt = np.empty(m), np.empty(m), np.empty(m)
    st, ns = np.empty(m, dtype=np.int64), np.empty(m, dtype=np.int64)

    def work(lo, hi):
        ode.returns_batch(fd, sec, direction, s0, a0s[lo:hi], r0s[lo:hi], tol, floor, rlo, rhi, maxfac,
                          da[lo:hi], r1[lo:hi], tt[lo:hi], st[lo:hi], ns[lo:hi])

    _run_batches(work, m, threads)
    return da, r1, tt, st, ns


def ode_orbits(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac,
               backend=None, threads=None):
    a0s, r0s = _f64(a0s), _f64(r0s)
    if resolve(backend) != NUMBA:
        return ode.orbits_ode_np(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac)
    m = a0s.size
    th = np.full((m, n + 1), np.nan)
    rr = np.full((m, n + 1), np.nan)
    tt = np.full((m, n + 1), np.nan)
    counts = np.zeros(m, dtype=np.int64)
    status = np.zeros(m, dtype=np.int64)

    def work(lo, hi):
        ode.orbits_ode_batch(fd, sec, direction, s0, a0s[lo:hi], r0s[lo:hi], n, tol, floor, rlo, rhi, alo,
                             ahi, maxfac, th[lo:hi], rr[lo:hi], tt[lo:hi], counts[lo:hi], status[lo:hi])

    _run_batches(work, m, threads)
    for j in range(m):
        th[j, counts[j] + 1:] = np.nan
        rr[j, counts[j] + 1:] = np.nan
        tt[j, counts[j] + 1:] = np.nan
    return th, rr, tt, counts, status


def ode_stats(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac, yscale, opts,
              backend=None, threads=None):
    a0s, r0s, yscale = _f64(a0s), _f64(r0s), _f64(yscale)
    K, M, qmax, lock_tol, ridge = opts
    if resolve(backend) != NUMBA:
        return annulus.ode_stats_np(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi,
                                    maxfac, yscale, K, M, qmax, lock_tol, ridge)
    m = a0s.size
    out = np.empty((m, NSTATS))
    status = np.zeros(m, dtype=np.int64)
    times = np.empty(m)

    def work(lo, hi):
        annulus.ode_stats_batch(fd, sec, direction, s0, a0s[lo:hi], r0s[lo:hi], n, tol, floor, rlo, rhi,
                                alo, ahi, maxfac, yscale[lo:hi], K, M, qmax, lock_tol, ridge,
                                out[lo:hi], status[lo:hi], times[lo:hi])

    _run_batches(work, m, threads)
    return out, status, times


def map_step_batch(bd, th, rr, backend=None):
    th, rr = _f64(th), _f64(rr)
    if resolve(backend) == NUMBA:
        t1, r1 = np.empty_like(th), np.empty_like(rr)
        st = np.empty(th.shape, dtype=np.int64)
        for j in range(th.size):
            t1.flat[j], r1.flat[j], st.flat[j] = map_step(bd, th.flat[j], rr.flat[j])
        return t1, r1, st
    return map_step_np(bd, th, rr)


__all__ = ["map_orbits", "map_stats", "orbit_stats", "ode_returns", "ode_orbits", "ode_stats",
           "map_step_batch", "field_eval_np", "default_threads"]
