"""Orbit generation for packed annulus maps, fused with orbit statistics."""
import numpy as np

from .._backend import njit
from .fields import map_step, map_step_np
from .ode import orbit_ode, orbits_ode_np
from .orbits import NSTATS, orbit_stats, stats_batch_np


@njit
def orbit_map(bd, th0, r0, n, alo, ahi, th_out, r_out):
    """Iterate ``n`` times; returns the number of completed steps."""
    th = th0
    r = r0
    th_out[0] = th
    r_out[0] = r
    for k in range(n):
        th, r, st = map_step(bd, th, r)
        if st != 0:
            return k
        th_out[k + 1] = th
        r_out[k + 1] = r
        if r <= alo or r >= ahi:
            return k + 1
    return n


@njit
def orbits_map_batch(bd, th0s, r0s, n, alo, ahi, th_out, r_out, counts):
    for j in range(th0s.shape[0]):
        counts[j] = orbit_map(bd, th0s[j], r0s[j], n, alo, ahi, th_out[j], r_out[j])


@njit
def map_stats_batch(bd, th0s, r0s, n, alo, ahi, yscale, K, M, qmax, lock_tol, ridge, out):
    th = np.empty(n + 1)
    rr = np.empty(n + 1)
    for j in range(th0s.shape[0]):
        c = orbit_map(bd, th0s[j], r0s[j], n, alo, ahi, th, rr)
        orbit_stats(th, rr, c, n, yscale[j], K, M, qmax, lock_tol, ridge, out[j])


@njit
def ode_stats_batch(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac,
                    yscale, K, M, qmax, lock_tol, ridge, out, status, times):
    th = np.empty(n + 1)
    rr = np.empty(n + 1)
    tt = np.empty(n + 1)
    for j in range(a0s.shape[0]):
        c, st = orbit_ode(fd, sec, direction, s0, a0s[j], r0s[j], n, tol, floor, rlo, rhi, alo, ahi,
                          maxfac, th, rr, tt)
        status[j] = st
        times[j] = tt[1] if c >= 1 else np.nan
        orbit_stats(th, rr, c, n, yscale[j], K, M, qmax, lock_tol, ridge, out[j])


def orbits_map_np(bd, th0s, r0s, n, alo, ahi):
    th0s = np.asarray(th0s, dtype=float)
    r0s = np.asarray(r0s, dtype=float)
    m = th0s.size
    th = np.full((m, n + 1), np.nan)
    rr = np.full((m, n + 1), np.nan)
    th[:, 0], rr[:, 0] = th0s, r0s
    counts = np.full(m, n, dtype=np.int64)
    alive = np.ones(m, dtype=bool)
    t, r = th0s.copy(), r0s.copy()
    for k in range(n):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        t1, r1, st = map_step_np(bd, t[idx], r[idx])
        bad = st != 0
        counts[idx[bad]] = k
        alive[idx[bad]] = False
        g = idx[~bad]
        t[g], r[g] = t1[~bad], r1[~bad]
        th[g, k + 1], rr[g, k + 1] = t[g], r[g]
        out = (r[g] <= alo) | (r[g] >= ahi)
        counts[g[out]] = k + 1
        alive[g[out]] = False
    return th, rr, counts


def map_stats_np(bd, th0s, r0s, n, alo, ahi, yscale, K, M, qmax, lock_tol, ridge, chunk=512):
    m = len(th0s)
    out = np.empty((m, NSTATS))
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        th, rr, counts = orbits_map_np(bd, th0s[s:e], r0s[s:e], n, alo, ahi)
        out[s:e] = stats_batch_np(th, rr, counts, n, np.asarray(yscale[s:e]), K, M, qmax, lock_tol, ridge)
    return out


def ode_stats_np(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac,
                 yscale, K, M, qmax, lock_tol, ridge, chunk=256):
    m = len(a0s)
    out = np.empty((m, NSTATS))
    status = np.zeros(m, dtype=np.int64)
    times = np.full(m, np.nan)
    for s in range(0, m, chunk):
        e = min(m, s + chunk)
        th, rr, tt, counts, st = orbits_ode_np(fd, sec, direction, s0, a0s[s:e], r0s[s:e], n, tol,
                                               floor, rlo, rhi, alo, ahi, maxfac)
        status[s:e] = st
        times[s:e] = tt[:, 1]
        out[s:e] = stats_batch_np(th, rr, counts, n, np.asarray(yscale[s:e]), K, M, qmax, lock_tol, ridge)
    return out, status, times
