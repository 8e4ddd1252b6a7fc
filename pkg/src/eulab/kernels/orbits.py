"""Per-orbit statistics used by orbit classification.

For an orbit ``(theta_k, rho_k)`` with unreduced angles the kernel computes a
fixed-length statistics vector (see the ``S_*`` slot names): weighted
Birkhoff rotation numbers over the full and half orbit, the residual of a
trigonometric graph fit ``rho = c(theta)``, a rational lock ``p/q`` and, for
locked orbits, the libration rotation number and curve fit of the ``q``-th
iterate around the island centroid.
"""
import math

import numpy as np

from .._backend import njit

TWO_PI = 2.0 * math.pi

(S_COUNT, S_ESC, S_ROT, S_ROT_HALF, S_FIT, S_P, S_Q, S_NU, S_NU_HALF, S_IFIT, S_SPREAD,
 S_CTH, S_CRHO, S_IRAD, S_RRANGE) = range(15)
NSTATS = 15
MIN_ISLAND_POINTS = 64


@njit
def birkhoff(x, n):
    """Weighted Birkhoff average of ``x[:n]`` with the ``exp(-1/(t(1-t)))`` bump."""
    num = 0.0
    den = 0.0
    for k in range(n):
        t = (k + 1.0) / (n + 1.0)
        w = math.exp(-1.0 / (t * (1.0 - t)))
        num += w * x[k]
        den += w
    return num / den


@njit
def trig_fit_residual(x, y, m, K, ridge):
    """RMS residual of a degree-``K`` trigonometric least-squares fit of ``y(x)``.

    Uses ``m`` evenly spaced samples out of ``len(x)``.
    """
    n = x.shape[0]
    m = min(m, n)
    nb = 2 * K + 1
    G = np.zeros((nb, nb))
    b = np.zeros(nb)
    rows = np.empty((m, nb))
    ys = np.empty(m)
    for i in range(m):
        j = (i * (n - 1)) // max(m - 1, 1)
        c1 = math.cos(x[j])
        s1 = math.sin(x[j])
        rows[i, 0] = 1.0
        ck = 1.0
        sk = 0.0
        for k in range(1, K + 1):
            ck, sk = ck * c1 - sk * s1, sk * c1 + ck * s1
            rows[i, 2 * k - 1] = ck
            rows[i, 2 * k] = sk
        ys[i] = y[j]
    ymean = 0.0
    for i in range(m):
        ymean += ys[i]
    ymean /= m
    for i in range(m):
        yi = ys[i] - ymean
        for a in range(nb):
            ra = rows[i, a]
            b[a] += ra * yi
            for c in range(a, nb):
                G[a, c] += ra * rows[i, c]
    for a in range(nb):
        G[a, a] += ridge * m
        for c in range(a):
            G[a, c] = G[c, a]
    coef = np.linalg.solve(G, b)
    acc = 0.0
    for i in range(m):
        pred = 0.0
        for a in range(nb):
            pred += rows[i, a] * coef[a]
        d = ys[i] - ymean - pred
        acc += d * d
    return math.sqrt(acc / m)


@njit
def find_lock(rot, qmax, tol):
    for q in range(1, qmax + 1):
        p = math.floor(rot * q + 0.5)
        if abs(rot - p / q) < tol:
            return p, q
    return 0.0, 0


@njit
def orbit_stats(th, rr, count, n, yscale, K, M, qmax, lock_tol, ridge, out):
    for i in range(out.shape[0]):
        out[i] = np.nan
    out[S_COUNT] = count
    if count < n:
        out[S_ESC] = 1.0
        return
    out[S_ESC] = 0.0
    d = np.empty(n)
    for k in range(n):
        d[k] = (th[k + 1] - th[k]) / TWO_PI
    rot = birkhoff(d, n)
    out[S_ROT] = rot
    out[S_ROT_HALF] = birkhoff(d, n // 2)
    rmin = rr[0]
    rmax = rr[0]
    for k in range(n + 1):
        rmin = min(rmin, rr[k])
        rmax = max(rmax, rr[k])
    out[S_RRANGE] = rmax - rmin
    if rmax - rmin < 1e-14:
        out[S_FIT] = 0.0
    else:
        xs = np.empty(n + 1)
        for k in range(n + 1):
            xs[k] = th[k] - TWO_PI * math.floor(th[k] / TWO_PI)
        out[S_FIT] = trig_fit_residual(xs, rr[:n + 1], M, K, ridge)
    p, q = find_lock(rot, qmax, lock_tol)
    out[S_P] = p
    out[S_Q] = q
    if q == 0:
        return
    ni = n // q + 1
    if ni < MIN_ISLAND_POINTS:
        return
    X = np.empty(ni)
    Y = np.empty(ni)
    cx = 0.0
    cy = 0.0
    for j in range(ni):
        X[j] = th[q * j] - TWO_PI * p * j
        Y[j] = rr[q * j]
        cx += X[j]
        cy += Y[j]
    cx /= ni
    cy /= ni
    ys = yscale
    if ys <= 0.0:
        # auto aspect: equalise RMS extents so island curves are near-circular
        sx = 0.0
        sy = 0.0
        for j in range(ni):
            sx += (X[j] - cx) ** 2
            sy += (Y[j] - cy) ** 2
        ys = math.sqrt(sx / sy) if sy > 0.0 else 1.0
    spread = 0.0
    phi = np.empty(ni)
    rad = np.empty(ni)
    rsum = 0.0
    for j in range(ni):
        X[j] -= cx
        Y[j] = (Y[j] - cy) * ys
        spread = max(spread, abs(X[j]))
        phi[j] = math.atan2(Y[j], X[j])
        rad[j] = math.sqrt(X[j] * X[j] + Y[j] * Y[j])
        rsum += rad[j]
    dphi = np.empty(ni - 1)
    for j in range(ni - 1):
        dp = phi[j + 1] - phi[j]
        dp -= TWO_PI * math.floor((dp + math.pi) / TWO_PI)
        dphi[j] = dp / TWO_PI
    out[S_NU] = birkhoff(dphi, ni - 1)
    out[S_NU_HALF] = birkhoff(dphi, (ni - 1) // 2)
    out[S_SPREAD] = spread
    out[S_CTH] = cx - TWO_PI * math.floor(cx / TWO_PI)
    out[S_CRHO] = cy
    out[S_IRAD] = rsum / ni
    out[S_IFIT] = trig_fit_residual(phi, rad, M, K, ridge)


@njit
def stats_batch(th, rr, counts, n, yscale, K, M, qmax, lock_tol, ridge, out):
    for j in range(th.shape[0]):
        orbit_stats(th[j], rr[j], counts[j], n, yscale[j], K, M, qmax, lock_tol, ridge, out[j])


# -- numpy batch ---------------------------------------------------------------------

def _weights(n):
    t = (np.arange(n) + 1.0) / (n + 1.0)
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def trig_fit_residual_np(x, y, m, K, ridge):
    """Batched :func:`trig_fit_residual`; ``x, y`` have shape ``(S, n)``."""
    n = x.shape[1]
    m = min(m, n)
    j = (np.arange(m) * (n - 1)) // max(m - 1, 1)
    xs = x[:, j]
    ys = y[:, j]
    ys = ys - ys.mean(axis=1, keepdims=True)
    k = np.arange(1, K + 1)
    ang = xs[:, :, None] * k
    rows = np.empty(xs.shape + (2 * K + 1,))
    rows[..., 0] = 1.0
    rows[..., 1::2] = np.cos(ang)
    rows[..., 2::2] = np.sin(ang)
    G = np.einsum("sia,sib->sab", rows, rows)
    G += ridge * m * np.eye(2 * K + 1)
    b = np.einsum("sia,si->sa", rows, ys)
    coef = np.linalg.solve(G, b[..., None])[..., 0]
    res = ys - np.einsum("sia,sa->si", rows, coef)
    return np.sqrt(np.mean(res ** 2, axis=1))


def stats_batch_np(th, rr, counts, n, yscale, K, M, qmax, lock_tol, ridge):
    S = th.shape[0]
    out = np.full((S, NSTATS), np.nan)
    out[:, S_COUNT] = counts
    esc = counts < n
    out[:, S_ESC] = esc.astype(float)
    ok = np.nonzero(~esc)[0]
    if ok.size == 0:
        return out
    th = th[ok, :n + 1]
    rr = rr[ok, :n + 1]
    d = np.diff(th, axis=1) / TWO_PI
    rot = d @ _weights(n)
    out[ok, S_ROT] = rot
    out[ok, S_ROT_HALF] = d[:, :n // 2] @ _weights(n // 2)
    rng = rr.max(axis=1) - rr.min(axis=1)
    out[ok, S_RRANGE] = rng
    fit = np.zeros(ok.size)
    var = np.nonzero(rng >= 1e-14)[0]
    for chunk in np.array_split(var, max(1, var.size // 256)):
        if chunk.size:
            xs = np.mod(th[chunk], TWO_PI)
            fit[chunk] = trig_fit_residual_np(xs, rr[chunk], M, K, ridge)
    out[ok, S_FIT] = fit
    P = np.zeros(ok.size)
    Q = np.zeros(ok.size, dtype=np.int64)
    for q in range(qmax, 0, -1):
        p = np.floor(rot * q + 0.5)
        hit = np.abs(rot - p / q) < lock_tol
        P = np.where(hit, p, P)
        Q = np.where(hit, q, Q)
    out[ok, S_P] = P
    out[ok, S_Q] = Q
    for q in np.unique(Q[Q > 0]):
        ni = n // q + 1
        if ni < MIN_ISLAND_POINTS:
            continue
        g = np.nonzero(Q == q)[0]
        jj = np.arange(ni)
        X = th[g][:, q * jj] - TWO_PI * P[g, None] * jj
        Y = rr[g][:, q * jj]
        cx = X.mean(axis=1, keepdims=True)
        cy = Y.mean(axis=1, keepdims=True)
        X = X - cx
        Y = Y - cy
        ys = yscale[ok[g]].copy()
        auto = ys <= 0.0
        if np.any(auto):
            sx = np.sqrt(np.sum(X ** 2, axis=1))
            sy = np.sqrt(np.sum(Y ** 2, axis=1))
            ys = np.where(auto, np.where(sy > 0.0, sx / np.where(sy > 0.0, sy, 1.0), 1.0), ys)
        Y = Y * ys[:, None]
        phi = np.arctan2(Y, X)
        rad = np.hypot(X, Y)
        dp = np.diff(phi, axis=1)
        dp = (dp - TWO_PI * np.floor((dp + math.pi) / TWO_PI)) / TWO_PI
        rows = ok[g]
        out[rows, S_NU] = dp @ _weights(ni - 1)
        out[rows, S_NU_HALF] = dp[:, :(ni - 1) // 2] @ _weights((ni - 1) // 2)
        out[rows, S_SPREAD] = np.abs(X).max(axis=1)
        out[rows, S_CTH] = np.mod(cx[:, 0], TWO_PI)
        out[rows, S_CRHO] = cy[:, 0]
        out[rows, S_IRAD] = rad.mean(axis=1)
        for chunk in np.array_split(np.arange(g.size), max(1, g.size // 256)):
            if chunk.size:
                out[rows[chunk], S_IFIT] = trig_fit_residual_np(phi[chunk], rad[chunk], M, K, ridge)
    return out
