"""Field evaluation, DOPRI5 integration and section return maps.

The numba path integrates one seed at a time; the numpy path advances a
whole batch of seeds in lock-step with per-seed step sizes.  Both use the
same embedded Dormand-Prince 5(4) pair, Hairer's dense output for event
location and a short correction with full steps to land on the section.
"""
import math

import numpy as np

from .._backend import njit
from .descriptor import H_DKIND, H_PERT, H_SEC, H_X, H_Y, pert as pert_block, profile
from .fields import (P_ACTIVE, P_C, P_EPS, P_H, P_PHI, P_Q, P_RB, P_TC, bump, bump_np,
                     shear_comps, shear_comps_np, temporal_bump, temporal_bump_np)
from .profiles import peval, peval_np

TWO_PI = 2.0 * math.pi

# status codes
OK, ESCAPE, SECTION, NONRETURN, STIFF = 0, 1, 2, 3, 4

C2, C3, C4, C5 = 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9
A21 = 1.0 / 5
A31, A32 = 3.0 / 40, 9.0 / 40
A41, A42, A43 = 44.0 / 45, -56.0 / 15, 32.0 / 9
A51, A52, A53, A54 = 19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729
A61, A62, A63, A64, A65 = 9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656
A71, A73, A74, A75, A76 = 35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84
E1, E3, E4, E5, E6, E7 = (71.0 / 57600, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200,
                          22.0 / 525, -1.0 / 40)
D1, D3, D4, D5, D6, D7 = (-12715105075.0 / 11282082432, 87487479700.0 / 32700410799,
                          -10690763975.0 / 1880347072, 701980252875.0 / 199316789632,
                          -1453857185.0 / 822651844, 69997945.0 / 29380423)


# -- field ----------------------------------------------------------------------

@njit
def _susp_terms(d, p, a, tau_mod, r, F, G, dF, dG):
    """Co-moving suspension velocity ``(X^a, X^P, chi)`` at chart point."""
    chi, sig = temporal_bump(tau_mod, d[p + P_H], d[p + P_TC])
    if chi == 0.0:
        return 0.0, 0.0, 0.0
    eps = d[p + P_EPS]
    q = d[p + P_Q]
    rb = d[p + P_RB]
    u = (r - d[p + P_C]) / rb
    b0 = bump(u, 0)
    b1 = bump(u, 1)
    b2 = bump(u, 2)
    D = G
    w0 = F / G
    w0P = (dF * G - F * dG) / (G * G) / D
    ay = a - tau_mod * w0
    se = sig * eps
    ao = ay
    for _ in range(100):
        an = ay - se * math.cos(q * ao + d[p + P_PHI]) * b1 / (rb * D)
        if abs(an - ao) <= 1e-15 * (1.0 + abs(an)):
            ao = an
            break
        ao = an
    ph = q * ao + d[p + P_PHI]
    sn = math.sin(ph)
    cs = math.cos(ph)
    s_a = -q * sn * b0
    s_P = cs * b1 / (rb * D)
    s_aP = -q * sn * b1 / (rb * D)
    s_PP = cs * (b2 / (rb * rb * D * D) - b1 * dG / (rb * D * D * D))
    dP = -eps * s_a / (1.0 + se * s_aP)
    Va = eps * s_P + se * s_PP * dP
    return Va + tau_mod * w0P * dP, dP, chi


@njit
def field_eval(d, y0, y1, y2, out):
    r = y2
    z0 = y0
    z1 = y1
    dk = d[H_DKIND] != 0.0
    if dk:
        z0 = y0 - peval(d, int(d[H_X]), r, 0)
        z1 = y1 - peval(d, int(d[H_Y]), r, 0)
    c0, c1, d0, d1 = shear_comps(d, r)
    v0 = c0
    v1 = c1
    v2 = 0.0
    p = int(d[H_PERT])
    if d[p + P_ACTIVE] != 0.0 and abs(r - d[p + P_C]) < d[p + P_RB]:
        sec = d[H_SEC]
        if sec == 1.0:
            a, s, F, G, dF, dG = z0, z1, c0, c1, d0, d1
        else:
            a, s, F, G, dF, dG = z1, z0, c1, c0, d1, d0
        tau = s - TWO_PI * math.floor(s / TWO_PI)
        Xa, XP, chi = _susp_terms(d, p, a, tau, r, F, G, dF, dG)
        if chi != 0.0:
            if sec == 1.0:
                v0 += G * chi * Xa
            else:
                v1 += G * chi * Xa
            v2 = chi * XP
    if dk and v2 != 0.0:
        v0 += peval(d, int(d[H_X]), r, 1) * v2
        v1 += peval(d, int(d[H_Y]), r, 1) * v2
    out[0] = v0
    out[1] = v1
    out[2] = v2


def field_eval_np(fd, Y):
    """Vectorised, complex-safe field evaluation; ``Y`` has shape ``(..., 3)``."""
    Y = np.asarray(Y)
    dkind = fd[H_DKIND]
    r = Y[..., 2]
    z0, z1 = Y[..., 0], Y[..., 1]
    if dkind != 0:
        z0 = z0 - peval_np(*profile(fd, H_X), r, 0)
        z1 = z1 - peval_np(*profile(fd, H_Y), r, 0)
    c0, c1, d0, d1 = shear_comps_np(fd, r)
    zero = np.zeros(np.broadcast(r, z0).shape, dtype=np.result_type(Y, float))
    v0 = zero + c0
    v1 = zero + c1
    v2 = zero.copy()
    pert = pert_block(fd)
    if pert[P_ACTIVE] != 0.0:
        sec = fd[H_SEC]
        if sec == 1:
            a, s, F, G, dF, dG = z0, z1, c0, c1, d0, d1
        else:
            a, s, F, G, dF, dG = z1, z0, c1, c0, d1, d0
        eps, q, rb, phi = pert[P_EPS], pert[P_Q], pert[P_RB], pert[P_PHI]
        tau = s - TWO_PI * np.floor(np.real(s) / TWO_PI)
        chi, sig = temporal_bump_np(tau, pert[P_H], pert[P_TC])
        u = (r - pert[P_C]) / rb
        b0, b1, b2 = bump_np(u, 0), bump_np(u, 1), bump_np(u, 2)
        D = np.where(np.real(G) != 0.0, G, 1.0)
        w0 = F / D
        w0P = (dF * D - F * dG) / (D * D) / D
        ay = a - tau * w0
        se = sig * eps
        ao = ay
        for _ in range(100):
            an = ay - se * np.cos(q * ao + phi) * b1 / (rb * D)
            if np.all(np.abs(an - ao) <= 1e-15 * (1.0 + np.abs(an))):
                ao = an
                break
            ao = an
        ph = q * ao + phi
        sn, cs = np.sin(ph), np.cos(ph)
        s_a = -q * sn * b0
        s_P = cs * b1 / (rb * D)
        s_aP = -q * sn * b1 / (rb * D)
        s_PP = cs * (b2 / (rb * rb * D * D) - b1 * dG / (rb * D ** 3))
        dP = -eps * s_a / (1.0 + se * s_aP)
        Xa = eps * s_P + se * s_PP * dP + tau * w0P * dP
        inside = (np.abs(np.real(u)) < 1.0) & (np.real(chi) != 0.0)
        dA = np.where(inside, G * chi * Xa, 0.0)
        if sec == 1:
            v0 = v0 + dA
        else:
            v1 = v1 + dA
        v2 = v2 + np.where(inside, chi * dP, 0.0)
    if dkind != 0:
        v0 = v0 + peval_np(*profile(fd, H_X), r, 1) * v2
        v1 = v1 + peval_np(*profile(fd, H_Y), r, 1) * v2
    return np.stack([v0, v1, v2], axis=-1)


# -- numba integrator -------------------------------------------------------------

@njit
def _f(fd, off, y, out):
    field_eval(fd, y[0] + off[0], y[1] + off[1], y[2] + off[2], out)


@njit
def _stages(fd, off, y, h, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew):
    for i in range(3):
        ytmp[i] = y[i] + h * A21 * k1[i]
    _f(fd, off, ytmp, k2)
    for i in range(3):
        ytmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    _f(fd, off, ytmp, k3)
    for i in range(3):
        ytmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    _f(fd, off, ytmp, k4)
    for i in range(3):
        ytmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    _f(fd, off, ytmp, k5)
    for i in range(3):
        ytmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    _f(fd, off, ytmp, k6)
    for i in range(3):
        ynew[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i])
    _f(fd, off, ynew, k7)


@njit
def _plain_step(fd, off, y, h, out):
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    k5 = np.empty(3)
    k6 = np.empty(3)
    k7 = np.empty(3)
    ytmp = np.empty(3)
    _f(fd, off, y, k1)
    _stages(fd, off, y, h, k1, k2, k3, k4, k5, k6, k7, ytmp, out)


@njit
def return_once(fd, a0, s0, r0, sec, direction, tol, floor, rlo, rhi, maxfac):
    """Integrate from the section point until the next crossing.

    Returns ``(da, r1, transit, status, nsteps)`` where ``da`` is the
    unreduced in-section angle increment.
    """
    off = np.zeros(3)
    y = np.zeros(3)
    if sec == 1:
        off[0] = a0
        off[1] = s0
    else:
        off[0] = s0
        off[1] = a0
    y[2] = r0
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    k5 = np.empty(3)
    k6 = np.empty(3)
    k7 = np.empty(3)
    ytmp = np.empty(3)
    ynew = np.empty(3)
    ia = 1 - sec
    _f(fd, off, y, k1)
    ws = k1[sec] * direction
    if not ws >= floor:
        return 0.0, r0, 0.0, SECTION, 0
    period = TWO_PI / ws
    tmax = maxfac * period
    target = direction * TWO_PI
    h = 0.02 * period
    t = 0.0
    nsteps = 0
    while True:
        if t + h > tmax:
            h = tmax - t + 1e-12 * period
        _stages(fd, off, y, h, k1, k2, k3, k4, k5, k6, k7, ytmp, ynew)
        nsteps += 1
        err = 0.0
        for i in range(3):
            e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            sc = tol + tol * max(abs(y[i]), abs(ynew[i]))
            err += (e / sc) ** 2
        err = math.sqrt(err / 3.0)
        if not (err <= 1.0):
            fac = 0.9 * err ** -0.2 if err == err else 0.1
            h *= max(0.1, fac)
            if h < 1e-14 * (1.0 + t):
                return 0.0, y[2], t, STIFF, nsteps
            continue
        g0 = (y[sec] - target) * direction
        g1 = (ynew[sec] - target) * direction
        if g0 < 0.0 <= g1:
            # dense output coefficients
            r2 = np.empty(3)
            r3 = np.empty(3)
            r4 = np.empty(3)
            r5 = np.empty(3)
            for i in range(3):
                yd = ynew[i] - y[i]
                bs = h * k1[i] - yd
                r2[i] = yd
                r3[i] = bs
                r4[i] = yd - h * k7[i] - bs
                r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            lo = 0.0
            hi = 1.0
            glo = g0
            ghi = g1
            th = 0.5
            side = 0
            for _ in range(100):
                th = (lo * ghi - hi * glo) / (ghi - glo)
                th1 = 1.0 - th
                val = y[sec] + th * (r2[sec] + th1 * (r3[sec] + th * (r4[sec] + th1 * r5[sec])))
                gv = (val - target) * direction
                if abs(gv) < 1e-13 or hi - lo < 1e-15:
                    break
                if gv < 0.0:
                    lo = th
                    glo = gv
                    if side == -1:
                        ghi *= 0.5
                    side = -1
                else:
                    hi = th
                    ghi = gv
                    if side == 1:
                        glo *= 0.5
                    side = 1
            # land on the section with full-order steps
            _plain_step(fd, off, y, th * h, ytmp)
            tc = t + th * h
            for _ in range(8):
                gv = ytmp[sec] - target
                if abs(gv) < 1e-12:
                    break
                _f(fd, off, ytmp, k1)
                dt = -gv / k1[sec]
                _plain_step(fd, off, ytmp, dt, ynew)
                for i in range(3):
                    ytmp[i] = ynew[i]
                tc += dt
            return ytmp[ia], ytmp[2], tc, OK, nsteps
        t += h
        for i in range(3):
            y[i] = ynew[i]
            k1[i] = k7[i]
        if y[2] <= rlo or y[2] >= rhi:
            return y[ia], y[2], t, ESCAPE, nsteps
        if not k1[sec] * direction >= floor:
            return y[ia], y[2], t, SECTION, nsteps
        if t >= tmax:
            return y[ia], y[2], t, NONRETURN, nsteps
        fac = 0.9 * err ** -0.2 if err > 0.0 else 5.0
        h *= min(5.0, max(0.2, fac))


@njit
def orbit_ode(fd, sec, direction, s0, a0, r0, n, tol, floor, rlo, rhi, alo, ahi, maxfac,
              th_out, r_out, t_out):
    """Iterate the return map ``n`` times; returns ``(count, status)``."""
    th_out[0] = a0
    r_out[0] = r0
    t_out[0] = 0.0
    a = a0
    r = r0
    s = s0
    for k in range(n):
        da, r1, tt, st, _ = return_once(fd, a, s, r, sec, direction, tol, floor, rlo, rhi, maxfac)
        if st != OK:
            return k, st
        a = a + da
        r = r1
        s = s + direction * TWO_PI
        th_out[k + 1] = a
        r_out[k + 1] = r
        t_out[k + 1] = tt
        if r <= alo or r >= ahi:
            return k + 1, ESCAPE
    return n, OK


@njit
def orbits_ode_batch(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac,
                     th_out, r_out, t_out, counts, status):
    for j in range(a0s.shape[0]):
        c, st = orbit_ode(fd, sec, direction, s0, a0s[j], r0s[j], n, tol, floor, rlo, rhi, alo, ahi,
                          maxfac, th_out[j], r_out[j], t_out[j])
        counts[j] = c
        status[j] = st


# -- numpy integrator ---------------------------------------------------------------

def _stages_np(fd, off, y, h, k1):
    f = lambda z: field_eval_np(fd, z + off)  # noqa: E731
    hh = h[:, None]
    k2 = f(y + hh * (A21 * k1))
    k3 = f(y + hh * (A31 * k1 + A32 * k2))
    k4 = f(y + hh * (A41 * k1 + A42 * k2 + A43 * k3))
    k5 = f(y + hh * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
    k6 = f(y + hh * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
    ynew = y + hh * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
    k7 = f(ynew)
    return k2, k3, k4, k5, k6, k7, ynew


def _plain_step_np(fd, off, y, h):
    k1 = field_eval_np(fd, y + off)
    return _stages_np(fd, off, y, h, k1)[-1]


def return_once_np(fd, a0, s0, r0, sec, direction, tol, floor, rlo, rhi, maxfac):
    """Batch version of :func:`return_once` over arrays ``a0, r0``."""
    a0 = np.asarray(a0, dtype=float)
    r0 = np.asarray(r0, dtype=float)
    m = a0.size
    ia = 1 - sec
    off = np.zeros((m, 3))
    off[:, ia] = a0
    off[:, sec] = s0
    y = np.zeros((m, 3))
    y[:, 2] = r0
    da = np.zeros(m)
    r1 = r0.copy()
    tt = np.zeros(m)
    status = np.full(m, -1, dtype=np.int64)
    nsteps = np.zeros(m, dtype=np.int64)
    k1 = field_eval_np(fd, y + off)
    ws = k1[:, sec] * direction
    bad = ~(ws >= floor)
    status[bad] = SECTION
    period = np.where(bad, 1.0, TWO_PI / np.where(bad, 1.0, ws))
    tmax = maxfac * period
    target = direction * TWO_PI
    h = 0.02 * period
    t = np.zeros(m)
    act = np.nonzero(status < 0)[0]
    while act.size:
        ya, ka, ha, ta = y[act], k1[act], h[act], t[act]
        ha = np.where(ta + ha > tmax[act], tmax[act] - ta + 1e-12 * period[act], ha)
        k2, k3, k4, k5, k6, k7, yn = _stages_np(fd, off[act], ya, ha, ka)
        nsteps[act] += 1
        e = ha[:, None] * (E1 * ka + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = tol + tol * np.maximum(np.abs(ya), np.abs(yn))
        err = np.sqrt(np.mean((e / sc) ** 2, axis=1))
        acc = err <= 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            fac_rej = np.where(np.isfinite(err), 0.9 * err ** -0.2, 0.1)
            fac_acc = np.where(err > 0.0, 0.9 * err ** -0.2, 5.0)
        # rejected steps
        rej = act[~acc]
        h[rej] = ha[~acc] * np.maximum(0.1, fac_rej[~acc])
        stiff = rej[h[rej] < 1e-14 * (1.0 + t[rej])]
        status[stiff] = STIFF
        r1[stiff] = y[stiff, 2]
        tt[stiff] = t[stiff]
        # accepted steps
        ai = np.nonzero(acc)[0]
        g0 = (ya[ai, sec] - target) * direction
        g1 = (yn[ai, sec] - target) * direction
        cross = (g0 < 0.0) & (g1 >= 0.0)
        ci = ai[cross]
        if ci.size:
            idx = act[ci]
            hc = ha[ci]
            y0c, ync = ya[ci], yn[ci]
            k1c, k3c, k4c, k5c, k6c, k7c = ka[ci], k3[ci], k4[ci], k5[ci], k6[ci], k7[ci]
            yd = ync - y0c
            bs = hc[:, None] * k1c - yd
            r4 = yd - hc[:, None] * k7c - bs
            r5 = hc[:, None] * (D1 * k1c + D3 * k3c + D4 * k4c + D5 * k5c + D6 * k6c + D7 * k7c)
            lo = np.zeros(ci.size)
            hi = np.ones(ci.size)
            glo, ghi = g0[cross].copy(), g1[cross].copy()
            side = np.zeros(ci.size)
            th = np.full(ci.size, 0.5)
            done = np.zeros(ci.size, dtype=bool)
            for _ in range(100):
                thn = (lo * ghi - hi * glo) / (ghi - glo)
                th = np.where(done, th, thn)
                t1 = 1.0 - th
                val = y0c[:, sec] + th * (yd[:, sec] + t1 * (bs[:, sec] + th * (r4[:, sec] + t1 * r5[:, sec])))
                gv = (val - target) * direction
                done |= (np.abs(gv) < 1e-13) | (hi - lo < 1e-15)
                if done.all():
                    break
                neg = (gv < 0.0) & ~done
                pos = (gv >= 0.0) & ~done
                ghi = np.where(neg & (side == -1), 0.5 * ghi, ghi)
                glo = np.where(pos & (side == 1), 0.5 * glo, glo)
                lo = np.where(neg, th, lo)
                glo = np.where(neg, gv, glo)
                hi = np.where(pos, th, hi)
                ghi = np.where(pos, gv, ghi)
                side = np.where(neg, -1, np.where(pos, 1, side))
            yc = _plain_step_np(fd, off[idx], y0c, th * hc)
            tcc = t[idx] + th * hc
            for _ in range(8):
                gv = yc[:, sec] - target
                if np.all(np.abs(gv) < 1e-12):
                    break
                kk = field_eval_np(fd, yc + off[idx])
                dt = np.where(np.abs(gv) < 1e-12, 0.0, -gv / kk[:, sec])
                yc = _plain_step_np(fd, off[idx], yc, dt)
                tcc = tcc + dt
            da[idx] = yc[:, ia]
            r1[idx] = yc[:, 2]
            tt[idx] = tcc
            status[idx] = OK
        ni = ai[~cross]
        idx = act[ni]
        t[idx] += ha[ni]
        y[idx] = yn[ni]
        k1[idx] = k7[ni]
        h[idx] = ha[ni] * np.minimum(5.0, np.maximum(0.2, fac_acc[ni]))
        esc = (y[idx, 2] <= rlo) | (y[idx, 2] >= rhi)
        sect = ~(k1[idx, sec] * direction >= floor)
        nonret = t[idx] >= tmax[idx]
        for mask, code in ((esc, ESCAPE), (sect & ~esc, SECTION), (nonret & ~esc & ~sect, NONRETURN)):
            j = idx[mask]
            status[j] = code
            da[j] = y[j, ia]
            r1[j] = y[j, 2]
            tt[j] = t[j]
        act = np.nonzero(status < 0)[0]
    return da, r1, tt, status, nsteps


def orbits_ode_np(fd, sec, direction, s0, a0s, r0s, n, tol, floor, rlo, rhi, alo, ahi, maxfac):
    a0s = np.asarray(a0s, dtype=float)
    r0s = np.asarray(r0s, dtype=float)
    m = a0s.size
    th = np.full((m, n + 1), np.nan)
    rr = np.full((m, n + 1), np.nan)
    tt = np.full((m, n + 1), np.nan)
    th[:, 0], rr[:, 0], tt[:, 0] = a0s, r0s, 0.0
    counts = np.full(m, n, dtype=np.int64)
    status = np.zeros(m, dtype=np.int64)
    alive = np.ones(m, dtype=bool)
    a, r = a0s.copy(), r0s.copy()
    s = s0
    for k in range(n):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        da, r1, t1, st, _ = return_once_np(fd, a[idx], s, r[idx], sec, direction, tol, floor, rlo, rhi, maxfac)
        failed = st != OK
        counts[idx[failed]] = k
        status[idx[failed]] = st[failed]
        alive[idx[failed]] = False
        g = idx[~failed]
        a[g] += da[~failed]
        r[g] = r1[~failed]
        th[g, k + 1], rr[g, k + 1], tt[g, k + 1] = a[g], r[g], t1[~failed]
        out = (r[g] <= alo) | (r[g] >= ahi)
        counts[g[out]] = k + 1
        status[g[out]] = ESCAPE
        alive[g[out]] = False
        s = s + direction * TWO_PI
    return th, rr, tt, counts, status


@njit
def returns_batch(fd, sec, direction, s0, a0s, r0s, tol, floor, rlo, rhi, maxfac, da, r1, tt, status, nsteps):
    for j in range(a0s.shape[0]):
        d, r, t, st, ns = return_once(fd, a0s[j], s0, r0s[j], sec, direction, tol, floor, rlo, rhi, maxfac)
        da[j] = d
        r1[j] = r
        tt[j] = t
        status[j] = st
        nsteps[j] = ns
