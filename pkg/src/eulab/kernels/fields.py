"""Shear fields and annulus maps evaluated from flat descriptors.

See :mod:`eulab.kernels.descriptor` for the layout.  ``kind`` 0 means the
two profiles define a shear flow (``mode`` 0: the velocity, 1: its curl);
``kind`` 1 means profile A is a winding function ``W`` and profile B a
section density ``D``.  The perturbation block holds the resonant
generating-function perturbation ``[active, eps, q, phi0, c, rb, h, tc]``.
"""
import math

import numpy as np

from .._backend import njit
from .descriptor import H_A, H_B, H_ISPACE, H_KIND, H_MODE, H_PERT, H_SEC, pert as pert_block, profile
from .profiles import peval, peval3, peval_np

TWO_PI = 2.0 * math.pi

# perturbation slots
P_ACTIVE, P_EPS, P_Q, P_PHI, P_C, P_RB, P_H, P_TC = range(8)

# Gauss-Legendre nodes on [-1, 1], eight points
_GL8_X = np.array([-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                   -0.1834346424956498, 0.1834346424956498, 0.5255324099163290,
                   0.7966664774136267, 0.9602898564975363])
_GL8_W = np.array([0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                   0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                   0.2223810344533745, 0.1012285362903763])

_GL4_X = np.array([-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526])
_GL4_W = np.array([0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538])


@njit
def bump(u, nu):
    """``(1 - u²)³`` on ``|u| < 1`` and its first two derivatives."""
    if u <= -1.0 or u >= 1.0:
        return 0.0
    w = 1.0 - u * u
    if nu == 0:
        return w * w * w
    if nu == 1:
        return -6.0 * u * w * w
    return w * (30.0 * u * u - 6.0)


@njit
def temporal_bump(tau, h, tc):
    """Normalised C² bump in the sectioned angle and its integral ``sigma``."""
    v = (tau - tc) / h
    if v <= -1.0:
        return 0.0, 0.0
    if v >= 1.0:
        return 0.0, 1.0
    w = 1.0 - v * v
    chi = 35.0 / (32.0 * h) * w * w * w
    v2 = v * v
    sig = 35.0 / 32.0 * (v * (1.0 - v2 + 0.6 * v2 * v2 - v2 * v2 * v2 / 7.0) + 16.0 / 35.0)
    return chi, sig


@njit
def shear_comps(d, r):
    """Chart components ``(c0, c1)`` of a shear field and their r-derivatives."""
    a0, a1, a2 = peval3(d, int(d[H_A]), r)
    b0, b1, b2 = peval3(d, int(d[H_B]), r)
    mode = d[H_MODE]
    if d[H_ISPACE] == 0.0:
        if mode == 0.0:
            return a0 + b0, b0 - a0, a1 + b1, b1 - a1
        s = 2.0 * r - 1.0
        A1 = -(a1 * s + 2.0 * a0 + b1)
        A2 = b1 * s + 2.0 * b0 + a1
        dA1 = -(a2 * s + 4.0 * a1 + b2)
        dA2 = b2 * s + 4.0 * b1 + a2
        return A1 + A2, A2 - A1, dA1 + dA2, dA2 - dA1
    if mode == 0.0:
        return a0, b0, a1, b1
    return -b1, a1, -b2, a2


@njit
def winding_density(d, r):
    """Return ``(W, D, dD)``: return-map winding, section density and its slope."""
    if d[H_KIND] == 1.0:
        W = peval(d, int(d[H_A]), r, 0)
        D, dD, _ = peval3(d, int(d[H_B]), r)
        return W, D, dD
    c0, c1, d0, d1 = shear_comps(d, r)
    if d[H_SEC] == 1.0:
        F, G, dG = c0, c1, d1
    else:
        F, G, dG = c1, c0, d0
    sg = 1.0 if G >= 0.0 else -1.0
    return TWO_PI * F / abs(G), abs(G), sg * dG


@njit
def action_increment(d, r0, r1):
    """Integral of the section density from ``r0`` to ``r1`` (Gauss-Legendre).

    Four nodes suffice to machine precision on the short intervals the map
    Newton solve visits; longer intervals use eight.
    """
    m = 0.5 * (r0 + r1)
    h = 0.5 * (r1 - r0)
    acc = 0.0
    if abs(h) < 0.01:
        for i in range(4):
            acc += _GL4_W[i] * winding_density(d, m + h * _GL4_X[i])[1]
    else:
        for i in range(8):
            acc += _GL8_W[i] * winding_density(d, m + h * _GL8_X[i])[1]
    return h * acc


@njit
def map_step(d, theta, rho):
    """One step of ``Pi0 o phi_eps``; returns ``(theta', rho', status)``.

    status 0 ok, 1 Newton failure.
    """
    p = int(d[H_PERT])
    if d[p + P_ACTIVE] != 0.0:
        eps = d[p + P_EPS]
        rb = d[p + P_RB]
        c = d[p + P_C]
        if abs(rho - c) < rb:
            q = d[p + P_Q]
            ph = q * theta + d[p + P_PHI]
            sn = math.sin(ph)
            cs = math.cos(ph)
            r1 = rho
            ok = False
            for _ in range(60):
                u = (r1 - c) / rb
                res = action_increment(d, rho, r1) - eps * q * sn * bump(u, 0)
                D = winding_density(d, r1)[1]
                jac = D - eps * q * sn * bump(u, 1) / rb
                step = res / jac
                r1 -= step
                if abs(step) <= 1e-16 + 4e-16 * abs(r1):
                    ok = True
                    break
            if not ok:
                return theta, rho, 1
            u = (r1 - c) / rb
            D = winding_density(d, r1)[1]
            theta = theta + eps * cs * bump(u, 1) / (rb * D)
            rho = r1
    W = winding_density(d, rho)[0]
    return theta + W, rho, 0


# -- numpy counterparts -------------------------------------------------------

def bump_np(u, nu):
    u = np.asarray(u)
    inside = np.abs(u.real) < 1.0
    w = 1.0 - u * u
    if nu == 0:
        out = w ** 3
    elif nu == 1:
        out = -6.0 * u * w * w
    else:
        out = w * (30.0 * u * u - 6.0)
    return np.where(inside, out, 0.0)


def temporal_bump_np(tau, h, tc):
    v = (np.asarray(tau) - tc) / h
    w = 1.0 - v * v
    chi = 35.0 / (32.0 * h) * w ** 3
    v2 = v * v
    sig = 35.0 / 32.0 * (v * (1.0 - v2 + 0.6 * v2 * v2 - v2 ** 3 / 7.0) + 16.0 / 35.0)
    lo = v.real <= -1.0
    hi = v.real >= 1.0
    chi = np.where(lo | hi, 0.0, chi)
    sig = np.where(lo, 0.0, np.where(hi, 1.0, sig))
    return chi, sig


def shear_comps_np(d, r):
    kA, a1c, a2c = profile(d, H_A)
    kB, b1c, b2c = profile(d, H_B)
    A = lambda nu: peval_np(kA, a1c, a2c, r, nu)  # noqa: E731
    B = lambda nu: peval_np(kB, b1c, b2c, r, nu)  # noqa: E731
    mode = d[H_MODE]
    if d[H_ISPACE] == 0:
        a0, a1, b0, b1 = A(0), A(1), B(0), B(1)
        if mode == 0:
            return a0 + b0, b0 - a0, a1 + b1, b1 - a1
        a2, b2 = A(2), B(2)
        s = 2.0 * r - 1.0
        A1 = -(a1 * s + 2.0 * a0 + b1)
        A2 = b1 * s + 2.0 * b0 + a1
        dA1 = -(a2 * s + 4.0 * a1 + b2)
        dA2 = b2 * s + 4.0 * b1 + a2
        return A1 + A2, A2 - A1, dA1 + dA2, dA2 - dA1
    if mode == 0:
        return A(0), B(0), A(1), B(1)
    return -B(1), A(1), -B(2), A(2)


def winding_density_np(d, r):
    if d[H_KIND] == 1:
        W = peval_np(*profile(d, H_A), r, 0)
        pb = profile(d, H_B)
        return W, peval_np(*pb, r, 0), peval_np(*pb, r, 1)
    c0, c1, d0, d1 = shear_comps_np(d, r)
    if d[H_SEC] == 1:
        F, G, dG = c0, c1, d1
    else:
        F, G, dG = c1, c0, d0
    sg = np.where(np.real(G) >= 0.0, 1.0, -1.0)
    aG = sg * G
    return TWO_PI * F / aG, aG, sg * dG


def action_increment_np(d, r0, r1):
    m = 0.5 * (r0 + r1)
    h = 0.5 * (r1 - r0)
    short = np.abs(h) < 0.01
    acc4 = 0.0
    for x, w in zip(_GL4_X, _GL4_W):
        acc4 = acc4 + w * winding_density_np(d, m + h * x)[1]
    if np.all(short):
        return h * acc4
    acc8 = 0.0
    for x, w in zip(_GL8_X, _GL8_W):
        acc8 = acc8 + w * winding_density_np(d, m + h * x)[1]
    return h * np.where(short, acc4, acc8)


def map_step_np(d, theta, rho):
    """Vectorised :func:`map_step`; returns ``(theta', rho', status)`` arrays."""
    theta = np.array(theta, dtype=float)
    rho = np.array(rho, dtype=float)
    status = np.zeros(theta.shape, dtype=np.int64)
    pert = pert_block(d)
    if pert[P_ACTIVE] != 0.0:
        eps, q, c, rb = pert[P_EPS], pert[P_Q], pert[P_C], pert[P_RB]
        idx = np.nonzero(np.abs(rho - c) < rb)[0]
        if idx.size:
            th = theta[idx]
            r0 = rho[idx]
            ph = q * th + pert[P_PHI]
            sn, cs = np.sin(ph), np.cos(ph)
            r1 = r0.copy()
            done = np.zeros(idx.size, dtype=bool)
            for _ in range(60):
                u = (r1 - c) / rb
                res = action_increment_np(d, r0, r1) - eps * q * sn * bump_np(u, 0)
                D = winding_density_np(d, r1)[1]
                jac = D - eps * q * sn * bump_np(u, 1) / rb
                step = np.where(done, 0.0, res / jac)
                r1 = r1 - step
                done |= np.abs(step) <= 1e-16 + 4e-16 * np.abs(r1)
                if done.all():
                    break
            u = (r1 - c) / rb
            D = winding_density_np(d, r1)[1]
            th_new = th + eps * cs * bump_np(u, 1) / (rb * D)
            theta[idx] = np.where(done, th_new, th)
            rho[idx] = np.where(done, r1, r0)
            status[idx] = np.where(done, 0, 1)
    W = winding_density_np(d, rho)[0]
    return theta + W, rho, status
