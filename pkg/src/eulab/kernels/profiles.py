"""Profile evaluators.

A profile is ``(kind, c1, c2)``; compiled kernels read it from a flat block
``[kind, n1, rows, cols, c1..., c2...]`` inside a descriptor array (see
:mod:`eulab.kernels.descriptor`):

* ``POLY``: ``c1`` holds ascending monomial coefficients.
* ``TRIG``: ``c1 = [lin, a0, a1, b1, a2, b2, ...]`` for
  ``lin*x + a0 + sum a_k cos(kx) + b_k sin(kx)``.
* ``PPOLY`` / ``PPOLY_PER``: ``c1`` holds breakpoints and ``c2`` the
  piecewise coefficients in descending order (scipy layout, shape
  ``(order, pieces)``).  The periodic variant wraps ``x`` into the break range.

``nu`` selects the derivative order (0 to 3).
"""
import math

import numpy as np

from .._backend import njit

POLY = 0
TRIG = 1
PPOLY = 2
PPOLY_PER = 3


@njit
def _falling(n, nu):
    out = 1.0
    for j in range(nu):
        out *= n - j
    return out


@njit
def _interval(d, b, n, x):
    """Index ``i`` with ``d[b+i] <= x < d[b+i+1]``, clamped to the ``n - 1`` pieces."""
    lo = 0
    hi = n - 1
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if d[b + mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


@njit
def peval(d, off, x, nu):
    """Evaluate the ``nu``-th derivative of the profile block at ``d[off]``."""
    kind = int(d[off])
    n1 = int(d[off + 1])
    b = off + 4
    if kind == POLY:
        acc = 0.0
        for i in range(n1 - 1, nu - 1, -1):
            acc = acc * x + d[b + i] * _falling(i, nu)
        return acc
    if kind == TRIG:
        acc = 0.0
        if nu == 0:
            acc = d[b] * x + d[b + 1]
        elif nu == 1:
            acc = d[b]
        m = (n1 - 2) // 2
        r = nu % 4
        for k in range(1, m + 1):
            a = d[b + 2 * k]
            bb = d[b + 2 * k + 1]
            c = math.cos(k * x)
            s = math.sin(k * x)
            if r == 0:
                t = a * c + bb * s
            elif r == 1:
                t = -a * s + bb * c
            elif r == 2:
                t = -a * c - bb * s
            else:
                t = a * s - bb * c
            acc += t * k ** nu
        return acc
    lo = d[b]
    hi = d[b + n1 - 1]
    if kind == PPOLY_PER:
        per = hi - lo
        x = lo + (x - lo) - per * math.floor((x - lo) / per)
    i = _interval(d, b, n1, x)
    dx = x - d[b + i]
    rows = int(d[off + 2])
    cols = int(d[off + 3])
    cb = b + n1
    acc = 0.0
    for k in range(0, rows - nu):
        acc = acc * dx + d[cb + k * cols + i] * _falling(rows - 1 - k, nu)
    return acc


@njit
def peval3(d, off, x):
    """Value and first two derivatives of a profile block in one pass."""
    kind = int(d[off])
    n1 = int(d[off + 1])
    b = off + 4
    v = 0.0
    d1 = 0.0
    d2 = 0.0
    if kind == POLY:
        for i in range(n1 - 1, -1, -1):
            d2 = d2 * x + 2.0 * d1
            d1 = d1 * x + v
            v = v * x + d[b + i]
        return v, d1, d2
    if kind == TRIG:
        v = d[b] * x + d[b + 1]
        d1 = d[b]
        m = (n1 - 2) // 2
        if m > 0:
            c = math.cos(x)
            s = math.sin(x)
            ck = 1.0
            sk = 0.0
            for k in range(1, m + 1):
                ck, sk = ck * c - sk * s, sk * c + ck * s
                a = d[b + 2 * k]
                bb = d[b + 2 * k + 1]
                t0 = a * ck + bb * sk
                v += t0
                d1 += k * (bb * ck - a * sk)
                d2 -= k * k * t0
        return v, d1, d2
    lo = d[b]
    hi = d[b + n1 - 1]
    if kind == PPOLY_PER:
        per = hi - lo
        x = lo + (x - lo) - per * math.floor((x - lo) / per)
    i = _interval(d, b, n1, x)
    dx = x - d[b + i]
    rows = int(d[off + 2])
    cols = int(d[off + 3])
    cb = b + n1
    for k in range(rows):
        d2 = d2 * dx + 2.0 * d1
        d1 = d1 * dx + v
        v = v * dx + d[cb + k * cols + i]
    return v, d1, d2


def peval_np(kind, c1, c2, x, nu):
    """Vectorised counterpart of :func:`peval`; accepts complex input."""
    x = np.asarray(x)
    if kind == POLY:
        acc = np.zeros_like(x, dtype=np.result_type(x, float))
        for i in range(len(c1) - 1, nu - 1, -1):
            acc = acc * x + c1[i] * _falling_py(i, nu)
        return acc
    if kind == TRIG:
        if nu == 0:
            acc = c1[0] * x + c1[1]
        elif nu == 1:
            acc = np.full_like(x, c1[0], dtype=np.result_type(x, float))
        else:
            acc = np.zeros_like(x, dtype=np.result_type(x, float))
        m = (len(c1) - 2) // 2
        for k in range(1, m + 1):
            a, b = c1[2 * k], c1[2 * k + 1]
            c, s = np.cos(k * x), np.sin(k * x)
            r = nu % 4
            t = (a * c + b * s, -a * s + b * c, -a * c - b * s, a * s - b * c)[r]
            acc = acc + t * float(k) ** nu
        return acc
    lo, hi = c1[0], c1[-1]
    if kind == PPOLY_PER:
        per = hi - lo
        x = lo + (x - lo) - per * np.floor((x.real - lo) / per)
    npc = len(c1) - 1
    i = np.clip(np.searchsorted(c1, x.real, side="right") - 1, 0, npc - 1)
    dx = x - c1[i]
    order = c2.shape[0]
    acc = np.zeros_like(dx, dtype=np.result_type(dx, float))
    for k in range(order - nu):
        acc = acc * dx + c2[k, i] * _falling_py(order - 1 - k, nu)
    return acc


def _falling_py(n, nu):
    out = 1.0
    for j in range(nu):
        out *= n - j
    return out
