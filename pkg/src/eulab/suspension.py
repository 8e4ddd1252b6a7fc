"""Suspension of a perturbed twist map as a divergence-free field.

Given ``Pi = Pi0 o phi_eps`` with ``phi_eps`` generated by ``theta P' + eps s``,
the suspended field is the shear vorticity ``w`` plus, on a temporal bump in
the sectioned angle, the Hamiltonian field of the generating family
``theta P' + sigma(tau) eps s`` written in coordinates co-moving with ``w``.
The section map of the result is exactly ``Pi``; outside the bump (in time or
in radius) the field equals ``w`` identically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SectionSpec, return_map_batch
from .errors import AmplitudeError, ValidationError
from .geometry import TWO_PI
from .kernels.descriptor import H_SEC, same_base
from .kernels.fields import P_ACTIVE, shear_comps_np
from .kernels.ode import OK, field_eval_np
from .steady import ChartField
from .twistmaps import PerturbedTwistMap, TwistMap

BUMP_SUPPORT = (0.5 * math.pi, 1.5 * math.pi)


class SuspendedField(ChartField):
    """Shear vorticity plus a time-dependent Hamiltonian perturbation.

    Use :func:`suspend` to build one.  ``section_map`` is the prescribed map.
    """

    def __init__(self, profile, section_map, sec=1):
        pert = section_map.pert.block()
        super().__init__(profile, mode=1, pert=pert, sec=sec)
        self.section_map = section_map

    @property
    def base_field(self):
        return ChartField(self.profile, mode=1, sec=self.sec)

    def to_json(self):
        pm = self.section_map
        p = pm.pert
        W = float(pm.winding(np.array([p.c]))[0])
        return {"profile": self.profile.to_json(), "mode": "vorticity",
                "perturbation": {"eps": p.eps, "p": int(round(W * p.q / TWO_PI)), "q": p.q, "c": p.c,
                                 "bump_radius": p.radius, "chi_support": list(BUMP_SUPPORT), "phi0": p.phi0}}


def suspend(pi, w):
    """Suspend ``pi`` (a :class:`PerturbedTwistMap` or :class:`TwistMap`) over the field ``w``.

    ``w`` is the reference vorticity field (or its shear profile).  The base
    of ``pi`` must be the analytic return map of ``w`` on ``{theta2 = 0}``.
    """
    prof = w.profile if isinstance(w, ChartField) else w
    if isinstance(w, ChartField) and (w.mode != 1 or w.diffeo is not None or not w.is_shear()):
        raise ValidationError("suspension needs the plain vorticity of a shear profile")
    if isinstance(pi, TwistMap):
        return ChartField(prof, mode=1, sec=int(pi.descriptor()[H_SEC]))
    if not isinstance(pi, PerturbedTwistMap):
        raise ValidationError("suspend needs a generating-function perturbation of a twist map")
    bd = pi.descriptor()
    sec = int(bd[H_SEC])
    ref = ChartField(prof, mode=1, sec=sec).base_descriptor()
    if not same_base(ref, bd):
        raise ValidationError("map base is not the return map of the given field")
    xs = np.linspace(pi.a, pi.b, 2049)
    G = shear_comps_np(bd, xs)[sec]
    if not np.all(G > 0.0):
        raise AmplitudeError("sectioned vorticity component must be positive on the annulus")
    if pi.pert.eps != 0.0 and pi.contraction_factor() >= 0.5:
        raise AmplitudeError("perturbation too large for a transverse suspension",
                             factor=pi.contraction_factor())
    if pi.pert.eps == 0.0:
        return ChartField(prof, mode=1, sec=sec)
    return SuspendedField(prof, pi, sec)


@dataclass
class SuspensionReport:
    sup: float
    rms: float
    flagged: int
    n: int
    field_gap: float
    map_gap: float

    @property
    def ratio(self):
        return self.field_gap / self.map_gap if self.map_gap > 0 else math.nan

    def to_json(self):
        return {"sup": self.sup, "rms": self.rms, "flagged_cells": self.flagged, "cells": self.n,
                "field_gap_sup": self.field_gap, "map_gap_sup": self.map_gap,
                "ratio": None if not math.isfinite(self.ratio) else self.ratio}


def field_gap(w_hat, w, n=32):
    """``sup |w_hat - w|`` over an ``n³`` chart grid (Euclidean chart components)."""
    a = np.linspace(0.0, TWO_PI, n, endpoint=False)
    lo, hi = (1e-3, 1.0 - 1e-3) if w.space == "s3" else (0.0, TWO_PI)
    r = np.linspace(lo, hi, n)
    A, S, R = np.meshgrid(a, a, r, indexing="ij")
    pts = np.stack([A, S, R], axis=-1).reshape(-1, 3)
    d = field_eval_np(w_hat.descriptor(), pts) - field_eval_np(w.descriptor(), pts)
    return float(np.max(np.linalg.norm(d, axis=1)))


def verify_suspension(w_hat, pi, grid=(64, 64), tol=1e-10, a=None, b=None, backend=None, threads=None):
    """Compare the numerical section map of ``w_hat`` with ``pi`` on a grid."""
    nt, nr = grid
    a = pi.a if a is None else a
    b = pi.b if b is None else b
    th = (np.arange(nt) + 0.5) / nt * TWO_PI
    rr = a + (np.arange(nr) + 0.5) / nr * (b - a)
    T, R = np.meshgrid(th, rr, indexing="ij")
    T, R = T.ravel(), R.ravel()
    t1, r1, _, st = return_map_batch(w_hat, SectionSpec("theta2" if w_hat.space == "s3" else "y"), T, R, tol,
                                     direction=1, backend=backend, threads=threads)
    tm, rm = pi(T, R)
    err = np.hypot(t1 - tm, r1 - rm)
    good = (st == OK) & np.isfinite(err)
    e = err[good]
    base = pi.base if isinstance(pi, PerturbedTwistMap) else pi
    t0, r0 = base(T, R)
    map_gap = float(np.max(np.hypot(tm - t0, rm - r0)))
    ref = w_hat.base_field if isinstance(w_hat, SuspendedField) else w_hat
    return SuspensionReport(float(e.max()) if e.size else math.nan, float(np.sqrt(np.mean(e ** 2))) if e.size else math.nan,
                            int((~good).sum()), int(T.size), field_gap(w_hat, ref), map_gap)


def is_perturbed(field):
    return isinstance(field, ChartField) and field.pert[P_ACTIVE] != 0.0


__all__ = ["SuspendedField", "SuspensionReport", "suspend", "verify_suspension", "field_gap", "is_perturbed",
           "BUMP_SUPPORT"]
