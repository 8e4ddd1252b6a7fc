"""Trajectories and first-return maps of chart vector fields."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import kernels
from .errors import (EscapeError, NonReturnError, SectionError, StiffnessError, ValidationError)
from .geometry import DELTA_CHART, TWO_PI
from .kernels.ode import ESCAPE, NONRETURN, OK, SECTION, STIFF
from .twistmaps import AnnulusMap, TwistMap

TRANSVERSALITY_FLOOR = 1e-4
MAX_PERIODS = 50.0

_ANGLES = {"s3": {"theta1": 0, "theta2": 1}, "t3": {"x": 0, "y": 1}}
_STATUS = {ESCAPE: "escape", SECTION: "section", NONRETURN: "non-return", STIFF: "stiff"}


@dataclass(frozen=True)
class SectionSpec:
    """Section ``{angle = value}`` crossed in direction ``direction`` (+1/-1, or None = auto)."""

    angle: str = "theta2"
    value: float = 0.0
    direction: int | None = None

    def index(self, space):
        names = _ANGLES[space]
        alias = {"theta1": "x", "theta2": "y", "x": "theta1", "y": "theta2"}
        name = self.angle if self.angle in names else alias.get(self.angle)
        if name not in names:
            raise ValidationError(f"unknown section angle {self.angle!r} for {space}")
        return names[name]


def _direction(field, section, sec, theta, rho):
    if section.direction is not None:
        if section.direction not in (1, -1):
            raise ValidationError("section direction must be +1 or -1")
        return int(section.direction)
    pt = np.zeros(3)
    pt[1 - sec] = theta
    pt[sec] = section.value
    pt[2] = rho
    w = float(kernels.field_eval_np(field.descriptor(sec), pt)[sec])
    if w == 0.0:
        raise SectionError("field is tangent to the section at the seed", theta=theta, rho=rho)
    return 1 if w > 0 else -1


def _bounds(field, a=None, b=None):
    if field.space == "s3":
        lo, hi = DELTA_CHART, 1.0 - DELTA_CHART
    else:
        lo, hi = -np.inf, np.inf
    return (lo if a is None else max(lo, a)), (hi if b is None else min(hi, b))


# -- trajectories ------------------------------------------------------------------------------

@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray
    status: str
    nfev: int

    @property
    def escaped(self):
        return self.status == "escape"


def trace(field, p0, T, tol=1e-10, n_samples=None, max_step=np.inf):
    """Integrate ``dp/dt = field(p)`` for time ``T`` with an adaptive embedded RK pair.

    Leaving the S³ chart (``rho`` within ``1e-6`` of the Hopf link) stops the
    integration and is reported as ``status='escape'``.
    """
    fd = field.descriptor()
    p0 = np.asarray(p0, dtype=float)

    def rhs(t, y):
        return kernels.field_eval_np(fd, y)

    events = []
    if field.space == "s3":
        def lo(t, y):
            return y[2] - DELTA_CHART

        def hi(t, y):
            return 1.0 - DELTA_CHART - y[2]
        lo.terminal = hi.terminal = True
        events = [lo, hi]
    t_eval = None if n_samples is None else np.linspace(0.0, T, n_samples)
    sol = solve_ivp(rhs, (0.0, T), p0, method="RK45", rtol=tol, atol=tol, t_eval=t_eval,
                    events=events or None, max_step=max_step)
    if sol.status == -1:
        status = "stiff"
    elif sol.status == 1:
        status = "escape"
    else:
        status = "ok"
    return Trajectory(sol.t, sol.y.T.copy(), status, int(sol.nfev))


# -- return maps ---------------------------------------------------------------------------------

@dataclass
class ReturnPoint:
    theta: float
    rho: float
    winding: float
    time: float
    nsteps: int


def _raise_status(st, **info):
    if st == ESCAPE:
        raise EscapeError("trajectory left the chart or annulus before returning", **info)
    if st == SECTION:
        raise SectionError("field lost transversality to the section", **info)
    if st == NONRETURN:
        raise NonReturnError("no return within the time budget", **info)
    if st == STIFF:
        raise StiffnessError("step size collapsed", **info)


def return_map(field, section, p, tol=1e-12, a=None, b=None, backend=None):
    """First return of the section point ``p = (theta, rho)``."""
    sec = section.index(field.space)
    d = _direction(field, section, sec, p[0], p[1])
    lo, hi = _bounds(field, a, b)
    da, r1, tt, st, ns = kernels.ode_returns(field.descriptor(sec), sec, d, section.value,
                                             [p[0]], [p[1]], tol, TRANSVERSALITY_FLOOR, lo, hi,
                                             MAX_PERIODS, backend, 1)
    if st[0] != OK:
        _raise_status(int(st[0]), theta=p[0], rho=p[1])
    return ReturnPoint(float(p[0] + da[0]), float(r1[0]), float(da[0]), float(tt[0]), int(ns[0]))


def return_map_batch(field, section, thetas, rhos, tol=1e-12, a=None, b=None, direction=None,
                     backend=None, threads=None):
    """Vectorised first returns; returns ``(theta', rho', time, status)``."""
    sec = section.index(field.space)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    d = direction or _direction(field, section, sec, float(thetas[0]), float(rhos[0]))
    lo, hi = _bounds(field, a, b)
    da, r1, tt, st, _ = kernels.ode_returns(field.descriptor(sec), sec, d, section.value, thetas, rhos,
                                            tol, TRANSVERSALITY_FLOOR, lo, hi, MAX_PERIODS, backend, threads)
    return thetas + da, r1, tt, st


@dataclass
class SectionOrbits:
    """Orbits of a numerical return map (rows are seeds)."""

    theta: np.ndarray
    rho: np.ndarray
    time: np.ndarray
    counts: np.ndarray
    status: np.ndarray

    CSV_COLUMNS = ("seed_id", "iter", "theta1_unreduced", "rho", "transit_time")

    def to_csv(self, path):
        """One row per section point; ``transit_time`` is the time since the previous point."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.CSV_COLUMNS)
            for j in range(self.theta.shape[0]):
                for k in range(int(self.counts[j]) + 1):
                    w.writerow([j, k, repr(float(self.theta[j, k])), repr(float(self.rho[j, k])),
                                repr(float(self.time[j, k]))])


def section_orbits(field, section, thetas, rhos, n, tol=1e-12, a=None, b=None, backend=None, threads=None):
    sec = section.index(field.space)
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    d = _direction(field, section, sec, float(thetas[0]), float(rhos[0]))
    lo, hi = _bounds(field)
    alo, ahi = _bounds(field, a, b)
    th, rr, tt, counts, st = kernels.ode_orbits(field.descriptor(sec), sec, d, section.value, thetas, rhos, n,
                                                tol, TRANSVERSALITY_FLOOR, lo, hi, alo, ahi, MAX_PERIODS,
                                                backend, threads)
    return SectionOrbits(th, rr, tt, counts, st)


class NumericReturnMap(AnnulusMap):
    """Return map of a chart field computed by ODE integration."""

    exact = False

    def __init__(self, field, section=None, a=None, b=None, tol=1e-12, backend=None):
        section = section or SectionSpec("theta2" if field.space == "s3" else "y")
        lo, hi = _bounds(field)
        a = lo if a is None else a
        b = hi if b is None else b
        if not math.isfinite(a) or not math.isfinite(b):
            raise ValidationError("numeric return map needs a finite annulus")
        super().__init__(a, b)
        self.field = field
        self.section = section
        self.sec = section.index(field.space)
        self.tol = tol
        self.backend = backend
        self.space = field.space
        mid = 0.5 * (a + b)
        self.direction = _direction(field, section, self.sec, 0.0, mid)
        self.fd = field.descriptor(self.sec)

    def step(self, theta, rho):
        theta = np.asarray(theta, dtype=float)
        rho = np.asarray(rho, dtype=float)
        shape = theta.shape
        lo, hi = _bounds(self.field)
        da, r1, _, st, _ = kernels.ode_returns(self.fd, self.sec, self.direction, self.section.value,
                                               theta.ravel(), rho.ravel(), self.tol, TRANSVERSALITY_FLOOR,
                                               lo, hi, MAX_PERIODS, self.backend)
        return (theta.ravel() + da).reshape(shape), r1.reshape(shape), st.reshape(shape)

    def iterate_many(self, theta0, rho0, n, backend=None):
        lo, hi = _bounds(self.field)
        th, rr, _, counts, _ = kernels.ode_orbits(self.fd, self.sec, self.direction, self.section.value,
                                                  theta0, rho0, n, self.tol, TRANSVERSALITY_FLOOR, lo, hi,
                                                  self.a, self.b, MAX_PERIODS, backend or self.backend)
        return th, rr, counts

    def flux_density(self, theta, rho):
        """Transverse field component on the section (invariant area density)."""
        theta = np.asarray(theta, dtype=float)
        pts = np.zeros(theta.shape + (3,))
        pts[..., 1 - self.sec] = theta
        pts[..., self.sec] = self.section.value
        pts[..., 2] = rho
        return np.abs(kernels.field_eval_np(self.fd, pts)[..., self.sec])

    def density(self, rho):
        return self.flux_density(np.zeros_like(np.asarray(rho, dtype=float)), rho)

    def transit_time(self, theta, rho):
        _, _, tt, st = return_map_batch(self.field, self.section, theta, rho, self.tol, direction=self.direction,
                                        backend=self.backend)
        return np.where(st == OK, tt, np.nan)

    def jacobian(self, theta, rho, q=1, h=None):
        h = 1e-6 * self.width if h is None else h
        return super().jacobian(theta, rho, q, h)


def analytic_return_map(prof, a=None, b=None, section=None):
    """Closed-form return map of ``rot u`` for a shear profile.

    Returns a :class:`~eulab.twistmaps.TwistMap`; raises
    :class:`~eulab.errors.SectionError` if the sectioned vorticity component
    vanishes on the annulus.
    """
    space = prof.space
    section = section or SectionSpec("theta2" if space == "s3" else "y")
    sec = section.index(space)
    if a is None or b is None:
        a0, b0 = (DELTA_CHART, 1.0 - DELTA_CHART) if space == "s3" else (0.0, TWO_PI)
        a = a0 if a is None else a
        b = b0 if b is None else b
    return TwistMap.from_profile(prof, a, b, sec)


def status_name(code):
    return "ok" if code == OK else _STATUS.get(int(code), "unknown")


__all__ = ["SectionSpec", "Trajectory", "ReturnPoint", "SectionOrbits", "NumericReturnMap", "trace",
           "return_map", "return_map_batch", "section_orbits", "analytic_return_map", "status_name",
           "TRANSVERSALITY_FLOOR", "MAX_PERIODS"]
