"""Shear steady Euler flows on S³ and T³.

On S³ a shear flow is ``u = f1(rho) u1 + f2(rho) u2``; on T³ it is
``u = f(z) dx + g(z) dy``.  This module evaluates these fields and their
curls, builds the Bernoulli function, certifies nondegeneracy and checks the
steady Euler identity ``u x rot u = grad B`` pointwise.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import EvaluationError, QuadratureError, ValidationError
from .geometry import DELTA_CHART, TWO_PI, VolumePreservingDiffeo, metric
from .kernels.descriptor import build
from .kernels.fields import shear_comps_np
from .kernels.ode import field_eval_np
from .profiles import Profile

_NOPERT = np.zeros(8)
_NOPERT.setflags(write=False)
_ZERO = Profile.constant(0.0)


# -- profiles ---------------------------------------------------------------------

class ShearProfileS3:
    """Profile pair ``(f1, f2)`` on ``[0, 1]``."""

    space = "s3"

    def __init__(self, f1, f2):
        self.f1 = f1 if isinstance(f1, Profile) else Profile.from_json(f1, "s3")
        self.f2 = f2 if isinstance(f2, Profile) else Profile.from_json(f2, "s3")

    @property
    def pair(self):
        return self.f1, self.f2

    def combine(self, a, other, b):
        return ShearProfileS3(self.f1 * a + other.f1 * b, self.f2 * a + other.f2 * b)

    def to_json(self):
        return {"domain": "s3", **_profile_json("f1", self.f1), **_profile_json("f2", self.f2)}

    def __repr__(self):
        return f"ShearProfileS3({self.f1.source!r}, {self.f2.source!r})"


class ShearProfileT3:
    """Periodic profile pair ``(f, g)`` of ``z``."""

    space = "t3"

    def __init__(self, f, g):
        self.f = f if isinstance(f, Profile) else Profile.from_json(f, "t3")
        self.g = g if isinstance(g, Profile) else Profile.from_json(g, "t3")
        for name, p in (("f", self.f), ("g", self.g)):
            for nu in (0, 1, 2):
                if abs(p(0.0, nu) - p(TWO_PI, nu)) > 1e-12 * (1 + abs(p(0.0, nu))):
                    raise ValidationError(f"T3 profile {name} is not 2pi-periodic", derivative=nu)

    @property
    def pair(self):
        return self.f, self.g

    def combine(self, a, other, b):
        return ShearProfileT3(self.f * a + other.f * b, self.g * a + other.g * b)

    def to_json(self):
        return {"domain": "t3", **_profile_json("f", self.f), **_profile_json("g", self.g)}

    def __repr__(self):
        return f"ShearProfileT3({self.f.source!r}, {self.g.source!r})"


def _profile_json(name, p):
    if p.source and p.source != "spline":
        return {name: p.source}
    return {name: {"kind": p.kind, "c1": p.c1.tolist(), "c2": p.c2.tolist()}}


def profile_from_json(spec):
    """Build a shear profile from the profile JSON block."""
    if not isinstance(spec, dict) or spec.get("domain") not in ("s3", "t3"):
        raise ValidationError("profile needs domain 's3' or 't3'")
    dom = spec["domain"]
    kind = spec.get("kind", "closed-form")
    names = ("f1", "f2") if dom == "s3" else ("f", "g")
    parts = []
    for n in names:
        if n not in spec:
            raise ValidationError(f"profile is missing {n!r}")
        item = spec[n]
        if kind == "spline" and not isinstance(item, dict):
            raise ValidationError(f"spline profile {n!r} needs nodes and values")
        parts.append(Profile.from_json(item, dom))
    return ShearProfileS3(*parts) if dom == "s3" else ShearProfileT3(*parts)


# -- fields -------------------------------------------------------------------------

class ChartField:
    """Divergence-free chart vector field backed by a packed kernel descriptor.

    Parameters
    ----------
    profile : ShearProfileS3 or ShearProfileT3
        Underlying shear profile.
    mode : int
        0 for the velocity ``u``, 1 for the vorticity ``rot u``.
    pert : ndarray, optional
        Suspension perturbation block (see :mod:`eulab.suspension`).
    diffeo : VolumePreservingDiffeo, optional
        Pushforward applied on top of the base field.
    """

    def __init__(self, profile, mode=1, pert=None, diffeo=None, sec=None):
        self.profile = profile
        self.mode = mode
        self.pert = _NOPERT if pert is None else np.ascontiguousarray(pert, dtype=float)
        self.diffeo = diffeo
        self.sec = 1 if sec is None else sec

    @property
    def space(self):
        return self.profile.space

    def base_descriptor(self, sec=None):
        """Descriptor without the pushforward."""
        sec = self.sec if sec is None else sec
        ispace = 0 if self.space == "s3" else 1
        a, b = self.profile.pair
        return build(ispace, 0, self.mode, sec, a.pack(), b.pack(), self.pert)

    def descriptor(self, sec=None):
        sec = self.sec if sec is None else sec
        if self.diffeo is None:
            return self.base_descriptor(sec)
        ispace = 0 if self.space == "s3" else 1
        a, b = self.profile.pair
        X, Y = self.diffeo.pack()
        return build(ispace, 0, self.mode, sec, a.pack(), b.pack(), self.pert, X, Y)

    def __call__(self, points):
        pts = np.asarray(points)
        if self.space == "s3":
            r = np.real(pts[..., 2])
            if np.any((r <= 0.0) | (r >= 1.0)):
                raise EvaluationError("field evaluated outside the S3 chart")
        return field_eval_np(self.descriptor(), pts)

    def with_pushforward(self, phi):
        if self.diffeo is not None:
            raise EvaluationError("nested pushforwards are not supported")
        return self.__class__._clone(self, diffeo=phi)

    def _clone(self, **kw):
        new = object.__new__(self.__class__)
        new.__dict__.update(self.__dict__)
        new.__dict__.update(kw)
        return new

    def is_shear(self):
        return self.pert[0] == 0.0


def eval_field(prof, p):
    """Velocity ``f1 u1 + f2 u2`` at a chart point, as chart components."""
    pts = np.asarray(p.as_array() if hasattr(p, "as_array") else p, dtype=float)
    return ChartField(prof, mode=0)(pts)


eval_field_t3 = eval_field


def velocity_field(prof):
    return ChartField(prof, mode=0)


def vorticity_field(prof):
    return ChartField(prof, mode=1)


def pushforward_field(fieldobj, phi):
    """Field ``v(p) = DPhi(Phi^-1 p) w(Phi^-1 p)`` as a new :class:`ChartField`."""
    if not isinstance(phi, VolumePreservingDiffeo):
        raise ValidationError("pushforward needs a VolumePreservingDiffeo")
    if phi.kind == "identity":
        return fieldobj
    if phi.space != fieldobj.space:
        raise ValidationError("diffeomorphism and field live on different spaces")
    return fieldobj.with_pushforward(phi)


# -- curl ------------------------------------------------------------------------------

class CurlProfileS3:
    """Vorticity of an S³ shear flow: ``rot u = A1 u1 + A2 u2 = f d1 + g d2``."""

    def __init__(self, prof):
        self.prof = prof

    def A1(self, rho):
        f1, f2 = self.prof.pair
        return -(f1(rho, 1) * (2 * np.asarray(rho) - 1) + 2 * f1(rho) + f2(rho, 1))

    def A2(self, rho):
        f1, f2 = self.prof.pair
        return f2(rho, 1) * (2 * np.asarray(rho) - 1) + 2 * f2(rho) + f1(rho, 1)

    def f(self, rho, nu=0):
        if nu == 0:
            return self.A1(rho) + self.A2(rho)
        return self._comps(rho)[2]

    def g(self, rho, nu=0):
        if nu == 0:
            return -self.A1(rho) + self.A2(rho)
        return self._comps(rho)[3]

    def twist(self, rho):
        """``f' g - f g'``."""
        c0, c1, d0, d1 = self._comps(rho)
        return d0 * c1 - c0 * d1

    def twist_slope(self, rho):
        f1, f2 = self.prof.pair
        r = np.asarray(rho, dtype=float)
        s = 2 * r - 1
        a = [f1(r, k) for k in range(4)]
        b = [f2(r, k) for k in range(4)]
        # second derivatives of A1, A2
        A1pp = -(a[3] * s + 6 * a[2] + b[3])
        A2pp = b[3] * s + 6 * b[2] + a[3]
        c0, c1, d0, d1 = self._comps(r)
        fpp, gpp = A1pp + A2pp, A2pp - A1pp
        return fpp * c1 - c0 * gpp

    def _comps(self, rho):
        bd = vorticity_field(self.prof).base_descriptor()
        return shear_comps_np(bd, np.asarray(rho, dtype=float))

    @property
    def field(self):
        return vorticity_field(self.prof)


class CurlProfileT3:
    """Vorticity ``-g'(z) dx + f'(z) dy`` of a T³ shear flow."""

    def __init__(self, prof):
        self.prof = prof

    def wx(self, z, nu=0):
        return -self.prof.g(z, nu + 1)

    def wy(self, z, nu=0):
        return self.prof.f(z, nu + 1)

    def twist(self, z):
        """``f'' g' - f' g''``."""
        f, g = self.prof.pair
        return f(z, 2) * g(z, 1) - f(z, 1) * g(z, 2)

    def twist_slope(self, z):
        f, g = self.prof.pair
        return f(z, 3) * g(z, 1) - f(z, 1) * g(z, 3)

    @property
    def field(self):
        return vorticity_field(self.prof)


def curl(prof):
    """Vorticity profile of a shear flow (S³ or T³)."""
    if prof.space == "s3":
        return CurlProfileS3(prof)
    return CurlProfileT3(prof)


def curl_t3(prof):
    return CurlProfileT3(prof)


@functools.lru_cache(maxsize=1)
def _s3_symbolic_frame():
    t1, t2 = sp.symbols("theta1 theta2", real=True)
    r = sp.Symbol("rho", positive=True)
    X = sp.Matrix([sp.sqrt(r) * sp.cos(t1), sp.sqrt(r) * sp.sin(t1),
                   sp.sqrt(1 - r) * sp.cos(t2), sp.sqrt(1 - r) * sp.sin(t2)])
    coords = [t1, t2, r]
    J = X.jacobian(coords)
    g = (J.T * J).applyfunc(lambda e: sp.simplify(sp.trigsimp(e)))
    vol = sp.simplify(sp.sqrt(g.det()))
    return coords, g, vol


def curl_dual_form(prof, rho):
    """Vorticity of an S³ shear flow via ``i_w mu = d(u flat)``, symbolically.

    The metric and volume form are rebuilt from the embedding into R⁴, so the
    result is independent of the closed-form curl formula.  Returns ``(f, g)``
    evaluated at ``rho``.
    """
    if prof.space != "s3":
        raise ValidationError("dual-form pipeline is implemented for S3")
    coords, g, vol = _s3_symbolic_frame()
    t1, t2, r = coords
    f1 = prof.f1.to_sympy(r)
    f2 = prof.f2.to_sympy(r)
    u = sp.Matrix([f1 + f2, f2 - f1, 0])
    alpha = g * u
    d = [[sp.diff(alpha[j], coords[i]) - sp.diff(alpha[i], coords[j]) for j in range(3)] for i in range(3)]
    w1 = sp.simplify(d[1][2] / vol)
    w2 = sp.simplify(d[2][0] / vol)
    w3 = sp.simplify(d[0][1] / vol)
    fn = sp.lambdify(r, [w1, w2, w3], "numpy")
    rho = np.asarray(rho, dtype=float)
    out = [np.broadcast_to(np.asarray(v, dtype=float), rho.shape) for v in fn(rho)]
    if np.max(np.abs(out[2])) != 0.0:
        raise EvaluationError("dual-form curl has a radial component")
    return out[0], out[1]


# -- Bernoulli -------------------------------------------------------------------------

class BernoulliProfile:
    """Bernoulli function normalised to ``B(0) = 0``.

    ``deriv`` is the exact integrand; values come from adaptive quadrature
    (S³) or closed form (T³).
    """

    def __init__(self, deriv, value=None, space="s3", tol=1e-10):
        self.deriv = deriv
        self._value = value
        self.space = space
        self.tol = tol

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self._value is not None:
            return self._value(x)
        flat = x.ravel()
        pts, inv = np.unique(flat, return_inverse=True)
        lo = np.concatenate([[0.0], pts[:-1]])
        seg = _gl_segments(self.deriv, lo, pts, self.tol)
        return np.cumsum(seg)[inv].reshape(x.shape)[()] if x.ndim == 0 else np.cumsum(seg)[inv].reshape(x.shape)


_GL20 = np.polynomial.legendre.leggauss(20)
_GL40 = np.polynomial.legendre.leggauss(40)


def _gl_rule(fn, lo, hi, rule):
    xg, wg = rule
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
    vals = fn(mid[:, None] + half[:, None] * xg[None, :])
    return half * (vals @ wg)


def _gl_segments(fn, lo, hi, tol):
    """Integrals of ``fn`` over ``[lo_i, hi_i]``: paired Gauss rules, adaptive quadrature where they disagree."""
    if lo.size == 0:
        return lo.copy()
    g1 = _gl_rule(fn, lo, hi, _GL20)
    g2 = _gl_rule(fn, lo, hi, _GL40)
    out = g2
    for i in np.nonzero(~(np.abs(g1 - g2) <= 1e-2 * tol))[0]:
        out[i] = _quad(fn, lo[i], hi[i], tol)[0]
    return out


def _quad(fn, a, b, tol):
    val, err, info = quad(lambda s: float(fn(s)), a, b, epsabs=tol * 1e-2, epsrel=1e-13, limit=200,
                          full_output=True)[:3]
    if err > tol:
        raise QuadratureError("Bernoulli quadrature did not converge", a=a, b=b, error=err,
                              evaluations=info.get("neval"))
    return val, err, info


def bernoulli_integrand_s3(prof, rho):
    f1, f2 = prof.pair
    r = np.asarray(rho, dtype=float)
    a0, a1, b0, b1 = f1(r), f1(r, 1), f2(r), f2(r, 1)
    return a0 * a1 + b0 * b1 + 4 * a0 * b0 + (2 * r - 1) * (a0 * b1 + b0 * a1)


def bernoulli(prof):
    if prof.space == "t3":
        return bernoulli_t3(prof)
    return BernoulliProfile(lambda r: bernoulli_integrand_s3(prof, r), space="s3")


def bernoulli_t3(prof):
    f, g = prof.pair
    b0 = 0.5 * (f(0.0) ** 2 + g(0.0) ** 2)
    return BernoulliProfile(lambda z: f(z) * f(z, 1) + g(z) * g(z, 1),
                            value=lambda z: 0.5 * (f(z) ** 2 + g(z) ** 2) - b0, space="t3")


def bernoulli_second_derivative(prof, x):
    x = np.asarray(x, dtype=float)
    if prof.space == "t3":
        f, g = prof.pair
        return f(x, 1) ** 2 + f(x) * f(x, 2) + g(x, 1) ** 2 + g(x) * g(x, 2)
    f1, f2 = prof.pair
    a = [f1(x, k) for k in range(3)]
    b = [f2(x, k) for k in range(3)]
    s = 2 * x - 1
    return (a[1] ** 2 + a[0] * a[2] + b[1] ** 2 + b[0] * b[2] + 4 * (a[1] * b[0] + a[0] * b[1])
            + 2 * (a[0] * b[1] + b[0] * a[1]) + s * (a[1] * b[1] + a[0] * b[2] + b[1] * a[1] + b[0] * a[2]))


# -- nondegeneracy ------------------------------------------------------------------------

@dataclass
class NondegeneracyReport:
    """Outcome of a nondegeneracy certification.

    ``morse_bott_ok`` is ``None`` when the check is inconclusive.
    """

    space: str
    nondegenerate: bool
    morse_bott_ok: bool | None
    morse_bott_status: str
    critical_points: list
    twist_min: float
    tau: float
    omega_tau: list = field(default_factory=list)
    lipschitz: float = 0.0
    grid: int = 0

    def to_json(self):
        return {
            "space": self.space, "nondegenerate": bool(self.nondegenerate),
            "morse_bott_ok": self.morse_bott_ok, "morse_bott_status": self.morse_bott_status,
            "critical_points": [[float(a), float(b)] for a, b in self.critical_points],
            "twist_min": float(self.twist_min), "tau": float(self.tau),
            "omega_tau": [[float(a), float(b)] for a, b in self.omega_tau],
            "lipschitz": float(self.lipschitz), "grid": int(self.grid),
        }


def _refined_min(q, lo, hi, n):
    x = np.linspace(lo, hi, n)
    v = np.abs(q(x))
    h = (hi - lo) / (n - 1)
    i = int(np.argmin(v))
    xa, xb = max(lo, x[i] - h), min(hi, x[i] + h)
    xf = np.linspace(xa, xb, n)
    vf = np.abs(q(xf))
    return float(min(v.min(), vf.min())), h, x


def _certify(qfun, qslope, lo, hi, n, lipschitz):
    tmin, h, x = _refined_min(qfun, lo, hi, n)
    if lipschitz is None:
        lipschitz = 1.5 * float(np.max(np.abs(qslope(x)))) + 1e-12
    return tmin, tmin - h * lipschitz, float(lipschitz)


def _sign_change_roots(fun, lo, hi, n, periodic):
    h = (hi - lo) / n
    x = lo + (np.arange(n) + 0.5) * h
    if periodic:
        x = np.append(x, x[0] + (hi - lo))
    v = fun(x)
    roots = []
    for i in range(len(x) - 1):
        if v[i] == 0.0:
            roots.append(x[i])
        elif v[i] * v[i + 1] < 0.0:
            roots.append(brentq(lambda s: float(fun(np.asarray(s))), x[i], x[i + 1], xtol=1e-14))
    return np.array(roots), x, v


def check_nondegenerate_s3(prof, tau_request=None, lipschitz=None, grid=4096, resolution=1e-9):
    """Certify the twist and Morse-Bott conditions of an S³ shear flow."""
    cp = curl(prof)
    tmin, tau, lip = _certify(cp.twist, cp.twist_slope, 0.0, 1.0, grid, lipschitz)
    # Morse-Bott: B' must not vanish on [0, 1]
    dB = lambda r: bernoulli_integrand_s3(prof, r)  # noqa: E731
    roots, x, v = _sign_change_roots(dB, 0.0, 1.0, grid, periodic=False)
    B = bernoulli(prof)
    scale = float(np.max(np.abs(v))) if v.size else 0.0
    ends = np.abs(dB(np.array([0.0, 1.0])))
    crit = [(0.0, 0.0), (1.0, float(B(1.0)))] if scale > 0 else []
    if scale == 0.0:
        status, ok = "constant-bernoulli", False
    elif roots.size:
        status, ok = "interior-critical", False
        crit += [(float(r), float(B(r))) for r in roots]
    elif np.any(ends <= resolution * scale):
        status, ok = "degenerate-at-link", False
    elif float(np.min(np.abs(v))) <= resolution * scale:
        status, ok = "inconclusive", None
    else:
        status, ok = "ok", True
    need = 0.0 if tau_request is None else float(tau_request)
    nondeg = bool(ok) and tau > need and tau > 0.0
    return NondegeneracyReport("s3", nondeg, ok, status, crit, tmin, tau,
                               [(0.0, 1.0)] if tau > 0 else [], lip, grid)


def check_nondegenerate_t3(prof, tau_request=None, lipschitz=None, grid=4096, resolution=1e-9):
    """Certify the T³ twist condition on ``Omega_tau`` and the Morse condition on ``B``."""
    cp = curl_t3(prof)
    tmin, tau_cert, lip = _certify(cp.twist, cp.twist_slope, 0.0, TWO_PI, grid, lipschitz)
    tau = tau_cert if tau_request is None else float(tau_request)
    if tau > 0:
        zs, _, _ = _sign_change_roots(lambda z: np.abs(cp.twist(z)) - tau, 0.0, TWO_PI, grid, periodic=True)
        zs = np.sort(np.mod(zs, TWO_PI))
        probe = lambda z: abs(float(cp.twist(np.asarray(z)))) >= tau  # noqa: E731
        if zs.size == 0:
            omega = [(0.0, TWO_PI)] if probe(0.0) else []
        else:
            edges = np.concatenate([[0.0], zs, [TWO_PI]])
            omega = [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a and probe(0.5 * (a + b))]
    else:
        omega = []
    # Morse condition on B(z)
    B = bernoulli_t3(prof)
    zg = (np.arange(grid) + 0.5) * (TWO_PI / grid)
    scale = float(np.max(np.abs(B.deriv(zg))))
    crit = []
    if scale <= 1e-14:
        status, ok = "constant-bernoulli", False
    else:
        roots, x, v = _sign_change_roots(B.deriv, 0.0, TWO_PI, grid, periodic=True)
        roots = np.mod(roots, TWO_PI)
        roots = np.unique(np.round(np.where(roots > TWO_PI - 1e-12, 0.0, roots), 12))
        crit = [(float(r), float(B(r))) for r in roots]
        curv = np.abs(bernoulli_second_derivative(prof, roots)) if roots.size else np.array([])
        if np.any(curv <= resolution * scale):
            status, ok = "degenerate-critical", False
        elif float(np.min(np.abs(v))) <= resolution * scale and roots.size == 0:
            status, ok = "inconclusive", None
        else:
            status, ok = "ok", True
    nondeg = bool(ok) and tau > 0 and len(omega) > 0
    return NondegeneracyReport("t3", nondeg, ok, status, crit, tmin, tau, omega, lip, grid)


def check_nondegenerate(prof, tau_request=None, **kw):
    if prof.space == "s3":
        return check_nondegenerate_s3(prof, tau_request, **kw)
    return check_nondegenerate_t3(prof, tau_request, **kw)


# -- pointwise identities ------------------------------------------------------------------

_EPS3 = np.zeros((3, 3, 3))
for (_i, _j, _k), _s in {(0, 1, 2): 1, (1, 2, 0): 1, (2, 0, 1): 1,
                         (0, 2, 1): -1, (2, 1, 0): -1, (1, 0, 2): -1}.items():
    _EPS3[_i, _j, _k] = _s


def cross_covector(space, X, Y):
    """``(X x Y)`` lowered to a covector: ``m eps_ijk X^i Y^j`` with ``m`` the chart density."""
    m = 0.5 if space == "s3" else 1.0
    return m * np.einsum("ijk,...i,...j->...k", _EPS3, X, Y)


def covector_norm(space, c, r):
    ginv = 1.0 / metric(space, r)
    return np.sqrt(np.sum(c * c * ginv, axis=-1))


def bernoulli_identity_residual(prof, points):
    """Max over ``points`` of ``|u x rot u - grad B|`` in the induced metric."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    u = ChartField(prof, mode=0)(pts)
    w = ChartField(prof, mode=1)(pts)
    dB = bernoulli(prof).deriv(pts[:, 2])
    c = cross_covector(prof.space, u, w)
    c[:, 2] -= dB
    return float(np.max(covector_norm(prof.space, c, pts[:, 2]))) if len(pts) else 0.0


def _complex_step_jacobian(fieldfn, pts, h=1e-20):
    pts = np.asarray(pts, dtype=float)
    J = np.empty(pts.shape + (3,))
    for j in range(3):
        z = pts.astype(complex)
        z[..., j] += 1j * h
        J[..., :, j] = np.imag(fieldfn(z)) / h
    return J


def divergence(fieldfn, points):
    """Chart divergence (constant density charts) by complex-step differentiation."""
    J = _complex_step_jacobian(fieldfn, points)
    return np.trace(J, axis1=-2, axis2=-1)


def lie_bracket(X, Y, points):
    """Chart Lie bracket ``[X, Y]`` of two complex-safe fields at ``points``."""
    pts = np.asarray(points, dtype=float)
    JX = _complex_step_jacobian(X, pts)
    JY = _complex_step_jacobian(Y, pts)
    x = np.real(X(pts))
    y = np.real(Y(pts))
    return np.einsum("...kj,...j->...k", JY, x) - np.einsum("...kj,...j->...k", JX, y)


def random_chart_points(space, n, rng, lo=None, hi=None):
    """Uniform chart points; ``r`` in ``(lo, hi)`` (defaults: guarded full range)."""
    if space == "s3":
        lo = DELTA_CHART if lo is None else lo
        hi = 1.0 - DELTA_CHART if hi is None else hi
    else:
        lo = 0.0 if lo is None else lo
        hi = TWO_PI if hi is None else hi
    return np.column_stack([rng.uniform(0, TWO_PI, n), rng.uniform(0, TWO_PI, n), rng.uniform(lo, hi, n)])


__all__ = [
    "ShearProfileS3", "ShearProfileT3", "ChartField", "CurlProfileS3", "CurlProfileT3",
    "BernoulliProfile", "NondegeneracyReport", "profile_from_json", "eval_field", "eval_field_t3",
    "velocity_field", "vorticity_field", "curl", "curl_t3", "curl_dual_form", "bernoulli",
    "bernoulli_t3", "check_nondegenerate_s3", "check_nondegenerate_t3", "check_nondegenerate",
    "bernoulli_identity_residual", "pushforward_field", "divergence", "lie_bracket",
]
