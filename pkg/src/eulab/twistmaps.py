"""Area-preserving annulus maps.

Maps act on ``(theta, rho)`` with unreduced ``theta``.  Kernel-backed maps
(analytic twist maps and their generating-function perturbations) iterate in
compiled code; other maps are plain vectorised callables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import (AmplitudeError, EscapeError, FitFailedError, NoResonanceError,
                     NotFoundError, SectionError, ValidationError)
from .geometry import DENSITY, TWO_PI
from .kernels.descriptor import H_KIND, build, with_pert
from .kernels.fields import P_ACTIVE, P_C, P_EPS, P_H, P_PHI, P_Q, P_RB, P_TC, bump_np
from .kernels.orbits import S_ROT, S_ROT_HALF, birkhoff
from .profiles import Profile

BUMP_RADIUS = 0.1
BUMP_SLOPE_MAX = 1.7170705  # max |d/du (1-u²)³| at u = 1/sqrt(5)


@dataclass
class Orbit:
    """Orbit with unreduced angles; ``exit_index`` is set on escape."""

    theta: np.ndarray
    rho: np.ndarray
    exit_index: int | None = None

    @property
    def escaped(self):
        return self.exit_index is not None

    @property
    def winding(self):
        return float(self.theta[-1] - self.theta[0])


class AnnulusMap:
    """Base class: an area-preserving map of ``S¹ x (a, b)``.

    Subclasses implement :meth:`step`.  ``density`` is the invariant area
    density so that ``density(rho) dtheta drho`` is preserved.
    """

    exact = True
    space = None

    def __init__(self, a, b):
        if not a < b:
            raise ValidationError("annulus needs a < b", a=a, b=b)
        self.a = float(a)
        self.b = float(b)

    @property
    def width(self):
        return self.b - self.a if math.isfinite(self.b - self.a) else 1.0

    @property
    def volume_factor(self):
        return DENSITY.get(self.space, 1.0)

    def step(self, theta, rho):
        raise NotImplementedError

    def __call__(self, theta, rho):
        t, r, _ = self.step(theta, rho)
        return t, r

    def density(self, rho):
        return np.ones_like(np.asarray(rho, dtype=float))

    def transit_time(self, theta, rho):
        """First-return time of the underlying flow (1 when there is none)."""
        return np.ones_like(np.asarray(rho, dtype=float))

    def descriptor(self):
        return None

    def iterate_many(self, theta0, rho0, n, backend=None):
        """Orbits of many seeds; returns ``(theta, rho, counts)`` arrays."""
        bd = self.descriptor()
        if bd is not None:
            return kernels.map_orbits(bd, theta0, rho0, n, self.a, self.b, backend)
        th0 = np.atleast_1d(np.asarray(theta0, dtype=float))
        r0 = np.atleast_1d(np.asarray(rho0, dtype=float))
        m = th0.size
        th = np.full((m, n + 1), np.nan)
        rr = np.full((m, n + 1), np.nan)
        th[:, 0], rr[:, 0] = th0, r0
        counts = np.full(m, n, dtype=np.int64)
        alive = np.ones(m, dtype=bool)
        t, r = th0.copy(), r0.copy()
        for k in range(n):
            idx = np.nonzero(alive)[0]
            if idx.size == 0:
                break
            t1, r1, st = self.step(t[idx], r[idx])
            bad = (st != 0) | ~np.isfinite(t1) | ~np.isfinite(r1)
            counts[idx[bad]] = k
            alive[idx[bad]] = False
            g = idx[~bad]
            t[g], r[g] = t1[~bad], r1[~bad]
            th[g, k + 1], rr[g, k + 1] = t[g], r[g]
            out = (r[g] <= self.a) | (r[g] >= self.b)
            counts[g[out]] = k + 1
            alive[g[out]] = False
        return th, rr, counts

    def power(self, theta, rho, q):
        """``Pi^q`` (vectorised); escapes give NaN."""
        t = np.array(theta, dtype=float)
        r = np.array(rho, dtype=float)
        for _ in range(q):
            t, r, st = self.step(t, r)
            bad = st != 0
            if np.any(bad):
                t = np.where(bad, np.nan, t)
                r = np.where(bad, np.nan, r)
        return t, r

    def jacobian(self, theta, rho, q=1, h=None):
        """Central finite-difference Jacobian of ``Pi^q`` at one point."""
        h = 1e-6 * self.width if h is None else h
        th = np.array([theta + h, theta - h, theta, theta])
        rh = np.array([rho, rho, rho + h, rho - h])
        t, r = self.power(th, rh, q)
        return np.array([[(t[0] - t[1]) / (2 * h), (t[2] - t[3]) / (2 * h)],
                         [(r[0] - r[1]) / (2 * h), (r[2] - r[3]) / (2 * h)]])


class KernelMap(AnnulusMap):
    """Map evaluated by the compiled map kernel."""

    def __init__(self, bd, a, b, space=None):
        super().__init__(a, b)
        self._bd = bd
        self.space = space

    def descriptor(self):
        return self._bd

    def step(self, theta, rho):
        return kernels.map_step_batch(self._bd, np.asarray(theta, dtype=float),
                                      np.asarray(rho, dtype=float), backend="numpy")

    def winding(self, rho):
        from .kernels.fields import winding_density_np
        return winding_density_np(self._bd, np.asarray(rho, dtype=float))[0]

    def density(self, rho):
        from .kernels.fields import winding_density_np
        return winding_density_np(self._bd, np.asarray(rho, dtype=float))[1]

    def density_slope(self, rho):
        from .kernels.fields import winding_density_np
        return winding_density_np(self._bd, np.asarray(rho, dtype=float))[2]


class TwistMap(KernelMap):
    """Integrable twist map ``(theta, rho) -> (theta + W(rho), rho)``.

    Build it from a shear flow's vorticity with :meth:`from_profile` or from
    an explicit winding function with :meth:`from_winding`.
    """

    def __init__(self, bd, a, b, space=None, source=None):
        super().__init__(bd, a, b, space)
        self.source = source

    @classmethod
    def from_profile(cls, prof, a, b, sec=1):
        """Return map of ``rot u`` on the section ``{angle_sec = 0}``."""
        pert = np.zeros(8)
        ispace = 0 if prof.space == "s3" else 1
        f, g = prof.pair
        bd = build(ispace, 0, 1, sec, f.pack(), g.pack(), pert)
        m = cls(bd, a, b, prof.space, source=prof)
        xs = np.linspace(a, b, 2049)
        from .kernels.fields import shear_comps_np
        comps = shear_comps_np(bd, xs)
        G = comps[sec]
        if np.any(G == 0.0) or np.any(np.sign(G) != np.sign(G[0])):
            raise SectionError("sectioned component of the vorticity vanishes on the annulus; "
                               "section on the other angle instead", a=a, b=b)
        m.direction = int(np.sign(G[0]))
        return m

    @classmethod
    def from_winding(cls, W, a=0.0, b=1.0, D=None, space=None):
        """Twist map with winding profile ``W`` and area density ``D`` (default 1)."""
        W = W if isinstance(W, Profile) else Profile.from_expression(str(W))
        D = Profile.constant(1.0) if D is None else D
        bd = build(0 if space != "t3" else 1, 1, 0, 1, W.pack(), D.pack())
        m = cls(bd, a, b, space, source=W)
        m.direction = 1
        return m

    def transit_time(self, theta, rho):
        if self._bd[H_KIND] == 1:
            return np.ones_like(np.asarray(rho, dtype=float))
        return TWO_PI / self.density(rho)

    def rotation_profile(self, rho):
        """``W(rho) / 2 pi`` (signed)."""
        return self.winding(rho) / TWO_PI


class CallableMap(AnnulusMap):
    """Wrap a vectorised function ``fn(theta, rho) -> (theta', rho')``."""

    def __init__(self, fn, a=-np.inf, b=np.inf, density=None, exact=True, name=None):
        self.a, self.b = float(a), float(b)
        self.fn = fn
        self._density = density
        self.exact = exact
        self.name = name

    def step(self, theta, rho):
        t, r = self.fn(np.asarray(theta, dtype=float), np.asarray(rho, dtype=float))
        t = np.asarray(t, dtype=float)
        r = np.asarray(r, dtype=float)
        return t, r, np.zeros(np.shape(t), dtype=np.int64)

    def density(self, rho):
        if self._density is None:
            return np.ones_like(np.asarray(rho, dtype=float))
        return self._density(rho)

    @property
    def width(self):
        return 1.0 if not math.isfinite(self.b - self.a) else self.b - self.a


# -- toy maps -------------------------------------------------------------------------

def rigid_rotation(omega, a=0.0, b=1.0):
    """Annulus rotation ``theta -> theta + omega``."""
    return TwistMap.from_winding(Profile.constant(omega), a, b)


def plane_rotation(omega):
    """Rotation of the plane by ``omega`` about the origin, in Cartesian coordinates."""
    c, s = math.cos(omega), math.sin(omega)
    return CallableMap(lambda x, y: (c * x - s * y, s * x + c * y), name=f"rotation({omega})")


def integrable_polar(omega, alpha):
    """Plane map rotating the circle of radius ``r`` by ``omega + alpha r²``."""
    def fn(x, y):
        ang = omega + alpha * (x * x + y * y)
        c, s = np.cos(ang), np.sin(ang)
        return c * x - s * y, s * x + c * y
    return CallableMap(fn, name=f"integrable({omega}, {alpha})")


def linear_map(M):
    M = np.asarray(M, dtype=float)
    return CallableMap(lambda x, y: (M[0, 0] * x + M[0, 1] * y, M[1, 0] * x + M[1, 1] * y),
                       exact=abs(np.linalg.det(M) - 1) < 1e-12, name="linear")


def standard_map(K, a=-np.inf, b=np.inf):
    """Chirikov standard map with ``rho`` as momentum (not reduced)."""
    def fn(t, p):
        p1 = p + K * np.sin(t)
        return t + p1, p1
    return CallableMap(fn, a, b, name=f"standard({K})")


def resonant_plane_map(k=3, c=1.0):
    """Rotation by ``2 pi / k`` plus a resonant ``conj(z)^(k-1)`` term (area preserving to
    leading order is not required; used only as a resonant probe input)."""
    lam = np.exp(2j * np.pi / k)

    def fn(x, y):
        z = x + 1j * y
        w = lam * (z + c * np.conj(z) ** (k - 1))
        return w.real, w.imag
    return CallableMap(fn, name=f"resonant-{k}", exact=False)


# -- perturbations ------------------------------------------------------------------------

@dataclass(frozen=True)
class GeneratingPerturbation:
    """Generating function ``theta P' + eps s(theta, P')``.

    ``s = cos(q theta + phi0) * chi((rho(P) - c) / radius)`` with
    ``chi(u) = (1 - u²)³``, a C² bump supported on ``|u| < 1``.
    """

    eps: float
    q: int
    c: float
    radius: float = BUMP_RADIUS
    phi0: float = 0.0
    tol: float = 1e-13

    def s(self, theta, rho):
        return np.cos(self.q * np.asarray(theta) + self.phi0) * bump_np((np.asarray(rho) - self.c) / self.radius, 0)

    def block(self):
        pert = np.zeros(8)
        pert[P_ACTIVE] = 1.0 if self.eps != 0.0 else 0.0
        pert[P_EPS] = self.eps
        pert[P_Q] = self.q
        pert[P_PHI] = self.phi0
        pert[P_C] = self.c
        pert[P_RB] = self.radius
        pert[P_H] = 0.5 * math.pi
        pert[P_TC] = math.pi
        return pert


class PerturbedTwistMap(KernelMap):
    """``Pi0 o phi_eps`` with ``phi_eps`` generated by a :class:`GeneratingPerturbation`."""

    def __init__(self, base, pert):
        bd = with_pert(base.descriptor(), pert.block())
        super().__init__(bd, base.a, base.b, base.space)
        self.base = base
        self.pert = pert
        self.direction = getattr(base, "direction", 1)

    def contraction_factor(self):
        """``eps q max|chi'| / (radius min D)`` over the bump support."""
        p = self.pert
        xs = np.linspace(max(self.a, p.c - p.radius), min(self.b, p.c + p.radius), 513)
        Dmin = float(np.min(self.density(xs)))
        return abs(p.eps) * p.q * BUMP_SLOPE_MAX / (p.radius * Dmin)

    def transit_time(self, theta, rho, nodes=16):
        """Transit time of the suspended flow through one period.

        Outside the temporal bump the flow is the unperturbed shear flow; on
        the bump the point follows the co-moving generating family, whose
        radius is integrated by Gauss-Legendre quadrature.
        """
        theta = np.asarray(theta, dtype=float)
        rho = np.asarray(rho, dtype=float)
        D0 = self.density(rho)
        p = self.pert
        if p.eps == 0.0:
            return TWO_PI / D0
        x, w = np.polynomial.legendre.leggauss(nodes)
        h = 0.5 * math.pi
        v = x
        sig = 35.0 / 32.0 * (v - v ** 3 + 0.6 * v ** 5 - v ** 7 / 7.0 + 16.0 / 35.0)
        acc = np.zeros_like(rho)
        for sk, wk in zip(sig, w):
            r_s = self._family_radius(theta, rho, sk)
            acc += wk / self.density(r_s)
        t_mid = h * acc
        r_end = self._family_radius(theta, rho, 1.0)
        return 0.5 * math.pi / D0 + t_mid + 0.5 * math.pi / self.density(r_end)

    def _family_radius(self, theta, rho, sigma):
        """Radius after the generating map with amplitude ``sigma * eps``."""
        if sigma == 0.0:
            return rho
        scaled = GeneratingPerturbation(self.pert.eps * sigma, self.pert.q, self.pert.c,
                                        self.pert.radius, self.pert.phi0)
        bd = with_pert(self._bd, scaled.block())
        # strip the twist: apply phi only, then read the radius
        t1, r1, _ = kernels.map_step_batch(bd, theta, rho, backend="numpy")
        return r1


def perturb(base, pert):
    """Compose a twist map with an exact generating-function perturbation."""
    if not isinstance(base, TwistMap):
        raise ValidationError("perturb needs an analytic TwistMap as base")
    m = PerturbedTwistMap(base, pert)
    if pert.eps != 0.0 and m.contraction_factor() >= 0.5:
        raise AmplitudeError("perturbation too large for the implicit generating-function solve",
                             eps=pert.eps, factor=m.contraction_factor())
    if pert.c - pert.radius <= base.a or pert.c + pert.radius >= base.b:
        raise ValidationError("perturbation support must lie inside the annulus")
    return m


# -- iteration and rotation numbers ----------------------------------------------------------

def iterate(pi, x, n, backend=None):
    """``n`` iterates of ``x = (theta, rho)``; escapes are reported in the orbit."""
    th, rr, counts = pi.iterate_many([x[0]], [x[1]], n, backend)
    c = int(counts[0])
    return Orbit(th[0, :c + 1].copy(), rr[0, :c + 1].copy(), None if c == n else c)


@dataclass
class RotationNumber:
    value: float
    signed: float
    confidence: float
    converged: bool
    escaped: bool
    steps: int

    def __float__(self):
        return self.value


def rotation_number(pi, x, N=10_000, tol=1e-3, backend=None):
    """Weighted Birkhoff rotation number of the orbit of ``x``.

    Returns the value in ``[0, 1)``, its signed lift and the confidence
    ``|rot_N - rot_{N/2}|``.  Orbits that escape give a partial estimate with
    ``escaped=True``.
    """
    if N < 1000:
        raise ValidationError("rotation number needs N >= 1000")
    orb = iterate(pi, x, N, backend)
    n = len(orb.theta) - 1
    if n < 2:
        return RotationNumber(math.nan, math.nan, math.inf, False, True, n)
    d = np.diff(orb.theta) / TWO_PI
    rot = birkhoff(d, n)
    half = birkhoff(d, n // 2) if n >= 4 else math.nan
    conf = abs(rot - half)
    return RotationNumber(rot % 1.0, rot, conf, conf < tol and not orb.escaped, orb.escaped, n)


# -- resonances ---------------------------------------------------------------------------------

def find_resonance(pi, p, q, grid=4097):
    """Radii ``c`` in the annulus with ``W(c) = 2 pi p / q``.

    If no root exists for the signed target and ``p > 0`` the opposite
    orientation is tried (``p`` is then reported negative).  Returns a list
    of ``(c, p_signed)``.
    """
    if q <= 0 or math.gcd(abs(int(p)), int(q)) != 1:
        raise ValidationError("resonance needs coprime p, q with q > 0", p=p, q=q)
    if not isinstance(pi, TwistMap):
        from .steady import ShearProfileS3, ShearProfileT3
        if isinstance(pi, (ShearProfileS3, ShearProfileT3)):
            lo, hi = (0.0, 1.0) if pi.space == "s3" else (0.0, TWO_PI)
            pi = TwistMap.from_profile(pi, lo, hi)
        else:
            raise ValidationError("find_resonance needs a TwistMap or shear profile")
    lo = pi.a + 1e-12 * pi.width
    hi = pi.b - 1e-12 * pi.width
    xs = np.linspace(lo, hi, grid)
    for ps in ([p, -p] if p > 0 else [p]):
        target = TWO_PI * ps / q
        fn = lambda r: float(pi.winding(np.asarray(r))) - target  # noqa: E731
        v = pi.winding(xs) - target
        roots = []
        for i in range(grid - 1):
            if v[i] == 0.0:
                roots.append(xs[i])
            elif v[i] * v[i + 1] < 0.0:
                roots.append(brentq(fn, xs[i], xs[i + 1], xtol=1e-15, rtol=1e-15))
        if roots:
            return [(float(c), int(ps)) for c in roots]
    W = pi.winding(xs)
    raise NoResonanceError("p/q is outside the range of W/2pi on the annulus", p=p, q=q,
                           range=[float(W.min() / TWO_PI), float(W.max() / TWO_PI)])


# -- periodic orbits ------------------------------------------------------------------------------

@dataclass
class PeriodicOrbit:
    """``q``-periodic orbit with total winding ``2 pi p``."""

    q: int
    p: int
    theta: np.ndarray
    rho: np.ndarray
    residual: float

    @property
    def c(self):
        return float(np.mean(self.rho))

    @property
    def winding(self):
        return TWO_PI * self.p

    def base(self, k=0):
        return float(self.theta[k]), float(self.rho[k])

    def relabel(self, k):
        """Same orbit with base point ``k``."""
        th = np.concatenate([self.theta[k:], self.theta[:k] + TWO_PI * self.p])
        rr = np.concatenate([self.rho[k:], self.rho[:k]])
        return PeriodicOrbit(self.q, self.p, th - TWO_PI * math.floor(th[0] / TWO_PI), rr, self.residual)


def _periodic_residual(pi, th, r, q, p):
    t1, r1 = pi.power(th, r, q)
    return np.stack([t1 - th - TWO_PI * p, r1 - r], axis=-1)


def find_periodic(pi, q, c, n_seeds=64, p=None, window=0.05, tol=1e-12, max_iter=60):
    """Periodic orbits of period ``q`` near the circle ``rho = c`` by damped Newton.

    Seeds are spread uniformly in ``theta`` on the circle.  Converged points
    are grouped into orbits and deduplicated.
    """
    if p is None:
        t1, _ = pi.power(np.array([0.0]), np.array([c]), q)
        p = int(round(float(t1[0]) / TWO_PI))
    h = 1e-6 * pi.width
    found = []
    for th0 in np.linspace(0.0, TWO_PI, n_seeds, endpoint=False):
        x = np.array([th0, c])
        F = _periodic_residual(pi, x[:1], x[1:], q, p)[0]
        nf = float(np.linalg.norm(F))
        ok = nf < tol
        for _ in range(max_iter):
            if ok or not np.isfinite(nf):
                break
            pts_t = np.array([x[0] + h, x[0] - h, x[0], x[0]])
            pts_r = np.array([x[1], x[1], x[1] + h, x[1] - h])
            R = _periodic_residual(pi, pts_t, pts_r, q, p)
            J = np.column_stack([(R[0] - R[1]) / (2 * h), (R[2] - R[3]) / (2 * h)])
            dx = np.linalg.lstsq(J, -F, rcond=None)[0]
            lam = 1.0
            while lam > 1e-4:
                xn = x + lam * dx
                if abs(xn[1] - c) < window and pi.a < xn[1] < pi.b:
                    Fn = _periodic_residual(pi, xn[:1], xn[1:], q, p)[0]
                    nn = float(np.linalg.norm(Fn))
                    if np.isfinite(nn) and nn < nf:
                        break
                lam *= 0.5
            else:
                break
            x, F, nf = xn, Fn, nn
            ok = nf < tol
        if ok and abs(x[1] - c) < window:
            found.append((x.copy(), nf))
    orbits = []
    for x, res in found:
        th = np.empty(q)
        rr = np.empty(q)
        t, r = np.array([x[0]]), np.array([x[1]])
        for k in range(q):
            th[k], rr[k] = t[0], r[0]
            t, r = pi.power(t, r, 1)
        if any(_same_orbit(o, th, rr) for o in orbits):
            continue
        orbits.append(PeriodicOrbit(q, p, th, rr, res))
    if not orbits:
        raise NotFoundError("Newton iteration converged from no seed", q=q, c=c, p=p)
    orbits.sort(key=lambda o: float(np.mod(o.theta[0], TWO_PI)))
    return orbits


def _same_orbit(orbit, th, rr, tol=1e-7):
    a = np.mod(orbit.theta, TWO_PI)
    d = np.abs(np.mod(a - (th[0] % TWO_PI) + math.pi, TWO_PI) - math.pi)
    return bool(np.any((d < tol) & (np.abs(orbit.rho - rr[0]) < tol)))


# -- linear stability -------------------------------------------------------------------------------

@dataclass
class FixedPointClass:
    """Linear and nonlinear stability data of a periodic point."""

    lam: complex
    trace: float
    omega: float
    resonance: tuple
    alpha: float = math.nan
    alpha_sigma: float = math.nan
    verdict: str = "undetermined"
    det: float = math.nan
    fit: object = None

    @property
    def elliptic(self):
        return self.verdict.startswith("elliptic")

    def to_json(self):
        return {"lambda_re": float(self.lam.real), "lambda_im": float(self.lam.imag),
                "omega": float(self.omega), "resonance_flags": [bool(f) for f in self.resonance],
                "alpha": _num(self.alpha), "alpha_sigma": _num(self.alpha_sigma),
                "verdict": self.verdict, "trace": float(self.trace), "det": float(self.det)}


def _num(x):
    return None if not math.isfinite(x) else float(x)


def monodromy(pi, orbit, h=None):
    """``D Pi^q`` as a product of one-step finite-difference Jacobians."""
    M = np.eye(2)
    for k in range(orbit.q):
        M = pi.jacobian(float(orbit.theta[k]), float(orbit.rho[k]), 1, h) @ M
    return M


def classify(pi, orbit, res_tol=1e-4, parabolic_tol=1e-6, hyper_margin=1e-9, fit=True, **fit_kw):
    """Linear stability of a periodic orbit; elliptic points also get a twist fit."""
    if orbit.residual >= 1e-9:
        raise ValidationError("orbit residual too large to classify", residual=orbit.residual)
    M = monodromy(pi, orbit)
    tr = float(np.trace(M))
    det = float(np.linalg.det(M))
    disc = tr * tr / 4.0 - 1.0
    if disc > 0:
        lam = complex(tr / 2.0 + math.copysign(math.sqrt(disc), tr))
        omega = 0.0 if tr > 0 else math.pi
    else:
        lam = complex(tr / 2.0, math.sqrt(-disc))
        omega = math.atan2(lam.imag, lam.real)
    flags = tuple(abs(lam ** k - 1.0) < res_tol for k in range(1, 5))
    if abs(tr - 2.0) < parabolic_tol:
        verdict = "parabolic"
    elif abs(tr) > 2.0 + hyper_margin:
        verdict = "hyperbolic"
    elif abs(tr) >= 2.0:
        verdict = "parabolic"
    elif any(flags):
        verdict = "elliptic-resonant"
    else:
        verdict = "elliptic-nondegenerate"
    out = FixedPointClass(lam, tr, omega, flags, verdict=verdict, det=det)
    if verdict == "elliptic-nondegenerate" and fit:
        try:
            tf = twist_fit(pi, orbit, **fit_kw)
            out.alpha, out.alpha_sigma, out.fit = tf.alpha, tf.alpha_sigma, tf
            if not abs(tf.alpha) > 3.0 * tf.alpha_sigma:
                out.verdict = "elliptic-degenerate-twist"
        except FitFailedError:
            out.verdict = "elliptic-degenerate-twist"
    return out


@dataclass
class TwistFit:
    """Least-squares fit ``W(r) = omega + alpha r²`` of libration angles."""

    radii: np.ndarray
    values: np.ndarray
    confidence: np.ndarray
    omega: float
    alpha: float
    alpha_sigma: float
    omega_sigma: float
    residual: float
    frame: np.ndarray = field(repr=False, default=None)


def linearizing_frame(pi, orbit):
    """Frame ``B`` with ``B^-1 M B`` a rotation and ``det(B) * density = 1``."""
    M = monodromy(pi, orbit)
    w, V = np.linalg.eig(M)
    k = int(np.argmax(w.imag))
    if abs(w[k].imag) < 1e-12:
        raise FitFailedError("periodic point is not elliptic")
    v = V[:, k]
    B = np.column_stack([v.real, -v.imag])
    D0 = float(pi.density(np.array([orbit.rho[0]]))[0])
    det = np.linalg.det(B)
    if det < 0:
        B[:, 1] *= -1.0
        det = -det
    B = B / math.sqrt(det * D0)
    return B, M


def local_orbits(pi, orbit, B, seeds, n, backend=None):
    """Orbits of ``Pi^q`` from frame offsets ``seeds`` (shape ``(m, 2)``).

    Returns frame coordinates of shape ``(m, n + 1, 2)`` with the winding
    ``2 pi p`` removed, and the completed-step counts.
    """
    x0 = np.array([orbit.theta[0], orbit.rho[0]])
    start = x0 + np.asarray(seeds) @ B.T
    q = orbit.q
    th, rr, counts = pi.iterate_many(start[:, 0], start[:, 1], n * q, backend)
    th = th[:, ::q]
    rr = rr[:, ::q]
    th = th - TWO_PI * orbit.p * np.arange(n + 1)
    X = np.stack([th - x0[0], rr - x0[1]], axis=-1) @ np.linalg.inv(B).T
    return X, counts // q


def twist_fit(pi, orbit, radii=None, n_iter=2000, r_max=0.02, n_radii=6, conf_tol=1e-6, backend=None):
    """Fit the libration rotation ``W(r) = omega + alpha r²`` around an elliptic point."""
    try:
        B, M = linearizing_frame(pi, orbit)
    except FitFailedError:
        raise
    if radii is None:
        radii = r_max * (1.0 / 8.0) ** (np.arange(n_radii) / (n_radii - 1))
    radii = np.asarray(radii, dtype=float)
    seeds = np.column_stack([radii, np.zeros_like(radii)])
    X, counts = local_orbits(pi, orbit, B, seeds, n_iter, backend)
    vals, confs, keep = [], [], []
    for i in range(len(radii)):
        if counts[i] < n_iter:
            continue
        phi = np.arctan2(X[i, :, 1], X[i, :, 0])
        d = np.diff(phi)
        d = (d - TWO_PI * np.floor((d + math.pi) / TWO_PI)) / TWO_PI
        nu = birkhoff(d, len(d))
        nu2 = birkhoff(d, len(d) // 2)
        if abs(nu - nu2) > conf_tol:
            continue
        vals.append(TWO_PI * nu)
        confs.append(abs(nu - nu2))
        keep.append(i)
    if len(keep) < 3:
        raise FitFailedError("too few radii gave converged libration rotation numbers",
                             usable=len(keep))
    r = radii[keep]
    y = np.array(vals)
    A = np.column_stack([np.ones_like(r), r * r])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(len(r) - 2, 1)
    s2 = float(res @ res) / dof
    # floor the noise at the Birkhoff confidence so exact fits still carry an error bar
    s2 = max(s2, float(np.mean(np.square(TWO_PI * np.array(confs)))), 1e-30)
    cov = s2 * np.linalg.inv(A.T @ A)
    return TwistFit(r, y, np.array(confs), float(coef[0]), float(coef[1]), float(math.sqrt(cov[1, 1])),
                    float(math.sqrt(cov[0, 0])), float(math.sqrt(float(res @ res) / len(r))), B)


# -- sampled diagnostics ---------------------------------------------------------------------------

def area_residual(pi, thetas, rhos, q=1):
    """``max |det D Pi^q * D(rho') / D(rho) - 1|`` over sample points."""
    out = 0.0
    for t, r in zip(np.ravel(thetas), np.ravel(rhos)):
        J = pi.jacobian(float(t), float(r), q)
        t1, r1 = pi.power(np.array([t]), np.array([r]), q)
        ratio = float(pi.density(r1)[0] / pi.density(np.array([r]))[0])
        out = max(out, abs(np.linalg.det(J) * ratio - 1.0))
    return out


def intersection_check(pi, rhos, n_theta=512):
    """For each circle ``rho = const`` report whether its image crosses it."""
    th = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    res = []
    for r in np.ravel(rhos):
        _, r1 = pi(th, np.full_like(th, r))
        d = r1 - r
        res.append(bool(np.all(d == 0.0) or (d.min() <= 0.0 <= d.max())))
    return np.array(res)


def rational_approx(x, qmax=50, tol=1e-6):
    """Nearest ``p/q`` with ``q <= qmax`` if within ``tol`` of ``x``, else ``None``."""
    fr = Fraction(float(x)).limit_denominator(qmax)
    if abs(float(fr) - x) < tol:
        return fr
    # limit_denominator finds the best approximation; a closer small-q fraction cannot exist
    return None


__all__ = [
    "Orbit", "AnnulusMap", "KernelMap", "TwistMap", "CallableMap", "PerturbedTwistMap",
    "GeneratingPerturbation", "PeriodicOrbit", "FixedPointClass", "TwistFit", "RotationNumber",
    "rigid_rotation", "plane_rotation", "integrable_polar", "linear_map", "standard_map",
    "resonant_plane_map", "perturb", "iterate", "rotation_number", "find_resonance",
    "find_periodic", "classify", "twist_fit", "monodromy", "linearizing_frame", "local_orbits",
    "area_residual", "intersection_check", "rational_approx", "S_ROT", "S_ROT_HALF", "EscapeError",
]
