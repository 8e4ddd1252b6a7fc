"""Orbit classification, isotopy classes, integrability spectrum and KAM probes."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .dynamics import NumericReturnMap, SectionSpec
from .errors import PrecisionWarning, ValidationError
from .geometry import TOTAL_VOLUME, TWO_PI
from .kernels.orbits import (S_CRHO, S_CTH, S_ESC, S_FIT, S_IFIT, S_NU, S_NU_HALF, S_P, S_Q, S_ROT,
                             S_ROT_HALF, S_SPREAD)
from .twistmaps import AnnulusMap, KernelMap, linearizing_frame, local_orbits

INVARIANT_CURVE = "invariant-curve"
ISLAND_CHAIN = "island-chain"
CHAOTIC = "chaotic"
ESCAPED = "escaped"
UNDECIDED = "undecided"
VERDICTS = (INVARIANT_CURVE, ISLAND_CHAIN, CHAOTIC, ESCAPED, UNDECIDED)


@dataclass(frozen=True)
class ClassifierOptions:
    """Thresholds of the orbit decision tree."""

    tol_rot: float = 1e-7
    tol_fit: float = 1e-5
    tol_chaos: float = 1e-5
    degree: int = 32
    samples: int = 512
    qmax: int = 12
    lock_tol: float = 1e-9
    ridge: float = 1e-14
    ergodic_qmax: int = 50
    ergodic_tol: float = 1e-6

    def kernel_opts(self):
        return (self.degree, self.samples, self.qmax, self.lock_tol, self.ridge)


DEFAULT_OPTIONS = ClassifierOptions()


@dataclass
class OrbitClass:
    verdict: str
    rotation: float
    confidence: float
    fit_residual: float
    p: int = 0
    q: int = 0
    libration: float = math.nan
    ergodic: bool = False
    centroid: tuple = (math.nan, math.nan)

    def to_json(self):
        return {"verdict": self.verdict, "rotation_number": _fin(self.rotation),
                "confidence": _fin(self.confidence), "fit_residual": _fin(self.fit_residual),
                "parent": [self.p, self.q] if self.verdict == ISLAND_CHAIN else None,
                "ergodic": self.ergodic}


def _fin(x):
    return float(x) if math.isfinite(x) else None


def _near_rational(x, qmax, tol):
    if not math.isfinite(x):
        return True
    fr = Fraction(x).limit_denominator(qmax)
    return abs(float(fr) - x) < tol


def verdicts_from_stats(stats, opts=DEFAULT_OPTIONS):
    """Decision tree over a statistics array; returns ``(verdicts, ergodic)`` arrays."""
    m = stats.shape[0]
    out = np.empty(m, dtype=object)
    erg = np.zeros(m, dtype=bool)
    for i in range(m):
        s = stats[i]
        if s[S_ESC] != 0.0:
            out[i] = ESCAPED
            continue
        conf = abs(s[S_ROT] - s[S_ROT_HALF])
        fit = s[S_FIT]
        q = int(s[S_Q]) if math.isfinite(s[S_Q]) else 0
        if conf < opts.tol_rot and fit < opts.tol_fit:
            out[i] = INVARIANT_CURVE
            erg[i] = not _near_rational(s[S_ROT], opts.ergodic_qmax, opts.ergodic_tol)
            continue
        if q > 0 and math.isfinite(s[S_NU]):
            lib_conf = abs(s[S_NU] - s[S_NU_HALF])
            if lib_conf < opts.tol_rot and s[S_IFIT] < opts.tol_fit and s[S_SPREAD] < math.pi / q:
                out[i] = ISLAND_CHAIN
                erg[i] = not _near_rational(s[S_NU], opts.ergodic_qmax, opts.ergodic_tol)
                continue
        if conf >= opts.tol_chaos and fit >= opts.tol_fit:
            out[i] = CHAOTIC
        else:
            out[i] = UNDECIDED
    return out, erg


def orbit_statistics(pi, thetas, rhos, N, opts=DEFAULT_OPTIONS, yscale=0.0, backend=None, threads=None):
    """Statistics vectors (and first-return times where available) for many seeds."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    ys = np.full(thetas.size, float(yscale))
    ko = opts.kernel_opts()
    if isinstance(pi, NumericReturnMap):
        from .dynamics import TRANSVERSALITY_FLOOR, MAX_PERIODS, _bounds
        lo, hi = _bounds(pi.field)
        st, status, times = kernels.ode_stats(pi.fd, pi.sec, pi.direction, pi.section.value, thetas, rhos, N,
                                              pi.tol, TRANSVERSALITY_FLOOR, lo, hi, pi.a, pi.b, MAX_PERIODS,
                                              ys, ko, backend or pi.backend, threads)
        return st, times
    if isinstance(pi, KernelMap):
        st = kernels.map_stats(pi.descriptor(), thetas, rhos, N, pi.a, pi.b, ys, ko, backend, threads)
        return st, None
    with np.errstate(all="ignore"):
        th, rr, counts = pi.iterate_many(thetas, rhos, N)
    return kernels.orbit_stats(th, rr, counts, N, ys, ko, backend), None


def _orbit_class(s, verdict, erg):
    conf = abs(s[S_ROT] - s[S_ROT_HALF])
    p, q = (int(s[S_P]), int(s[S_Q])) if math.isfinite(s[S_Q]) else (0, 0)
    return OrbitClass(verdict, float(s[S_ROT]), float(conf), float(s[S_FIT]), p, q, float(s[S_NU]), bool(erg),
                      (float(s[S_CTH]), float(s[S_CRHO])))


def classify_orbit(pi, x, N=10_000, opts=DEFAULT_OPTIONS, backend=None):
    """Classify the orbit of ``x = (theta, rho)``."""
    if N < 1000:
        raise ValidationError("classification needs N >= 1000")
    st, _ = orbit_statistics(pi, [x[0]], [x[1]], N, opts, backend=backend)
    v, e = verdicts_from_stats(st, opts)
    return _orbit_class(st[0], v[0], e[0])


def classify_orbits(pi, thetas, rhos, N=10_000, opts=DEFAULT_OPTIONS, backend=None, threads=None):
    st, _ = orbit_statistics(pi, thetas, rhos, N, opts, backend=backend, threads=threads)
    v, e = verdicts_from_stats(st, opts)
    return [_orbit_class(st[i], v[i], e[i]) for i in range(len(v))]


# -- isotopy classes ------------------------------------------------------------------------

@dataclass(frozen=True)
class IsotopyClass:
    tag: str
    p: int = 0
    q: int = 0

    @property
    def nontrivial(self):
        return self.tag == "torus-knot"

    def __str__(self):
        return f"torus-knot({self.p},{self.q})" if self.tag == "torus-knot" else self.tag


UNKNOT = IsotopyClass("unknot")
T3_HORIZONTAL = IsotopyClass("t3-horizontal")
OTHER = IsotopyClass("other")


def torus_knot(p, q):
    """Normalised torus-knot class; ``(p, q)`` and ``(q, p)`` give the same class."""
    p, q = abs(int(p)), abs(int(q))
    if p == 0 or q == 0:
        return UNKNOT
    if math.gcd(p, q) != 1:
        warnings.warn(f"({p},{q}) is not coprime: multi-component cable, reported as other", stacklevel=2)
        return OTHER
    if min(p, q) <= 1:
        return UNKNOT
    return IsotopyClass("torus-knot", min(p, q), max(p, q))


def knot_class(dtheta_total, q):
    """Class of an S³ orbit closing after ``q`` returns with total winding ``dtheta_total``."""
    p = int(round(dtheta_total / TWO_PI))
    return torus_knot(p, q)


def class_of(verdict, p, q, space):
    if verdict == INVARIANT_CURVE:
        return UNKNOT if space == "s3" else T3_HORIZONTAL
    if verdict == ISLAND_CHAIN:
        if space == "s3":
            return torus_knot(p, q)
        return OTHER
    return None


# -- integrability spectrum --------------------------------------------------------------------

@dataclass
class GridSpec:
    n_theta: int = 64
    n_rho: int = 64
    a: float | None = None
    b: float | None = None
    jitter: bool = True

    def to_json(self):
        return {"n_theta": self.n_theta, "n_rho": self.n_rho, "a": self.a, "b": self.b, "jitter": self.jitter}


def grid_points(spec, a, b, seed=0):
    """Cell-jittered grid on ``[0, 2 pi) x (a, b)``.

    Jitter offsets come from a Philox generator keyed by ``(seed, cell)``,
    so every cell's point is independent of how the grid is partitioned.
    """
    nt, nr = spec.n_theta, spec.n_rho
    dt = TWO_PI / nt
    dr = (b - a) / nr
    it, ir = np.meshgrid(np.arange(nt), np.arange(nr), indexing="ij")
    it, ir = it.ravel(), ir.ravel()
    if spec.jitter:
        u = np.empty((it.size, 2))
        for k in range(it.size):
            g = np.random.Generator(np.random.Philox(key=np.array([seed, k], dtype=np.uint64)))
            u[k] = g.random(2)
    else:
        u = np.full((it.size, 2), 0.5)
    th = (it + u[:, 0]) * dt
    rr = a + (ir + u[:, 1]) * dr
    return th, rr, dt * dr


@dataclass
class KappaEstimate:
    space: str
    total_volume: float
    classes: dict
    unclassified: float
    grid: dict
    seed: int
    counts: dict = field(default_factory=dict)
    verdict_mass: dict = field(default_factory=dict)
    n: int = 0

    def fraction(self, tag):
        return self.classes.get(str(tag), {}).get("fraction", 0.0)

    def absolute(self, tag):
        return self.classes.get(str(tag), {}).get("absolute", 0.0)

    def stderr(self, tag):
        return self.classes.get(str(tag), {}).get("stderr", 0.0)

    @property
    def lam(self):
        """Measure of nontrivially knotted tori."""
        return sum(v["absolute"] for k, v in self.classes.items() if k.startswith("torus-knot"))

    @property
    def lam_stderr(self):
        return self.classes.get("__knotted__", {}).get("stderr", 0.0)

    def to_json(self):
        cls = [{"tag": k, "fraction": v["fraction"], "absolute": v["absolute"], "stderr": v["stderr"]}
               for k, v in self.classes.items() if not k.startswith("__")]
        return {"space": self.space, "total_volume": self.total_volume, "classes": cls,
                "unclassified": self.unclassified, "grid": self.grid, "seed": self.seed,
                "lambda": self.lam, "verdict_mass": self.verdict_mass, "orbit_counts": self.counts}


def _weights(pi, th, rr, times, cell):
    if isinstance(pi, NumericReturnMap):
        dens = pi.flux_density(th, rr)
        T = times
    else:
        dens = pi.density(rr)
        T = pi.transit_time(th, rr)
    return pi.volume_factor * dens * T * cell


def kappa_estimate(pi, grid=None, N=10_000, seed=0, opts=DEFAULT_OPTIONS, stderr_target=None,
                   ergodic_only=True, backend=None, threads=None, return_orbits=False):
    """Per-isotopy-class measure of (surrogate) ergodic invariant tori.

    ``pi`` is an annulus map or a chart field (its return map is then
    computed numerically).  Each grid orbit carries weight
    ``volume density x section density x return time x cell area`` so that
    the estimate targets 3D volume.
    """
    if not isinstance(pi, AnnulusMap):
        pi = NumericReturnMap(pi)
    grid = grid or GridSpec()
    space = pi.space or "s3"
    a = pi.a if grid.a is None else grid.a
    b = pi.b if grid.b is None else grid.b
    th, rr, cell = grid_points(grid, a, b, seed)
    stats, times = orbit_statistics(pi, th, rr, N, opts, backend=backend, threads=threads)
    verdicts, erg = verdicts_from_stats(stats, opts)
    w = _weights(pi, th, rr, times, cell)
    w = np.where(np.isfinite(w), w, 0.0)
    total = TOTAL_VOLUME.get(space, 1.0)
    n = th.size
    tags = np.empty(n, dtype=object)
    for i in range(n):
        c = class_of(verdicts[i], int(stats[i, S_P]) if math.isfinite(stats[i, S_P]) else 0,
                     int(stats[i, S_Q]) if math.isfinite(stats[i, S_Q]) else 0, space)
        tags[i] = None if c is None or (ergodic_only and not erg[i]) else str(c)
    classes = {}

    def add(key, mask):
        contrib = np.where(mask, w, 0.0)
        absolute = float(contrib.sum())
        se = float(math.sqrt(n) * contrib.std())
        classes[key] = {"fraction": absolute / total, "absolute": absolute, "stderr": se,
                        "fraction_stderr": se / total, "orbits": int(mask.sum())}

    for key in sorted({t for t in tags if t is not None}):
        add(key, tags == key)
    knotted = np.array([t is not None and t.startswith("torus-knot") for t in tags])
    add("__knotted__", knotted)
    if not knotted.any():
        classes["__knotted__"]["stderr"] = 0.0
    frac_sum = sum(v["fraction"] for k, v in classes.items() if not k.startswith("__"))
    vm = {v: float(w[verdicts == v].sum()) for v in VERDICTS}
    counts = {v: int((verdicts == v).sum()) for v in VERDICTS}
    est = KappaEstimate(space, total, classes, max(0.0, 1.0 - frac_sum), {**grid.to_json(), "a": a, "b": b, "N": N},
                        int(seed), counts, vm, n)
    if stderr_target is not None:
        worst = max((v["fraction_stderr"] for v in classes.values()), default=0.0)
        if worst > stderr_target:
            warnings.warn(f"grid too coarse: standard error {worst:.3g} exceeds {stderr_target:.3g}",
                          PrecisionWarning, stacklevel=2)
    if return_orbits:
        return est, {"theta": th, "rho": rr, "verdicts": verdicts, "tags": tags, "weights": w, "stats": stats}
    return est


# -- KAM probe ----------------------------------------------------------------------------------------

@dataclass
class StabilityReport:
    point: tuple
    radii: list
    fractions: list
    verdict: str
    flags: list = field(default_factory=list)

    def to_json(self):
        return {"point": list(self.point), "annuli": self.radii, "fractions": self.fractions,
                "verdict": self.verdict, "flags": self.flags}


def stability_probe(pi, orbit, fpc=None, eps0=0.02, J=4, n_radii=6, n_angles=4, N=2000, min_fraction=0.5,
                    opts=DEFAULT_OPTIONS, backend=None):
    """Fraction of invariant curves of ``Pi^q`` in dyadic annuli around an elliptic point.

    Orbits are expressed in polar coordinates of the linearizing frame; an
    orbit counts as an invariant curve when its angular rotation number
    converges and its radius is a smooth graph over the angle.
    """
    flags = []
    if fpc is not None and fpc.verdict != "elliptic-nondegenerate":
        flags.append(f"precondition: verdict is {fpc.verdict}")
    B, _ = linearizing_frame(pi, orbit)
    radii, fractions = [], []
    ko = opts.kernel_opts()
    for j in range(J + 1):
        hi = eps0 * 2.0 ** (-j)
        lo = 0.5 * hi
        rs = lo + (np.arange(n_radii) + 0.5) / n_radii * (hi - lo)
        ang = (np.arange(n_angles) + 0.25) / n_angles * TWO_PI
        R, A = np.meshgrid(rs, ang, indexing="ij")
        seeds = np.column_stack([(R * np.cos(A)).ravel(), (R * np.sin(A)).ravel()])
        with np.errstate(all="ignore"):
            X, counts = local_orbits(pi, orbit, B, seeds, N, backend)
        m = seeds.shape[0]
        good = np.zeros(m, dtype=bool)
        phi = np.unwrap(np.arctan2(X[..., 1], X[..., 0]), axis=1)
        rad = np.hypot(X[..., 0], X[..., 1])
        ok = (counts >= N) & np.all(np.isfinite(rad), axis=1) & (np.nanmax(rad, axis=1) < 4.0 * eps0)
        if ok.any():
            idx = np.nonzero(ok)[0]
            st = kernels.orbit_stats(phi[idx], rad[idx], np.full(idx.size, N), N, np.ones(idx.size), ko, backend)
            conf = np.abs(st[:, S_ROT] - st[:, S_ROT_HALF])
            rmean = rad[idx].mean(axis=1)
            good[idx] = (conf < opts.tol_rot) & (st[:, S_FIT] < opts.tol_fit * rmean)
        radii.append([float(lo), float(hi)])
        fractions.append(float(good.mean()))
    run = best = 0
    for f in fractions:
        run = run + 1 if f >= min_fraction else 0
        best = max(best, run)
    verdict = "KAM-stable-evidence" if best >= 3 and not flags else "inconclusive"
    if best < 3:
        flags.append("invariant-curve fractions not bounded below across 3 consecutive annuli")
    return StabilityReport((float(orbit.theta[0]), float(orbit.rho[0])), radii, fractions, verdict, flags)


# -- transport invariance ---------------------------------------------------------------------------------

@dataclass
class TransportReport:
    before: KappaEstimate
    after: KappaEstimate
    rows: list
    agree: bool
    diagnosis: str = ""

    def to_json(self):
        return {"before": self.before.to_json(), "after": self.after.to_json(), "rows": self.rows,
                "agree": self.agree, "diagnosis": self.diagnosis}


def compare_estimates(k1, k2, nsigma=2.0):
    keys = sorted({k for k in k1.classes if not k.startswith("__")} | {k for k in k2.classes if not k.startswith("__")})
    rows = []
    agree = True
    for k in keys:
        f1, f2 = k1.fraction(k), k2.fraction(k)
        s1 = k1.classes.get(k, {}).get("fraction_stderr", 0.0)
        s2 = k2.classes.get(k, {}).get("fraction_stderr", 0.0)
        bound = nsigma * math.hypot(s1, s2)
        ok = abs(f1 - f2) <= bound or abs(f1 - f2) < 1e-12
        agree &= ok
        rows.append({"tag": k, "before": f1, "after": f2, "difference": abs(f1 - f2), "bound": bound, "agree": ok})
    return rows, agree


def transport_invariance_check(field, phi, grid=None, N=2000, section=None, seed=0, opts=DEFAULT_OPTIONS,
                               tol=1e-10, backend=None, threads=None):
    """Estimate the spectrum before and after a volume-preserving pushforward."""
    from .errors import SectionError
    from .steady import pushforward_field
    section = section or SectionSpec("theta2" if field.space == "s3" else "y")
    grid = grid or GridSpec(24, 24)
    moved = pushforward_field(field, phi)
    m1 = NumericReturnMap(field, section, grid.a, grid.b, tol, backend)
    try:
        m2 = NumericReturnMap(moved, section, grid.a, grid.b, tol, backend)
    except SectionError as exc:
        raise SectionError("pushforward lost transversality to the section", diagnosis=str(exc)) from exc
    k1 = kappa_estimate(m1, grid, N, seed, opts, backend=backend, threads=threads)
    if moved is field:
        k2 = k1
    else:
        k2 = kappa_estimate(m2, grid, N, seed, opts, backend=backend, threads=threads)
    rows, agree = compare_estimates(k1, k2)
    return TransportReport(k1, k2, rows, agree)


__all__ = ["ClassifierOptions", "DEFAULT_OPTIONS", "OrbitClass", "IsotopyClass", "KappaEstimate", "GridSpec",
           "StabilityReport", "TransportReport", "UNKNOT", "T3_HORIZONTAL", "OTHER", "classify_orbit",
           "classify_orbits", "orbit_statistics", "verdicts_from_stats", "torus_knot", "knot_class", "class_of",
           "grid_points", "kappa_estimate", "stability_probe", "compare_estimates", "transport_invariance_check",
           "INVARIANT_CURVE", "ISLAND_CHAIN", "CHAOTIC", "ESCAPED", "UNDECIDED"]
