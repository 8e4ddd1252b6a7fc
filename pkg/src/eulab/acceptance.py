"""Acceptance suite: ten end-to-end checks with their tolerances and time budgets.

Each ``criterion_N`` returns a :class:`CriterionResult` holding the measured
quantities, so callers (the ``verify`` subcommand, the test-suite) can both
print a PASS/FAIL line and inspect the numbers.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import NumericReturnMap, SectionSpec, analytic_return_map, trace
from .errors import NoResonanceError
from .geometry import TOTAL_VOLUME, TWO_PI, VolumePreservingDiffeo
from .io import dumps
from .kam import DEFAULT_OPTIONS, GridSpec, kappa_estimate, stability_probe, transport_invariance_check
from .kernels.ode import field_eval_np
from .profiles import Profile
from .steady import (ChartField, ShearProfileS3, ShearProfileT3, bernoulli, bernoulli_identity_residual,
                     check_nondegenerate_s3, curl, curl_dual_form, divergence, random_chart_points)
from .suspension import suspend, verify_suspension
from .twistmaps import (CallableMap, GeneratingPerturbation, area_residual, classify, find_periodic,
                        find_resonance, intersection_check, perturb, rotation_number)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    seconds: float
    budget: float
    values: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        extra = "" if self.passed else " | " + "; ".join(self.failures)
        return f"[{tag}] criterion {self.number}: {self.title} ({self.seconds:.1f} s / budget {self.budget:.0f} s){extra}"

    def to_json(self):
        return {"number": self.number, "title": self.title, "passed": self.passed, "seconds": self.seconds,
                "budget": self.budget, "values": self.values, "failures": self.failures}


class _Check:
    def __init__(self, number, title, budget):
        self.number, self.title, self.budget = number, title, budget
        self.values, self.failures = {}, []
        self.t0 = time.perf_counter()

    def record(self, name, value):
        self.values[name] = value
        return value

    def expect(self, ok, message):
        if not ok:
            self.failures.append(message)

    def done(self):
        dt = time.perf_counter() - self.t0
        self.expect(dt < self.budget, f"runtime {dt:.1f} s over budget")
        return CriterionResult(self.number, self.title, not self.failures, dt, self.budget, self.values,
                               self.failures)


def example_profile():
    return ShearProfileS3(Profile.poly([1.0, 1.0]), Profile.constant(0.0))


def example_t3_profile():
    return ShearProfileT3(Profile.trig(a=(2.0,)), Profile.trig(b=(1.0,)))


def example_map():
    return analytic_return_map(example_profile())


def default_perturbed(eps=1e-3, q=5, c=None):
    T = example_map()
    if c is None:
        c = find_resonance(T, 2, 5)[0][0]
    return T, perturb(T, GeneratingPerturbation(eps, q, c))


# -- 1 ----------------------------------------------------------------------------------------

def criterion_1():
    ck = _Check(1, "example flow: curl, Bernoulli, twist certificate", 1.0)
    xs = np.linspace(0.0, 1.0, 1001)
    for label, prof, tol in (("closed", example_profile(), 1e-9),
                             ("spline", ShearProfileS3(Profile.spline(np.linspace(0, 1, 41), 1 + np.linspace(0, 1, 41)),
                                                       Profile.constant(0.0)), 1e-6)):
        w = curl(prof)
        B = bernoulli(prof)
        ef = ck.record(f"{label}_f_err", float(np.max(np.abs(w.f(xs) + 4 * xs))))
        eg = ck.record(f"{label}_g_err", float(np.max(np.abs(w.g(xs) - (2 + 4 * xs)))))
        eb = ck.record(f"{label}_B_err", float(np.max(np.abs(B(xs) - (xs + 0.5 * xs ** 2)))))
        B1 = ck.record(f"{label}_B1", float(B(1.0)))
        tw = ck.record(f"{label}_twist_err", float(np.max(np.abs(np.abs(w.twist(xs)) - 8.0))))
        ck.expect(max(ef, eg) < tol, f"{label} curl error {max(ef, eg):.2e}")
        ck.expect(eb < tol and abs(B1 - 1.5) < tol, f"{label} Bernoulli error {eb:.2e}")
        ck.expect(tw < tol, f"{label} twist error {tw:.2e}")
    rep = check_nondegenerate_s3(example_profile())
    ck.record("tau", rep.tau)
    ck.record("nondegenerate", rep.nondegenerate)
    ck.expect(rep.tau >= 7.9 and rep.nondegenerate, f"tau {rep.tau}")
    return ck.done()


# -- 2 ----------------------------------------------------------------------------------------

def criterion_2():
    ck = _Check(2, "Hopf eigenfields and dual-form curl", 1.0)
    xs = np.linspace(0.01, 0.99, 99)
    w1 = curl(ShearProfileS3(Profile.constant(1.0), Profile.constant(0.0)))
    w2 = curl(ShearProfileS3(Profile.constant(0.0), Profile.constant(1.0)))
    e1 = ck.record("u1_err", float(max(np.max(np.abs(w1.A1(xs) + 2)), np.max(np.abs(w1.A2(xs))))))
    e2 = ck.record("u2_err", float(max(np.max(np.abs(w2.A1(xs))), np.max(np.abs(w2.A2(xs) - 2)))))
    ck.expect(e1 < 1e-12 and e2 < 1e-12, "eigenfield identities")
    f, g = curl_dual_form(example_profile(), xs)
    ed = ck.record("dual_form_err", float(max(np.max(np.abs(f + 4 * xs)), np.max(np.abs(g - 2 - 4 * xs)))))
    ck.expect(ed < 1e-10, f"dual form disagrees by {ed:.2e}")
    return ck.done()


# -- 3 ----------------------------------------------------------------------------------------

def criterion_3(seed=0):
    ck = _Check(3, "Bernoulli identity u x rot u = grad B", 5.0)
    rng = np.random.default_rng(seed)
    r3 = ck.record("s3_residual", bernoulli_identity_residual(example_profile(),
                                                              random_chart_points("s3", 1000, rng, 1e-3, 1 - 1e-3)))
    rt = ck.record("t3_residual", bernoulli_identity_residual(example_t3_profile(),
                                                              random_chart_points("t3", 1000, rng)))
    ck.expect(r3 < 1e-8, f"S3 residual {r3:.2e}")
    ck.expect(rt < 1e-8, f"T3 residual {rt:.2e}")
    return ck.done()


# -- 4 ----------------------------------------------------------------------------------------

def criterion_4(seed=0, threads=None):
    ck = _Check(4, "numeric vs analytic return map", 60.0)
    prof = example_profile()
    T = analytic_return_map(prof)
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, TWO_PI, 1000)
    rr = rng.uniform(1e-3, 1 - 1e-3, 1000)
    N = NumericReturnMap(ChartField(prof), SectionSpec("theta2"), tol=1e-10)
    t1, r1, st = N.step(th, rr)
    t0, r0 = T(th, rr)
    err = ck.record("sup_error", float(np.max(np.hypot(t1 - t0, r1 - r0))))
    ck.record("failed", int(np.sum(st != 0)))
    ck.expect(np.all(st == 0), "some returns failed")
    ck.expect(err < 1e-7, f"sup error {err:.2e}")
    return ck.done()


# -- 5 ----------------------------------------------------------------------------------------

def criterion_5():
    ck = _Check(5, "resonance location", 1.0)
    T = example_map()
    c12 = ck.record("c_1_2", find_resonance(T, 1, 2)[0][0])
    c25 = ck.record("c_2_5", find_resonance(T, 2, 5)[0][0])
    ck.expect(abs(c12 - 0.5) < 1e-10, f"c(1/2) = {c12!r}")
    ck.expect(abs(c25 - 1.0 / 3.0) < 1e-10, f"c(2/5) = {c25!r}")
    try:
        find_resonance(T, 3, 4)
        ck.expect(False, "3/4 should have no resonance")
        ck.record("no_resonance_3_4", False)
    except NoResonanceError:
        ck.record("no_resonance_3_4", True)
    return ck.done()


# -- 6 ----------------------------------------------------------------------------------------

def criterion_6():
    ck = _Check(6, "elliptic periodic point, Birkhoff constant, KAM probe", 600.0)
    T, P = default_perturbed()
    orbs = find_periodic(P, 5, P.pert.c, 64)
    classes = [classify(P, o) for o in orbs]
    ck.record("orbits", len(orbs))
    ell = [(o, f) for o, f in zip(orbs, classes) if f.verdict == "elliptic-nondegenerate"]
    ck.expect(bool(ell), "no elliptic-nondegenerate orbit: " + ",".join(f.verdict for f in classes))
    if not ell:
        return ck.done()
    o, f = ell[0]
    ck.record("residual", o.residual)
    ck.record("period", o.q)
    ck.record("p", o.p)
    ck.record("fixed_point", f.to_json())
    ck.expect(o.q == 5 and o.residual < 1e-9, f"orbit residual {o.residual:.2e}")
    ck.expect(not any(f.resonance), "resonance flag set")
    ck.expect(math.isfinite(f.alpha) and abs(f.alpha) > 3 * f.alpha_sigma, f"alpha {f.alpha} +- {f.alpha_sigma}")
    rep = stability_probe(P, o, f)
    ck.record("probe", rep.to_json())
    ck.expect(rep.verdict == "KAM-stable-evidence", f"probe verdict {rep.verdict}")
    return ck.done()


# -- 7 ----------------------------------------------------------------------------------------

def criterion_7(n=200, N=10_000, seed=0, threads=None):
    ck = _Check(7, "knotted kappa: lambda > 0 and kappa0 bound", 1800.0)
    T, P = default_perturbed()
    # the estimator runs on the section map of the suspended field; tie the two together first
    w_hat = suspend(P, ChartField(example_profile()))
    rep = verify_suspension(w_hat, P, (8, 8), 1e-10, threads=threads)
    ck.record("suspension_sup", rep.sup)
    ck.expect(rep.sup < 5e-6, f"suspension residual {rep.sup:.2e}")
    est, orb = kappa_estimate(P, GridSpec(n, n), N, seed, threads=threads, return_orbits=True)
    lam = ck.record("lambda", est.lam)
    se = ck.record("lambda_stderr", est.lam_stderr)
    tag = "torus-knot(2,5)"
    k25 = ck.record("kappa_2_5", est.absolute(tag))
    n_island = ck.record("island_orbits", int(sum(1 for t in orb["tags"] if t == tag)))
    k0 = ck.record("kappa0", est.absolute("unknot"))
    total = TOTAL_VOLUME["s3"]
    ck.expect(lam > 0 and k25 == lam, f"lambda {lam}")
    ck.expect(n_island >= 10, f"only {n_island} island orbits")
    ck.expect(se < lam / 3, f"stderr {se:.3g} not below lambda/3")
    ck.expect(k0 <= total - lam, f"kappa0 {k0} above {total - lam}")
    ck.record("verdict_counts", est.counts)
    base = kappa_estimate(T, GridSpec(n, n), N, seed, threads=threads)
    f0 = ck.record("integrable_kappa0_fraction", base.fraction("unknot"))
    ck.expect(abs(f0 - 1.0) <= 0.02, f"integrable kappa0 fraction {f0}")
    return ck.done()


# -- 8 ----------------------------------------------------------------------------------------

def criterion_8(seed=0, threads=None):
    ck = _Check(8, "suspension recovery", 600.0)
    T = example_map()
    c = find_resonance(T, 2, 5)[0][0]
    w = ChartField(example_profile())
    sups = {}
    for eps in (1e-4, 1e-3, 1e-2):
        P = perturb(T, GeneratingPerturbation(eps, 5, c))
        w_hat = suspend(P, w)
        rep = verify_suspension(w_hat, P, (64, 64), 1e-10, threads=threads)
        sups[eps] = rep.sup
        ck.record(f"sup_{eps:g}", rep.sup)
        ck.record(f"flagged_{eps:g}", rep.flagged)
    ck.expect(sups[1e-3] < 5e-6, f"sup residual {sups[1e-3]:.2e} at eps 1e-3")
    # at most linear growth (factor 2 slack for integrator noise)
    for lo, hi in ((1e-4, 1e-3), (1e-3, 1e-2)):
        ratio = sups[hi] / max(sups[lo], 1e-300)
        ck.record(f"growth_{lo:g}_{hi:g}", ratio)
        ck.expect(ratio <= 2.0 * hi / lo, f"residual grows faster than linearly ({ratio:.3g})")
    P = perturb(T, GeneratingPerturbation(1e-3, 5, c))
    w_hat = suspend(P, w)
    rng = np.random.default_rng(seed)
    pts = random_chart_points("s3", 2000, rng, c - 0.12, c + 0.12)
    div = ck.record("divergence_sup", float(np.max(np.abs(divergence(w_hat, pts)))))
    ck.expect(div < 1e-12, f"divergence {div:.2e}")
    # outside the support in time or radius the two fields coincide bit for bit
    out = random_chart_points("s3", 4000, rng)
    tau = out[:, 1]
    r = out[:, 2]
    outside = (tau <= 0.5 * math.pi) | (tau >= 1.5 * math.pi) | (np.abs(r - c) >= P.pert.radius)
    d1 = field_eval_np(w_hat.descriptor(), out[outside])
    d0 = field_eval_np(w.descriptor(), out[outside])
    same = ck.record("identical_outside_support", bool(np.array_equal(d1, d0)))
    ck.record("outside_points", int(outside.sum()))
    ck.expect(same, "suspended field differs from w outside the support")
    return ck.done()


# -- 9 ----------------------------------------------------------------------------------------

def criterion_9(seed=0, threads=None, s3_grid=24, t3_grid=16, N=2000):
    ck = _Check(9, "transport invariance of kappa", 1800.0)
    T, P = default_perturbed()
    w_hat = suspend(P, ChartField(example_profile()))
    rep = transport_invariance_check(w_hat, VolumePreservingDiffeo.s3_rotation(0.5, "u1"),
                                     GridSpec(s3_grid, s3_grid, 0.2, 0.5), N, seed=seed, threads=threads)
    ck.record("s3_rows", rep.rows)
    ck.expect(rep.agree, "S3 estimates disagree")
    ck.record("s3_island_orbits", rep.before.counts.get("island-chain", 0))
    wt = ChartField(example_t3_profile())
    phi = VolumePreservingDiffeo.t3_shear("0.3*sin(z)", "0.2*cos(z)")
    rep_t = transport_invariance_check(wt, phi, GridSpec(t3_grid, t3_grid, 0.3, math.pi - 0.3), N, SectionSpec("y"),
                                       seed=seed, threads=threads)
    ck.record("t3_rows", rep_t.rows)
    ck.expect(rep_t.agree, "T3 estimates disagree")
    return ck.done()


# -- 10 ---------------------------------------------------------------------------------------

def criterion_10(seed=0):
    ck = _Check(10, "property suites", 600.0)
    rng = np.random.default_rng(seed)
    T, P = default_perturbed()
    c = P.pert.c
    th = rng.uniform(0, TWO_PI, 32)
    rr = rng.uniform(c - 0.15, c + 0.15, 32)
    a_map = ck.record("area_residual_map", area_residual(P, th, rr))
    ck.expect(a_map < 1e-8, f"area residual {a_map:.2e}")
    N = NumericReturnMap(ChartField(example_profile()), tol=1e-10)
    a_num = ck.record("area_residual_numeric", area_residual(N, th[:8], rr[:8]))
    ck.expect(a_num < 1e-6, f"numeric area residual {a_num:.2e}")
    inter = intersection_check(P, np.linspace(c - 0.15, c + 0.15, 31))
    ck.record("intersection_ok", bool(np.all(inter)))
    ck.expect(bool(np.all(inter)), "intersection property violated")
    worst = 0.0
    for r in np.linspace(0.1, 0.9, 9):
        for q in (2, 3, 5):
            Tq = CallableMap(lambda t, x, q=q: T.power(t, x, q), T.a, T.b)
            r1 = rotation_number(T, (0.0, r), 10_000).value
            rq = rotation_number(Tq, (0.0, r), 10_000).value
            d = abs((q * r1 - rq + 0.5) % 1.0 - 0.5)
            worst = max(worst, d)
    ck.record("rotation_scaling_err", worst)
    ck.expect(worst < 1e-8, f"rotation-number q-scaling {worst:.2e}")
    drift = 0.0
    for prof, p0 in ((example_profile(), (0.0, 0.0, 0.25)), (example_t3_profile(), (0.0, 0.0, 1.0))):
        tr = trace(ChartField(prof), p0, 10.0, tol=1e-10)
        drift = max(drift, float(np.max(np.abs(tr.y[:, 2] - p0[2]))))
    ck.record("first_integral_drift", drift)
    ck.expect(drift < 10 * 1e-10 * 10.0, f"first-integral drift {drift:.2e}")
    outs = []
    for th_n in (1, 3):
        est = kappa_estimate(P, GridSpec(12, 12, c - 0.12, c + 0.12), 2000, seed, threads=th_n)
        outs.append(dumps(est.to_json()))
    same_map = outs[0] == outs[1]
    fd = ChartField(example_profile()).descriptor(1)
    odes = [kernels.ode_returns(fd, 1, 1, 0.0, th, rr, 1e-10, 1e-4, 1e-6, 1 - 1e-6, 50.0, None, k)
            for k in (1, 3)]
    same_ode = all(np.array_equal(a, b) for a, b in zip(odes[0], odes[1]))
    ck.record("deterministic_threads", bool(same_map and same_ode))
    ck.expect(same_map and same_ode, "results depend on the thread count")
    return ck.done()


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5, 6: criterion_6,
            7: criterion_7, 8: criterion_8, 9: criterion_9, 10: criterion_10}


def run(numbers=None, threads=None, echo=None):
    """Run the selected criteria in order; ``echo`` receives each PASS/FAIL line."""
    out = []
    for n in sorted(numbers or CRITERIA):
        fn = CRITERIA[n]
        kw = {"threads": threads} if "threads" in fn.__code__.co_varnames else {}
        res = fn(**kw)
        if echo is not None:
            echo(res.line)
        out.append(res)
    return out


__all__ = ["CriterionResult", "CRITERIA", "run", "example_profile", "example_t3_profile", "example_map",
           "default_perturbed"] + [f"criterion_{i}" for i in range(1, 11)]
