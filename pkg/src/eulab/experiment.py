"""Config-driven experiment steps shared by the CLI and the acceptance suite.

Each ``run_*`` function returns plain data (a report dict, or columns and
rows for tables).  Nothing here writes files or reads the clock, so outputs
depend only on ``(config, seed)``.
"""
from __future__ import annotations

import math

import numpy as np

from .dynamics import NumericReturnMap, SectionSpec, analytic_return_map, section_orbits
from .errors import NotFoundError, ValidationError
from .geometry import DELTA_CHART, TOTAL_VOLUME, TWO_PI, VolumePreservingDiffeo
from .kam import (DEFAULT_OPTIONS, ClassifierOptions, GridSpec, kappa_estimate, stability_probe,
                  transport_invariance_check)
from .steady import (bernoulli, bernoulli_identity_residual, check_nondegenerate, curl, divergence,
                     profile_from_json, random_chart_points, vorticity_field)
from .suspension import suspend, verify_suspension
from .twistmaps import (GeneratingPerturbation, area_residual, classify, find_periodic, find_resonance,
                        intersection_check, perturb, rotation_number)


class Experiment:
    """Objects derived from one :class:`~eulab.config.ExperimentConfig`."""

    def __init__(self, cfg, seed=None, threads=None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else int(seed)
        self.threads = threads
        self.tol = cfg.tolerances
        self.profile = profile_from_json(cfg.raw["profile"])
        self.space = cfg.space
        sec = cfg.block("section")
        default_angle = "theta2" if self.space == "s3" else "y"
        self.section = SectionSpec(sec.get("angle", default_angle), float(sec.get("value", 0.0)), sec.get("direction"))
        full = (DELTA_CHART, 1.0 - DELTA_CHART) if self.space == "s3" else (0.0, TWO_PI)
        self.a, self.b = cfg.annulus(full)
        self.opts = ClassifierOptions(tol_rot=self.tol["tol_rot"], tol_fit=self.tol["tol_fit"],
                                      tol_chaos=self.tol["tol_chaos"])
        self._cache = {}

    # -- building blocks ------------------------------------------------------------------
    @property
    def field(self):
        return vorticity_field(self.profile)

    @property
    def base_map(self):
        if "base" not in self._cache:
            self._cache["base"] = analytic_return_map(self.profile, self.a, self.b, self.section)
        return self._cache["base"]

    def resonances(self):
        if self.cfg.resonance is None:
            raise ValidationError("config has no resonance block")
        p, q = self.cfg.resonance
        return find_resonance(self.base_map, p, q)

    @property
    def resonant_radius(self):
        if "c" not in self._cache:
            self._cache["c"] = self.resonances()[0]
        return self._cache["c"]

    @property
    def perturbation(self):
        blk = self.cfg.block("perturbation")
        q = self.cfg.resonance[1]
        c, _ = self.resonant_radius
        return GeneratingPerturbation(float(blk.get("eps", 0.0)), q, c, float(blk.get("bump_radius", 0.1)),
                                      float(blk.get("phi0", 0.0)), tol=min(self.tol["newton"], 1e-13))

    @property
    def perturbed_map(self):
        if "pmap" not in self._cache:
            self._cache["pmap"] = perturb(self.base_map, self.perturbation)
        return self._cache["pmap"]

    @property
    def is_perturbed(self):
        return self.cfg.resonance is not None and self.cfg.eps > 0.0

    @property
    def section_map(self):
        """Return map of the experiment field: perturbed when configured, else analytic."""
        return self.perturbed_map if self.is_perturbed else self.base_map

    @property
    def experiment_field(self):
        """Suspended field when a perturbation is configured, else the plain vorticity."""
        if "field" not in self._cache:
            self._cache["field"] = suspend(self.perturbed_map, self.field) if self.is_perturbed else self.field
        return self._cache["field"]

    def grid(self, block=None):
        g = dict(self.cfg.block("grid") if block is None else block)
        return GridSpec(int(g.get("n_theta", 64)), int(g.get("n_rho", 64)), g.get("a"), g.get("b"),
                        bool(g.get("jitter", True))), int(g.get("N", 10_000))

    def rng(self, stream):
        return np.random.Generator(np.random.Philox(key=np.array([self.seed, stream], dtype=np.uint64)))


# -- subcommands ------------------------------------------------------------------------------------

def run_flow(ex, n_points=1000):
    prof = ex.profile
    w = curl(prof)
    B = bernoulli(prof)
    lo, hi = (ex.a, ex.b)
    xs = np.linspace(lo, hi, 11)
    pts = random_chart_points(ex.space, n_points, ex.rng(1), lo, hi)
    report = check_nondegenerate(prof)
    if ex.space == "s3":
        samples = {"rho": xs, "f": w.f(xs), "g": w.g(xs), "A1": w.A1(xs), "A2": w.A2(xs), "bernoulli": B(xs)}
    else:
        samples = {"z": xs, "wx": w.wx(xs), "wy": w.wy(xs), "bernoulli": B(xs)}
    div = float(np.max(np.abs(divergence(ex.field, pts[:64]))))
    return {"profile": prof.to_json(), "space": ex.space, "annulus": [lo, hi], "samples": samples,
            "nondegeneracy": report.to_json(),
            "bernoulli_identity_residual": bernoulli_identity_residual(prof, pts),
            "divergence_sup": div}


POINCARE_COLUMNS = ("seed_id", "iter", "theta1_unreduced", "rho", "transit_time")
ROTNUM_COLUMNS = ("rho", "rotation_number", "confidence")


def _radii(ex, n):
    return ex.a + (np.arange(n) + 0.5) / n * (ex.b - ex.a)


def run_poincare(ex):
    blk = ex.cfg.block("poincare")
    n, it = int(blk.get("n_seeds", 16)), int(blk.get("n_iter", 200))
    rr = _radii(ex, n)
    th = ex.rng(2).uniform(0.0, TWO_PI, n)
    orb = section_orbits(ex.experiment_field, ex.section, th, rr, it, ex.tol["integrator"], ex.a, ex.b,
                         threads=ex.threads)
    rows = []
    for j in range(n):
        for k in range(int(orb.counts[j]) + 1):
            rows.append((j, k, float(orb.theta[j, k]), float(orb.rho[j, k]), float(orb.time[j, k])))
    status = [int(s) for s in orb.status]
    return POINCARE_COLUMNS, rows, {"status": status}


def run_rotnum(ex):
    blk = ex.cfg.block("rotnum")
    n, N = int(blk.get("n_rho", 64)), int(blk.get("N", 10_000))
    src = blk.get("source", "map")
    pi = ex.section_map if src == "map" else NumericReturnMap(ex.experiment_field, ex.section, ex.a, ex.b,
                                                               ex.tol["integrator"])
    rows = []
    for r in _radii(ex, n):
        rn = rotation_number(pi, (0.0, float(r)), N)
        rows.append((float(r), float(rn.value), float(rn.confidence)))
    return ROTNUM_COLUMNS, rows


def run_resonance(ex):
    p, q = ex.cfg.resonance
    roots = ex.resonances()
    W = ex.base_map.winding(np.array([c for c, _ in roots]))
    return {"p": p, "q": q, "roots": [{"c": c, "p_signed": ps, "winding": float(w),
                                       "residual": abs(float(w) - TWO_PI * ps / q)}
                                      for (c, ps), w in zip(roots, W)]}


def _periodic(ex):
    if "periodic" not in ex._cache:
        blk = ex.cfg.block("periodic")
        P = ex.perturbed_map
        c, ps = ex.resonant_radius
        q = ex.cfg.resonance[1]
        orbs = find_periodic(P, q, c, int(blk.get("n_seeds", 64)), p=ps, window=float(blk.get("window", 0.05)),
                             tol=ex.tol["newton"])
        classes = [classify(P, o, res_tol=ex.tol["resonance"], parabolic_tol=ex.tol["parabolic"]) for o in orbs]
        ex._cache["periodic"] = (orbs, classes)
    return ex._cache["periodic"]


def _orbit_json(o, fc):
    return {"q": o.q, "p": o.p, "theta": o.theta, "rho": o.rho, "residual": o.residual, "class": fc.to_json()}


def run_perturb(ex):
    P = ex.perturbed_map
    c, ps = ex.resonant_radius
    orbs, classes = _periodic(ex)
    rng = ex.rng(3)
    th = rng.uniform(0, TWO_PI, 16)
    rr = rng.uniform(max(ex.a, c - 0.15), min(ex.b, c + 0.15), 16)
    circles = np.linspace(max(ex.a, c - 0.12), min(ex.b, c + 0.12), 9)
    return {"resonance": {"c": c, "p": ps, "q": ex.cfg.resonance[1]},
            "perturbation": {"eps": P.pert.eps, "q": P.pert.q, "c": P.pert.c, "bump_radius": P.pert.radius,
                             "phi0": P.pert.phi0, "contraction_factor": P.contraction_factor()},
            "orbits": [_orbit_json(o, f) for o, f in zip(orbs, classes)],
            "area_residual": area_residual(P, th, rr),
            "intersection_property": bool(np.all(intersection_check(P, circles)))}


def run_suspend(ex):
    blk = ex.cfg.block("suspension")
    grid = tuple(blk.get("grid", (64, 64)))
    w_hat = ex.experiment_field
    rep = verify_suspension(w_hat, ex.section_map, grid, ex.tol["integrator"], threads=ex.threads)
    return {"field": w_hat.to_json() if hasattr(w_hat, "to_json") else None, "verification": rep.to_json(),
            "integrator_tol": ex.tol["integrator"]}


def _kappa(ex, pi, grid, N):
    return kappa_estimate(pi, grid, N, ex.seed, ex.opts, threads=ex.threads)


def run_kappa(ex):
    grid, N = ex.grid()
    est = _kappa(ex, ex.section_map, grid, N)
    out = {"kappa": est.to_json(), "map": "perturbed" if ex.is_perturbed else "analytic"}
    tr = ex.cfg.block("transport")
    if tr:
        out["transport"] = run_transport(ex, tr)
    return out


def diffeo_from_config(tr, space):
    kind = tr["kind"]
    if kind == "identity":
        return VolumePreservingDiffeo.identity(space)
    if kind == "s3-rotation":
        return VolumePreservingDiffeo.s3_rotation(float(tr.get("t", 0.0)), tr.get("along", "u1"))
    return VolumePreservingDiffeo.t3_shear(tr.get("a", "0"), tr.get("b", "0"))


def run_transport(ex, tr):
    phi = diffeo_from_config(tr, ex.space)
    grid, N = ex.grid(tr.get("grid", {"n_theta": 24, "n_rho": 24, "N": 2000}))
    if grid.a is None:
        grid.a, grid.b = ex.a, ex.b
    rep = transport_invariance_check(ex.experiment_field, phi, grid, N, ex.section, ex.seed, ex.opts,
                                     ex.tol["integrator"], threads=ex.threads)
    return {"diffeo": repr(phi), **rep.to_json()}


def run_nonmixing(ex):
    if not ex.is_perturbed:
        raise ValidationError("nonmixing needs a resonance and a positive eps")
    c, ps = ex.resonant_radius
    q = ex.cfg.resonance[1]
    orbs, classes = _periodic(ex)
    ell = [(o, f) for o, f in zip(orbs, classes) if f.verdict == "elliptic-nondegenerate"]
    if not ell:
        raise NotFoundError("no elliptic-nondegenerate periodic orbit near the resonant circle",
                            verdicts=[f.verdict for f in classes])
    orbit, fpc = ell[0]
    pb = ex.cfg.block("probe")
    probe = stability_probe(ex.perturbed_map, orbit, fpc, float(pb.get("eps0", 0.02)), int(pb.get("J", 4)),
                            int(pb.get("n_radii", 6)), int(pb.get("n_angles", 4)), int(pb.get("N", 2000)),
                            opts=ex.opts)
    sus = run_suspend(ex)
    grid, N = ex.grid()
    before = _kappa(ex, ex.base_map, grid, N)
    after = _kappa(ex, ex.perturbed_map, grid, N)
    total = TOTAL_VOLUME[ex.space]
    lam = after.lam
    k0 = after.absolute("unknot")
    classes_rows = []
    for tag in sorted({k for k in before.classes if not k.startswith("__")} |
                      {k for k in after.classes if not k.startswith("__")}):
        classes_rows.append({"tag": tag, "before": before.absolute(tag), "after": after.absolute(tag),
                             "before_fraction": before.fraction(tag), "after_fraction": after.fraction(tag),
                             "after_stderr": after.stderr(tag)})
    lam_sum = sum(r["after"] for r in classes_rows if r["tag"].startswith("torus-knot"))
    return {
        "resonance": {"c": c, "p": ps, "q": q},
        "elliptic_point": {"orbit": _orbit_json(orbit, fpc), "certificate": fpc.to_json()},
        "stability_probe": probe.to_json(),
        "suspension": sus["verification"],
        "kappa_before": before.to_json(),
        "kappa_after": after.to_json(),
        "classes": classes_rows,
        "lambda": lam,
        "lambda_stderr": after.lam_stderr,
        "bound": {"kappa0": k0, "total_volume": total, "limit": total - lam, "holds": bool(k0 <= total - lam)},
        "consistent": bool(math.isclose(lam, lam_sum, rel_tol=1e-12, abs_tol=1e-15)),
    }


__all__ = ["Experiment", "run_flow", "run_poincare", "run_rotnum", "run_resonance", "run_perturb", "run_suspend",
           "run_kappa", "run_transport", "run_nonmixing", "diffeo_from_config", "POINCARE_COLUMNS",
           "ROTNUM_COLUMNS", "DEFAULT_OPTIONS"]
