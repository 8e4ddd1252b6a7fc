"""Command-line driver.

Every subcommand reads ``--config``, writes its artifacts into the output
directory (``EULAB_OUT`` overrides ``--out``) and prints one JSON document
on stdout: a summary on success, an error envelope on failure.

Exit status: 0 success, 2 invalid input, 3 numerical failure.

CSV tables
----------
poincare  ``seed_id, iter, theta1_unreduced, rho, transit_time``
rotnum    ``rho, rotation_number, confidence``

The first line of every CSV is a ``#`` comment carrying the config hash.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

from . import experiment as xp
from . import io
from .config import bundled, load
from .errors import EulabError, ValidationError

COMMANDS = ("flow", "poincare", "rotnum", "resonance", "perturb", "suspend", "kappa", "nonmixing", "verify")


def _load_config(path):
    if not os.path.exists(path) and os.sep not in path:
        try:
            return bundled(path)
        except FileNotFoundError:
            pass
    return load(path)


def _table(args, ex, cfg, name, columns, rows, extra=None):
    d = io.out_dir(args.out)
    if args.format == "json":
        payload = {"columns": list(columns), "rows": [list(r) for r in rows]}
        if extra:
            payload.update(extra)
        path = io.write_json(d, f"{name}.json", payload, cfg, ex.seed, name)
    else:
        path = io.write_csv(d, f"{name}.csv", columns, rows, cfg, ex.seed, name)
    return [path], {"rows": len(rows)}


def _report(args, ex, cfg, name, payload, summary):
    path = io.write_json(io.out_dir(args.out), f"{name}.json", payload, cfg, ex.seed, name)
    return [path], summary


def cmd_flow(args, ex, cfg):
    rep = xp.run_flow(ex)
    nd = rep["nondegeneracy"]
    return _report(args, ex, cfg, "flow", rep, {"nondegenerate": nd["nondegenerate"], "tau": nd["tau"],
                                                 "bernoulli_identity_residual": rep["bernoulli_identity_residual"]})


def cmd_poincare(args, ex, cfg):
    cols, rows, extra = xp.run_poincare(ex)
    return _table(args, ex, cfg, "poincare", cols, rows, extra)


def cmd_rotnum(args, ex, cfg):
    cols, rows = xp.run_rotnum(ex)
    return _table(args, ex, cfg, "rotnum", cols, rows)


def cmd_resonance(args, ex, cfg):
    rep = xp.run_resonance(ex)
    return _report(args, ex, cfg, "resonance", rep, {"c": [r["c"] for r in rep["roots"]]})


def cmd_perturb(args, ex, cfg):
    rep = xp.run_perturb(ex)
    return _report(args, ex, cfg, "perturb", rep,
                   {"orbits": len(rep["orbits"]), "verdicts": [o["class"]["verdict"] for o in rep["orbits"]]})


def cmd_suspend(args, ex, cfg):
    rep = xp.run_suspend(ex)
    return _report(args, ex, cfg, "suspend", rep, {"sup": rep["verification"]["sup"]})


def cmd_kappa(args, ex, cfg):
    rep = xp.run_kappa(ex)
    k = rep["kappa"]
    summary = {"fractions": {c["tag"]: c["fraction"] for c in k["classes"]}, "lambda": k["lambda"]}
    if "transport" in rep:
        summary["transport_agree"] = rep["transport"]["agree"]
    return _report(args, ex, cfg, "kappa", rep, summary)


def cmd_nonmixing(args, ex, cfg):
    rep = xp.run_nonmixing(ex)
    return _report(args, ex, cfg, "nonmixing", rep,
                   {"c": rep["resonance"]["c"], "verdict": rep["elliptic_point"]["certificate"]["verdict"],
                    "lambda": rep["lambda"], "bound_holds": rep["bound"]["holds"]})


def cmd_verify(args, ex, cfg):
    from . import acceptance
    d = io.out_dir(args.out)
    problems = io.check_manifest(d, cfg) if os.path.exists(os.path.join(d, io.MANIFEST)) else []
    numbers = None
    if args.criteria:
        try:
            numbers = sorted({int(x) for x in args.criteria.split(",")})
        except ValueError:
            raise ValidationError("--criteria takes comma-separated numbers", value=args.criteria) from None
        bad = [n for n in numbers if n not in acceptance.CRITERIA]
        if bad:
            raise ValidationError("unknown criteria", criteria=bad)
    results = acceptance.run(numbers, threads=args.threads, echo=lambda s: print(s, file=sys.stderr))
    # timings vary run to run, so the written report keeps only outcomes and measured values
    payload = {"criteria": [{k: v for k, v in r.to_json().items() if k != "seconds"} for r in results],
               "hash_problems": problems}
    paths, _ = _report(args, ex, cfg, "verify", payload, {})
    passed = all(r.passed for r in results) and not problems
    summary = {"passed": passed, "results": {str(r.number): r.passed for r in results}, "hash_problems": problems}
    if not passed:
        raise _VerifyFailed(summary, paths)
    return paths, summary


class _VerifyFailed(EulabError):
    code = "acceptance-failed"

    def __init__(self, summary, paths):
        super().__init__("acceptance criteria failed", **summary)
        self.paths = paths


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config (path or bundled name)")
    common.add_argument("--out", default="out", help="output directory (EULAB_OUT overrides)")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: config seed or 0)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    p = argparse.ArgumentParser(prog="eulab", description="Shear Euler flows, twist maps and knotted tori.")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {"flow": "validate a profile and report curl, Bernoulli function and twist",
             "poincare": "dump section orbits of the (suspended) vorticity",
             "rotnum": "rotation-number profile over rho",
             "resonance": "radii of the p/q resonant circle",
             "perturb": "perturb the twist map, find and classify periodic orbits",
             "suspend": "suspend the perturbed map and verify its return map",
             "kappa": "integrability spectrum estimate per isotopy class",
             "nonmixing": "full pipeline report",
             "verify": "run the acceptance suite and check artifact hashes"}
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "verify":
            sp.add_argument("--criteria", default=None, help="comma-separated subset, e.g. 1,2,5")
    return p


def _emit(doc):
    sys.stdout.write(json.dumps(io.jsonable(doc), sort_keys=True) + "\n")
    sys.stdout.flush()


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        _emit(ValidationError("invalid command line").envelope())
        return 2
    if args.seed is not None and args.seed < 0:
        _emit(ValidationError("--seed must be a non-negative integer").envelope())
        return 2
    if args.threads is not None and args.threads < 1:
        _emit(ValidationError("--threads must be positive").envelope())
        return 2
    try:
        cfg = _load_config(args.config)
        ex = xp.Experiment(cfg, args.seed, args.threads)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            paths, summary = HANDLERS[args.command](args, ex, cfg)
        doc = {"command": args.command, "status": "ok", "config_hash": cfg.hash, "seed": ex.seed,
               "artifacts": paths, "summary": summary}
        if caught:
            doc["warnings"] = sorted({str(w.message) for w in caught})
        _emit(doc)
        return 0
    except EulabError as exc:
        _emit(exc.envelope())
        return exc.exit_status
    except Exception as exc:  # noqa: BLE001 - report anything else as a numeric failure with its type
        _emit({"error": {"code": "internal", "message": f"{type(exc).__name__}: {exc}", "details": {}}})
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
