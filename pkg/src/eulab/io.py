"""Deterministic artifact writers.

Every artifact carries the config hash: JSON reports in a ``provenance``
block, CSV tables in a leading ``#`` comment line.  Each output directory
holds a ``manifest.json`` mapping artifact names to their config hash and
file digest, which ``eulab verify`` re-derives.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import platform

import numpy as np

from . import __version__
from ._backend import resolve

MANIFEST = "manifest.json"


def versions():
    import numba
    import scipy
    return {"eulab": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "scipy": scipy.__version__, "numba": numba.__version__}


def provenance(cfg, seed, command):
    return {"config_hash": cfg.hash, "config_source": cfg.source, "seed": int(seed), "command": command,
            "backend": resolve(None), "versions": versions()}


def jsonable(obj):
    """Plain JSON types; non-finite floats become ``None``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_json"):
        return jsonable(obj.to_json())
    return str(obj)


def dumps(obj):
    return json.dumps(jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def out_dir(flag):
    """``EULAB_OUT`` wins over ``--out``."""
    d = os.environ.get("EULAB_OUT") or flag or "out"
    os.makedirs(d, exist_ok=True)
    return d


def _digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


def _register(directory, name, cfg, command):
    path = os.path.join(directory, MANIFEST)
    man = {}
    if os.path.exists(path):
        with open(path) as fh:
            man = json.load(fh)
    man.setdefault("artifacts", {})[name] = {"config_hash": cfg.hash, "command": command,
                                             "sha256": _digest(os.path.join(directory, name))}
    with open(path, "w") as fh:
        fh.write(json.dumps(man, indent=2, sort_keys=True) + "\n")


def write_json(directory, name, payload, cfg, seed, command):
    doc = dict(payload)
    doc["provenance"] = provenance(cfg, seed, command)
    path = os.path.join(directory, name)
    with open(path, "w") as fh:
        fh.write(dumps(doc))
    _register(directory, name, cfg, command)
    return path


def write_csv(directory, name, columns, rows, cfg, seed, command):
    """Rows are written with ``repr`` floats so that values round-trip exactly."""
    path = os.path.join(directory, name)
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg.hash} seed={int(seed)} command={command}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(v) for v in r])
    _register(directory, name, cfg, command)
    return path


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def read_csv(path):
    """Header and rows of an artifact CSV (comment lines skipped)."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rd = csv.reader(lines)
    header = next(rd)
    return header, [row for row in rd]


def artifact_hash(path):
    """Config hash recorded inside an artifact, or ``None``."""
    with open(path) as fh:
        if path.endswith(".csv"):
            first = fh.readline()
            for tok in first[1:].split():
                if tok.startswith("config_hash="):
                    return tok.split("=", 1)[1]
            return None
        doc = json.load(fh)
    return doc.get("provenance", {}).get("config_hash")


def check_manifest(directory, cfg):
    """Compare every artifact in ``directory`` with ``cfg``; returns a list of problems."""
    path = os.path.join(directory, MANIFEST)
    if not os.path.exists(path):
        return [f"no {MANIFEST} in {directory}"]
    with open(path) as fh:
        man = json.load(fh)
    problems = []
    for name, entry in sorted(man.get("artifacts", {}).items()):
        f = os.path.join(directory, name)
        if not os.path.exists(f):
            problems.append(f"{name}: missing")
            continue
        if entry.get("config_hash") != cfg.hash:
            problems.append(f"{name}: manifest hash differs from config")
        if artifact_hash(f) != cfg.hash:
            problems.append(f"{name}: embedded hash differs from config")
        if entry.get("sha256") != _digest(f):
            problems.append(f"{name}: content changed since written")
    return problems


__all__ = ["write_json", "write_csv", "read_csv", "out_dir", "provenance", "jsonable", "dumps",
           "check_manifest", "artifact_hash", "versions", "MANIFEST"]
