"""Experiment configuration: loading, validation and hashing."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources

import jsonschema

from .errors import ValidationError

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "integrator": 1e-10,
    "newton": 1e-12,
    "residual": 1e-9,
    "tol_rot": 1e-7,
    "tol_fit": 1e-5,
    "tol_chaos": 1e-5,
    "resonance": 1e-4,
    "parabolic": 1e-6,
}


def load_schema():
    text = resources.files("eulab").joinpath("configs").joinpath(f"schema_v{SCHEMA_VERSION}.json").read_text()
    return json.loads(text)


def canonical_json(obj):
    """Stable serialisation used for hashing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(raw):
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()


@dataclass
class ExperimentConfig:
    """Validated configuration.  ``raw`` is the document as loaded."""

    raw: dict
    source: str | None = None
    hash: str = field(init=False)

    def __post_init__(self):
        validate(self.raw)
        self.hash = config_hash(self.raw)

    # sections with defaults
    @property
    def space(self):
        return self.raw["space"]

    @property
    def name(self):
        return self.raw.get("name", "experiment")

    @property
    def seed(self):
        return int(self.raw.get("seed", 0))

    def block(self, key):
        return dict(self.raw.get(key, {}))

    @property
    def tolerances(self):
        return {**DEFAULT_TOLERANCES, **self.raw.get("tolerances", {})}

    @property
    def resonance(self):
        r = self.raw.get("resonance")
        return None if r is None else (int(r["p"]), int(r["q"]))

    @property
    def eps(self):
        return float(self.raw.get("perturbation", {}).get("eps", 0.0))

    def annulus(self, default):
        ann = self.raw.get("annulus", {})
        return ann.get("a", default[0]), ann.get("b", default[1])


def validate(raw):
    """Schema check plus the cross-field rules the schema cannot express."""
    try:
        jsonschema.validate(raw, load_schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValidationError(f"config invalid at {where}: {exc.message}", path=where) from None
    if raw["profile"]["domain"] != raw["space"]:
        raise ValidationError("profile domain does not match space",
                              space=raw["space"], domain=raw["profile"]["domain"])
    res = raw.get("resonance")
    if res is not None:
        p, q = int(res["p"]), int(res["q"])
        if p == 0 or math.gcd(abs(p), q) != 1:
            raise ValidationError(f"resonance (p, q) = ({p}, {q}) must be coprime with p != 0", p=p, q=q)
    ann = raw.get("annulus", {})
    if "a" in ann and "b" in ann and not ann["a"] < ann["b"]:
        raise ValidationError("annulus needs a < b", a=ann["a"], b=ann["b"])
    if raw["space"] == "s3":
        for k in ("a", "b"):
            if k in ann and not 0.0 < ann[k] < 1.0:
                raise ValidationError("S3 annulus bounds must lie in (0, 1)", **{k: ann[k]})
    tr = raw.get("transport")
    if tr is not None:
        want = {"s3-rotation": "s3", "t3-shear": "t3"}.get(tr["kind"])
        if want is not None and want != raw["space"]:
            raise ValidationError(f"transport {tr['kind']} does not act on {raw['space']}")
    return raw


def load(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    return ExperimentConfig(raw, str(path))


def bundled(name):
    """Load one of the example configs shipped with the package (``.json`` optional)."""
    if not name.endswith(".json"):
        name += ".json"
    text = resources.files("eulab").joinpath("configs").joinpath(name).read_text()
    return ExperimentConfig(json.loads(text), name)


__all__ = ["ExperimentConfig", "load", "bundled", "validate", "config_hash", "canonical_json", "load_schema",
           "DEFAULT_TOLERANCES", "SCHEMA_VERSION"]
