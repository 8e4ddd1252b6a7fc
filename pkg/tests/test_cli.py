import json

import pytest

from eulab import io
from eulab.cli import main
from eulab.config import ExperimentConfig, bundled, config_hash
from eulab.errors import ValidationError

BASE = {"schema_version": 1, "space": "s3",
        "profile": {"domain": "s3", "kind": "closed-form", "f1": "1 + rho", "f2": "0"},
        "resonance": {"p": 2, "q": 5}, "rotnum": {"n_rho": 8, "N": 1000},
        "perturbation": {"eps": 1e-3}, "seed": 0}


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out.strip().splitlines()[-1])


@pytest.fixture
def out(tmp_path, monkeypatch):
    d = tmp_path / "out"
    monkeypatch.setenv("EULAB_OUT", str(d))
    return d


def test_bundled_configs_validate():
    for name in ("example_s3_p2q5", "integrable_s3", "example_t3"):
        cfg = bundled(name)
        assert len(cfg.hash) == 64


def test_hash_ignores_key_order():
    a = dict(BASE)
    b = dict(reversed(list(BASE.items())))
    assert config_hash(a) == config_hash(b)


@pytest.mark.parametrize("patch", [
    {"resonance": {"p": 2, "q": 4}},
    {"resonance": {"p": 0, "q": 5}},
    {"schema_version": 2},
    {"annulus": {"a": 0.6, "b": 0.4}},
    {"space": "t3"},
    {"grid": {"n_theta": 4, "n_rho": 4, "N": 10}},
])
def test_invalid_configs(patch):
    with pytest.raises(ValidationError):
        ExperimentConfig({**BASE, **patch})


def test_flow_and_env_override(tmp_path, out, capsys):
    code, doc = run(capsys, "flow", "--config", write(tmp_path, BASE), "--out", str(tmp_path / "ignored"))
    assert code == 0 and doc["status"] == "ok"
    assert doc["summary"]["nondegenerate"] is True
    assert doc["artifacts"] == [str(out / "flow.json")]
    rep = json.loads((out / "flow.json").read_text())
    assert rep["provenance"]["config_hash"] == doc["config_hash"]
    assert not (tmp_path / "ignored").exists()


def test_rotnum_csv_and_json(tmp_path, out, capsys):
    cfg = write(tmp_path, BASE)
    assert run(capsys, "rotnum", "--config", cfg)[0] == 0
    header, rows = io.read_csv(str(out / "rotnum.csv"))
    assert header == ["rho", "rotation_number", "confidence"] and len(rows) == 8
    lines = (out / "rotnum.csv").read_text().splitlines()
    assert lines[0].startswith("# config_hash=")
    assert lines[1] == "rho,rotation_number,confidence"
    assert len(lines) == 2 + 8
    first = (out / "rotnum.csv").read_bytes()
    assert run(capsys, "rotnum", "--config", cfg, "--threads", "2")[0] == 0
    assert (out / "rotnum.csv").read_bytes() == first
    assert run(capsys, "rotnum", "--config", cfg, "--format", "json")[0] == 0
    doc = json.loads((out / "rotnum.json").read_text())
    assert doc["columns"] == ["rho", "rotation_number", "confidence"] and len(doc["rows"]) == 8


def test_resonance(tmp_path, out, capsys):
    code, doc = run(capsys, "resonance", "--config", write(tmp_path, BASE))
    assert code == 0 and abs(doc["summary"]["c"][0] - 1 / 3) < 1e-12


def test_resonance_missing_is_numeric_failure(tmp_path, out, capsys):
    code, doc = run(capsys, "resonance", "--config", write(tmp_path, {**BASE, "resonance": {"p": 3, "q": 4}}))
    assert code == 3 and "error" in doc


def test_validation_envelope(tmp_path, out, capsys):
    code, doc = run(capsys, "flow", "--config", write(tmp_path, {**BASE, "resonance": {"p": 2, "q": 4}}))
    assert code == 2 and doc["error"]["code"]
    code, doc = run(capsys, "flow", "--config", str(tmp_path / "missing.json"))
    assert code == 2
    code, _ = run(capsys, "flow", "--config", write(tmp_path, BASE), "--seed", "-1")
    assert code == 2


def test_bad_command_line(capsys):
    code, doc = run(capsys, "nosuch")
    assert code == 2 and "error" in doc


def test_verify_subset(tmp_path, out, capsys):
    code, doc = run(capsys, "verify", "--config", write(tmp_path, BASE), "--criteria", "1,3")
    assert code == 0 and doc["summary"]["results"] == {"1": True, "3": True}
    rep = json.loads((out / "verify.json").read_text())
    assert all("seconds" not in c for c in rep["criteria"])
    assert io.check_manifest(str(out), ExperimentConfig(BASE)) == []
    assert io.check_manifest(str(out), bundled("integrable_s3"))
    code, doc = run(capsys, "verify", "--config", write(tmp_path, BASE), "--criteria", "42")
    assert code == 2
