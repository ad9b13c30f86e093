from __future__ import annotations

import json

import pytest

from eqcomp import cli, pca
from conftest import CONFIGS, FIXTURES

FIXTURE_KINDS = {
    "finset12.category.json": "category",
    "pointless.category.json": "category",
    "sub-finset12.doctrine.json": "doctrine",
    "planted-ruc.doctrine.json": "doctrine",
    "planted-nonmonotone.doctrine.json": "doctrine",
    "two-points.fragment.json": "fragment",
}


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out else None), err


@pytest.mark.parametrize("name", sorted(FIXTURE_KINDS))
def test_fixtures_round_trip_byte_identically(name):
    assert cli.round_trip(FIXTURES / name, FIXTURE_KINDS[name])


def test_empty_config(capsys):
    code, doc, _ = run(capsys, "run", str(CONFIGS / "empty.json"), "--no-timestamp")
    assert code == 0
    assert doc["reports"] == [] and doc["schema_version"] == cli.SCHEMA_VERSION
    assert "timestamp" not in doc


def test_planted_relational_choice_failure(capsys):
    code, doc, _ = run(capsys, "run", str(CONFIGS / "planted-ruc.json"), "--no-timestamp")
    assert code == 1
    (r,) = doc["reports"]
    assert r["verdict"] == "FAILED" and r["witnesses"]


def test_doctrine_corpus(capsys):
    code, doc, _ = run(capsys, "run", str(FIXTURES / "corpus.json"), "--no-timestamp")
    assert code == 0
    assert len(doc["reports"]) == 8
    assert all(r["verdict"] == "PASSED" for r in doc["reports"])


def test_reports_are_deterministic(capsys):
    argv = ["run", str(FIXTURES / "corpus.json")]
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv, "--jobs", "3")
    assert "timestamp" in a
    assert a["digest"] == b["digest"] and a["reports"] == b["reports"]


def test_schema_errors_report_a_pointer(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema_version": 1, "checks": [{"check": "tct", "bound": "four"}]}))
    code, doc, err = run(capsys, "run", str(bad))
    assert code == 2 and doc is None
    assert "/checks/0" in err


def test_category_errors_report_a_pointer(tmp_path):
    doc = json.loads((FIXTURES / "finset12.category.json").read_text())
    doc["arrows"][0]["tgt"] = "7"
    path = tmp_path / "c.category.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(cli.InputError) as err:
        cli.load(path, "category")
    assert err.value.pointer == "/arrows/0/tgt"


def test_bad_base_reference_inside_a_config_fails_that_item(tmp_path, capsys):
    doc = json.loads((FIXTURES / "planted-ruc.doctrine.json").read_text())
    doc["base_ref"] = "missing.category.json"
    (tmp_path / "d.doctrine.json").write_text(json.dumps(doc))
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema_version": 1, "checks": [{"check": "check-doctrine", "doctrine": "d.doctrine.json"}]}))
    code, out, _ = run(capsys, "run", str(cfg), "--no-timestamp")
    assert code == 1
    assert out["reports"][0]["verdict"] == "FAILED"


def test_strict_mode_fails_unknown_results(capsys):
    argv = ["pca-eval", str(pca.LOOP_CODE), "2", "--fuel", "100", "--no-timestamp"]
    code, doc, _ = run(capsys, *argv)
    assert code == 0 and doc["reports"][0]["verdict"] == "UNKNOWN"
    code, _, _ = run(capsys, *argv, "--strict")
    assert code == 1


def test_pca_eval_result(capsys):
    code, doc, _ = run(capsys, "pca-eval", str(pca.SUCC_CODE), "3", "--no-timestamp")
    r = doc["reports"][0]
    assert code == 0 and r["result"]["value"] == 4
    assert pca.kleene_T(pca.SUCC_CODE, 3, r["result"]["trace"]) == 1


def test_realizability_commands(capsys):
    code, doc, _ = run(capsys, "realize", "ex x. x * x = 16", "--code-bound", "32", "--no-timestamp")
    assert code == 0 and doc["reports"][0]["verdict"] == "PASSED"
    code, doc, _ = run(capsys, "oracle", "ex x<3. x + x = 5", "--no-timestamp")
    assert code == 1
    code, doc, _ = run(capsys, "ha-parse", "all x. ", "--no-timestamp")
    assert code == 1 and doc["reports"][0]["verdict"] == "FAILED"


def test_report_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, doc, _ = run(capsys, "tct", "--bound", "4", "--code-bound", "64", "--report", str(out), "--no-timestamp")
    assert code == 0
    assert json.loads(out.read_text()) == doc
