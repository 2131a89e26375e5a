import csv
import io
import json

import pytest

from folcc import cli


def run(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_gf_cohomology_json(capsys):
    status, out, _ = run(capsys, "gf-cohomology", "--flavor", "gl1", "--degree", "2",
                         "--weight-min", "0", "--weight-max", "0", "--json")
    rep = json.loads(out)
    assert status == 0 and rep["schema"] == "folcc-report/1"
    group = rep["result"]["degrees"]["2"]["0"]
    assert group["dim"] == 1
    assert group["representatives"][0][0]["monomial"] == [0, 2]


def test_gf_duminy_summary(capsys):
    status, out, _ = run(capsys, "gf-cohomology", "--flavor", "duminy", "--max-index", "3")
    assert json.loads(out)["result"]["total"]["dims"] == {"1": 0, "2": 1, "3": 1, "4": 0}


def test_identities(capsys):
    status, out, _ = run(capsys, "identities")
    assert status == 0 and json.loads(out)["passed"]


def test_connection_verify(capsys):
    assert run(capsys, "connection", "verify", "--config", "resilient")[0] == 0
    status, out, _ = run(capsys, "connection", "verify", "--config", "resilient",
                         "--candidate", "x")
    assert status == 1 and not json.loads(out)["passed"]
    status, _, _ = run(capsys, "connection", "verify", "--config", "conjugated-rotation",
                       "--tol", "1e-8")
    assert status == 0
    status, _, _ = run(capsys, "connection", "verify", "--config", "orbifold-z2",
                       "--kind", "projective")
    assert status == 0


def test_gysin(capsys):
    status, out, _ = run(capsys, "gysin", "--form", "dx1^dx0")
    assert json.loads(out)["result"]["image_terms"] == [{"coefficient": "-1", "indices": [0]}]


def test_rotation_csv(capsys):
    status, out, _ = run(capsys, "--csv", "rotation", "--map", "lift: x + 0.25",
                         "--iters", "100", "--alpha", "0.25")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and rows[0]["passed"] == "True"


def test_diophantine_and_rational_input(capsys):
    status, out, _ = run(capsys, "diophantine", "--alpha", "(sqrt(5)-1)/2", "--cap", "1000")
    assert status == 0 and json.loads(out)["result"]["partial_quotients"][:3] == [0, 1, 1]
    status, _, err = run(capsys, "diophantine", "--alpha", "1/3")
    assert status == 1 and json.loads(err)["error"]["type"] == "DomainError"


def test_szekeres(capsys):
    status, out, _ = run(capsys, "szekeres", "--field", "x^2", "--n", "3")
    rep = json.loads(out)["result"]
    assert status == 0 and rep["polynomials"]["2"]["polynomial"] == "2*u1^2"


def test_reeb_probe_csv(capsys):
    status, out, _ = run(capsys, "reeb-probe", "--nmax", "12", "--csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert status == 0 and [r["n"] for r in rows[:3]] == ["1", "2", "3"]


def test_fixed_points(capsys):
    status, out, _ = run(capsys, "fixed-points", "--map", "x + x^3", "--domain", "-1", "1")
    pts = json.loads(out)["result"]["fixed_points"]
    assert status == 0 and pts[0]["class"] == "non-hyperbolic"


def test_scenario_output_and_meta(capsys, tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    assert run(capsys, "scenario", "resilient", "--seed", "1", "--output", str(out1))[0] == 0
    assert run(capsys, "scenario", "resilient", "--seed", "1", "--output", str(out2))[0] == 0
    assert out1.read_bytes() == out2.read_bytes()
    meta = json.loads((tmp_path / "a.json.meta.json").read_text())
    assert "generated" in meta and "generated" not in json.loads(out1.read_text())


def test_scenario_only(capsys):
    status, out, _ = run(capsys, "scenario", "reeb", "--only", "identities")
    assert status == 0 and [c["kind"] for c in json.loads(out)["checks"]] == ["identities"]


def test_config_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.toml"
    bad.write_text("name = 'x'\n[charts.R]\ninterval = [0]\n")
    status, _, err = run(capsys, "scenario", str(bad))
    assert status == 2 and "error" in json.loads(err)
    assert run(capsys, "scenario", "no-such-scenario")[0] == 2


def test_list_scenarios(capsys):
    status, out, _ = run(capsys, "list-scenarios")
    names = [s["name"] for s in json.loads(out)["result"]]
    assert "reeb" in names and "resilient" in names


def test_usage_errors_exit_two(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["rotation"])
    assert info.value.code == 2


def test_sanitize():
    assert cli.sanitize({"a": float("inf"), "b": [float("nan"), 1.0]}) == \
        {"a": "inf", "b": ["nan", 1.0]}
