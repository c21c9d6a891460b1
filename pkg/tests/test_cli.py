import json
import subprocess
import sys
from pathlib import Path

import pytest

from filippov.cli import main
from filippov.scenario import ScenarioError, format_residual, parse_scenario

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = sorted((ROOT / "scenarios").glob("*.json"))

PSEUDO_NODE = {"fplus": ["x", "-1"], "fminus": ["x", "1"], "switch": "y", "domain": [-1, -1, 1, 1]}


@pytest.fixture
def field_file(tmp_path):
    path = tmp_path / "field.json"
    path.write_text(json.dumps(PSEUDO_NODE))
    return str(path)


def write(tmp_path, doc, name="sc.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def test_index_command(field_file, capsys):
    assert main(["index", "--field", field_file, "--center", "0,0", "--radius", "1"]) == 0
    assert capsys.readouterr().out.strip() == "index=-1 residual=0.0e0"


def test_classify_command(field_file, capsys):
    assert main(["classify", "--field", field_file, "--point", "0.3,0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["tag"] == "Sliding" and (out["lie_plus"], out["lie_minus"]) == (-1.0, 1.0)


def test_find_command(field_file, capsys):
    assert main(["find", "--field", field_file, "--grid", "32"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()
    assert len(rows) == 2 and rows[1].split()[0] == "PseudoEquilibrium" and rows[1].split()[-1] == "-1"


def test_reg_check_command(field_file, capsys):
    assert main(["reg-check", "--field", field_file, "--center", "0,0", "--radius", "1",
                 "--eps", "0.1,0.01"]) == 0
    out = capsys.readouterr().out
    assert "filippov index=-1" in out and "all equal: True" in out
    assert out.count("index=-1") == 5


def test_emit_curves_command(field_file, tmp_path, capsys):
    out_dir = tmp_path / "curves"
    assert main(["emit-curves", "--field", field_file, "--center", "0,0", "--radius", "0.9",
                 "--out", str(out_dir)]) == 0
    for name in ("gamma_plus.csv", "gamma_minus.csv"):
        lines = (out_dir / name).read_text().splitlines()
        assert lines[0] == "t,vx,vy" and len(lines) > 100


def test_ph_command(capsys):
    assert main(["ph", "--scenario", str(ROOT / "scenarios" / "sphere_ph.json")]) == 0
    assert capsys.readouterr().out.strip().splitlines()[-1] == "sum=2 chi=2 PASS"


def test_ph_rejects_planar_scenario(capsys):
    assert main(["ph", "--scenario", str(ROOT / "scenarios" / "pseudo_node.json")]) == 2


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_shipped_scenarios_pass(path, tmp_path, capsys):
    assert main(["run", str(path), "--out", str(tmp_path)]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is True
    assert capsys.readouterr().out.strip().splitlines()[-1].startswith("PASS")


def test_reports_are_reproducible(tmp_path):
    path = str(ROOT / "scenarios" / "pseudo_node.json")
    main(["run", path, "--out", str(tmp_path / "a")])
    main(["run", path, "--out", str(tmp_path / "b")])
    for name in ("report.json",):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_failed_expectation_exits_one(tmp_path, capsys):
    doc = {"schema_version": 1, "name": "wrong", "kind": "planar", "field": PSEUDO_NODE,
           "analyses": [{"op": "index", "center": [0, 0], "radius": 1.0, "expect": 1}]}
    assert main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_missing_file(capsys):
    assert main(["index", "--field", "/nonexistent.json", "--center", "0,0", "--radius", "1"]) == 2
    assert "file not found" in capsys.readouterr().err


@pytest.mark.parametrize("doc, fragment", [
    ({"name": "x", "kind": "planar", "field": PSEUDO_NODE, "analyses": []}, "schema_version"),
    ({"schema_version": 2, "name": "x", "kind": "planar", "field": PSEUDO_NODE, "analyses": []},
     "schema_version"),
    ({"schema_version": 1, "name": "x", "kind": "planar",
      "field": dict(PSEUDO_NODE, switch="y +"), "analyses": []}, "field.switch"),
    ({"schema_version": 1, "name": "x", "kind": "planar",
      "field": dict(PSEUDO_NODE, fplus=["x", "q"]), "analyses": []}, "field.fplus"),
    ({"schema_version": 1, "name": "x", "kind": "planar", "field": PSEUDO_NODE,
      "analyses": [{"op": "index", "center": [0.9, 0], "radius": 0.5}]}, "analyses.0.center"),
])
def test_invalid_scenarios_name_the_problem(doc, fragment, tmp_path, capsys):
    with pytest.raises(ScenarioError, match=fragment):
        parse_scenario(doc)
    assert main(["run", write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 2
    assert "error:" in capsys.readouterr().err


def test_ball_outside_domain_is_a_usage_error(field_file, capsys):
    assert main(["index", "--field", field_file, "--center", "0.8,0", "--radius", "0.5"]) == 2


def test_singularity_on_circle_exits_one(field_file, capsys):
    assert main(["index", "--field", field_file, "--center", "0.5,0", "--radius", "0.5"]) == 1
    assert "SingularityOnBoundary" in capsys.readouterr().err


def test_bad_arguments_exit_two(field_file):
    with pytest.raises(SystemExit) as exc:
        main(["index", "--field", field_file, "--center", "0", "--radius", "1"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["index", "--field", field_file, "--center", "0,0", "--radius", "-1"])
    assert exc.value.code == 2


@pytest.mark.parametrize("value, text", [(0.0, "0.0e0"), (1.5e-13, "1.5e-13"), (2e-9, "2.0e-9")])
def test_format_residual(value, text):
    assert format_residual(value) == text


def test_console_entry_point(field_file):
    proc = subprocess.run([sys.executable, "-m", "filippov.cli", "index", "--field", field_file,
                           "--center", "0,0", "--radius", "1"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "index=-1 residual=0.0e0"
