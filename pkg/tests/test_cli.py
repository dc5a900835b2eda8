"""End-to-end tests of the command-line interface: output formats, exit
codes, determinism, and the counterexample/replay loop."""

import csv
import io
import json
import math
import shutil
import subprocess

import pytest

from normratio.cli import COUNTEREXAMPLE_PATH, main
from normratio.geometry import domain_to_json, square


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows, "expected at least one data row"
    return rows


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def test_analyze_diamond_json(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--preset", "diamond")
    assert code == 0
    rep = json.loads(out)
    assert rep["n_vertices"] == 4
    assert rep["area"] == pytest.approx(2.0)
    assert rep["w_x"] == pytest.approx(2.0)
    assert rep["m"] == pytest.approx(1.0)
    assert rep["angular"] is True


def test_analyze_square_has_infinite_slope(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--preset", "square")
    assert code == 0
    rep = json.loads(out)
    assert rep["angular"] is False
    assert rep["m"] == "inf"


def test_analyze_disc_slope_matches_polygon_angle(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--preset", "disc", "--n", "512")
    rep = json.loads(out)
    assert rep["m"] == pytest.approx(1.0 / math.tan(math.pi / 512), rel=1e-12)


def test_analyze_csv_round_trips(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--preset", "diamond",
                           "--format", "csv")
    assert code == 0
    assert "np." not in out
    row = parse_csv(out)[0]
    assert float(row["area"]) == pytest.approx(2.0)
    assert row["angular"] == "true"


# ---------------------------------------------------------------------------
# bounds / estimate / poincare
# ---------------------------------------------------------------------------


def test_bounds_diamond_p2(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--preset", "diamond",
                           "--p", "2")
    assert code == 0
    rep = json.loads(out)
    assert rep["value"] == pytest.approx(1.0 + 2.0 / math.pi, abs=2e-3)


def test_bounds_infinite_value_serializes_as_string(capsys):
    code, out, _ = run_cli(capsys, "bounds", "--preset", "square", "--p", "2")
    assert code == 0
    assert json.loads(out)["value"] == "inf"
    code, out, _ = run_cli(capsys, "bounds", "--preset", "square", "--p", "2",
                           "--format", "csv")
    assert parse_csv(out)[0]["value"] == "inf"


def test_estimate_disc_l1(capsys):
    code, out, _ = run_cli(capsys, "estimate", "--preset", "disc",
                           "--p", "1", "--budget", "60")
    assert code == 0
    rep = json.loads(out)
    assert rep["best_ratio"] >= 1.99
    assert rep["witness"]["kind"] == "tent"
    assert rep["best_ratio"] <= rep["upper_bound"] + 1e-9


def test_poincare_default(capsys):
    code, out, _ = run_cli(capsys, "poincare")
    assert code == 0
    assert json.loads(out)["value"] == pytest.approx(0.10132, abs=1e-4)
    code, out, _ = run_cli(capsys, "poincare", "--format", "csv")
    assert float(parse_csv(out)[0]["value"]) == pytest.approx(0.10132,
                                                              abs=1e-4)


def test_poincare_rejects_bad_p(capsys):
    code, _, err = run_cli(capsys, "poincare", "--p", "16", "--n", "8")
    assert code == 2 and "error" in err


# ---------------------------------------------------------------------------
# families
# ---------------------------------------------------------------------------


def test_families_square_vertical_wall(capsys):
    code, out, _ = run_cli(capsys, "families", "--preset", "square",
                           "--family", "u-omega-vertical", "--p", "inf")
    assert code == 0
    rep = json.loads(out)
    assert len(rep["rows"]) == 5
    for row in rep["rows"]:
        w = row["parameter"]
        assert row["norm_h1"] == pytest.approx(1.0 / w, rel=1e-12)
        assert row["ratio"] == pytest.approx(0.5 / w, rel=1e-12)


def test_families_csv_columns(capsys):
    code, out, _ = run_cli(capsys, "families", "--preset", "square",
                           "--family", "u-omega-vertical", "--p", "inf",
                           "--format", "csv")
    assert out.splitlines()[0] == "parameter,norm_h1,norm_h2,ratio"
    assert len(parse_csv(out)) == 5


def test_families_inapplicable_is_input_error(capsys):
    code, _, err = run_cli(capsys, "families", "--preset", "diamond",
                           "--family", "u-omega-vertical")
    assert code == 2
    assert "inapplicable" in err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_triangle_csv(capsys):
    code, out, _ = run_cli(capsys, "sweep", "--preset", "triangle",
                           "--p", "1", "--budget", "40", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    ratios = [float(r["best_ratio"]) for r in rows]
    assert max(ratios) == pytest.approx(4.0, abs=1e-9)
    for r in rows:
        assert float(r["best_ratio"]) <= float(r["upper_bound"]) + 1e-9


# ---------------------------------------------------------------------------
# verify and the counterexample loop
# ---------------------------------------------------------------------------


def test_verify_single_suite_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "cone-mass",
                           "--cases", "5")
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] is True
    assert rep["counterexample_path"] is None


def test_verify_n_lines_routing(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "oracle-l1",
                           "--cases", "3", "--n-lines", "64")
    assert code == 0 and json.loads(out)["passed"] is True
    # the flag is meaningful only for suites with a scan-line oracle
    code, _, err = run_cli(capsys, "verify", "--suite", "theorem1",
                           "--cases", "3", "--n-lines", "64")
    assert code == 2 and "n_lines" in err
    code, _, err = run_cli(capsys, "verify", "--n-lines", "64")
    assert code == 2 and "--suite" in err
    code, _, err = run_cli(capsys, "verify", "--suite", "oracle-l1",
                           "--n-lines", "8")
    assert code == 2


def test_verify_failure_writes_replayable_counterexample(
        capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, err = run_cli(capsys, "verify", "--suite", "theorem1",
                             "--cases", "2", "--tol", "-1")
    assert code == 1
    assert json.loads(out)["passed"] is False
    ce = tmp_path / COUNTEREXAMPLE_PATH
    assert ce.exists()
    assert COUNTEREXAMPLE_PATH in err

    # replaying the stored record reproduces the violation
    code, out, _ = run_cli(capsys, "verify", "--replay", str(ce))
    assert code == 1
    assert json.loads(out)["suites"][0]["violations"] >= 1

    # a corrupt record is an input error, not a property failure
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = run_cli(capsys, "verify", "--replay", str(bad))
    assert code == 2
    code, _, err = run_cli(capsys, "verify", "--replay",
                           str(tmp_path / "missing.json"))
    assert code == 2


# ---------------------------------------------------------------------------
# input errors and argument handling
# ---------------------------------------------------------------------------


def test_domain_source_must_be_exactly_one(capsys, tmp_path):
    code, _, err = run_cli(capsys, "analyze")
    assert code == 2 and "error" in err
    f = tmp_path / "dom.json"
    f.write_text(json.dumps(domain_to_json(square())))
    code, _, err = run_cli(capsys, "analyze", "--domain", str(f),
                           "--preset", "square")
    assert code == 2


def test_domain_file_parse_error_reports_location(capsys, tmp_path):
    f = tmp_path / "broken.json"
    f.write_text('{"vertices": [[0, 0], [1, 0],')
    code, _, err = run_cli(capsys, "analyze", "--domain", str(f))
    assert code == 2
    assert "parse error" in err and "line" in err


def test_domain_file_round_trip(capsys, tmp_path):
    f = tmp_path / "dom.json"
    f.write_text(json.dumps(domain_to_json(square())))
    code, out, _ = run_cli(capsys, "analyze", "--domain", str(f))
    assert code == 0
    assert json.loads(out)["area"] == pytest.approx(1.0)


def test_invalid_p_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bounds", "--preset", "diamond", "--p", "0.5"])
    assert exc.value.code == 2


def test_out_flag_writes_file(capsys, tmp_path):
    target = tmp_path / "report.json"
    code, out, _ = run_cli(capsys, "analyze", "--preset", "diamond",
                           "--out", str(target))
    assert code == 0
    assert out == ""
    assert json.loads(target.read_text())["area"] == pytest.approx(2.0)


def test_output_is_byte_identical_across_runs(capsys):
    args = ("estimate", "--preset", "diamond", "--p", "inf",
            "--budget", "50", "--seed", "3")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second
    args = args + ("--format", "csv")
    _, first, _ = run_cli(capsys, *args)
    _, second, _ = run_cli(capsys, *args)
    assert first == second


def test_console_script_entry_point():
    exe = shutil.which("normratio")
    assert exe, "console script not installed"
    res = subprocess.run([exe, "analyze", "--preset", "diamond"],
                         capture_output=True, text=True, timeout=60)
    assert res.returncode == 0
    assert json.loads(res.stdout)["m"] == pytest.approx(1.0)
