import csv
import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from knotcsi import cli, csint, presets
from knotcsi.sampling import SamplerConfig


@pytest.fixture(scope="module")
def validator():
    schema = json.loads(resources.files("knotcsi").joinpath("schemas/run_record.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def run_ok(*argv):
    code, line = cli.run(list(argv))
    assert code == 0
    return json.loads(line), line


def test_hopf_linking(validator):
    rec, _ = run_ok("invariant", "lk", "--preset", "hopf", "--method", "quadrature")
    validator.validate(rec)
    assert abs(rec["result"]["value"] - 1) < 1e-6
    assert rec["source"] == {"preset": "hopf"}
    assert rec["command"] == "invariant lk"


def test_circle_writhe_is_zero(validator):
    rec, _ = run_ok("invariant", "writhe", "--preset", "circle", "--no-wall-time")
    validator.validate(rec)
    assert abs(rec["result"]["value"]) < 1e-9
    assert rec["wall_time"] is None


def test_v2_accepts_scientific_sample_counts(validator):
    rec, _ = run_ok("invariant", "v2", "--preset", "trefoil", "--samples", "2e5", "--seed", "42")
    validator.validate(rec)
    assert rec["sampler_config"]["samples"] == 200_000
    r = rec["result"]
    assert abs(r["value"] - 1) < 3 * r["std_error"] + 0.02


def test_file_source_and_json_out(tmp_path, validator):
    path = tmp_path / "hopf.json"
    path.write_text(presets.preset("hopf").to_json())
    out = tmp_path / "runs.jsonl"
    for _ in range(2):
        run_ok("invariant", "lk", "--file", str(path), "--samples", "64", "--method", "quadrature",
               "--json-out", str(out))
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    for line in lines:
        rec = json.loads(line)
        validator.validate(rec)
        assert rec["source"] == {"file": str(path)}


def test_sampler_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"method": "monte_carlo", "samples": 5000, "seed": 7, "blocks": 9,
                               "reject_delta": 1e-9}))
    rec, _ = run_ok("invariant", "lk", "--preset", "hopf", "--config", str(cfg), "--seed", "8")
    assert rec["sampler_config"] == {"method": "monte_carlo", "samples": 5000, "seed": 8, "blocks": 9,
                                     "reject_delta": 1e-9}


def test_identical_bytes_across_worker_counts(monkeypatch):
    argv = ["invariant", "v2", "--preset", "figure_eight", "--samples", "30000", "--seed", "5", "--no-wall-time"]
    lines = set()
    for threads in ("1", "2", "8"):
        monkeypatch.setenv("CSINT_THREADS", threads)
        lines.add(cli.run(argv)[1])
    assert len(lines) == 1


def test_anomaly_degree_three(validator):
    rec, _ = run_ok("anomaly", "--degree", "3", "--configs", "16")
    validator.validate(rec)
    assert rec["result"]["report"]["survivors"] == []


def test_anomaly_degree_two_uses_only_vanishing_mechanisms(validator):
    rec, _ = run_ok("anomaly", "--degree", "2")
    validator.validate(rec)
    report = rec["result"]["report"]
    assert report["survivors"] == []
    assert {d["mechanism"] for d in report["diagrams"]} <= {"zero_legs", "one_leg", "two_legs_sigma",
                                                             "coplanarity", "central_symmetry"}


def test_anomaly_alpha1(validator):
    rec, _ = run_ok("anomaly", "--alpha1", "--samples", "1e5", "--seed", "3")
    validator.validate(rec)
    a = rec["result"]["alpha1"]
    assert abs(a["value"] - 1) < 3 * a["std_error"]


def test_shrink_csv(tmp_path, validator):
    table = tmp_path / "shrink.csv"
    rec, _ = run_ok("shrink", "--preset", "morse_trefoil", "--lambdas", "1,0.1", "--samples", "2048",
                    "--csv", str(table))
    validator.validate(rec)
    rows = list(csv.DictReader(table.read_text().splitlines()))
    assert [float(r["lambda"]) for r in rows] == [1.0, 0.1]
    assert float(rows[0]["estimate"]) == rec["result"]["rows"][0]["value"]
    writhe = csint.writhe_integral(presets.preset("morse_trefoil"), SamplerConfig(method="quadrature", samples=2048))
    assert rec["result"]["rows"][0]["value"] == writhe.value
    p = rec["result"]["predicted_limit_mod_1"]
    assert min(p, 1 - p) < 1e-6


@pytest.mark.parametrize("argv", [
    ["anomaly", "--degree", "6"],
    ["anomaly"],
    ["invariant", "lk", "--preset", "nope"],
    ["invariant", "lk", "--preset", "hopf", "--components", "0", "5"],
    ["invariant", "writhe", "--preset", "hopf"],
    ["invariant", "v2", "--preset", "trefoil", "--method", "quadrature"],
    ["invariant", "lk", "--file", "/nonexistent/link.json"],
    ["shrink", "--preset", "trefoil"],
    ["invariant", "lk", "--preset", "hopf", "--method", "quadrature", "--samples", "7"],
])
def test_input_errors_exit_two(argv, capsys):
    code, line = cli.run(argv)
    assert code == cli.EXIT_INPUT and line == ""
    assert "knotcsi: error:" in capsys.readouterr().err


def test_argument_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        cli.run(["invariant", "lk", "--preset", "hopf", "--samples", "1.5"])
    assert exc.value.code == 2


def test_numerical_failure_exits_three(monkeypatch, capsys):
    from knotcsi.errors import DegenerateConfiguration

    def boom(*a, **k):
        raise DegenerateConfiguration("collapsed")

    monkeypatch.setattr(csint, "writhe_integral", boom)
    code, _ = cli.run(["invariant", "writhe", "--preset", "trefoil"])
    assert code == cli.EXIT_NUMERICAL
    assert "collapsed" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "knotcsi.cli", "invariant", "lk", "--preset", "split_circles",
                          "--samples", "64", "--no-wall-time"], capture_output=True, text=True, check=True)
    rec = json.loads(out.stdout)
    assert abs(rec["result"]["value"]) < 1e-9
