import json
import math
from pathlib import Path

import jsonschema
import pytest

from lgkit import cli, macroreal, maxviol
from lgkit.maxviol import OptimizationResult

SCHEMA = json.loads((Path(cli.__file__).parent / "schema" / "output.schema.json").read_text())


def run(capsys, *args):
    code = cli.main(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def _rows(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    head = lines[0].split(",")
    return [dict(zip(head, ln.split(","))) for ln in lines[1:]]


def test_parse_grid():
    assert cli.parse_grid("0:pi:3") == (0.0, math.pi / 2, math.pi)
    assert cli.parse_grid("2*pi/3") == (2 * math.pi / 3,)
    assert cli.parse_grid("1:2:1") == (1.0,)
    for bad in ("0:1", "0:1:0", "0:x:3", "0:1:2.5", "__import__('os')"):
        with pytest.raises(cli.UsageError):
            cli.parse_grid(bad)


def test_sweep_kn_rows(capsys):
    code, out, _ = run(capsys, "sweep-kn", "--grid", "0:pi:7")
    assert code == 0
    rows = {round(float(r["omega_tau"]), 6): r for r in _rows(out)}
    third, half = rows[round(math.pi / 3, 6)], rows[round(math.pi / 2, 6)]
    assert float(third["value"]) == 1.5 and third["violated"] == "true"
    assert float(half["value"]) == pytest.approx(1.0) and half["violated"] == "false"
    assert rows[round(2 * math.pi / 3, 6)]["K3_prime_violated"] == "true"
    assert "# seed=0" in out


def test_sweep_k4(capsys):
    code, out, _ = run(capsys, "sweep-kn", "--n", "4", "--grid", "pi/4")
    row = _rows(out)[0]
    assert code == 0 and row["value"] == "2.82842712475" and row["violated"] == "true"


def test_usage_errors_exit_one(capsys):
    assert run(capsys, "sweep-kn", "--grid", "0:1")[0] == 1
    assert run(capsys, "scenario", "nope")[0] == 1
    assert run(capsys, "scenario", "knee", "--set", "bogus=1")[0] == 1
    assert run(capsys, "scenario", "three-box", "--grid", "0:1:2")[0] == 1
    assert run(capsys, "sweep-kn", "--signs", "++")[0] == 1
    assert run(capsys, "certify", "ontic-bounds", "--seed", "-1")[0] == 1
    assert run(capsys, "scenario", "three-box", "--set", "p1=0.9")[0] == 1
    _, _, err = run(capsys)
    assert "error" in err


def test_scenario_goldens(capsys):
    code, out, _ = run(capsys, "scenario", "three-box")
    assert code == 0 and float(_rows(out)[0]["K3_prime"]) == pytest.approx(13 / 9, abs=1e-11)
    code, out, _ = run(capsys, "scenario", "knee", "--grid", "2*pi/3")
    assert "# summary bound=-0.112" in out and "# summary measured_violated=true" in out
    code, out, _ = run(capsys, "scenario", "weak-k3", "--grid", "0:pi:13")
    assert "# summary max_K3=1.5" in out


def test_certify_enumerate(capsys):
    code, out, _ = run(capsys, "certify", "enumerate", "--n-max", "8")
    assert code == 0
    assert all(r["match"] == "true" for r in _rows(out))


def test_certification_failure_exits_two(capsys, monkeypatch):
    def failing(count=1, seed=0, tol=1e-9):
        summ = macroreal.CertificationSummary("ontic-bounds", 1, seed)
        model = macroreal.invasive_example()
        rep = macroreal.ontic_kn(model, 3)
        summ.checks = 1
        if rep.violated:
            summ.violations.append({"model": model.as_record(), "failed": [rep.name]})
        return summ
    monkeypatch.setitem(macroreal.SUITES, "ontic-bounds", failing)
    code, out, err = run(capsys, "certify", "ontic-bounds", "--format", "json")
    assert code == 2
    doc = json.loads(out)
    assert doc["violations"][0]["failed"] == ["K_3"]
    assert "gamma" in doc["violations"][0]["model"]
    assert "offending" in err


def test_non_convergence_exits_three(capsys, monkeypatch):
    import numpy as np
    monkeypatch.setattr(maxviol, "maximize_kn",
                        lambda n, starts, seed: OptimizationResult(1.0, np.zeros(n - 1), 1, False, 1, 1.0))
    assert run(capsys, "maximize", "kn")[0] == 3


@pytest.mark.parametrize("args", [
    ["sweep-kn", "--grid", "0:pi:5"],
    ["certify", "markov-huelga", "--count", "5"],
    ["certify", "enumerate", "--n-max", "5"],
    ["scenario", "witness", "--grid", "0:pi:3"],
    ["scenario", "palacios", "--grid", "0.5:1.5:3"],
    ["scenario", "fcs"],
    ["maximize", "chsh", "--starts", "2"],
])
def test_json_validates_against_schema(capsys, args):
    code, out, _ = run(capsys, *args, "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["seed"] == 0 and doc["records"]


def test_json_mirrors_csv(capsys):
    _, c, _ = run(capsys, "sweep-kn", "--grid", "0:pi:4")
    _, j, _ = run(capsys, "sweep-kn", "--grid", "0:pi:4", "--format", "json")
    rows, doc = _rows(c), json.loads(j)
    assert len(rows) == len(doc["records"])
    for r, d in zip(rows, doc["records"]):
        assert float(r["value"]) == d["value"]


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# bundle\nseed = 42\ngrid = 0:pi:3\nlambda = 0.5\n")
    code, out, _ = run(capsys, "scenario", "weak-k3", "--config", str(cfg))
    assert code == 0 and "# seed=42" in out and "# summary lambda=0.5" in out
    code, out, _ = run(capsys, "scenario", "weak-k3", "--config", str(cfg), "--seed", "7",
                       "--set", "lambda=2")
    assert "# seed=7" in out and "# summary lambda=2" in out
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert run(capsys, "sweep-kn", "--config", str(bad))[0] == 1


def test_out_file_and_workers_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["scenario", "entropic", "--grid", "0.1:1:9", "--out", str(a)]) == 0
    assert cli.main(["scenario", "entropic", "--grid", "0.1:1:9", "--out", str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes().decode("utf-8").startswith("# lgkit scenario")


def test_twelve_significant_digits(capsys):
    _, out, _ = run(capsys, "sweep-kn", "--n", "4", "--grid", "pi/4")
    value = _rows(out)[0]["value"]
    assert len(value.replace(".", "").lstrip("0")) == 12
