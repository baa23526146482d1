import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from semipot import cli

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run(*argv):
    proc = subprocess.run([sys.executable, "-m", "semipot.cli", *argv], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


def value(stdout, key="value"):
    for line in stdout.splitlines():
        if line.startswith(key + "="):
            return float(line.split("=", 1)[1])
    raise AssertionError(f"no {key} in {stdout!r}")


def test_catalog():
    code, out, _ = run("catalog")
    assert code == 0
    for name in ("hyperbolic-strip", "parabolic-automorphism", "parabolic-zero-step"):
        assert name in out
    assert out == run("catalog")[1]


@pytest.mark.parametrize("argv, expected", [
    (("green", "0", "0.5"), math.log(2)),
    (("hyp-dist", "0", "0.5"), math.atanh(0.5)),
    (("rho", "0.5", "-0.5"), 0.8),
    (("sigma", "1"), -1.3006985996311944),
])
def test_eval_closed_forms(argv, expected):
    code, out, _ = run("eval", *argv)
    assert code == 0
    assert out.startswith("# quantity=" + argv[0])
    assert value(out) == pytest.approx(expected, rel=1e-12)


def test_eval_harmonic_methods():
    exact = math.log(0.6) / math.log(0.3)
    code, out, _ = run("eval", "harmonic", "--set", "disk:0,0.3", "--z", "0.6", "--method", "grid")
    assert code == 0 and value(out) == pytest.approx(exact, rel=0.01)
    code, out, _ = run("eval", "harmonic", "--set", "disk:0,0.3", "--z", "0.6", "--method", "wos",
                       "--samples", "20000", "--seed", "4")
    assert code == 0 and "seed=4" in out
    assert abs(value(out) - exact) < 3 * value(out, "std_error")


def test_eval_capacities():
    code, out, _ = run("eval", "logcap", "--set", "disk:0.1,0.3")
    assert code == 0 and value(out) == pytest.approx(0.3, rel=0.01)
    code, out, _ = run("eval", "capacitance", "--set", "disk:0,0.2", "--set", "annulus:0,0.5,0.7", "--spacing",
                       "0.03125")
    assert code == 0 and value(out) == pytest.approx(2 * math.pi / math.log(2.5), rel=0.02)
    code, out, _ = run("eval", "extremal", "--model", "hyperbolic-strip", "--set", "disk:0,0.2", "--t", "4")
    assert code == 0 and value(out) * math.pi / 4 == pytest.approx(1.0, rel=0.05)


@pytest.mark.parametrize("argv", [
    ("eval", "green", "0", "1.5"),
    ("eval", "sigma", "-1"),
    ("eval", "nonsense"),
    ("eval", "harmonic", "--set", "points:0,0", "--z", "0.5"),
    ("study", "/nonexistent.json"),
])
def test_usage_errors(argv):
    assert run(*argv)[0] == 1


def test_numerical_failure_exit_code():
    code, _, err = run("eval", "capacitance", "--set", "disk:0,0.2", "--set", "disk:0.25,0.1")
    assert code == 2 and "numerical failure" in err


def test_parse_grid():
    assert cli.parse_grid("2:10:9").tolist() == list(range(2, 11))
    g = cli.parse_grid("1:100:3:geom")
    assert g.tolist() == pytest.approx([1, 10, 100])
    for bad in ("1:2", "a:b:3", "5:1:3", "0:1:3:geom"):
        with pytest.raises(cli.UsageError):
            cli.parse_grid(bad)


def _small_config(tmp_path, **extra):
    cfg = {"model": "hyperbolic-strip", "t_grid": "1:100:12:geom", "u_grid": "1:100:12:geom",
           "solver_t_grid": "2:4:3", "estimators": ["hyp-dist", "green", "step", "extremal", "condenser"],
           "solver": {"spacing": math.pi / 16}, "seed": 1}
    cfg.update(extra)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path


def test_study_outputs(tmp_path):
    code, out, _ = run("study", str(_small_config(tmp_path)), "--out", str(tmp_path / "o"))
    assert code == 0, out
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert set(summary["estimators"]) == {"hyp-dist", "green", "step", "extremal", "condenser"}
    assert summary["seed"] == 1
    csv = (tmp_path / "o" / "hyp-dist.csv").read_text().splitlines()
    assert csv[0].startswith("# config_sha256=" + summary["config_sha256"]) and "seed=1" in csv[0]
    assert csv[1] == "t,raw_value,flag"
    assert (tmp_path / "o" / "step.csv").read_text().splitlines()[1] == "u,raw_value,flag"
    assert set(json.loads((tmp_path / "o" / "timings.json").read_text())) >= {"hyp-dist", "condenser-solves"}


def test_study_tainted_exit_code(tmp_path):
    cfg = _small_config(tmp_path, solver={"spacing": math.pi / 16, "richardson_tol": 0.0})
    code, out, _ = run("study", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 3 and "TAINTED" in out


def test_study_custom_model(tmp_path):
    cfg = _small_config(tmp_path, model={"h": "log((1+z)/(1-z))", "h_inverse": "(exp(w)-1)/(exp(w)+1)"},
                        t_grid="1:30:8", estimators=["hyp-dist"])
    code, out, _ = run("study", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["estimators"]["hyp-dist"]["fitted_lambda"] == pytest.approx(1.0, rel=0.02)


def test_study_rejects_unknown_keys(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"modle": "hyperbolic-strip"}))
    assert run("study", str(path))[0] == 1


def test_dump_field(tmp_path):
    out = tmp_path / "u.txt"
    code, stdout, _ = run("dump-field", "--set", "disk:0,0.3", "--spacing", "0.0625", "--out", str(out))
    assert code == 0 and out.exists()
    nx, ny = map(int, out.read_text().splitlines()[0].split()[:2])
    assert len(out.read_text().splitlines()) == ny + 1


def test_shipped_configs_parse():
    for path in CONFIGS.glob("*.json"):
        cfg = cli.load_config(path)
        assert cfg["seed"] is not None
