import json
import os
import subprocess

import pytest

CLI = os.environ.get("PMETRIC_CLI")
pytestmark = pytest.mark.skipif(not CLI, reason="command-line tool not built")


def run(*args, cwd=None):
    return subprocess.run([CLI, *args], capture_output=True, text=True, cwd=cwd)


def test_unknown_subcommand_prints_usage():
    r = run("bogus")
    assert r.returncode == 2
    assert "Usage" in r.stderr


def test_entropy_json(data):
    r = run("entropy", "--graph", str(data / "theta.json"), "--json")
    assert r.returncode == 0
    doc = json.loads(r.stdout)
    assert doc["version"] == "0.1.0"
    assert doc["config"]["graph"].endswith("theta.json")
    assert doc["result"]["entropy"] == 0.69314718055994529
    assert "pressure_at_entropy" in doc["residuals"]


def test_csv_has_header_and_nine_digits(data):
    r = run("entropy", "--graph", str(data / "theta.json"))
    lines = r.stdout.split("\n")
    assert lines[0] == "# pmetric 0.1.0"
    assert lines[1].startswith("# config ")
    assert "entropy,0.693147181" in lines
    assert "\r" not in r.stdout


def test_exit_codes(data, tmp_path):
    assert run("entropy", "--graph", str(tmp_path / "missing.json")).returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("entropy", "--graph", str(bad)).returncode == 2
    assert run("tensor", "--graph", str(data / "theta.json")).returncode == 1
    r = run("pathlen", "--complex", str(data / "pants.json"), "--b", "0.1,0.2,0.7")
    assert r.returncode == 1


def test_config_overrides_flags(data, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"graph": str(data / "k4.json")}))
    r = run("entropy", "--graph", str(data / "theta.json"), "--config", str(cfg), "--json")
    assert json.loads(r.stdout)["config"]["graph"].endswith("k4.json")
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run("entropy", "--config", str(cfg)).returncode == 2


def test_atomic_out_and_reproducible(data, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for target in (a, b):
        r = run("selftest", "--seed", "9", "--out", str(target))
        assert r.returncode == 0 and r.stdout == ""
    assert a.read_bytes() == b.read_bytes()
    assert not list(tmp_path.glob("*.tmp"))


def test_tensor_example(data):
    r = run("tensor", "--graph", str(data / "theta.json"), "--normalize", "--json")
    doc = json.loads(r.stdout)
    m = doc["result"]["matrix"]
    assert len(m) == 2 and abs(m[0][0] - m[1][1]) < 1e-12
    assert all(e > 0 for e in doc["result"]["eigenvalues"])


def test_pathlen_example(data):
    r = run("pathlen", "--complex", str(data / "pants.json"), "--b", "0.3333333,0.3333333,0.3333334", "--tmin", "0.0125")
    assert r.returncode == 0
    rows = [l for l in r.stdout.split("\n") if l and not l.startswith("#")]
    assert rows[0] == "t,speed,h_t,cumulative_length"
    speeds = [float(l.split(",")[1]) for l in rows[1:]]
    assert len(speeds) == 5
    assert all(x > y for x, y in zip(speeds, speeds[1:]))
    report = next(l for l in r.stdout.split("\n") if l.startswith("# report "))
    assert json.loads(report[len("# report "):])["max_increment_ratio"] < 0.7


def test_degenerate_columns(data):
    r = run("degenerate", "--complex", str(data / "pants.json"), "--b", "0.3,0.33,0.37", "--tmin", "0.05")
    rows = [l for l in r.stdout.split("\n") if l and not l.startswith("#")]
    assert rows[0] == "t,lambda,a:1,a:2,a:3,h_t,speed,cumulative_length"
    assert len(rows) == 4
    r = run("degenerate", "--complex", str(data / "pants.json"), "--b", "0.3,0.33,0.37", "--tmin", "0.05", "--json")
    assert "decay_fits" in json.loads(r.stdout)["report"]
