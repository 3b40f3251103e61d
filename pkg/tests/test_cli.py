import json
import subprocess
import sys

import pytest

from normsim.cli import main, parse_bindings
from normsim.scenario import bundled_path

NORMS = str(bundled_path("taxi_norms.json"))
PICK = ["check", "--norms", NORMS, "--action", "PickClients", "--domain", "PICKING", "--roles", "DRIVER"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCheck:
    def test_over_capacity_is_inviolable(self, capsys):
        code, out, _ = run_cli(capsys, *PICK, "--state", "taxiCapacity=4,NumClientsWaiting=6")
        assert code == 2
        assert "status: INVIOLABLE" in out
        assert "forbidding: respectCapacity" in out
        assert "total_penalty: -5" in out

    def test_three_waiting_is_allowed(self, capsys):
        code, out, _ = run_cli(capsys, *PICK, "--state", "taxiCapacity=4,NumClientsWaiting=3")
        assert code == 0 and "status: ALLOWED" in out

    def test_missing_binding(self, capsys):
        code, _, err = run_cli(capsys, *PICK, "--state", "NumClientsWaiting=3")
        assert code == 3
        assert "unresolved identifier: taxiCapacity" in err

    def test_queue_jump_is_forbidden_json(self, capsys):
        code, out, _ = run_cli(
            capsys, "check", "--norms", NORMS, "--action", "Queue", "--domain", "QUEUE",
            "--roles", "DRIVER", "--state", "driverQueuePos=3", "--json",
        )
        assert code == 1
        assert json.loads(out) == {
            "status": "FORBIDDEN",
            "allowing": [],
            "forbidding": ["respectLine"],
            "total_reward": 0.0,
            "total_penalty": -1.0,
        }

    def test_unregulated_for_other_role(self, capsys):
        code, out, _ = run_cli(capsys, *PICK[:-1], "CUSTOMER")
        assert code == 0 and "status: NOT_REGULATED" in out

    def test_bad_bindings_and_files(self, capsys, tmp_path):
        assert run_cli(capsys, *PICK, "--state", "taxiCapacity")[0] == 3
        assert run_cli(capsys, *PICK, "--state", "taxiCapacity=a+b")[0] == 3
        missing = ["check", "--norms", str(tmp_path / "none.json"), "--action", "x"]
        code, _, err = run_cli(capsys, *missing)
        assert code == 3 and "cannot read" in err


def test_parse_bindings():
    assert parse_bindings("a=1, b=true,c=-2.5") == {"a": 1.0, "b": True, "c": -2.5}
    assert parse_bindings("") == {}
    with pytest.raises(ValueError):
        parse_bindings("a=1,a=2")


def norm(**kw):
    base = {
        "id": "n", "type": "PROHIBITION", "condition": "true", "activation": "true",
        "reward": 0, "penalty": -1, "roles": ["DRIVER"], "domain": "QUEUE",
        "inviolable": False, "issuer": "ORGANIZATION",
    }
    return {**base, **kw}


class TestValidate:
    def test_bundled_ok(self, capsys):
        code, out, _ = run_cli(capsys, "validate", NORMS)
        assert code == 0 and out.strip().endswith(": ok")

    def test_negative_reward(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"mode": "prohibition", "norms": [norm(reward=-2)]}))
        code, out, _ = run_cli(capsys, "validate", str(path))
        assert code == 1 and "reward must be ≥ 0" in out

    def test_unparseable_condition(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"mode": "prohibition", "norms": [norm(condition="a ==")]}))
        code, out, _ = run_cli(capsys, "validate", str(path))
        assert code == 1 and "offset 4" in out

    def test_one_line_per_diagnostic(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        norms = [norm(id="x", reward=-2), norm(id="y", type="PERMISSION")]
        path.write_text(json.dumps({"mode": "prohibition", "norms": norms}))
        code, out, _ = run_cli(capsys, "validate", str(path))
        lines = out.strip().splitlines()
        assert code == 1 and len(lines) == 2
        assert any("mode conflict" in line for line in lines)

    def test_missing_and_empty(self, capsys, tmp_path):
        assert run_cli(capsys, "validate", str(tmp_path / "nope.json"))[0] == 1
        empty = tmp_path / "empty.json"
        empty.write_text("")
        assert run_cli(capsys, "validate", str(empty))[0] == 1


class TestRun:
    def test_log_to_file_and_summary(self, capsys, tmp_path):
        log = tmp_path / "events.jsonl"
        code, out, err = run_cli(capsys, "run", "--scenario", "taxi.scenario", "--ticks", "20", "--log", str(log))
        assert code == 0 and out == ""
        summary = json.loads(err)
        assert summary["ticks"] == 20
        lines = log.read_text().splitlines()
        assert len(lines) == summary["events"]
        assert all(json.loads(line)["tick"] < 20 for line in lines)

    def test_log_to_stdout(self, capsys):
        code, out, err = run_cli(capsys, "run", "--scenario", "taxi.scenario", "--ticks", "3", "-q")
        assert code == 0 and err == ""
        first = json.loads(out.splitlines()[0])
        assert first["tick"] == 0

    def test_environment_variables(self, capsys, tmp_path, monkeypatch):
        log = tmp_path / "env.jsonl"
        monkeypatch.setenv("NORMSIM_LOG", str(log))
        monkeypatch.setenv("NORMSIM_SEED", "7")
        assert run_cli(capsys, "run", "--scenario", "taxi.scenario", "--ticks", "100", "-q")[0] == 0
        explicit = tmp_path / "flag.jsonl"
        run_cli(capsys, "run", "--scenario", "taxi.scenario", "--ticks", "100", "-q", "--seed", "7",
                "--log", str(explicit))
        assert log.read_bytes() == explicit.read_bytes()
        default = tmp_path / "default.jsonl"
        monkeypatch.delenv("NORMSIM_SEED")
        run_cli(capsys, "run", "--scenario", "taxi.scenario", "--ticks", "100", "-q", "--log", str(default))
        assert default.read_bytes() != log.read_bytes()

    def test_invalid_scenario(self, capsys, tmp_path):
        bad = tmp_path / "bad.scenario"
        bad.write_text("{}")
        code, _, err = run_cli(capsys, "run", "--scenario", str(bad))
        assert code == 3 and "ticks" in err


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "normsim", "check", *PICK[1:], "--state", "taxiCapacity=4,NumClientsWaiting=6"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 2
    assert "INVIOLABLE" in proc.stdout
