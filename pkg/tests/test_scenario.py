import io
import json

import pytest

from normsim.dsl import EvaluationContext
from normsim.engine import EngineMode, NormStore
from normsim.errors import FormatError, ValidationError
from normsim.norms import ActionDescriptor, RegulatoryStatus, response_violations
from normsim.reasoning import Decision
from normsim.scenario import (
    TAIL_RESPECT_LINE,
    TaxiStation,
    build_runtime,
    bundled_path,
    check_norm_file,
    load_norm_file,
    load_scenario,
    norm_from_dict,
    run_simulation,
    summarize,
)


def full_norm(norm_id, deontic="PROHIBITION", condition="true", **kw):
    return {
        "id": norm_id, "type": deontic, "condition": condition, "activation": "true",
        "reward": 0, "penalty": -1, "roles": ["DRIVER"], "domain": "QUEUE",
        "inviolable": False, "issuer": "ORGANIZATION", **kw,
    }


def bundled_doc(name="taxi.scenario"):
    return json.loads(bundled_path(name).read_text())


def write(tmp_path, doc, name="s.scenario"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc, indent=2))
    return path


class TestLoad:
    def test_bundled_scenario(self, taxi_config):
        assert taxi_config.mode is EngineMode.PROHIBITION_MODE
        assert [n.id for n in taxi_config.norms] == ["respectLine", "respectCapacity"]
        assert (taxi_config.ticks, taxi_config.seed) == (500, 42)

    def test_norm_file_matches_scenario(self, taxi_config, taxi_norm_file):
        assert taxi_norm_file.norms == taxi_config.norms

    def test_mode_conflict(self, tmp_path):
        doc = bundled_doc()
        doc["norms"].append(full_norm("mayPark", "PERMISSION"))
        with pytest.raises(ValidationError) as info:
            load_scenario(write(tmp_path, doc))
        assert any("mode conflict" in d for d in info.value.diagnostics)

    def test_empty_file(self, tmp_path):
        with pytest.raises(FormatError):
            load_scenario(write(tmp_path, ""))

    def test_bad_json_reports_line(self, tmp_path):
        with pytest.raises(FormatError) as info:
            load_scenario(write(tmp_path, '{\n  "mode": "prohibition",\n  oops\n}'))
        assert info.value.line == 3

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_scenario(tmp_path / "absent.scenario")

    @pytest.mark.parametrize("ticks", [0, -1, 1.5, True])
    def test_ticks_must_be_positive(self, tmp_path, ticks):
        doc = bundled_doc()
        doc["ticks"] = ticks
        with pytest.raises(ValidationError, match="ticks"):
            load_scenario(write(tmp_path, doc))

    def test_diagnostics_are_aggregated_and_located(self, tmp_path):
        doc = bundled_doc()
        doc["norms"][1]["reward"] = -2
        doc["agents"][0]["roles"] = ["PILOT"]
        doc["environment"]["kind"] = "airport"
        with pytest.raises(ValidationError) as info:
            load_scenario(write(tmp_path, doc))
        diags = info.value.diagnostics
        assert len(diags) >= 3
        reward = next(d for d in diags if "reward must be ≥ 0" in d)
        line = reward.split(":")[0]
        assert line.startswith("line ")
        text = (tmp_path / "s.scenario").read_text().splitlines()
        assert '"respectCapacity"' in text[int(line.split()[1]) - 1]

    def test_parse_error_has_offset(self, tmp_path):
        doc = {"mode": "prohibition", "norms": [full_norm("n", condition="a ==")]}
        diags = check_norm_file(write(tmp_path, doc, "n.json"))
        assert len(diags) == 1 and "offset 4" in diags[0]


class TestRun:
    def test_scripted_opening(self, taxi_config):
        _, events = run_simulation(taxi_config, ticks=2)
        regulated = [e for e in events if e.status is not RegulatoryStatus.NOT_REGULATED]
        first, second, jump = regulated[0], regulated[1], regulated[2]
        assert (first.tick, first.agent, first.action) == (0, "driver1", "PickClients")
        assert (first.status, first.decision) == (RegulatoryStatus.INVIOLABLE, Decision.ABSTAIN)
        assert (second.agent, second.status, second.utility_delta) == ("driver2", RegulatoryStatus.ALLOWED, 12.0)
        assert (jump.tick, jump.agent, jump.action) == (1, "driver1", "Queue")
        assert jump.status is RegulatoryStatus.FORBIDDEN and jump.decision is Decision.PERFORM
        assert jump.violated == ("respectLine",)
        assert jump.utility_delta == 5.0
        assert events.index(first) < events.index(jump)

    def test_single_quiet_tick(self, tmp_path):
        doc = bundled_doc()
        doc["ticks"] = 1
        doc["environment"]["arrivals"] = {"script": [], "probability": 0.0}
        _, events = run_simulation(load_scenario(write(tmp_path, doc)))
        assert events
        assert {(e.action, e.status, e.decision) for e in events} == {
            ("Idle", RegulatoryStatus.NOT_REGULATED, Decision.PERFORM)
        }

    def test_explicit_zero_ticks_rejected(self, taxi_config):
        with pytest.raises(ValueError):
            run_simulation(taxi_config, ticks=0)

    def test_determinism(self, taxi_config):
        logs = []
        for _ in range(2):
            buf = io.StringIO()
            run_simulation(taxi_config, ticks=300, seed=7, log=buf)
            logs.append(buf.getvalue())
        assert logs[0] == logs[1]
        other = io.StringIO()
        run_simulation(taxi_config, ticks=300, seed=8, log=other)
        assert other.getvalue() != logs[0]

    def test_safety_and_accounting_over_long_run(self, taxi_config):
        runtime, events = run_simulation(taxi_config)
        station = runtime.environment
        assert len(station.pickups) > 20
        for pickup in station.pickups:
            assert pickup.group <= pickup.capacity
        for e in events:
            assert not (e.status is RegulatoryStatus.INVIOLABLE and e.decision is Decision.PERFORM)
        totals = {}
        for e in events:
            totals[e.agent] = totals.get(e.agent, 0.0) + e.utility_delta
        assert totals == station.utility
        summary = summarize(runtime, events)
        assert summary["ticks"] == 500 and summary["events"] == len(events)

    def test_queue_integrity_every_tick(self, taxi_config):
        runtime, _ = build_runtime(taxi_config, seed=3)
        station = runtime.environment
        for _ in range(400):
            runtime.tick()
            assert len(set(station.queue)) == len(station.queue)
            assert station.waiting >= 0
            assert set(station.queue) <= set(station.drivers)

    def test_arrivals_follow_script_then_prng(self, taxi_config):
        runtime, _ = run_simulation(taxi_config, ticks=200)
        sizes = [size for _, size in runtime.environment.arrivals]
        assert sizes[:2] == [6, 3]
        assert all(1 <= s <= 6 for s in sizes)

    def test_shift_norm_fires(self):
        config = load_scenario(bundled_path("taxi-shifts.scenario"))
        _, events = run_simulation(config, ticks=300)
        blocked = [e for e in events if "workHours" in e.violated]
        assert blocked
        assert all(e.decision is Decision.ABSTAIN and e.status is RegulatoryStatus.INVIOLABLE for e in blocked)
        # driver4 never takes breaks, so it keeps running into the rule
        assert sum(e.agent == "driver4" for e in blocked) > len(blocked) / 2


def test_tail_variant_fines_the_head_driver(taxi_norm_file):
    """With the tail-position encoding an ordinary head pickup gets flagged."""
    store = NormStore(EngineMode.PROHIBITION_MODE, [norm_from_dict(TAIL_RESPECT_LINE)])
    store.register_action("Queue", "QUEUE")
    queue_move = ActionDescriptor("Queue", "QUEUE")
    head = EvaluationContext({"driverQueuePos": 1}, {"numTaxisQueue": 4})
    tail = EvaluationContext({"driverQueuePos": 4}, {"numTaxisQueue": 4})
    assert store.check_action(queue_move, {"DRIVER"}, head).status is RegulatoryStatus.FORBIDDEN
    assert store.check_action(queue_move, {"DRIVER"}, tail).status is RegulatoryStatus.ALLOWED
    shipped = NormStore(EngineMode.PROHIBITION_MODE, taxi_norm_file.norms)
    shipped.register_action("Queue", "QUEUE")
    assert shipped.check_action(queue_move, {"DRIVER"}, head).status is RegulatoryStatus.ALLOWED


def test_bundled_files_validate():
    for name in ("taxi.scenario", "taxi-shifts.scenario", "taxi_norms.json"):
        assert check_norm_file(bundled_path(name)) == []
    load_norm_file(bundled_path("taxi_norms.json"))


def test_station_rejects_duplicate_queue_entries():
    from normsim.scenario import Driver

    with pytest.raises(AssertionError):
        TaxiStation([Driver("a", 4)], ["a", "a"], seed=0)


def test_responses_in_long_run_are_coherent(taxi_config):
    runtime, org = build_runtime(taxi_config)
    norms = {n.id: n for n in org.store.norms}
    station = runtime.environment
    for _ in range(100):
        runtime.tick()
        for agent in runtime.agents.values():
            ctx = station.driver_context(station.drivers[agent.id])
            for action in (ActionDescriptor("PickClients", "PICKING"), ActionDescriptor("Queue", "QUEUE")):
                assert response_violations(agent.backpack.check(action, ctx), norms) == []
