"""Client behavior: loops, timeouts, late replies, failure racing, controls."""

import json

from helpers import by_comp, const, cs_doc, layered_doc, of_type, p2p_doc, resolves, run_doc
from stylesim.engine import Engine
from stylesim.metrics import build_ledger, max_in_flight
from stylesim.scenario import parse_scenario
from stylesim.trace import parse_lines


def test_open_loop_submits_on_its_own_clock():
    doc = layered_doc(
        n=2,
        proc_in=1_000,
        proc_out=0,
        clients=[{"delay": const(100_000)}],
        duration_us=1_000_000,
    )
    _, lines = run_doc(doc)
    submits = of_type(lines, "submit")
    assert [s["t"] for s in submits] == [100_000 * i for i in range(1, 11)]


def test_closed_loop_keeps_one_request_in_flight():
    doc = layered_doc(
        n=2,
        proc_in=10_000,
        proc_out=0,
        clients=[{"loop": "closed", "delay": const(5_000)}],
        duration_us=100_000,
    )
    _, lines = run_doc(doc)
    submits = of_type(lines, "submit")
    assert [s["t"] for s in submits] == [0, 25_000, 50_000, 75_000, 100_000]
    assert max_in_flight(build_ledger(lines)) == 1


def test_closed_loop_moves_on_after_a_failed_request():
    doc = cs_doc(
        instances=1,
        clients=[
            {
                "loop": "closed",
                "delay": const(5_000),
                "service": "auth",
                "timeout_us": 10_000,
            }
        ],
        duration_us=40_000,
        faults=[{"at_us": 0, "target": "auth_0", "kind": "crash"}],
    )
    _, lines = run_doc(doc)
    submits = of_type(lines, "submit")
    assert [s["t"] for s in submits] == [0, 15_000, 30_000]
    done = resolves(lines)
    assert len(done) == 3
    assert all(r["outcome"] == "failure" and r["reason"] == "no_route" for r in done)


def test_late_reply_lands_after_the_timeout_verdict():
    doc = cs_doc(
        instances=1,
        proc=30_000,
        route=500,
        clients=[{"delay": const(10_000), "service": "auth", "timeout_us": 20_000}],
        duration_us=45_000,
    )
    _, lines = run_doc(doc)
    done = resolves(lines)
    assert [r["outcome"] for r in done] == ["timeout", "timeout"]
    assert done[0]["t"] == 30_000 and done[0]["latency_us"] == 20_000
    late = by_comp(of_type(lines, "late_reply"), "client_0")
    assert len(late) == 1
    assert late[0]["t"] == 40_500 and late[0]["kind"] == "reply" and late[0]["req"] == 1
    assert not of_type(lines, "entry_quarantined")


def test_held_failure_loses_to_a_slower_success():
    doc = p2p_doc(
        peers=3,
        degree=2,
        handlers={"1": ["work"]},
        proc=20_000,
        clients=[
            {"delay": const(10_000), "ttl_hops": 2, "entry_peers": [0], "timeout_us": 50_000}
        ],
        duration_us=60_000,
    )
    _, lines = run_doc(doc)
    assert by_comp(of_type(lines, "ttl_expired"), "peer_2")
    done = resolves(lines)
    assert len(done) == 4
    assert all(r["outcome"] == "success" and r["latency_us"] == 20_000 for r in done)


def test_activity_window_limits_the_run():
    doc = layered_doc(
        n=2,
        proc_in=1_000,
        proc_out=0,
        clients=[
            {"delay": const(10_000), "active_from_us": 20_000, "active_until_us": 40_000}
        ],
        duration_us=100_000,
    )
    _, lines = run_doc(doc)
    assert [s["t"] for s in of_type(lines, "submit")] == [30_000, 40_000]


def test_injected_requests_bypass_the_arrival_clock():
    doc = layered_doc(
        n=2,
        proc_in=10_000,
        proc_out=0,
        clients=[{"delay": const(1_000_000)}],
        duration_us=500_000,
    )
    eng = Engine(parse_scenario(json.dumps(doc)))
    eng.schedule_control({"op": "inject", "count": 2}, "i1", at=100_000)
    eng.run()
    lines = list(parse_lines(eng.writer.lines))
    controls = of_type(lines, "control")
    assert len(controls) == 1 and controls[0]["id"] == "i1"
    submits = of_type(lines, "submit")
    assert [s["t"] for s in submits] == [100_000, 100_000]
    assert dict(eng.control_results) == {"i1": None}
    assert len(resolves(lines)) == 2


def test_set_rate_takes_effect_on_the_next_arrival():
    doc = layered_doc(
        n=2,
        proc_in=0,
        proc_out=0,
        clients=[{"delay": const(200_000)}],
        duration_us=500_000,
    )
    eng = Engine(parse_scenario(json.dumps(doc)))
    eng.schedule_control({"op": "set_rate", "rps": 100}, "r1", at=250_000)
    eng.run()
    lines = list(parse_lines(eng.writer.lines))
    ts = [s["t"] for s in of_type(lines, "submit")]
    assert ts == [200_000, 400_000] + [410_000 + 10_000 * i for i in range(10)]
    assert dict(eng.control_results) == {"r1": None}


def test_bad_controls_report_errors_without_stopping_the_run():
    doc = layered_doc(n=2, duration_us=50_000)
    eng = Engine(parse_scenario(json.dumps(doc)))
    eng.schedule_control({"op": "set_rate", "rps": -5}, "bad1", at=1_000)
    eng.schedule_control({"op": "inject", "client": "layer_0"}, "bad2", at=2_000)
    eng.schedule_control({"op": "warp"}, "bad3", at=3_000)
    eng.schedule_control({"op": "crash", "target": "nobody"}, "bad4", at=4_000)
    eng.run()
    results = dict(eng.control_results)
    assert results["bad1"] == "rps must be positive"
    assert results["bad2"] == "layer_0 is not a client"
    assert results["bad3"] == "unknown command 'warp'"
    assert results["bad4"] == "unknown component 'nobody'"
