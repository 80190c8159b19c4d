"""Directory and service behavior: brokered routing, rotation, no_route."""

import dataclasses
import json

from helpers import by_comp, cs_doc, const, of_type, resolves, run_doc
from stylesim.engine import Engine
from stylesim.scenario import build_topology, parse_scenario
from stylesim.trace import parse_lines


def test_rotation_alternates_across_instances():
    doc = cs_doc(
        instances=2,
        proc=3_000,
        route=500,
        clients=[{"delay": const(10_000), "service": "auth"}],
        duration_us=45_000,
    )
    _, lines = run_doc(doc)
    routed = [s["to"] for s in by_comp(of_type(lines, "send"), "directory_0")]
    assert routed == ["auth_0", "auth_1", "auth_0", "auth_1"]
    done = resolves(lines)
    assert len(done) == 4
    assert all(r["latency_us"] == 3_500 for r in done)


def test_unknown_service_comes_back_as_no_route():
    doc = cs_doc(
        clients=[{"delay": const(10_000), "service": "nosuch", "timeout_us": 8_000}],
        duration_us=25_000,
    )
    _, lines = run_doc(doc)
    done = resolves(lines)
    assert done
    first = done[0]
    assert first["outcome"] == "failure"
    assert first["reason"] == "no_route"
    assert first["latency_us"] == 0
    assert first["t"] == 18_000


def test_rotation_skips_dead_instances():
    doc = cs_doc(
        instances=2,
        proc=3_000,
        clients=[{"delay": const(10_000), "service": "auth"}],
        duration_us=45_000,
        faults=[{"at_us": 5_000, "target": "auth_0", "kind": "crash"}],
    )
    _, lines = run_doc(doc)
    routed = [s["to"] for s in by_comp(of_type(lines, "send"), "directory_0")]
    assert routed and all(to == "auth_1" for to in routed)
    assert all(r["outcome"] == "success" for r in resolves(lines))


def test_all_instances_down_means_no_route():
    doc = cs_doc(
        instances=2,
        clients=[{"delay": const(10_000), "service": "auth", "timeout_us": 8_000}],
        duration_us=30_000,
        faults=[
            {"at_us": 5_000, "target": "auth_0", "kind": "crash"},
            {"at_us": 5_000, "target": "auth_1", "kind": "crash"},
        ],
    )
    _, lines = run_doc(doc)
    done = resolves(lines)
    assert done
    assert all(r["outcome"] == "failure" and r["reason"] == "no_route" for r in done)


def test_directory_routes_without_ever_queueing():
    doc = cs_doc(
        instances=2,
        clients=[
            {"delay": const(10_000), "service": "auth"},
            {"delay": const(10_000), "service": "auth"},
        ],
        duration_us=15_000,
    )
    _, lines = run_doc(doc)
    assert not by_comp(of_type(lines, "defer"), "directory_0")
    routed = by_comp(of_type(lines, "send"), "directory_0")
    assert [s["t"] for s in routed] == [10_000, 10_000]
    assert {s["to"] for s in routed} == {"auth_0", "auth_1"}


def test_busy_service_queues_fifo():
    doc = cs_doc(
        instances=1,
        proc=3_000,
        route=0,
        clients=[{"delay": const(1_000), "service": "auth", "timeout_us": 100_000}],
        duration_us=10_000,
    )
    _, lines = run_doc(doc)
    defers = by_comp(of_type(lines, "defer"), "auth_0")
    assert [d["req"] for d in defers] == list(range(2, 11))
    starts = {l["req"]: l["t"] for l in by_comp(of_type(lines, "proc_start"), "auth_0")}
    assert starts[1] == 1_000 and starts[2] == 4_000 and starts[3] == 7_000


def test_services_refuse_direct_requests():
    scenario = parse_scenario(json.dumps(cs_doc(duration_us=30_000)))
    topo = build_topology(scenario)
    client = topo.specs[3]
    assert client.role == "client"
    topo.specs[3] = dataclasses.replace(
        client, config=dataclasses.replace(client.config, entries=(1,))
    )
    eng = Engine(scenario, topology=topo)
    eng.run()
    lines = list(parse_lines(eng.writer.lines))
    bad = by_comp(of_type(lines, "protocol_violation"), "auth_0")
    assert bad
    assert bad[0]["reason"] == "services take requests via a directory only"
    assert not resolves(lines)
