"""End-to-end checks over the shipped scenario corpus.

Every test here measures a whole run through the public surface: parse a
scenario file, run it, rebuild the ledger from the trace, and hold the
numbers against an analytic expectation. Fixtures live in scenarios/ and
are shared with the CLI, so these double as a regression net for the file
format.
"""

import json
import pathlib
import time

import pytest

from stylesim.engine import Engine
from stylesim.errors import ReplayDivergence
from stylesim.metrics import build_ledger, build_report
from stylesim.replay import replay_lines
from stylesim.scenario import build_topology, parse_scenario
from stylesim.topology import change_impact
from stylesim.trace import parse_lines

SCENARIOS = pathlib.Path(__file__).resolve().parent.parent / "scenarios"
CORPUS = sorted(p.name for p in SCENARIOS.glob("*.json"))

_runs: dict[str, tuple[list[str], float]] = {}


def fixture_text(name: str) -> str:
    return (SCENARIOS / name).read_text()


def run_fixture(name: str) -> tuple[list[str], float]:
    """Run a corpus scenario once per session; returns (lines, wall seconds)."""
    if name not in _runs:
        t0 = time.perf_counter()
        eng = Engine(parse_scenario(fixture_text(name)))
        eng.run()
        _runs[name] = (eng.writer.lines, time.perf_counter() - t0)
    return _runs[name]


def ledger_of(name: str):
    lines, _ = run_fixture(name)
    return build_ledger(list(parse_lines(lines)))


def availability_in(name: str, window) -> float:
    return build_report(ledger_of(name), window=window).availability


# -- throughput ceilings -----------------------------------------------------


@pytest.mark.parametrize("n,name", [(2, "layered_2.json"), (3, "layered_3.json"), (5, "layered_5.json")])
def test_chain_throughput_is_set_by_total_chain_work(n, name):
    # one request in flight end to end: ceiling = 1 / (n * 10ms)
    lines, wall = run_fixture(name)
    report = build_report(build_ledger(list(parse_lines(lines))))
    target = 1e6 / (n * 10_000)
    assert abs(report.throughput_rps - target) <= 0.02 * target
    assert wall < 5.0


def test_chain_throughput_decreases_with_depth():
    measured = [
        build_report(ledger_of(f"layered_{n}.json")).throughput_rps
        for n in (2, 3, 5)
    ]
    assert measured == sorted(measured, reverse=True)
    assert len(set(measured)) == 3


def test_pipeline_outruns_the_equivalent_chain():
    pipe = build_report(ledger_of("pipeline_4.json")).throughput_rps
    chain = build_report(ledger_of("layered_4.json")).throughput_rps
    assert abs(pipe - 100.0) <= 2.0
    assert abs(chain - 25.0) <= 0.5
    assert pipe / chain >= 3.9


def test_slowest_stage_sets_the_pipeline_pace():
    thr = build_report(ledger_of("pipeline_bottleneck.json")).throughput_rps
    target = 1e6 / 30_000
    assert abs(thr - target) <= 0.02 * target


def test_replicating_the_bottleneck_restores_throughput():
    thr = build_report(ledger_of("pipeline_bottleneck_x3.json")).throughput_rps
    assert abs(thr - 100.0) <= 5.0


# -- directory outages -------------------------------------------------------


def test_lone_directory_outage_blocks_every_request():
    assert availability_in("cs_spof.json", (0, 20_000_000)) == 1.0
    assert availability_in("cs_spof.json", (20_000_000, 40_000_000)) == 0.0
    assert availability_in("cs_spof.json", (40_000_000, 60_000_000)) == 1.0


def test_second_directory_carries_its_own_clients_through_an_outage():
    outage = (20_000_000, 40_000_000)
    assert availability_in("cs_two_dirs.json", outage) >= 0.5

    # clients are assigned to directories alternately; directory_0 is down
    outcomes: dict[str, set[str]] = {}
    for rec in ledger_of("cs_two_dirs.json").records.values():
        if outage[0] <= rec.submitted_at < outage[1]:
            outcomes.setdefault(rec.client, set()).add(rec.outcome)
    assert outcomes["client_1"] == {"success"}
    assert outcomes["client_3"] == {"success"}
    assert "success" not in outcomes["client_0"]
    assert "success" not in outcomes["client_2"]


# -- worker pools ------------------------------------------------------------


def worker_count_at(lines: list[dict], t: int) -> int:
    alive: dict[str, bool] = {}
    for line in lines:
        if line["t"] > t:
            break
        if line["type"] in ("spawn", "restart") and line.get("role") == "worker":
            alive[line["comp"]] = True
        elif line["type"] in ("crash", "stop") and line["comp"] in alive:
            alive[line["comp"]] = False
    return sum(alive.values())


def test_worker_pool_grows_to_meet_demand():
    lines, _ = run_fixture("leader_elastic.json")
    parsed = list(parse_lines(lines))
    assert worker_count_at(parsed, 5_000_000) >= 3


def test_worker_pool_shrinks_when_demand_drops():
    # load falls off a cliff at 10s; idle checks run once a second
    lines, _ = run_fixture("leader_elastic.json")
    parsed = list(parse_lines(lines))
    assert worker_count_at(parsed, 13_000_000) <= 2

    stops = [l for l in parsed if l["type"] == "stop"]
    assert stops and all(l["reason"] == "idle" for l in stops)

    low = min(worker_count_at(parsed, l["t"]) for l in parsed)
    assert low >= 1


def test_leader_outage_blocks_dispatch():
    assert availability_in("leader_spof.json", (0, 20_000_000)) == 1.0
    assert availability_in("leader_spof.json", (20_000_000, 40_000_000)) == 0.0
    assert availability_in("leader_spof.json", (40_000_000, 60_000_000)) == 1.0


def test_losing_one_of_two_workers_is_absorbed():
    report = build_report(ledger_of("leader_worker_crash.json"))
    assert report.availability == 1.0
    assert report.counts["success"] == report.counts["submitted"]


# -- overlay guarantees ------------------------------------------------------


def test_every_overlay_request_gets_an_answer():
    ledger = ledger_of("p2p_lifetime.json")
    report = build_report(ledger)
    assert report.counts["submitted"] >= 10_000
    assert report.counts["timeout"] == 0
    assert report.counts["censored"] == 0
    for rec in ledger.records.values():
        assert rec.resolved_at is not None
        assert rec.outcome in ("success", "failure")
        if rec.outcome == "failure":
            assert rec.reason == "ttl_expired"
    # both outcomes actually occur under this topology
    assert report.counts["success"] > 0
    assert report.counts["failure"] > 0


def test_unreachable_handler_still_produces_failure_replies():
    # the ring places the one handler past the hop budget from the entry
    ledger = ledger_of("p2p_handler_far.json")
    report = build_report(ledger)
    assert report.counts["submitted"] > 0
    assert report.counts["success"] == 0
    assert report.counts["timeout"] == 0
    assert report.counts["failure"] == report.counts["submitted"]
    assert {rec.reason for rec in ledger.records.values()} == {"ttl_expired"}


def client_view(name: str) -> list[dict]:
    lines, _ = run_fixture(name)
    view = []
    for line in parse_lines(lines):
        if line.get("comp") == "client_0":
            line = dict(line)
            line.pop("seq")
            view.append(line)
    return view


def test_silently_dropping_peer_reads_like_a_crashed_one():
    silent = client_view("p2p_silentdrop.json")
    crashed = client_view("p2p_crash.json")
    assert silent == crashed

    resolves = [l for l in silent if l["type"] == "resolve"]
    assert any(l["outcome"] == "success" and l["t"] < 10_000_000 for l in resolves)
    post = [l for l in resolves if l["t"] > 10_000_000 + 5_000_000]
    assert post and all(l["outcome"] == "timeout" for l in post)


@pytest.mark.parametrize("peer", range(8))
def test_no_single_peer_is_critical(peer):
    doc = json.loads(fixture_text("p2p_nospof.json"))
    doc["faults"][0]["target"] = f"peer_{peer}"
    eng = Engine(parse_scenario(json.dumps(doc)))
    eng.run()
    ledger = build_ledger(list(parse_lines(eng.writer.lines)))
    # judged after the overlay has had a maintenance round to heal
    report = build_report(ledger, window=(12_000_000, 40_000_000))
    assert report.availability >= 0.95


# -- reproducibility ---------------------------------------------------------


@pytest.mark.parametrize("name", CORPUS)
def test_same_seed_gives_identical_bytes(name):
    first, _ = run_fixture(name)
    eng = Engine(parse_scenario(fixture_text(name)))
    eng.run()
    assert eng.writer.lines == first


@pytest.mark.parametrize("name", CORPUS)
def test_trace_replays_and_corruption_is_caught(name):
    lines, _ = run_fixture(name)
    replay_lines(lines)

    target = max(1, len(lines) // 4)
    line = lines[target]
    for i, ch in enumerate(line):
        if ch.isdigit() and line[i - 4 : i] != '"t":':
            corrupt = line[:i] + str((int(ch) + 1) % 10) + line[i + 1 :]
            break
    with pytest.raises(ReplayDivergence):
        replay_lines(lines[:target] + [corrupt] + lines[target + 1 :])


# -- change impact -----------------------------------------------------------


@pytest.mark.parametrize(
    "name",
    ["layered_2.json", "layered_3.json", "layered_4.json", "layered_5.json",
     "pipeline_4.json", "pipeline_bottleneck.json"],
)
def test_change_impact_stays_within_the_immediate_neighbourhood(name):
    topo = build_topology(parse_scenario(fixture_text(name)))
    names = [spec.name for spec in topo.specs]
    for i, spec in enumerate(topo.specs):
        closed = {names[i]}
        closed.update(names[r] for r in topo.references(i))
        closed.update(names[j] for j in range(len(names)) if i in topo.references(j))
        impact = change_impact(topo, spec.name)
        assert impact.affected <= closed
        assert len(impact.affected) <= 3
