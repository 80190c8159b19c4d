"""Ledger construction and derived measures, on hand-built traces."""

import json

import pytest

from helpers import const, layered_doc, run_doc
from stylesim.errors import EmptyWindow, MalformedTrace, UnknownComponent
from stylesim.metrics import (
    build_ledger,
    build_report,
    availability,
    max_in_flight,
    percentile,
    throughput,
    utilization,
)


def line(t, type_, comp, **payload):
    return {"t": t, "seq": 0, "type": type_, "comp": comp, **payload}


def test_ledger_records_lifecycle_and_censors_the_rest():
    lines = [
        line(100, "submit", "client_0", req=1, entry="a", service="work"),
        line(400, "resolve", "client_0", req=1, outcome="success", latency_us=300),
        line(200, "submit", "client_0", req=2, entry="a", service="work"),
    ]
    ledger = build_ledger(lines, horizon=1_000)
    first, second = ledger.ordered()
    assert first.outcome == "success"
    assert first.latency_us == 300
    assert not first.censored
    assert second.outcome == "timeout"
    assert second.censored
    assert second.resolved_at == 1_000
    assert second.latency_us == 800


def test_ledger_rejects_inconsistent_traces():
    submit = line(1, "submit", "c", req=1, entry="a", service="work")
    resolve = line(2, "resolve", "c", req=1, outcome="success", latency_us=1)
    with pytest.raises(MalformedTrace):
        build_ledger([submit, dict(submit)], horizon=10)
    with pytest.raises(MalformedTrace):
        build_ledger([resolve], horizon=10)
    with pytest.raises(MalformedTrace):
        build_ledger([submit, resolve, dict(resolve)], horizon=10)
    with pytest.raises(MalformedTrace):
        build_ledger([submit], horizon=None)


def test_deliveries_count_as_hops():
    lines = [
        line(0, "submit", "c", req=1, entry="a", service="work"),
        line(1, "deliver", "peer_0", req=1, kind="request"),
        line(2, "deliver", "peer_1", req=1, kind="request"),
        line(3, "deliver", "c", req=1, kind="reply"),
        line(3, "resolve", "c", req=1, outcome="success", latency_us=3),
    ]
    ledger = build_ledger(lines, horizon=10)
    assert ledger.ordered()[0].hops == 3


def successes(ts):
    lines = []
    for i, t in enumerate(ts, start=1):
        lines.append(line(0, "submit", "c", req=i, entry="a", service="work"))
        lines.append(line(t, "resolve", "c", req=i, outcome="success", latency_us=t))
    return lines


def test_throughput_counts_resolutions_in_the_window():
    ledger = build_ledger(successes([100_000 * i for i in range(1, 10)]), horizon=1_000_000)
    assert throughput(ledger, (0, 1_000_000)) == 9.0
    assert throughput(ledger, (0, 500_000)) == 8.0
    assert throughput(ledger, (0, 100_000)) == 0.0  # half-open: 100000 excluded


def test_availability_follows_the_submission():
    lines = [
        line(10, "submit", "c", req=1, entry="a", service="work"),
        line(20, "submit", "c", req=2, entry="a", service="work"),
        line(30, "submit", "c", req=3, entry="a", service="work"),
        line(500, "resolve", "c", req=1, outcome="success", latency_us=490),
        line(40, "resolve", "c", req=2, outcome="failure", reason="x", latency_us=10),
        line(600, "resolve", "c", req=3, outcome="success", latency_us=570),
    ]
    ledger = build_ledger(lines, horizon=1_000)
    assert availability(ledger, (0, 100)) == 2 / 3
    assert availability(ledger, (15, 35)) == 0.5
    with pytest.raises(EmptyWindow):
        availability(ledger, (40, 50))


def test_windows_must_fit_the_run():
    ledger = build_ledger(successes([10]), horizon=100)
    for bad in [(-1, 50), (0, 101), (50, 50), (60, 40)]:
        with pytest.raises(EmptyWindow):
            throughput(ledger, bad)


def test_utilization_merges_concurrent_work():
    lines = [
        line(0, "spawn", "s", gen=0, ordinal=0, role="service"),
        line(0, "proc_start", "s", req=1),
        line(50, "proc_start", "s", req=2),
        line(100, "proc_end", "s", req=1),
        line(150, "proc_end", "s", req=2),
    ]
    ledger = build_ledger(lines, horizon=200)
    assert utilization(ledger, "s", (0, 200)) == 0.75
    assert utilization(ledger, "s", (100, 200)) == 0.5
    with pytest.raises(UnknownComponent):
        utilization(ledger, "ghost", (0, 200))


def test_crash_cuts_open_work_short():
    lines = [
        line(0, "spawn", "s", gen=0, ordinal=0, role="service"),
        line(100, "proc_start", "s", req=1),
        line(150, "crash", "s", gen=0),
    ]
    ledger = build_ledger(lines, horizon=1_000)
    assert utilization(ledger, "s", (0, 1_000)) == 0.05


def test_unfinished_work_runs_to_the_horizon():
    lines = [
        line(0, "spawn", "s", gen=0, ordinal=0, role="service"),
        line(900, "proc_start", "s", req=1),
    ]
    ledger = build_ledger(lines, horizon=1_000)
    assert utilization(ledger, "s", (0, 1_000)) == 0.1


def test_max_in_flight_resolves_before_submitting_on_ties():
    lines = [
        line(0, "submit", "c", req=1, entry="a", service="work"),
        line(10, "resolve", "c", req=1, outcome="success", latency_us=10),
        line(10, "submit", "c", req=2, entry="a", service="work"),
        line(20, "resolve", "c", req=2, outcome="success", latency_us=10),
    ]
    assert max_in_flight(build_ledger(lines, horizon=100)) == 1


def test_percentile_is_nearest_rank():
    values = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
    assert percentile(values, 50) == 50
    assert percentile(values, 95) == 100
    assert percentile(values, 1) == 10
    assert percentile([42], 99) == 42
    with pytest.raises(EmptyWindow):
        percentile([], 50)


def report_fixture_lines():
    return [
        line(0, "spawn", "s", gen=0, ordinal=0, role="service"),
        line(0, "spawn", "client_0", gen=0, ordinal=1, role="client"),
        line(100, "submit", "client_0", req=1, entry="s", service="work"),
        line(150, "submit", "client_0", req=2, entry="s", service="work"),
        line(200, "submit", "client_0", req=3, entry="s", service="work"),
        line(250, "resolve", "client_0", req=2, outcome="failure", reason="x", latency_us=50),
        line(300, "resolve", "client_0", req=1, outcome="success", latency_us=200),
    ]


def test_report_aggregates_counts_and_outcomes():
    ledger = build_ledger(report_fixture_lines(), horizon=1_000_000)
    report = build_report(ledger)
    assert report.throughput_rps == 1.0
    assert report.availability == 1 / 3
    assert report.latency_p50_us == 200
    assert report.latency_p95_us == 200
    assert report.latency_max_us == 200
    assert report.max_in_flight == 3
    assert report.counts == {
        "submitted": 3,
        "success": 1,
        "failure": 1,
        "timeout": 1,
        "censored": 1,
        "dup_discard": 0,
        "dup_suppressed": 0,
    }
    assert report.utilization == {"s": 0.0}


def test_report_csv_shape():
    ledger = build_ledger(report_fixture_lines(), horizon=1_000_000)
    got = build_report(ledger).to_csv()
    assert got == (
        "metric,component,value\n"
        "window_start_us,,0\n"
        "window_end_us,,1000000\n"
        "throughput_rps,,1.0\n"
        "availability,,0.3333333333333333\n"
        "latency_p50_us,,200\n"
        "latency_p95_us,,200\n"
        "latency_max_us,,200\n"
        "max_in_flight,,3\n"
        "count_censored,,1\n"
        "count_dup_discard,,0\n"
        "count_dup_suppressed,,0\n"
        "count_failure,,1\n"
        "count_submitted,,3\n"
        "count_success,,1\n"
        "count_timeout,,1\n"
        "utilization,s,0.0\n"
    )


def test_report_json_is_canonical():
    ledger = build_ledger(report_fixture_lines(), horizon=1_000_000)
    text = build_report(ledger).to_json()
    doc = json.loads(text)
    assert doc["window_us"] == [0, 1_000_000]
    assert doc["availability"] == 1 / 3
    assert list(doc) == sorted(doc)
    assert json.dumps(doc, sort_keys=True, separators=(",", ":")) == text


def test_report_with_no_traffic_leaves_availability_open():
    lines = [line(0, "spawn", "s", gen=0, ordinal=0, role="service")]
    report = build_report(build_ledger(lines, horizon=1_000))
    assert report.availability is None
    assert report.throughput_rps == 0.0
    assert report.latency_p50_us is None
    assert report.max_in_flight == 0
    assert report.counts["submitted"] == 0
    assert "availability,,\n" in report.to_csv()


def test_report_matches_a_real_run():
    doc = layered_doc(
        n=2,
        proc_in=1_000,
        proc_out=0,
        clients=[{"delay": const(100_000)}],
        duration_us=1_000_000,
    )
    _, lines = run_doc(doc)
    report = build_report(build_ledger(lines))
    assert report.throughput_rps == 9.0
    assert report.availability == 1.0
    assert report.latency_p50_us == 2_000
    assert report.latency_max_us == 2_000
    assert report.max_in_flight == 1
    assert report.counts["submitted"] == 9
    assert report.counts["success"] == 9
    assert report.utilization["layer_0"] == 0.009
    assert report.utilization["layer_1"] == 0.009
