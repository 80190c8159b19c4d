"""Request ledger and derived measures.

The ledger is rebuilt from a trace, never kept as live engine state: the
trace is the single source of truth, so anything measured here is measurable
by any other consumer of the same bytes.

Windows are half-open [start, end) microsecond intervals. Availability
attributes a request to the window containing its submission; throughput
attributes a success to the window containing its resolution. Percentiles
use nearest-rank on the sorted success latencies. Utilization is the union
of a component's busy intervals clipped to the window.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import EmptyWindow, MalformedTrace, UnknownComponent
from .ids import SimTime, US_PER_S

SUCCESS = "success"
FAILURE = "failure"
TIMEOUT = "timeout"


@dataclass(slots=True)
class RequestRecord:
    request_id: int
    client: str
    submitted_at: SimTime
    resolved_at: Optional[SimTime] = None
    outcome: Optional[str] = None
    reason: Optional[str] = None
    latency_us: Optional[int] = None
    hops: int = 0
    censored: bool = False


@dataclass(slots=True)
class Ledger:
    horizon: SimTime
    records: dict[int, RequestRecord] = field(default_factory=dict)
    busy: dict[str, list[tuple[SimTime, SimTime]]] = field(default_factory=dict)
    components: dict[str, str] = field(default_factory=dict)  # label -> role
    dup_discards: int = 0
    dup_suppressions: int = 0

    def ordered(self) -> list[RequestRecord]:
        return [self.records[k] for k in sorted(self.records)]


def build_ledger(lines: list[dict], horizon: SimTime | None = None) -> Ledger:
    if horizon is None:
        if not lines or lines[0].get("type") != "header":
            raise MalformedTrace("no horizon given and no header line to take it from")
        horizon = lines[0]["scenario"]["duration_us"]
    ledger = Ledger(horizon=horizon)
    open_proc: dict[str, dict[int, SimTime]] = {}
    for line in lines:
        t, type_, comp = line["t"], line["type"], line["comp"]
        if type_ in ("spawn", "restart"):
            ledger.components[comp] = line["role"]
        elif type_ == "submit":
            req = line["req"]
            if req in ledger.records:
                raise MalformedTrace(f"request {req} submitted twice")
            ledger.records[req] = RequestRecord(request_id=req, client=comp, submitted_at=t)
        elif type_ == "resolve":
            req = line["req"]
            rec = ledger.records.get(req)
            if rec is None:
                raise MalformedTrace(f"request {req} resolved without a submission")
            if rec.outcome is not None:
                raise MalformedTrace(f"request {req} resolved twice")
            rec.resolved_at = t
            rec.outcome = line["outcome"]
            rec.latency_us = line["latency_us"]
            rec.reason = line.get("reason")
        elif type_ == "deliver":
            req = line.get("req")
            rec = ledger.records.get(req)
            if rec is not None:
                rec.hops += 1
        elif type_ == "proc_start":
            open_proc.setdefault(comp, {})[line["req"]] = t
        elif type_ == "proc_end":
            started = open_proc.get(comp, {}).pop(line["req"], None)
            if started is not None:
                ledger.busy.setdefault(comp, []).append((started, t))
        elif type_ in ("crash", "stop"):
            for started in open_proc.pop(comp, {}).values():
                ledger.busy.setdefault(comp, []).append((started, t))
        elif type_ == "dup_discard":
            ledger.dup_discards += 1
        elif type_ == "dup_suppressed":
            ledger.dup_suppressions += 1
    for comp, cut in open_proc.items():
        for started in cut.values():
            ledger.busy.setdefault(comp, []).append((started, max(started, horizon)))
    for rec in ledger.records.values():
        if rec.outcome is None:
            rec.outcome = TIMEOUT
            rec.resolved_at = horizon
            rec.latency_us = horizon - rec.submitted_at
            rec.censored = True
    return ledger


def _check_window(ledger: Ledger, window: tuple[SimTime, SimTime]) -> tuple[SimTime, SimTime]:
    start, end = window
    if start < 0 or end > ledger.horizon or start >= end:
        raise EmptyWindow(f"window [{start}, {end}) does not fit inside [0, {ledger.horizon})")
    return start, end


def throughput(ledger: Ledger, window: tuple[SimTime, SimTime]) -> float:
    start, end = _check_window(ledger, window)
    done = sum(
        1
        for rec in ledger.records.values()
        if rec.outcome == SUCCESS and start <= rec.resolved_at < end
    )
    return done * US_PER_S / (end - start)


def availability(ledger: Ledger, window: tuple[SimTime, SimTime]) -> float:
    start, end = _check_window(ledger, window)
    submitted = [rec for rec in ledger.records.values() if start <= rec.submitted_at < end]
    if not submitted:
        raise EmptyWindow(f"no submissions in [{start}, {end})")
    good = sum(1 for rec in submitted if rec.outcome == SUCCESS)
    return good / len(submitted)


def _merged(intervals: list[tuple[SimTime, SimTime]]) -> list[tuple[SimTime, SimTime]]:
    out: list[tuple[SimTime, SimTime]] = []
    for s, e in sorted(intervals):
        if out and s <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], e))
        else:
            out.append((s, e))
    return out


def utilization(ledger: Ledger, component: str, window: tuple[SimTime, SimTime]) -> float:
    start, end = _check_window(ledger, window)
    if component not in ledger.components:
        raise UnknownComponent(component)
    busy = 0
    for s, e in _merged(ledger.busy.get(component, [])):
        busy += max(0, min(e, end) - max(s, start))
    return busy / (end - start)


def max_in_flight(ledger: Ledger) -> int:
    steps = []
    for rec in ledger.records.values():
        steps.append((rec.submitted_at, 1))
        steps.append((rec.resolved_at, -1))
    steps.sort(key=lambda p: (p[0], p[1]))  # resolutions first on ties
    level = peak = 0
    for _, delta in steps:
        level += delta
        peak = max(peak, level)
    return peak


def percentile(sorted_values: list[int], p: float) -> int:
    if not sorted_values:
        raise EmptyWindow("no values to take a percentile of")
    rank = max(1, math.ceil(p / 100.0 * len(sorted_values)))
    return sorted_values[rank - 1]


@dataclass(frozen=True, slots=True)
class MetricsReport:
    window: tuple[SimTime, SimTime]
    throughput_rps: float
    availability: Optional[float]
    latency_p50_us: Optional[int]
    latency_p95_us: Optional[int]
    latency_max_us: Optional[int]
    max_in_flight: int
    counts: dict
    utilization: dict  # component label -> fraction

    def to_json(self) -> str:
        doc = {
            "window_us": list(self.window),
            "throughput_rps": self.throughput_rps,
            "availability": self.availability,
            "latency_p50_us": self.latency_p50_us,
            "latency_p95_us": self.latency_p95_us,
            "latency_max_us": self.latency_max_us,
            "max_in_flight": self.max_in_flight,
            "counts": self.counts,
            "utilization": self.utilization,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def to_csv(self) -> str:
        def cell(value) -> str:
            if value is None:
                return ""
            if isinstance(value, float):
                return repr(value)
            return str(value)

        rows = ["metric,component,value"]
        rows.append(f"window_start_us,,{self.window[0]}")
        rows.append(f"window_end_us,,{self.window[1]}")
        rows.append(f"throughput_rps,,{cell(self.throughput_rps)}")
        rows.append(f"availability,,{cell(self.availability)}")
        rows.append(f"latency_p50_us,,{cell(self.latency_p50_us)}")
        rows.append(f"latency_p95_us,,{cell(self.latency_p95_us)}")
        rows.append(f"latency_max_us,,{cell(self.latency_max_us)}")
        rows.append(f"max_in_flight,,{self.max_in_flight}")
        for key in sorted(self.counts):
            rows.append(f"count_{key},,{self.counts[key]}")
        for comp in sorted(self.utilization):
            rows.append(f"utilization,{comp},{cell(self.utilization[comp])}")
        return "\n".join(rows) + "\n"


def build_report(ledger: Ledger, window: tuple[SimTime, SimTime] | None = None) -> MetricsReport:
    if window is None:
        window = (0, ledger.horizon)
    start, end = _check_window(ledger, window)
    latencies = sorted(
        rec.latency_us
        for rec in ledger.records.values()
        if rec.outcome == SUCCESS and start <= rec.resolved_at < end
    )
    counts = {"submitted": 0, SUCCESS: 0, FAILURE: 0, TIMEOUT: 0, "censored": 0}
    for rec in ledger.records.values():
        if start <= rec.submitted_at < end:
            counts["submitted"] += 1
            counts[rec.outcome] += 1
            if rec.censored:
                counts["censored"] += 1
    counts["dup_discard"] = ledger.dup_discards
    counts["dup_suppressed"] = ledger.dup_suppressions
    try:
        avail = availability(ledger, window)
    except EmptyWindow:
        avail = None
    util = {
        comp: utilization(ledger, comp, window)
        for comp in sorted(ledger.components)
        if ledger.components[comp] != "client"
    }
    return MetricsReport(
        window=(start, end),
        throughput_rps=throughput(ledger, window),
        availability=avail,
        latency_p50_us=percentile(latencies, 50) if latencies else None,
        latency_p95_us=percentile(latencies, 95) if latencies else None,
        latency_max_us=latencies[-1] if latencies else None,
        max_in_flight=max_in_flight(ledger),
        counts=counts,
        utilization=util,
    )
