"""Replay: a trace must regenerate itself byte for byte from its header."""

import json

import pytest

from helpers import const, layered_doc, p2p_doc
from stylesim.engine import Engine
from stylesim.errors import MalformedTrace, ReplayDivergence
from stylesim.replay import replay_file, replay_lines
from stylesim.scenario import parse_scenario


def run_engine(doc):
    eng = Engine(parse_scenario(json.dumps(doc)))
    eng.run()
    return eng


def test_plain_run_replays_cleanly():
    eng = run_engine(
        layered_doc(n=3, clients=[{"delay": const(50_000)}], duration_us=400_000)
    )
    assert replay_lines(eng.writer.lines) == len(eng.writer.lines)


def test_randomized_run_replays_cleanly():
    eng = run_engine(
        p2p_doc(
            peers=8,
            degree=3,
            handlers={"2": ["work"]},
            clients=[{"delay": const(20_000), "ttl_hops": 4, "timeout_us": 100_000}],
            duration_us=500_000,
        )
    )
    assert replay_lines(eng.writer.lines) == len(eng.writer.lines)


def test_controls_are_replayed_at_their_recorded_positions():
    eng = Engine(
        parse_scenario(
            json.dumps(layered_doc(n=2, clients=[{"delay": const(40_000)}], duration_us=300_000))
        )
    )
    eng.schedule_control({"op": "inject", "count": 2}, "c1", at=50_000)
    eng.schedule_control({"op": "set_rate", "rps": 50}, "c2", at=120_000)
    eng.run()
    assert any('"type":"control"' in line for line in eng.writer.lines)
    assert replay_lines(eng.writer.lines) == len(eng.writer.lines)


def corrupt(line: str) -> str:
    for old, new in (("0", "1"), ("1", "2"), ("a", "b")):
        if old in line.split("}")[0]:
            return line.replace(old, new, 1)
    raise AssertionError(f"nothing to corrupt in {line!r}")


def test_single_byte_corruption_is_pinpointed():
    eng = run_engine(
        layered_doc(n=2, clients=[{"delay": const(60_000)}], duration_us=300_000)
    )
    lines = list(eng.writer.lines)
    target = len(lines) // 2
    lines[target] = corrupt(lines[target])
    with pytest.raises(ReplayDivergence) as err:
        replay_lines(lines)
    assert err.value.line_no == target + 1


def test_truncation_is_detected():
    eng = run_engine(
        layered_doc(n=2, clients=[{"delay": const(60_000)}], duration_us=300_000)
    )
    lines = eng.writer.lines[:-1]
    with pytest.raises(ReplayDivergence) as err:
        replay_lines(lines)
    assert err.value.line_no == len(lines) + 1


def test_appended_lines_are_detected():
    eng = run_engine(
        layered_doc(n=2, clients=[{"delay": const(60_000)}], duration_us=300_000)
    )
    lines = list(eng.writer.lines)
    lines.append(lines[-1])
    with pytest.raises(ReplayDivergence) as err:
        replay_lines(lines)
    assert err.value.line_no == len(lines)


def test_tampered_header_scenario_diverges_at_line_one():
    eng = run_engine(
        layered_doc(n=2, clients=[{"delay": const(60_000)}], duration_us=300_000)
    )
    lines = list(eng.writer.lines)
    header = json.loads(lines[0])
    header["scenario"]["seed"] = 999
    lines[0] = json.dumps(header, separators=(",", ":"))
    with pytest.raises(ReplayDivergence) as err:
        replay_lines(lines)
    assert err.value.line_no == 1


def test_header_is_required():
    with pytest.raises(MalformedTrace):
        replay_lines(['{"t":0,"seq":0,"type":"spawn","comp":"x","gen":0}'])
    with pytest.raises(MalformedTrace):
        replay_lines([])


def test_replay_reads_files(tmp_path):
    eng = run_engine(
        layered_doc(n=2, clients=[{"delay": const(60_000)}], duration_us=200_000)
    )
    path = tmp_path / "run.jsonl"
    path.write_text("\n".join(eng.writer.lines) + "\n", encoding="utf-8")
    assert replay_file(str(path)) == len(eng.writer.lines)
