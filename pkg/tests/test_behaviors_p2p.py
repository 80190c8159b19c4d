"""Peer behavior: flooding, TTL, duplicate suppression, overlay maintenance."""

from helpers import FakeCtx, by_comp, const, of_type, p2p_doc, resolves, run_doc
from stylesim.behaviors.p2p import Peer, PeerConfig
from stylesim.distributions import Constant
from stylesim.ids import ComponentId
from stylesim.messages import Message


def test_flood_reaches_the_handler_once():
    doc = p2p_doc(
        peers=4,
        degree=2,
        handlers={"1": ["work"]},
        proc=2_000,
        clients=[{"delay": const(10_000), "ttl_hops": 4, "entry_peers": [0]}],
        duration_us=15_000,
    )
    _, lines = run_doc(doc)
    done = resolves(lines)
    assert len(done) == 1
    assert done[0]["outcome"] == "success"
    assert done[0]["latency_us"] == 2_000
    assert len(by_comp(of_type(lines, "proc_start"), "peer_1")) == 1
    assert len(by_comp(of_type(lines, "dup_suppressed"), "peer_1")) == 1
    assert not of_type(lines, "ttl_expired")


def test_exhausted_ttl_answers_failure_not_silence():
    doc = p2p_doc(
        peers=4,
        degree=2,
        handlers={},
        clients=[
            {"delay": const(10_000), "ttl_hops": 3, "entry_peers": [0], "timeout_us": 50_000}
        ],
        duration_us=70_000,
    )
    _, lines = run_doc(doc)
    expiries = of_type(lines, "ttl_expired")
    first_wave = [l for l in expiries if l["req"] == 1]
    assert len(first_wave) == 2
    assert all(l["comp"] == "peer_2" for l in first_wave)
    done = resolves(lines)
    assert done
    assert all(r["outcome"] == "failure" and r["reason"] == "ttl_expired" for r in done)
    assert done[0]["t"] == 60_000 and done[0]["latency_us"] == 0
    # both copies expired; expiry is checked before duplicate suppression
    assert not of_type(lines, "dup_suppressed")


def test_dead_end_spends_the_budget_early():
    doc = p2p_doc(
        peers=2,
        degree=1,
        handlers={},
        clients=[
            {"delay": const(10_000), "ttl_hops": 10, "entry_peers": [0], "timeout_us": 30_000}
        ],
        duration_us=50_000,
    )
    _, lines = run_doc(doc)
    assert by_comp(of_type(lines, "ttl_expired"), "peer_1")
    done = resolves(lines)
    assert done and done[0]["outcome"] == "failure" and done[0]["reason"] == "ttl_expired"


def test_silent_peer_swallows_traffic_without_a_trace():
    doc = p2p_doc(
        peers=4,
        degree=2,
        handlers={"1": ["work"]},
        clients=[{"delay": const(10_000), "ttl_hops": 4, "timeout_us": 20_000}],
        duration_us=40_000,
        faults=[{"at_us": 5_000, "target": "peer_1", "kind": "silent_drop_on"}],
    )
    _, lines = run_doc(doc)
    flips = of_type(lines, "silentdrop")
    assert len(flips) == 1
    assert flips[0]["t"] == 5_000 and flips[0]["comp"] == "peer_1" and flips[0]["on"] is True
    after = [l for l in by_comp(lines, "peer_1") if l["t"] > 5_000]
    assert after and all(l["type"] == "deliver" for l in after)
    done = resolves(lines)
    assert [r["outcome"] for r in done] == ["timeout", "timeout"]
    quarantined = [l["entry"] for l in of_type(lines, "entry_quarantined")]
    assert quarantined == ["peer_0", "peer_1"]


def test_maintenance_replaces_dead_neighbours():
    doc = p2p_doc(
        peers=4,
        degree=2,
        handlers={},
        peer_spec={"maintenance_period_us": 50_000},
        clients=[{"delay": const(10_000_000)}],
        duration_us=60_000,
        faults=[{"at_us": 10_000, "target": "peer_1", "kind": "crash"}],
    )
    eng, lines = run_doc(doc)
    rounds = {l["comp"]: l for l in of_type(lines, "maintenance")}
    assert rounds["peer_0"]["removed"] == ["peer_1"]
    assert rounds["peer_0"]["added"] == ["peer_2"]
    assert rounds["peer_2"]["removed"] == ["peer_1"]
    assert rounds["peer_2"]["added"] == []
    assert "peer_3" not in rounds
    assert eng.nodes[0].behavior.neighbours == {2, 3}
    assert eng.nodes[2].behavior.neighbours == {0, 3}
    assert eng.nodes[3].behavior.neighbours == {0, 2}


def test_restarted_peer_rejoins_through_maintenance():
    doc = p2p_doc(
        peers=4,
        degree=2,
        handlers={},
        peer_spec={"maintenance_period_us": 50_000},
        clients=[{"delay": const(10_000_000)}],
        duration_us=120_000,
        faults=[
            {"at_us": 10_000, "target": "peer_1", "kind": "crash"},
            {"at_us": 60_000, "target": "peer_1", "kind": "restart"},
        ],
    )
    eng, lines = run_doc(doc)
    reborn = of_type(lines, "restart")
    assert len(reborn) == 1
    assert reborn[0]["comp"] == "peer_1@1" and reborn[0]["gen"] == 1
    rejoin = [l for l in of_type(lines, "maintenance") if l["comp"] == "peer_1@1"]
    assert len(rejoin) == 1
    assert rejoin[0]["t"] == 110_000
    assert len(rejoin[0]["added"]) == 2 and rejoin[0]["removed"] == []
    neighbours = eng.nodes[1].behavior.neighbours
    assert len(neighbours) == 2
    for n in neighbours:
        assert 1 in eng.nodes[n].behavior.neighbours


def test_forwarding_respects_the_fanout_cap():
    doc = p2p_doc(
        peers=6,
        degree=4,
        handlers={},
        clients=[
            {"delay": const(10_000), "ttl_hops": 3, "entry_peers": [0], "timeout_us": 5_000}
        ],
        duration_us=16_000,
    )
    _, lines = run_doc(doc)
    per_peer: dict[str, int] = {}
    for s in of_type(lines, "send"):
        if s["kind"] == "request" and s["comp"].startswith("peer_"):
            per_peer[s["comp"]] = per_peer.get(s["comp"], 0) + 1
    assert per_peer
    assert max(per_peer.values()) == 2


def test_answer_without_a_return_path_is_a_violation():
    peer = Peer(
        PeerConfig(initial_neighbours=(1,), can_handle=frozenset(), proc=Constant(10))
    )
    stray = Message(
        request_id=1,
        kind="reply",
        service="work",
        origin_client=ComponentId(9, 0),
        created_at=0,
        hop_path=(),
    )
    actions = peer.on_message(stray, ComponentId(1, 0), FakeCtx())
    assert actions[0].type == "protocol_violation"
    assert actions[0].payload["reason"] == "answer with no return path"
