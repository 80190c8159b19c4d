"""Shared test scaffolding: scenario builders, trace helpers, a fake Ctx."""

import json

from stylesim.engine import Engine
from stylesim.ids import ComponentId
from stylesim.messages import REQUEST, Message
from stylesim.rng import Pcg32
from stylesim.scenario import parse_scenario
from stylesim.trace import parse_lines


def const(us):
    return {"kind": "constant", "micros": us}


def expo(us):
    return {"kind": "exponential", "mean_micros": us}


def base_doc(style, spec_library, topology, clients, **over):
    doc = {
        "version": "1",
        "seed": 7,
        "duration_us": 1_000_000,
        "style": style,
        "spec_library": spec_library,
        "topology": topology,
        "workload": {"clients": clients},
    }
    doc.update(over)
    return doc


def layered_doc(n=3, proc_in=10_000, proc_out=0, clients=None, **over):
    return base_doc(
        "layered",
        {"plain": {"role": "layer", "proc_in": const(proc_in), "proc_out": const(proc_out)}},
        {"layers": ["plain"] * n},
        clients or [{"delay": const(100_000)}],
        **over,
    )


def pipeline_doc(costs=(10_000, 10_000, 10_000, 10_000), replication=None, clients=None, **over):
    lib = {f"f{i}": {"role": "filter", "proc": const(c)} for i, c in enumerate(costs)}
    topo = {"stages": [f"f{i}" for i in range(len(costs))]}
    if replication:
        topo["replication"] = {str(k): v for k, v in replication.items()}
    return base_doc("pipeline", lib, topo, clients or [{"delay": const(100_000)}], **over)


def cs_doc(directories=1, instances=2, proc=3_000, route=500, clients=None, **over):
    lib = {
        "desk": {"role": "directory", "route_delay": const(route)},
        "box": {"role": "service", "proc": const(proc)},
    }
    topo = {
        "directories": [{"spec": "desk", "services": ["auth"]} for _ in range(directories)],
        "services": {"auth": {"spec": "box", "instances": instances}},
    }
    return base_doc(
        "client_server",
        lib,
        topo,
        clients or [{"delay": const(20_000), "service": "auth"}],
        **over,
    )


def leader_doc(initial=2, proc=50_000, clients=None, leader_spec=None, **over):
    lib = {
        "boss": dict({"role": "leader"}, **(leader_spec or {})),
        "grunt": {"role": "worker", "proc": const(proc)},
    }
    topo = {"leader": "boss", "worker": "grunt", "initial_workers": initial}
    return base_doc("leader_follower", lib, topo, clients or [{"delay": const(100_000)}], **over)


def p2p_doc(peers=8, degree=3, handlers=None, proc=2_000, peer_spec=None, clients=None, **over):
    lib = {"node": dict({"role": "peer", "proc": const(proc)}, **(peer_spec or {}))}
    topo = {
        "peers": peers,
        "peer_spec": "node",
        "target_degree": degree,
        "handlers": handlers if handlers is not None else {"0": ["work"]},
    }
    return base_doc(
        "p2p",
        lib,
        topo,
        clients or [{"delay": const(50_000), "ttl_hops": 4}],
        **over,
    )


def run_doc(doc, topology=None):
    eng = Engine(parse_scenario(json.dumps(doc)), topology=topology)
    eng.run()
    return eng, list(parse_lines(eng.writer.lines))


def of_type(lines, *types):
    return [l for l in lines if l["type"] in types]


def resolves(lines):
    return of_type(lines, "resolve")


def by_comp(lines, comp):
    return [l for l in lines if l["comp"] == comp]


class FakeCtx:
    """Hand-controlled Ctx for poking a behavior directly."""

    def __init__(self, ordinal=0, now=0, roles=None, labels=None, dead=(), seed=1):
        self.now = now
        self.self_id = ComponentId(ordinal, 0)
        self.rng = Pcg32.seeded(seed, 1)
        self.roles = roles or {}
        self.labels = labels or {}
        self.dead = set(dead)
        self._counter = 1000

    def label(self, ordinal):
        return self.labels.get(ordinal, f"comp_{ordinal}")

    def role_of(self, ordinal):
        return self.roles.get(ordinal)

    def is_alive(self, ordinal):
        return ordinal not in self.dead

    def live_ordinals(self, role):
        return sorted(o for o, r in self.roles.items() if r == role and o not in self.dead)

    def reserve_ordinal(self, prefix):
        self._counter += 1
        return self._counter, f"{prefix}{self._counter}"

    def next_request_id(self):
        self._counter += 1
        return self._counter


def request(req_id=1, service="work", origin=99, ttl=None, hops=()):
    path = tuple(ComponentId(o, 0) for o in hops) or (ComponentId(origin, 0),)
    return Message(
        request_id=req_id,
        kind=REQUEST,
        service=service,
        origin_client=ComponentId(origin, 0),
        created_at=0,
        hop_path=path,
        ttl_hops=ttl,
    )
