"""Topology construction and analysis.

A topology is an ordered list of component specs; the list index is the
component's ordinal. Wiring is expressed inside each config as ordinals,
which doubles as a directed reference graph: u references v when u's config
names v. That graph drives validation and change-impact analysis.

Builders exist per style and raise typed errors on malformed parameters.
validate_topology re-checks a built (or hand-assembled) topology and
returns violations as data rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .behaviors.client import ClientConfig
from .behaviors.clientserver import DirectoryConfig, ServiceConfig
from .behaviors.layer import LayerConfig
from .behaviors.leaderfollower import LeaderConfig, WorkerConfig
from .behaviors.p2p import PeerConfig
from .behaviors.pipeline import FilterConfig, SinkConfig
from .distributions import Constant, DurationDistribution
from .errors import (
    BadReplication,
    BadWorkerBounds,
    DegreeInfeasible,
    EmptyCatalogue,
    TooFewLayers,
    UnknownComponent,
)
from .rng import Pcg32

STYLES = ("layered", "pipeline", "client_server", "leader_follower", "p2p")


@dataclass(frozen=True, slots=True)
class ComponentSpec:
    name: str
    role: str
    config: Any


@dataclass(frozen=True, slots=True)
class Violation:
    code: str
    detail: str


@dataclass(frozen=True, slots=True)
class ImpactSet:
    changed: str
    affected: frozenset[str]


@dataclass(slots=True)
class Topology:
    style: str
    specs: list[ComponentSpec] = field(default_factory=list)

    def add(self, spec: ComponentSpec) -> int:
        self.specs.append(spec)
        return len(self.specs) - 1

    def ordinal_of(self, name: str) -> int:
        for i, spec in enumerate(self.specs):
            if spec.name == name:
                return i
        raise UnknownComponent(name)

    def references(self, ordinal: int) -> tuple[int, ...]:
        """Ordinals that this component's wiring names."""
        cfg = self.specs[ordinal].config
        role = self.specs[ordinal].role
        if role == "layer":
            return tuple(o for o in (cfg.prev, cfg.next) if o is not None)
        if role == "filter":
            return tuple(cfg.next)
        if role == "directory":
            out: list[int] = []
            for instances in cfg.catalogue.values():
                out.extend(instances)
            return tuple(dict.fromkeys(out))
        if role == "leader":
            return tuple(cfg.initial_workers)
        if role == "worker":
            return (cfg.leader,)
        if role == "peer":
            return tuple(cfg.initial_neighbours)
        if role == "client":
            return tuple(cfg.entries)
        return ()

    def reference_edges(self) -> list[tuple[int, int]]:
        edges = []
        for u in range(len(self.specs)):
            for v in self.references(u):
                edges.append((u, v))
        return edges


# -- builders ------------------------------------------------------------


def _add_clients(topo: Topology, client_cfgs: list[ClientConfig]) -> None:
    for i, cfg in enumerate(client_cfgs):
        topo.add(ComponentSpec(f"client_{i}", "client", cfg))


def build_layered(
    layers: list[tuple[str, DurationDistribution, DurationDistribution]],
    clients: list[dict],
) -> Topology:
    """layers: ordered (name, proc_in, proc_out) triples, top first."""
    if len(layers) < 2:
        raise TooFewLayers(f"a layered system needs at least 2 layers, got {len(layers)}")
    topo = Topology("layered")
    n = len(layers)
    for i, (name, proc_in, proc_out) in enumerate(layers):
        cfg = LayerConfig(
            prev=i - 1 if i > 0 else None,
            next=i + 1 if i < n - 1 else None,
            proc_in=proc_in,
            proc_out=proc_out,
        )
        topo.add(ComponentSpec(name, "layer", cfg))
    _add_clients(topo, _client_configs(clients, entries=[0]))
    return topo


def build_pipeline(
    stages: list[tuple[str, DurationDistribution]],
    replication: dict[int, int],
    clients: list[dict],
) -> Topology:
    """stages: ordered (name, proc) pairs; replication: stage index -> count."""
    if len(stages) < 1:
        raise BadReplication("a pipeline needs at least one stage")
    for idx, count in replication.items():
        if idx < 0 or idx >= len(stages):
            raise BadReplication(f"replication names stage {idx}, but stages run 0..{len(stages) - 1}")
        if count < 1:
            raise BadReplication(f"stage {idx} replicated x{count}; counts start at 1")
    topo = Topology("pipeline")
    stage_ordinals: list[list[int]] = []
    plan: list[tuple[str, DurationDistribution, int]] = [
        (name, proc, replication.get(i, 1)) for i, (name, proc) in enumerate(stages)
    ]
    for name, proc, count in plan:
        ordinals = []
        for r in range(count):
            replica_name = name if count == 1 else f"{name}_{r}"
            ordinals.append(topo.add(ComponentSpec(replica_name, "filter", FilterConfig(next=(), proc=proc))))
        stage_ordinals.append(ordinals)
    sink = topo.add(ComponentSpec("sink", "sink", SinkConfig()))
    # wire each replica to the whole next stage; final stage feeds the sink
    for s, ordinals in enumerate(stage_ordinals):
        targets = tuple(stage_ordinals[s + 1]) if s + 1 < len(stage_ordinals) else (sink,)
        for o in ordinals:
            spec = topo.specs[o]
            topo.specs[o] = ComponentSpec(spec.name, spec.role, FilterConfig(next=targets, proc=spec.config.proc))
    _add_clients(topo, _client_configs(clients, entries=stage_ordinals[0]))
    return topo


def build_client_server(
    directories: list[tuple[str, list[str], DurationDistribution]],
    services: dict[str, tuple[int, DurationDistribution]],
    clients: list[dict],
) -> Topology:
    """directories: (name, catalogue service names, route_delay); services: name -> (count, proc)."""
    if not directories:
        raise EmptyCatalogue("at least one directory is required")
    topo = Topology("client_server")
    dir_ordinals = []
    for name, _, _ in directories:
        dir_ordinals.append(topo.add(ComponentSpec(name, "directory", None)))
    instance_ordinals: dict[str, list[int]] = {}
    for svc_name in sorted(services):
        count, proc = services[svc_name]
        if count < 1:
            raise EmptyCatalogue(f"service {svc_name!r} declared with zero instances")
        instance_ordinals[svc_name] = [
            topo.add(ComponentSpec(f"{svc_name}_{i}", "service", ServiceConfig(proc=proc)))
            for i in range(count)
        ]
    for d, (name, listed, route_delay) in enumerate(directories):
        catalogue: dict[str, tuple[int, ...]] = {}
        for svc_name in listed:
            if svc_name not in instance_ordinals:
                raise EmptyCatalogue(f"directory {name!r} lists unknown service {svc_name!r}")
            catalogue[svc_name] = tuple(instance_ordinals[svc_name])
        if not catalogue:
            raise EmptyCatalogue(f"directory {name!r} has an empty catalogue")
        o = dir_ordinals[d]
        topo.specs[o] = ComponentSpec(name, "directory", DirectoryConfig(catalogue=catalogue, route_delay=route_delay))
    # clients are split across directories round-robin
    cfgs = []
    for i, c in enumerate(clients):
        cfgs.extend(_client_configs([c], entries=[dir_ordinals[i % len(dir_ordinals)]]))
    _add_clients(topo, cfgs)
    return topo


def build_leader_follower(leader_cfg: dict, clients: list[dict]) -> Topology:
    initial = leader_cfg["initial_workers"]
    min_w = leader_cfg.get("min_workers", 1)
    max_w = leader_cfg.get("max_workers", 8)
    if min_w < 1 or max_w < min_w:
        raise BadWorkerBounds(f"need 1 <= min_workers <= max_workers, got [{min_w}, {max_w}]")
    if not (min_w <= initial <= max_w):
        raise BadWorkerBounds(f"initial worker count {initial} outside [{min_w}, {max_w}]")
    fanout_k = leader_cfg.get("fanout_k", 1)
    if leader_cfg.get("fanout_mode", "single") != "single" and fanout_k > max_w:
        raise BadWorkerBounds(f"fanout k={fanout_k} exceeds max_workers={max_w}")
    topo = Topology("leader_follower")
    leader_ordinal = topo.add(ComponentSpec("leader", "leader", None))
    worker_ordinals = [
        topo.add(ComponentSpec(f"worker_{i}", "worker", WorkerConfig(leader=leader_ordinal, proc=leader_cfg["worker_proc"])))
        for i in range(initial)
    ]
    cfg = LeaderConfig(
        initial_workers=tuple(worker_ordinals),
        worker_proc=leader_cfg["worker_proc"],
        policy=leader_cfg.get("policy", "round_robin"),
        fanout_mode=leader_cfg.get("fanout_mode", "single"),
        fanout_k=fanout_k,
        min_workers=min_w,
        max_workers=max_w,
        idle_check_period=leader_cfg.get("idle_check_period", 1_000_000),
        idle_stop_threshold=leader_cfg.get("idle_stop_threshold", 500_000),
        spawn_delay=leader_cfg.get("spawn_delay", 0),
    )
    topo.specs[leader_ordinal] = ComponentSpec("leader", "leader", cfg)
    _add_clients(topo, _client_configs(clients, entries=[leader_ordinal]))
    return topo


def build_p2p(
    n: int,
    target_degree: int,
    peer_params: dict,
    capabilities: dict[int, list[str]],
    clients: list[dict],
    rng: Pcg32,
) -> Topology:
    """Ring for minimum connectivity, then random chords up to target degree."""
    if n < 2:
        raise DegreeInfeasible(f"an overlay needs at least 2 peers, got {n}")
    if target_degree < 1 or target_degree >= n:
        raise DegreeInfeasible(f"need 1 <= degree < n, got degree {target_degree} with n={n}")
    if target_degree < 2 and n > 2:
        raise DegreeInfeasible("degree 1 cannot keep more than 2 peers connected; the ring needs 2")

    adj: dict[int, set[int]] = {i: set() for i in range(n)}
    if n == 2:
        adj[0].add(1)
        adj[1].add(0)
    else:
        for i in range(n):
            j = (i + 1) % n
            adj[i].add(j)
            adj[j].add(i)
    # chords: repeatedly link the lowest-degree deficient node to a sampled
    # non-adjacent deficient node (falling back to any non-adjacent node)
    while True:
        deficient = sorted(i for i in range(n) if len(adj[i]) < target_degree)
        if not deficient:
            break
        u = deficient[0]
        candidates = [v for v in deficient if v != u and v not in adj[u]]
        if not candidates:
            candidates = [v for v in range(n) if v != u and v not in adj[u]]
        if not candidates:
            break  # u is adjacent to everyone already
        v = candidates[rng.next_below(len(candidates))]
        adj[u].add(v)
        adj[v].add(u)
        if len(adj[u]) >= target_degree and len(deficient) == 1:
            break

    topo = Topology("p2p")
    for i in range(n):
        cfg = PeerConfig(
            initial_neighbours=tuple(sorted(adj[i])),
            can_handle=frozenset(capabilities.get(i, [])),
            proc=peer_params.get("proc", Constant(1_000)),
            forward_fanout=peer_params.get("forward_fanout", 2),
            maintenance_period=peer_params.get("maintenance_period", 1_000_000),
            churn_probability=peer_params.get("churn_probability", 0.0),
            target_degree=target_degree,
        )
        topo.add(ComponentSpec(f"peer_{i}", "peer", cfg))
    cfgs = []
    for c in clients:
        entry_idx = c.get("entry_peers") or list(range(n))
        cfgs.extend(_client_configs([c], entries=list(entry_idx)))
    _add_clients(topo, cfgs)
    return topo


def _client_configs(clients: list[dict], entries: list[int]) -> list[ClientConfig]:
    cfgs = []
    for c in clients:
        cfgs.append(
            ClientConfig(
                loop=c.get("loop", "open"),
                delay=c["delay"],
                timeout=c.get("timeout", 5_000_000),
                entries=tuple(c.get("entries", entries)),
                service=c.get("service", "work"),
                ttl_hops=c.get("ttl_hops"),
                active_from=c.get("active_from", 0),
                active_until=c.get("active_until"),
            )
        )
    return cfgs


# -- validation ------------------------------------------------------------


def validate_topology(topo: Topology) -> list[Violation]:
    v: list[Violation] = []
    n = len(topo.specs)
    roles = [s.role for s in topo.specs]

    def alive_index(o: int) -> bool:
        return 0 <= o < n

    for i, spec in enumerate(topo.specs):
        for r in topo.references(i):
            if not alive_index(r):
                v.append(Violation("dangling_reference", f"{spec.name} references ordinal {r}, which does not exist"))

    if topo.style == "layered":
        layer_ords = [i for i, r in enumerate(roles) if r == "layer"]
        if len(layer_ords) < 2:
            v.append(Violation("too_few_layers", f"{len(layer_ords)} layers"))
        for i in layer_ords:
            cfg = topo.specs[i].config
            if cfg.prev is not None and (not alive_index(cfg.prev) or topo.specs[cfg.prev].config.next != i):
                v.append(Violation("broken_chain", f"{topo.specs[i].name} and its upper neighbour disagree"))
            if cfg.next is not None and (not alive_index(cfg.next) or topo.specs[cfg.next].config.prev != i):
                v.append(Violation("broken_chain", f"{topo.specs[i].name} and its lower neighbour disagree"))

    if topo.style == "pipeline":
        sinks = [i for i, r in enumerate(roles) if r == "sink"]
        if len(sinks) != 1:
            v.append(Violation("bad_sink", f"expected exactly one sink, found {len(sinks)}"))
        for i, r in enumerate(roles):
            if r == "filter" and not topo.specs[i].config.next:
                v.append(Violation("dead_end_filter", f"{topo.specs[i].name} forwards to nothing"))

    if topo.style == "client_server":
        for i, r in enumerate(roles):
            if r == "directory":
                for svc, instances in topo.specs[i].config.catalogue.items():
                    if not instances:
                        v.append(Violation("empty_catalogue", f"{topo.specs[i].name} lists {svc!r} with no instances"))
                    for o in instances:
                        if not alive_index(o) or roles[o] != "service":
                            v.append(Violation("bad_catalogue", f"{topo.specs[i].name} routes {svc!r} to non-service"))

    if topo.style == "leader_follower":
        leaders = [i for i, r in enumerate(roles) if r == "leader"]
        if len(leaders) != 1:
            v.append(Violation("bad_leader_count", f"expected exactly one leader, found {len(leaders)}"))

    if topo.style == "p2p":
        for i, r in enumerate(roles):
            if r == "peer":
                for nb in topo.specs[i].config.initial_neighbours:
                    if not alive_index(nb) or roles[nb] != "peer":
                        v.append(Violation("bad_neighbour", f"{topo.specs[i].name} links to a non-peer"))
                    elif i not in topo.specs[nb].config.initial_neighbours:
                        v.append(Violation("asymmetric", f"{topo.specs[i].name} -> {topo.specs[nb].name} has no reverse link"))
        peer_ords = [i for i, r in enumerate(roles) if r == "peer"]
        if peer_ords and not _connected(topo, peer_ords):
            v.append(Violation("disconnected", "the peer overlay is not connected"))

    return v


def _connected(topo: Topology, peer_ords: list[int]) -> bool:
    start = peer_ords[0]
    seen = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for nb in topo.specs[u].config.initial_neighbours:
            if nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return seen >= set(peer_ords)


# -- impact ---------------------------------------------------------------


def change_impact(topo: Topology, name: str) -> ImpactSet:
    changed = topo.ordinal_of(name)
    affected = {changed}
    for u in range(len(topo.specs)):
        if changed in topo.references(u):
            affected.add(u)
    return ImpactSet(changed=name, affected=frozenset(topo.specs[o].name for o in affected))
