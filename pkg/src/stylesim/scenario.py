"""Scenario files: parsing, validation, defaults, canonical emission.

A scenario is a single JSON document that fully determines a run. Parsing
fills every optional field with its default so the effective scenario can
be re-emitted byte-stably: emit_effective produces canonical JSON (sorted
keys, no insignificant whitespace) and parse(emit_effective(s)) == s.

Validation happens in three passes: structural (against the published
schema), per-entry shape checks with precise paths, and reference checks
(spec names, fault targets, style and parameter coherence).
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass
from importlib import resources

import jsonschema

from .distributions import DurationDistribution, parse_distribution
from .errors import SchemaError, StyleParameterMismatch, UnknownSpecReference
from .rng import AUX_STREAM, derive_stream
from .topology import (
    Topology,
    build_client_server,
    build_layered,
    build_leader_follower,
    build_p2p,
    build_pipeline,
)

_SCHEMA = json.loads(resources.files("stylesim").joinpath("scenario.schema.json").read_text())
_VALIDATOR = jsonschema.Draft202012Validator(_SCHEMA)

_SLOT_ROLES = {
    "layered": "layer",
    "pipeline": "filter",
    "p2p": "peer",
}


def scenario_schema() -> dict:
    return copy.deepcopy(_SCHEMA)


@dataclass(frozen=True, slots=True)
class ScheduledFault:
    at_us: int
    target: str
    kind: str


@dataclass(frozen=True, slots=True)
class Scenario:
    """A validated scenario; `effective` is the default-filled document."""

    effective: dict

    @property
    def seed(self) -> int:
        return self.effective["seed"]

    @property
    def duration_us(self) -> int:
        return self.effective["duration_us"]

    @property
    def warmup_us(self) -> int:
        return self.effective["warmup_us"]

    @property
    def style(self) -> str:
        return self.effective["style"]

    @property
    def pacing(self) -> dict:
        return self.effective["pacing"]

    def link_latency(self) -> DurationDistribution:
        return parse_distribution(self.effective["link_latency"], "link_latency")

    def faults(self) -> list[ScheduledFault]:
        return [
            ScheduledFault(at_us=f["at_us"], target=f["target"], kind=f["kind"])
            for f in self.effective["faults"]
        ]

    def with_overrides(self, seed: int | None = None, duration_us: int | None = None) -> "Scenario":
        doc = copy.deepcopy(self.effective)
        if seed is not None:
            doc["seed"] = seed
        if duration_us is not None:
            doc["duration_us"] = duration_us
        return parse_scenario(json.dumps(doc))


def emit_effective(s: Scenario) -> str:
    return json.dumps(s.effective, sort_keys=True, separators=(",", ":"))


# -- parsing ---------------------------------------------------------------


def parse_scenario(text: str) -> Scenario:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("$", f"not valid JSON: {e}") from None
    _structural(doc)
    doc = _fill_defaults(doc)
    if doc["warmup_us"] >= doc["duration_us"]:
        raise SchemaError("warmup_us", "warmup must end before the run does")
    _check_spec_entries(doc)
    _check_topology(doc)
    _check_workload(doc)
    scenario = Scenario(effective=doc)
    topo = build_topology(scenario)
    _check_faults(doc, topo)
    return scenario


def _structural(doc) -> None:
    errors = sorted(
        _VALIDATOR.iter_errors(doc),
        key=lambda e: (tuple(str(p) for p in e.absolute_path), e.message),
    )
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "$"
        raise SchemaError(path, e.message)


def _sub_schema(defs_key: str) -> dict:
    sub = copy.deepcopy(_SCHEMA["$defs"][defs_key])
    sub["$defs"] = _SCHEMA["$defs"]
    return sub


def _sub_errors(defs_key: str, obj) -> list:
    validator = jsonschema.Draft202012Validator(_sub_schema(defs_key))
    return sorted(
        validator.iter_errors(obj),
        key=lambda e: (tuple(str(p) for p in e.absolute_path), e.message),
    )


def _defaults_from(defs_key: str, obj: dict) -> dict:
    out = dict(obj)
    for key, sub in _SCHEMA["$defs"][defs_key].get("properties", {}).items():
        if "default" in sub and key not in out:
            out[key] = copy.deepcopy(sub["default"])
    return out


def _fill_defaults(doc: dict) -> dict:
    doc = copy.deepcopy(doc)
    for key, sub in _SCHEMA["properties"].items():
        if "default" in sub and key not in doc:
            doc[key] = copy.deepcopy(sub["default"])
    if doc["pacing"].get("mode") == "realtime" and "factor" not in doc["pacing"]:
        doc["pacing"]["factor"] = 1.0
    doc["spec_library"] = {
        name: _defaults_from(f"spec_{entry['role']}", entry)
        for name, entry in doc["spec_library"].items()
    }
    style_key = f"topology_{doc['style']}"
    if style_key in _SCHEMA["$defs"]:
        doc["topology"] = _defaults_from(style_key, doc["topology"])
    doc["workload"]["clients"] = [
        _defaults_from("client_group", group) for group in doc["workload"]["clients"]
    ]
    return doc


def _check_spec_entries(doc: dict) -> None:
    for name, entry in doc["spec_library"].items():
        errors = _sub_errors(f"spec_{entry['role']}", entry)
        if errors:
            e = errors[0]
            suffix = "/".join(str(p) for p in e.absolute_path)
            path = f"spec_library/{name}" + (f"/{suffix}" if suffix else "")
            raise SchemaError(path, e.message)


def _require_spec(doc: dict, name: str, role: str, slot: str) -> dict:
    entry = doc["spec_library"].get(name)
    if entry is None:
        raise UnknownSpecReference(name)
    if entry["role"] != role:
        raise StyleParameterMismatch(
            f"{slot} references {name!r}, which has role {entry['role']!r}; needs {role!r}"
        )
    return entry


def _check_topology(doc: dict) -> None:
    style = doc["style"]
    errors = _sub_errors(f"topology_{style}", doc["topology"])
    if errors:
        e = errors[0]
        suffix = "/".join(str(p) for p in e.absolute_path)
        where = f" at topology/{suffix}" if suffix else ""
        raise StyleParameterMismatch(f"style {style!r}: {e.message}{where}")
    topo = doc["topology"]
    if style in _SLOT_ROLES:
        role = _SLOT_ROLES[style]
        if style == "layered":
            for i, name in enumerate(topo["layers"]):
                _require_spec(doc, name, role, f"topology/layers/{i}")
        elif style == "pipeline":
            for i, name in enumerate(topo["stages"]):
                _require_spec(doc, name, role, f"topology/stages/{i}")
            for key in topo["replication"]:
                if int(key) >= len(topo["stages"]):
                    raise SchemaError(f"topology/replication/{key}", "names a stage that does not exist")
        else:
            _require_spec(doc, topo["peer_spec"], role, "topology/peer_spec")
            for key in topo["handlers"]:
                if int(key) >= topo["peers"]:
                    raise SchemaError(f"topology/handlers/{key}", "names a peer that does not exist")
    elif style == "client_server":
        for d, directory in enumerate(topo["directories"]):
            _require_spec(doc, directory["spec"], "directory", f"topology/directories/{d}/spec")
            for svc in directory["services"]:
                if svc not in topo["services"]:
                    raise SchemaError(
                        f"topology/directories/{d}/services",
                        f"{svc!r} is not a declared service",
                    )
        for svc, decl in topo["services"].items():
            _require_spec(doc, decl["spec"], "service", f"topology/services/{svc}/spec")
    elif style == "leader_follower":
        _require_spec(doc, topo["leader"], "leader", "topology/leader")
        _require_spec(doc, topo["worker"], "worker", "topology/worker")


def _check_workload(doc: dict) -> None:
    for i, group in enumerate(doc["workload"]["clients"]):
        if group["entry_peers"] is not None:
            if doc["style"] != "p2p":
                raise StyleParameterMismatch(
                    f"workload/clients/{i}/entry_peers only applies to the p2p style"
                )
            n = doc["topology"]["peers"]
            for p in group["entry_peers"]:
                if p >= n:
                    raise SchemaError(
                        f"workload/clients/{i}/entry_peers", f"peer {p} does not exist"
                    )


def _check_faults(doc: dict, topo: Topology) -> None:
    names = {spec.name: spec.role for spec in topo.specs}
    for i, fault in enumerate(doc["faults"]):
        role = names.get(fault["target"])
        if role is None:
            raise SchemaError(f"faults/{i}/target", f"unknown component {fault['target']!r}")
        if fault["kind"].startswith("silent_drop") and role != "peer":
            raise SchemaError(f"faults/{i}/kind", "silent drop only applies to peers")


# -- building --------------------------------------------------------------


def _dist(obj, path: str) -> DurationDistribution:
    return parse_distribution(obj, path)


def _client_dicts(doc: dict) -> list[dict]:
    out = []
    for i, group in enumerate(doc["workload"]["clients"]):
        base = {
            "loop": group["loop"],
            "delay": _dist(group["delay"], f"workload/clients/{i}/delay"),
            "timeout": group["timeout_us"],
            "service": group["service"],
            "ttl_hops": group["ttl_hops"],
            "active_from": group["active_from_us"],
            "active_until": group["active_until_us"],
        }
        if group["entry_peers"] is not None:
            base["entry_peers"] = list(group["entry_peers"])
        out.extend([dict(base) for _ in range(group["count"])])
    return out


def build_topology(s: Scenario) -> Topology:
    doc = s.effective
    style, topo, lib = doc["style"], doc["topology"], doc["spec_library"]
    clients = _client_dicts(doc)
    if style == "layered":
        layers = []
        for i, name in enumerate(topo["layers"]):
            entry = lib[name]
            layers.append(
                (
                    f"layer_{i}",
                    _dist(entry["proc_in"], f"spec_library/{name}/proc_in"),
                    _dist(entry["proc_out"], f"spec_library/{name}/proc_out"),
                )
            )
        return build_layered(layers, clients)
    if style == "pipeline":
        stages = [
            (f"stage_{i}", _dist(lib[name]["proc"], f"spec_library/{name}/proc"))
            for i, name in enumerate(topo["stages"])
        ]
        replication = {int(k): v for k, v in topo["replication"].items()}
        return build_pipeline(stages, replication, clients)
    if style == "client_server":
        directories = []
        for d, directory in enumerate(topo["directories"]):
            entry = lib[directory["spec"]]
            directories.append(
                (
                    f"directory_{d}",
                    list(directory["services"]),
                    _dist(entry["route_delay"], f"spec_library/{directory['spec']}/route_delay"),
                )
            )
        services = {
            svc: (decl["instances"], _dist(lib[decl["spec"]]["proc"], f"spec_library/{decl['spec']}/proc"))
            for svc, decl in topo["services"].items()
        }
        return build_client_server(directories, services, clients)
    if style == "leader_follower":
        leader = lib[topo["leader"]]
        worker = lib[topo["worker"]]
        cfg = {
            "initial_workers": topo["initial_workers"],
            "worker_proc": _dist(worker["proc"], f"spec_library/{topo['worker']}/proc"),
            "policy": leader["policy"],
            "fanout_mode": leader["fanout_mode"],
            "fanout_k": leader["fanout_k"],
            "min_workers": leader["min_workers"],
            "max_workers": leader["max_workers"],
            "idle_check_period": leader["idle_check_period_us"],
            "idle_stop_threshold": leader["idle_stop_threshold_us"],
            "spawn_delay": leader["spawn_delay_us"],
        }
        return build_leader_follower(cfg, clients)
    entry = lib[topo["peer_spec"]]
    peer_params = {
        "proc": _dist(entry["proc"], f"spec_library/{topo['peer_spec']}/proc"),
        "forward_fanout": entry["forward_fanout"],
        "maintenance_period": entry["maintenance_period_us"],
        "churn_probability": entry["churn_probability"],
    }
    capabilities = {int(k): list(v) for k, v in topo["handlers"].items()}
    return build_p2p(
        n=topo["peers"],
        target_degree=topo["target_degree"],
        peer_params=peer_params,
        capabilities=capabilities,
        clients=clients,
        rng=derive_stream(s.seed, AUX_STREAM),
    )


# -- reporting -------------------------------------------------------------


def count_spec_references(s: Scenario) -> dict[str, int]:
    """How many topology slots reference each library spec."""
    doc = s.effective
    counts = {name: 0 for name in doc["spec_library"]}
    style, topo = doc["style"], doc["topology"]
    if style == "layered":
        refs = list(topo["layers"])
    elif style == "pipeline":
        refs = list(topo["stages"])
    elif style == "client_server":
        refs = [d["spec"] for d in topo["directories"]]
        refs += [decl["spec"] for decl in topo["services"].values()]
    elif style == "leader_follower":
        refs = [topo["leader"], topo["worker"]]
    else:
        refs = [topo["peer_spec"]]
    for name in refs:
        counts[name] += 1
    return counts
