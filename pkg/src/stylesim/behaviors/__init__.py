"""Role state machines, one per card."""

from .base import Action, Behavior, Ctx, LinkNeighbours, Send, SetTimer, Spawn, Stop, Trace, UnlinkNeighbours
from .client import Client, ClientConfig
from .clientserver import Directory, DirectoryConfig, Service, ServiceConfig
from .layer import Layer, LayerConfig
from .leaderfollower import Leader, LeaderConfig, Worker, WorkerConfig
from .p2p import Peer, PeerConfig
from .pipeline import FilterConfig, FilterStage, OutputSink, SinkConfig

BEHAVIOR_CLASSES = {
    "layer": Layer,
    "filter": FilterStage,
    "sink": OutputSink,
    "directory": Directory,
    "service": Service,
    "leader": Leader,
    "worker": Worker,
    "peer": Peer,
    "client": Client,
}


def make_behavior(role: str, config) -> Behavior:
    return BEHAVIOR_CLASSES[role](config)
