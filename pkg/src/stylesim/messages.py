"""Message envelope passed between components.

Messages are immutable values; a forward creates a copy with an extended
hop path and a decremented TTL. The hop path is a return stack: each
forwarder pushes itself, each reply hop pops one entry, and the origin
client sits at the bottom. Only the peer style uses it; every other style
addresses replies directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .ids import ComponentId, SimTime

REQUEST = "request"
REPLY = "reply"
FAILURE = "failure"


@dataclass(frozen=True, slots=True)
class Message:
    request_id: int
    kind: str  # request | reply | failure
    service: str
    origin_client: ComponentId
    created_at: SimTime
    hop_path: tuple[ComponentId, ...] = ()
    ttl_hops: Optional[int] = None  # None = unlimited
    reason: Optional[str] = None  # failure reason, failures only
    fragment: Optional[tuple[int, int]] = None  # (index, of_total)

    def forwarded(self, via: ComponentId, ttl_hops: Optional[int]) -> "Message":
        return replace(self, hop_path=self.hop_path + (via,), ttl_hops=ttl_hops)

    def reply(self) -> "Message":
        return Message(
            request_id=self.request_id,
            kind=REPLY,
            service=self.service,
            origin_client=self.origin_client,
            created_at=self.created_at,
            hop_path=self.hop_path,
            fragment=self.fragment,
        )

    def failure(self, reason: str) -> "Message":
        return Message(
            request_id=self.request_id,
            kind=FAILURE,
            service=self.service,
            origin_client=self.origin_client,
            created_at=self.created_at,
            hop_path=self.hop_path,
            reason=reason,
        )

    def pop_hop(self) -> tuple[ComponentId, "Message"]:
        """Next hop toward the origin, and the message with that hop removed."""
        target = self.hop_path[-1]
        return target, replace(self, hop_path=self.hop_path[:-1])
