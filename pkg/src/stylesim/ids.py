"""Component identity.

A component is identified by (ordinal, generation). Ordinals are assigned
once, in registration order, and never reused. A restart keeps the ordinal
and bumps the generation, so every incarnation has a distinct id while
static wiring (which names ordinals) keeps working.
"""

from __future__ import annotations

from dataclasses import dataclass

# Virtual time is integer microseconds in a 64-bit range.
SimTime = int

US_PER_MS = 1_000
US_PER_S = 1_000_000


@dataclass(frozen=True, order=True, slots=True)
class ComponentId:
    ordinal: int
    generation: int = 0

    def next_generation(self) -> "ComponentId":
        return ComponentId(self.ordinal, self.generation + 1)
