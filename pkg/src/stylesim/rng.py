"""Deterministic random number generation.

Every component owns an independent PCG32 stream derived from the master
seed and the component's stable stream index, so adding or removing one
component never shifts the draws of another. All arithmetic is 64-bit
integer math: identical seeds give identical output sequences on every
platform.

The generator is PCG-XSH-RR with 64-bit state and 32-bit output. Constants
are the reference ones; `test_rng.py` pins the first outputs of the
canonical (42, 54) seeding so a botched port cannot slip through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MASK64 = (1 << 64) - 1

PCG_MULTIPLIER = 6364136223846793005
PCG_DEFAULT_INCREMENT = 1442695040888963407

_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15

# Stream index reserved for scenario-level sampling (topology chords).
# Component streams use their ordinal; ordinals stay far below this.
AUX_STREAM = 1 << 48


def splitmix64(x: int) -> int:
    """One splitmix64 scramble step. Used only for seeding streams."""
    x = (x + _SPLITMIX_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


@dataclass
class Pcg32:
    """PCG-XSH-RR 32-bit generator with 64-bit state."""

    state: int = 0
    inc: int = PCG_DEFAULT_INCREMENT

    @classmethod
    def seeded(cls, initstate: int, initseq: int) -> "Pcg32":
        rng = cls(state=0, inc=((initseq << 1) | 1) & MASK64)
        rng.next_u32()
        rng.state = (rng.state + (initstate & MASK64)) & MASK64
        rng.next_u32()
        return rng

    def next_u32(self) -> int:
        old = self.state
        self.state = (old * PCG_MULTIPLIER + self.inc) & MASK64
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound). Rejection sampling, no modulo bias."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (1 << 32) % bound
        while True:
            r = self.next_u32()
            if r >= threshold:
                return r % bound

    def next_unit(self) -> float:
        """Uniform float in (0, 1). Never returns 0 so log() stays finite."""
        return (self.next_u32() + 0.5) / 4294967296.0

    def next_exponential(self, mean: float) -> float:
        return -mean * math.log(self.next_unit())

    def sample_without_replacement(self, items: list, k: int) -> list:
        """Choose k distinct items, order-stable partial Fisher-Yates."""
        pool = list(items)
        k = min(k, len(pool))
        out = []
        for _ in range(k):
            i = self.next_below(len(pool))
            out.append(pool.pop(i))
        return out


def derive_stream(master_seed: int, stream_index: int) -> Pcg32:
    """Independent PCG32 stream for (master seed, index).

    Seeding is splitmix-style: the index perturbs the master seed by a
    multiple of the golden-ratio gamma, then two scramble steps yield the
    init state and the sequence selector.
    """
    x = (master_seed + (stream_index + 1) * _SPLITMIX_GAMMA) & MASK64
    initstate = splitmix64(x)
    initseq = splitmix64(initstate)
    return Pcg32.seeded(initstate, initseq)


class StreamRegistry:
    """Lazily created streams keyed by stable index, one master seed."""

    def __init__(self, master_seed: int):
        self.master_seed = master_seed & MASK64
        self._streams: dict[int, Pcg32] = {}

    def stream(self, index: int) -> Pcg32:
        rng = self._streams.get(index)
        if rng is None:
            rng = derive_stream(self.master_seed, index)
            self._streams[index] = rng
        return rng

    def next_u32(self, index: int) -> int:
        return self.stream(index).next_u32()
