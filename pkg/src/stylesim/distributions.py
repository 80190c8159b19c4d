"""Duration distributions for processing, interarrival and latency times.

Two kinds only: Constant and Exponential. Samples are integer microseconds.
Constant(k) returns k exactly (k may be 0, meaning a free step); exponential
samples round to the nearest microsecond and clamp to at least 1, because a
stochastic zero would let rounding erase causality-visible delays.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import SchemaError
from .ids import SimTime
from .rng import Pcg32


@dataclass(frozen=True, slots=True)
class Constant:
    micros: int

    def sample(self, rng: Pcg32) -> SimTime:
        return self.micros

    def mean(self) -> float:
        return float(self.micros)

    def to_json(self) -> dict:
        return {"kind": "constant", "micros": self.micros}


@dataclass(frozen=True, slots=True)
class Exponential:
    mean_micros: int

    def sample(self, rng: Pcg32) -> SimTime:
        return max(1, round(rng.next_exponential(float(self.mean_micros))))

    def mean(self) -> float:
        return float(self.mean_micros)

    def to_json(self) -> dict:
        return {"kind": "exponential", "mean_micros": self.mean_micros}


DurationDistribution = Constant | Exponential


def parse_distribution(obj, path: str) -> DurationDistribution:
    if not isinstance(obj, dict):
        raise SchemaError(path, "distribution must be an object")
    kind = obj.get("kind")
    if kind == "constant":
        micros = obj.get("micros")
        if not isinstance(micros, int) or isinstance(micros, bool) or micros < 0:
            raise SchemaError(f"{path}.micros", "must be a non-negative integer")
        return Constant(micros)
    if kind == "exponential":
        mean = obj.get("mean_micros")
        if not isinstance(mean, int) or isinstance(mean, bool) or mean < 1:
            raise SchemaError(f"{path}.mean_micros", "must be a positive integer")
        return Exponential(mean)
    raise SchemaError(f"{path}.kind", f"unknown distribution kind {kind!r}")
