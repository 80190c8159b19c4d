"""Typed errors raised across the simulator.

Configuration problems (bad scenarios, malformed topologies) and runtime
contract breaches get distinct classes so the CLI can map them to distinct
exit codes.
"""

from __future__ import annotations


class StylesimError(Exception):
    """Base class for every error this package raises on purpose."""


# -- kernel ------------------------------------------------------------


class SchedulingInPast(StylesimError):
    """An event was scheduled before the current virtual time."""


class UnknownStream(StylesimError):
    """A random draw was requested for a stream index nobody registered."""


class UnknownComponent(StylesimError):
    """A component id or name that does not exist in this run."""


class RestartOfLiveComponent(StylesimError):
    """A restart fault targeted a component that is still alive."""


class InvariantViolation(StylesimError):
    """The engine caught itself breaking a runtime contract. Always a bug."""


# -- topology ----------------------------------------------------------


class TopologyError(StylesimError):
    """Base class for construction-time topology failures."""


class TooFewLayers(TopologyError):
    pass


class BadReplication(TopologyError):
    pass


class EmptyCatalogue(TopologyError):
    pass


class BadWorkerBounds(TopologyError):
    pass


class DegreeInfeasible(TopologyError):
    pass


# -- scenario ----------------------------------------------------------


class ScenarioError(StylesimError):
    """Base class for scenario parsing/validation failures."""


class SchemaError(ScenarioError):
    """Structural schema violation; message carries the JSON path."""

    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class UnknownSpecReference(ScenarioError):
    """Topology or workload referenced a spec_library name that is absent."""


class StyleParameterMismatch(ScenarioError):
    """Topology parameters do not belong to the declared style."""


# -- metrics / replay --------------------------------------------------


class MalformedTrace(StylesimError):
    """A trace line could not be parsed or is missing required fields."""


class EmptyWindow(StylesimError):
    """A metrics window selects no time span."""


class ReplayDivergence(StylesimError):
    """Replay regenerated a different trace than the file on disk."""

    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        msg = f"trace diverges at line {line_no}"
        if detail:
            msg = f"{msg}: {detail}"
        super().__init__(msg)
