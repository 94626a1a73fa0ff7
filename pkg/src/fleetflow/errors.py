"""Typed error taxonomy shared across the package.

Every failure mode that callers are expected to handle has a dedicated
class here. Modules raise these instead of bare ValueError so the CLI
can map configuration problems to exit code 1 and runtime faults to
exit code 2.
"""


class FleetflowError(Exception):
    """Base class for all package errors."""


class ConfigError(FleetflowError):
    """Invalid run configuration (bad flag combination, impossible sizes)."""


# --- map loading ---


class MapError(FleetflowError):
    """Base class for map-file problems."""


class MalformedHeader(MapError):
    """Map header is missing or does not declare height/width."""


class RowLengthMismatch(MapError):
    """A map row length disagrees with the declared width."""


class UnknownCell(MapError):
    """A map row contains a character outside the supported alphabet."""


class SourceBlocked(MapError):
    """A distance-field source cell is not traversable."""


class StationBlocked(MapError):
    """A sidecar station cell is not traversable."""


class SeedUnreachable(Warning):
    """Some traversable cells cannot reach any partition seed.

    Reported as a warning: affected cells are assigned the sentinel
    region and excluded from scheduling rather than aborting the run.
    """


# --- task pool ---


class MapSaturated(FleetflowError):
    """Fewer than 2 unoccupied traversable cells; cannot sample a task."""


# --- guidance ---


class NoFreeAgents(FleetflowError):
    """No agent is eligible for assignment this step."""


class ProtocolError(FleetflowError):
    """External guidance process sent a malformed or invalid reply."""


class Timeout(FleetflowError):
    """External guidance process missed the reply deadline."""


# --- rebalancing flow ---


class Unbalanced(FleetflowError):
    """Transport instance supplies and demands do not sum equally."""


class InfeasibleCost(FleetflowError):
    """A demanded region is unreachable from every supplying region."""


# --- local assignment ---


class FlowMismatch(FleetflowError):
    """Flow row sum disagrees with the region's free-agent count."""


class Infeasible(FleetflowError):
    """No matching satisfies the placeholder-fulfilment constraint."""


class WaypointExhausted(FleetflowError):
    """A region has fewer unused cells than agents needing waypoints."""
