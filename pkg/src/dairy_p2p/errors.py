"""Exception hierarchy shared by the simulator and the command line."""


class SimulationError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SimulationError, ValueError):
    """Invalid scenario, tariff, battery or farm configuration."""


class DataError(SimulationError, ValueError):
    """Unreadable, malformed or misaligned trace data."""


class ContractViolation(SimulationError, ValueError):
    """A caller broke an operation's precondition."""


class InvariantBreach(SimulationError, RuntimeError):
    """A conservation or bookkeeping invariant failed during a run."""

    def __init__(self, message, step=None, farm_id=None):
        super().__init__(message)
        self.step = step
        self.farm_id = farm_id
