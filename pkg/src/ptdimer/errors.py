"""Exception hierarchy shared by all solvers and the CLI."""


class SimulationError(Exception):
    """Base class; ``category`` is the machine-readable tag printed by the CLI."""

    category = "simulation"


class DomainError(SimulationError, ValueError):
    category = "domain"


class InputValidationError(SimulationError, ValueError):
    category = "input"


class ExistenceError(SimulationError, ValueError):
    """Requested stationary state does not exist for these parameters."""

    category = "existence"


class JumpLogicError(SimulationError, RuntimeError):
    category = "logic"


class CapOverflowError(SimulationError, RuntimeError):
    """Population reached the highest retained sector of the exact solver."""

    category = "cap-overflow"


class ConfigError(SimulationError, ValueError):
    category = "config"
