"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid grid, step size or run configuration."""


class ContractError(RuntimeError):
    """An operation was called in a state it does not accept."""


class StabilityError(ConfigError):
    """A time step violates a scheme's stability bound."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class OracleError(RuntimeError):
    """A verification oracle could not reach its requested tolerance."""
