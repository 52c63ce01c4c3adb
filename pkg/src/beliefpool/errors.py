"""Exception types raised across the package."""


class BeliefPoolError(Exception):
    """Base class for every error raised by beliefpool."""


class InvalidSpecError(BeliefPoolError, ValueError):
    """A network, model, or configuration parameter is out of its domain."""


class NonPrimitiveError(BeliefPoolError, ValueError):
    """The combination matrix is not primitive (no power is entrywise positive)."""


class ConvergenceError(BeliefPoolError, RuntimeError):
    """An iterative routine hit its iteration cap before reaching tolerance."""


class DomainError(BeliefPoolError, ValueError):
    """An observation lies outside the support of the likelihood family."""


class DegenerateBeliefError(BeliefPoolError, RuntimeError):
    """A belief row lost all of its mass (every hypothesis has zero belief)."""

    def __init__(self, message, iteration=None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class InapplicableError(BeliefPoolError, ValueError):
    """A bound was requested for a configuration that does not satisfy its hypotheses."""


class InsufficientDataError(BeliefPoolError, ValueError):
    """A trace is too short for the requested statistic."""


class InternalConsistencyError(BeliefPoolError, RuntimeError):
    """A quantity that is non-negative in theory came out negative beyond round-off."""


class ConfigError(BeliefPoolError, ValueError):
    """Malformed experiment configuration."""
