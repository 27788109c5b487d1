"""Exception hierarchy shared by all mitograph modules."""


class MitographError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(MitographError, ValueError):
    """Invalid model parameters."""


class SubcriticalOrCritical(ParameterError):
    """The splitting rate does not exceed the death rate."""


class NonpositiveRate(ParameterError):
    """A rate or growth speed that must be positive is not."""


class NegativeDiffusion(ParameterError):
    """Diffusion coefficient below zero."""


class InvalidKernel(ParameterError):
    """Splitting kernel violates symmetry, support or normalisation."""


class DegenerateKernel(ParameterError):
    """Kernel support reaches 0 or 1 where a positive gap is required."""


class PopulationCap(MitographError, RuntimeError):
    """Live population exceeded the configured budget.

    ``replicate`` carries the index of the offending replicate when the
    error comes from an ensemble run.
    """

    def __init__(self, message, replicate=None):
        super().__init__(message)
        self.replicate = replicate


class InsufficientSamples(MitographError, ValueError):
    """Too few replicates for the requested comparison."""


class InsufficientTailData(MitographError, ValueError):
    """Not enough grid points carry hits for a small-mass fit."""


class CFLViolation(MitographError, ValueError):
    """Requested time step exceeds the explicit stability bound."""


class FrontUndefined(MitographError, ValueError):
    """The mean density never reaches one, so no density front exists."""


class IntegrationFailure(MitographError, RuntimeError):
    """ODE integration blew up or the integrator gave up."""


class ConfigError(MitographError, ValueError):
    """Malformed or invalid experiment configuration."""
