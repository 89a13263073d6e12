"""Exception hierarchy shared by all modules."""


class OmLabError(Exception):
    """Base class for library errors."""


class SpecError(OmLabError, ValueError):
    """Malformed input or a construction invariant that does not hold."""


class HypothesisError(OmLabError):
    """A theorem hypothesis could not be validated for the given inputs."""


class NumericalError(OmLabError):
    """A numerical procedure failed (no convergence, empty estimator, ...)."""


class InsufficientSamples(NumericalError):
    """A Monte Carlo denominator was zero; more draws are needed."""
