"""Exception types shared across the package."""


class PermixError(Exception):
    """Base class for all package errors."""


class InvalidDistribution(PermixError, ValueError):
    """Weights are negative, do not sum to one, or are otherwise malformed."""


class OutcomeMismatch(PermixError, ValueError):
    """Two distributions do not live on a common outcome set."""


class InconsistentTranscript(PermixError, ValueError):
    """A query transcript forces contradictory constraints on a permutation."""


class InvalidStrategy(PermixError, ValueError):
    """A strategy tree is malformed (missing branches, bad inputs)."""


class ResourceLimit(PermixError, RuntimeError):
    """An exact computation would exceed the configured size budget."""


class EstimationError(PermixError, RuntimeError):
    """A Monte Carlo estimate could not be formed (e.g. no accepted samples)."""
