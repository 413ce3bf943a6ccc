"""Exception hierarchy.

The CLI maps these onto its exit codes, so the split between
configuration, property and numerical failures matters.
"""


class AbcPriorError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AbcPriorError, ValueError):
    """Invalid user input or experiment configuration."""


class EmptyMassError(AbcPriorError, ValueError):
    """A log-weight vector carries no finite mass."""


class MembershipError(AbcPriorError, ValueError):
    """A tilt magnitude lies outside the class box ``|t_k| <= eps_k``."""


class NotComparableError(AbcPriorError, ValueError):
    """A member was built over a different base prior or tilt than the class."""


class GridTooNarrowError(AbcPriorError, ValueError):
    """A grid misses a non-negligible amount of probability mass."""


class NumericalError(AbcPriorError, ArithmeticError):
    """A normalizer, derivative or estimate came out non-finite or unusable."""


class PropertyViolation(AbcPriorError):
    """A checked structural property (monotonicity, ordering, MTP2) failed.

    ``witness`` carries whatever located the failure, typically a pair of
    parameter points.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NoAcceptanceError(NumericalError):
    """Rejection ABC accepted nothing before ``max_attempts``."""

    def __init__(self, message, min_distance=None):
        super().__init__(message)
        self.min_distance = min_distance


class NonMonotoneError(NumericalError):
    """A quantity assumed monotone (such as a distance curve) is not.

    ``curve`` holds the sampled ``(t, value)`` pairs for inspection.
    """

    def __init__(self, message, curve=None):
        super().__init__(message)
        self.curve = curve
