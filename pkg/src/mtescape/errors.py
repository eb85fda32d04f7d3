"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`MTError`.
The two middle layers map onto CLI exit codes: :class:`InputError` means the
request itself was unusable (exit 2), :class:`NumericalError` means the
numerics failed on a well-formed request (exit 3).
"""


class MTError(Exception):
    """Base class for library errors."""


class InputError(MTError, ValueError):
    """A request that cannot be satisfied as posed."""


class NumericalError(MTError, ArithmeticError):
    """A numerical procedure failed to reach its target."""


class DomainError(InputError):
    """A point lies outside the domain of the map."""


class NoRoot(InputError):
    """No admissible parameter was found in the bracket."""


class NotMinimal(InputError):
    """A smaller (preperiod, period) pair already matches."""


class NotRepelling(InputError):
    """The periodic tail of the critical orbit is not repelling."""


class NotEventuallyPeriodic(InputError):
    """The critical orbit shows no repelling recurrence."""


class DegeneratePartition(InputError):
    """Postcritical points coincide, so the partition collapses."""


class BadDomain(InputError):
    """The inducing domain fails one of its structural checks."""


class NoChains(InputError):
    """No first-return domain passes near the requested point."""


class HoleTooSmall(InputError):
    """The hole is not resolved by the bin grid."""


class InsufficientHorizon(InputError):
    """The simulated horizon is shorter than the requested time."""


class ConfigError(InputError):
    """Malformed experiment configuration."""


class NoConvergence(NumericalError):
    """An iteration stopped before meeting its tolerance."""


class CapTooSmall(NumericalError):
    """The return-time cap leaves too much of the domain uncovered."""


class TooFewSurvivors(NumericalError):
    """Too few trajectories remain to fit a decay rate."""
