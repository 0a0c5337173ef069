"""
Exception hierarchy for the stability toolkit.

Every error raised on purpose by the library derives from StabilityError,
so callers (the CLI, the HTTP API) can separate bad input from bugs.
"""


class StabilityError(Exception):
    """Base class for all toolkit errors."""


class GroupMismatch(StabilityError):
    """Two elements from different groups were combined."""


class DomainMismatch(StabilityError):
    """An element does not belong to a function's domain."""


class CodomainMismatch(StabilityError):
    """Scalar and group-valued codomain values were mixed."""


class NotDivisible(StabilityError):
    """The group is not uniquely 2-divisible."""


class Bounded(StabilityError):
    """The group is bounded by its metric, so no large witness exists."""


class DoublingBounded(StabilityError):
    """The doubled subgroup 2X is bounded, so no witness u with large 2u exists."""


class ZeroExcluded(StabilityError):
    """A construction requires a nonzero element and received zero."""


class UnsupportedDomain(StabilityError):
    """The operation is only defined for some of the built-in groups."""


class EmptyWindow(StabilityError):
    """A scan or search was given a window with no elements."""


class EmptyGrid(StabilityError):
    """A shell grid or value grid was empty."""


class InfeasibleConstraint(StabilityError):
    """No function on the value grid satisfies the shell constraint."""


class InvalidParameter(StabilityError):
    """A numeric parameter is outside its allowed range."""


class WitnessOutOfRange(StabilityError):
    """A harmonic-prefix witness was requested beyond the supported target."""


class ParseError(StabilityError):
    """A text or JSON form could not be parsed."""


class WitnessSelectionError(StabilityError):
    """A constructed witness failed its own side conditions."""
