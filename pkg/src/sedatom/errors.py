"""Exception types shared across the package.

Validation errors (bad inputs, bad configs) and numerical errors (divergences,
poles, runaways) are kept on separate branches so the CLI can map them to
distinct exit codes.
"""


class SedatomError(Exception):
    """Base class for all package errors."""


class ValidationError(SedatomError):
    """Invalid input, configuration, or precondition violation."""


class UnitError(ValidationError):
    """Dimensionally incompatible unit conversion; names both units."""


class DomainError(ValidationError):
    """Argument outside the mathematical domain of an operation."""


class DegeneracyError(ValidationError):
    """Operation undefined for a zero-frequency (degenerate) state pair."""


class UnsupportedRouteError(ValidationError):
    """Requested computation route not available for this system."""


class NumericalError(SedatomError):
    """Numerical failure during a computation."""


class DivergenceError(NumericalError):
    """A quantity that must be finite diverges (e.g. infrared divergence)."""


class PoleError(NumericalError):
    """Evaluation requested on top of an unregularized resonance pole."""


class RunawayError(NumericalError):
    """Trajectory energy blow-up; signals a bad time step or equation form."""


class DiscretizationError(NumericalError):
    """Grid too coarse for the requested accuracy."""
