"""Exception hierarchy shared by every module.

Each error maps to one failure mode named in the module contracts, so callers
(and the CLI exit codes) can tell a bad input from a numeric breakdown.
"""


class SleError(Exception):
    """Base class for all package errors."""


class DomainError(SleError, ValueError):
    """Input outside the domain of a formula (|z| >= 1, coincident points, ...)."""


class PoleError(DomainError):
    """A Gamma factor or q-integer denominator hits a pole."""


class NumericError(SleError, ArithmeticError):
    """A numeric scheme broke down (non-finite values, tracing failure, ...)."""


class SwallowedError(NumericError):
    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class CollisionError(NumericError):
    def __init__(self, message, pair=None, time=None):
        super().__init__(message)
        self.pair = pair
        self.time = time


class StencilError(NumericError):
    """A finite-difference stencil left its admissible range."""


class BranchError(NumericError):
    """Branch tracking of a multivalued integrand produced an inconsistent phase."""


class AccuracyError(NumericError):
    """Quadrature refinement did not reach the requested tolerance."""
