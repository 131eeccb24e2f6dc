"""Exception hierarchy.

``ValidationError`` marks bad inputs (CLI exit code 2); ``NumericFailure``
marks a computation that refused to produce a trustworthy number -- pole
clearance violations, non-convergent quadrature, truncation caps too small
(CLI exit code 3).  ``UndefinedZlog`` flags count sequences containing a
zero or negative entry, for which the multiplicative zeta function does not
exist; it is a validation error by nature and inherits from it.
"""


class ZlogError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ZlogError):
    """Invalid input: bad parameters, malformed config, broken invariants."""


class BudgetExceeded(ValidationError):
    """An enumeration request exceeds the fixed point budget."""


class UndefinedZlog(ValidationError):
    """A count sequence contains values <= 0, so Z_log is undefined."""


class NumericFailure(ZlogError):
    """Quadrature non-convergence, clearance violation, or cap overflow."""
