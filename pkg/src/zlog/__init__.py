"""Multiplicative zeta functions over finite fields: exact point counts,
log-zeta power series, and multi-valued analytic continuation with certified
truncation, pole/monodromy/residue analysis, and structural falsification
tools.  See the README for the command line interface."""

from zlog.errors import (
    BudgetExceeded,
    NumericFailure,
    UndefinedZlog,
    ValidationError,
    ZlogError,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "NumericFailure",
    "UndefinedZlog",
    "ValidationError",
    "ZlogError",
    "__version__",
]
