"""Exception taxonomy.

ValidationError covers bad inputs and bad parameters (CLI exit code 2).
The runtime errors cover degeneracies discovered mid-computation
(CLI exit code 3).
"""
from __future__ import annotations


class ValidationError(ValueError):
    """Input or parameter failed a precondition."""


class InsufficientLabelsError(ValidationError):
    """Fewer than one labeled point per class."""


class DegenerateGeometryError(RuntimeError):
    """No neighborhood contains two distinct points, or N is too small."""


class DegenerateRegionError(RuntimeError):
    """A region fit was attempted on fewer than two points."""


class GridBudgetError(RuntimeError):
    """A strategy grid exceeded its configured size budget."""
