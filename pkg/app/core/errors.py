"""Exception hierarchy.

Every error subclasses ``ValueError`` as well, so callers that only know the
builtin contract keep working.
"""
from typing import List, Optional


class EquinetError(Exception):
    """Base class for library errors."""


class GridError(EquinetError, ValueError):
    """Grid too small, mismatched grids or malformed signal values."""


class SpecError(EquinetError, ValueError):
    """Invalid network spec or weight shapes."""


class ChargeConservationError(SpecError):
    """A multiplication weight breaks mu1 + mu2 = mu or leaves the charge range."""


class TruncationError(EquinetError, ValueError):
    """A discrete kernel carries too much mass outside its grid."""


class ConfigError(EquinetError, ValueError):
    """Experiment configuration failed validation."""

    def __init__(self, message: str, fields: Optional[List[str]] = None):
        super().__init__(message)
        self.fields = fields or []
