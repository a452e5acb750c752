"""Elliptic K3 surfaces with a 2-torsion section, their Nikulin quotients and lattices."""

from .errors import DomainError
from .kodaira import Configuration, FiberType, classify_from_valuations, quotient_fiber
from .polys import UniPoly
from .surface import TwoTorsionSurface, classify_surface, quotient_surface, surface_report

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "DomainError",
    "FiberType",
    "TwoTorsionSurface",
    "UniPoly",
    "classify_from_valuations",
    "classify_surface",
    "quotient_fiber",
    "quotient_surface",
    "surface_report",
]
