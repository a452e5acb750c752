"""Exception hierarchy.

Domain errors (a surface or fiber the theory does not accept) derive from
`DomainError`; the CLI maps those to exit code 2 and everything else to 1.
"""

from __future__ import annotations


class DomainError(ValueError):
    """Base class for mathematically meaningful rejections."""

    def __init__(self, message: str, place: str | None = None):
        super().__init__(message)
        self.place = place

    def to_json(self) -> dict:
        out = {"error": type(self).__name__, "message": str(self)}
        if self.place is not None:
            out["place"] = self.place
        return out


class ZeroPolynomial(DomainError):
    pass


class DegreeBoundViolated(DomainError):
    pass


class NotInTable(DomainError):
    pass


class NonMinimalModel(DomainError):
    pass


class RegularFiber(DomainError):
    pass


class SingularSurface(DomainError):
    pass


class SingularFiber(DomainError):
    pass


class OffCurve(DomainError):
    pass


class NonIntegralDeterminant(DomainError):
    pass


class InvalidParameter(DomainError):
    pass


class DegenerateLattice(DomainError):
    pass


class LatticeMismatch(DomainError):
    pass


class WrongFiberKind(DomainError):
    pass


class NotAdmissible(DomainError):
    pass


class InvalidFamilyParameter(DomainError):
    pass
