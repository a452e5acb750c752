"""Elliptic K3 surfaces y^2 = x(x^2 + a(t) x + b(t)) with the section (0, 0).

Discriminants are kept without the classical factor 16: the elliptic
discriminant of y^2 = x^3 + a x^2 + b x is 16 b^2 (a^2 - 4b), and here
`discriminants` returns b^2 c and b c^2 with c = a^2 - 4b. Constants do not
affect any valuation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

from .errors import (
    DegreeBoundViolated,
    DomainError,
    NonIntegralDeterminant,
    NonMinimalModel,
    OffCurve,
    SingularFiber,
    SingularSurface,
)
from .kodaira import ConfigEntry, Configuration, classify_from_valuations
from .polys import (
    UniPoly,
    coprime_refine,
    geometric_sqrt_class,
    infinity_valuations,
    is_rational_square,
    is_square_geometric,
    squarefree_part,
    to_fraction,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoTorsionSurface:
    a: UniPoly
    b: UniPoly

    def __post_init__(self):
        if self.a.deg > 4:
            raise DegreeBoundViolated(f"deg a = {self.a.deg} > 4")
        if self.b.deg > 8:
            raise DegreeBoundViolated(f"deg b = {self.b.deg} > 8")
        if self.b.is_zero() or self.c.is_zero():
            raise SingularSurface("discriminant b^2 (a^2 - 4b) vanishes identically")
        for cluster in self.places():
            v = cluster.valuations
            if v["a"] >= 2 and v["b"] >= 4:
                raise NonMinimalModel(
                    f"model is not minimal: (v_a, v_b) = ({v['a']}, {v['b']})",
                    place=cluster.label(),
                )

    @classmethod
    def from_coeffs(cls, a: Sequence, b: Sequence) -> "TwoTorsionSurface":
        return cls(UniPoly(a), UniPoly(b))

    @classmethod
    def from_json(cls, data: dict) -> "TwoTorsionSurface":
        return cls(UniPoly.from_json(data["a"]), UniPoly.from_json(data["b"]))

    def to_json(self) -> dict:
        return {"a": self.a.to_json(), "b": self.b.to_json()}

    @property
    def c(self) -> UniPoly:
        return self.a * self.a - 4 * self.b

    def places(self) -> list:
        """Finite clusters of the discriminant support followed by infinity."""
        support = squarefree_part(self.b * self.c)
        clusters = coprime_refine(support, {"a": self.a, "b": self.b, "c": self.c})
        out = []
        for cl in clusters:
            vals = dict(cl.valuations)
            vals["delta"] = 2 * vals["b"] + vals["c"]
            out.append(type(cl)(cl.modulus, cl.point_count, vals))
        out.append(infinity_valuations(self.a, self.b))
        return out

    def __str__(self) -> str:
        return f"y^2 = x(x^2 + ({self.a}) x + ({self.b}))"


def discriminants(s: TwoTorsionSurface) -> tuple[UniPoly, UniPoly]:
    """(Delta_X, Delta_Y) = (b^2 c, b c^2), each without the factor 16."""
    c = s.c
    dx, dy = s.b * s.b * c, s.b * c * c
    if dx.is_zero():
        raise SingularSurface("Delta vanishes identically")
    return dx, dy


def classify_surface(s: TwoTorsionSurface) -> Configuration:
    entries = []
    for cluster in s.places():
        v = cluster.valuations
        try:
            fiber = classify_from_valuations(v["a"], v["b"], v["c"])
        except DomainError as exc:
            exc.place = cluster.label()
            raise
        if fiber.kind != "reg":
            entries.append(ConfigEntry(fiber, cluster.point_count, cluster))
    return Configuration(tuple(entries))


def quotient_surface(s: TwoTorsionSurface) -> TwoTorsionSurface:
    return TwoTorsionSurface(-2 * s.a, s.c)


def _by_place(cfg: Configuration) -> dict:
    out = {}
    for e in cfg.entries:
        key = None if e.place is None else e.place.modulus
        out[key] = (e.fiber, e.count)
    return out


def quotient_configuration_crosscheck(s: TwoTorsionSurface) -> bool:
    """Place-by-place: classifying Y agrees with mapping X's fibers through the table."""
    predicted = _by_place(classify_surface(s).quotient())
    actual = _by_place(classify_surface(quotient_surface(s)))
    return predicted == actual


# Fibers over a point and the exact group law.


@dataclass(frozen=True)
class SpecializedCurve:
    """Smooth cubic y^2 = x(x^2 + a0 x + b0)."""

    a0: Fraction
    b0: Fraction

    def __post_init__(self):
        if self.b0 == 0 or self.a0 * self.a0 - 4 * self.b0 == 0:
            raise SingularFiber(f"curve ({self.a0}, {self.b0}) is singular")

    def rhs(self, x: Fraction) -> Fraction:
        return x * (x * x + self.a0 * x + self.b0)

    def contains(self, p: "AffinePoint") -> bool:
        return p.is_infinity or p.y * p.y == self.rhs(p.x)

    def companion(self) -> "SpecializedCurve":
        """Target of the isogeny with kernel {O, (0, 0)}."""
        return SpecializedCurve(-2 * self.a0, self.a0 * self.a0 - 4 * self.b0)

    def dual_companion(self) -> "SpecializedCurve":
        """Curve whose companion is this one: (a, b) with -2a = a0, a^2 - 4b = b0."""
        a = -self.a0 / 2
        return SpecializedCurve(a, (a * a - self.b0) / 4)


@dataclass(frozen=True)
class AffinePoint:
    x: Fraction | None = None
    y: Fraction | None = None

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    @classmethod
    def of(cls, x, y) -> "AffinePoint":
        return cls(to_fraction(x), to_fraction(y))

    def __str__(self) -> str:
        return "O" if self.is_infinity else f"({self.x}, {self.y})"

    def to_json(self):
        if self.is_infinity:
            return "O"
        return [str(self.x), str(self.y)]


INFINITY = AffinePoint()


def specialize(s: TwoTorsionSurface, t0) -> SpecializedCurve:
    t0 = to_fraction(t0)
    a0, b0 = s.a(t0), s.b(t0)
    if b0 == 0 or a0 * a0 - 4 * b0 == 0:
        raise SingularFiber(f"fiber over t = {t0} is singular", place=str(t0))
    return SpecializedCurve(a0, b0)


def _check(c: SpecializedCurve, *points: AffinePoint) -> None:
    for p in points:
        if not c.contains(p):
            raise OffCurve(f"{p} is not on y^2 = x(x^2 + {c.a0} x + {c.b0})")


def group_law(c: SpecializedCurve, p: AffinePoint, q: AffinePoint) -> AffinePoint:
    _check(c, p, q)
    if p.is_infinity:
        return q
    if q.is_infinity:
        return p
    if p.x == q.x:
        if p.y == -q.y:
            return INFINITY
        lam = (3 * p.x * p.x + 2 * c.a0 * p.x + c.b0) / (2 * p.y)
    else:
        lam = (q.y - p.y) / (q.x - p.x)
    x3 = lam * lam - c.a0 - p.x - q.x
    y3 = lam * (p.x - x3) - p.y
    return AffinePoint(x3, y3)


def double(c: SpecializedCurve, p: AffinePoint) -> AffinePoint:
    return group_law(c, p, p)


def negate(p: AffinePoint) -> AffinePoint:
    return p if p.is_infinity else AffinePoint(p.x, -p.y)


def apply_isogeny(c: SpecializedCurve, p: AffinePoint) -> AffinePoint:
    """(x, y) -> (y^2/x^2, y(x^2 - b)/x^2), landing on c.companion()."""
    _check(c, p)
    if p.is_infinity or p.x == 0:
        return INFINITY
    x2 = p.x * p.x
    return AffinePoint(p.y * p.y / x2, p.y * (x2 - c.b0) / x2)


def apply_dual(cy: SpecializedCurve, q: AffinePoint) -> AffinePoint:
    """(x, y) -> (y^2/4x^2, y(x^2 - b_Y)/8x^2), landing on cy.dual_companion()."""
    _check(cy, q)
    if q.is_infinity or q.x == 0:
        return INFINITY
    x2 = q.x * q.x
    return AffinePoint(q.y * q.y / (4 * x2), q.y * (x2 - cy.b0) / (8 * x2))


def small_rational_points(c: SpecializedCurve, height: int = 30, limit: int = 6) -> Iterator[AffinePoint]:
    """Points with x = p/q, |p| <= height, q <= height, found by square testing."""
    seen = set()
    found = 0
    for q in range(1, height + 1):
        for p in range(-height, height + 1):
            x = Fraction(p, q)
            if x in seen:
                continue
            seen.add(x)
            y = is_rational_square(c.rhs(x))
            if y is None or y == 0:
                continue
            yield AffinePoint(x, y)
            found += 1
            if found >= limit:
                return


# Torsion detection over C(t).


def two_torsion_rank(s: TwoTorsionSurface) -> int:
    """2 when x^2 + a x + b splits over C(t), else 1."""
    return 2 if is_square_geometric(s.c) else 1


def _geometric_square_with_sqrt(a: UniPoly, g: UniPoly, lead: Fraction) -> bool:
    # Is a + 2 s0 a square in C[t] for s0 = +-sqrt(lead) * g ?
    mu = is_rational_square(abs(lead)) if lead > 0 else None
    if mu is not None:
        for s0 in (mu * g, -mu * g):
            h = a + 2 * s0
            if h.is_zero() or is_square_geometric(h):
                return True
        return False
    import sympy

    tt = sympy.Symbol("t")
    root = sympy.sqrt(sympy.Rational(lead.numerator, lead.denominator))
    a_expr = sum(sympy.Rational(c.numerator, c.denominator) * tt**k for k, c in enumerate(a.coeffs))
    g_expr = sum(sympy.Rational(c.numerator, c.denominator) * tt**k for k, c in enumerate(g.coeffs))
    for sign in (1, -1):
        h = sympy.expand(a_expr + 2 * sign * root * g_expr)
        if h == 0:
            return True
        _, factors = sympy.sqf_list(sympy.Poly(h, tt, extension=root))
        if all(m % 2 == 0 for _, m in factors):
            return True
    return False


def has_order_four_over_sigma(s: TwoTorsionSurface) -> bool:
    """Whether (0, 0) is twice a C(t)-rational point.

    The tangent at Q through (0, 0) is y = lambda x, which forces
    b = s0^2 and lambda^2 = a + 2 s0.
    """
    g = geometric_sqrt_class(s.b)
    if g is None:
        return False
    lead = s.b.lc / (g.lc * g.lc)
    return _geometric_square_with_sqrt(s.a, g, lead)


@dataclass(frozen=True)
class TorsionInfo:
    two_torsion_rank: int
    order_four_over_sigma: bool

    @property
    def order(self) -> int:
        return 2**self.two_torsion_rank * (2 if self.order_four_over_sigma else 1)

    @property
    def group(self) -> str:
        if self.two_torsion_rank == 2:
            return "Z/2 x Z/4" if self.order_four_over_sigma else "(Z/2)^2"
        return "Z/4" if self.order_four_over_sigma else "Z/2"

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "order": self.order,
            "two_torsion_rank": self.two_torsion_rank,
            "order_four_over_sigma": self.order_four_over_sigma,
        }


def torsion(s: TwoTorsionSurface) -> TorsionInfo:
    return TorsionInfo(two_torsion_rank(s), has_order_four_over_sigma(s))


# Lattice-theoretic counts.


def shioda_tate(cfg: Configuration, mw_rank: int) -> int:
    return 2 + mw_rank + cfg.sum_m_minus_1


def det_ns(cfg: Configuration, torsion_order: int, rank_ns: int) -> int:
    """Signed det NS = (-1)^(rank - 1) * prod m1 / |tor|^2 (Mordell-Weil rank 0)."""
    num, den = cfg.prod_m1, torsion_order * torsion_order
    if num % den:
        raise NonIntegralDeterminant(f"prod m1 = {num} is not divisible by |tor|^2 = {den}")
    return (-1) ** (rank_ns - 1) * (num // den)


@dataclass
class SurfaceReport:
    surface: TwoTorsionSurface
    configuration: Configuration
    picard: int
    torsion: TorsionInfo
    det_ns: int | None
    fixed_point_total: int
    euler_total: int
    mw_rank: int
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        fibers = []
        for e in self.configuration.entries:
            fibers.append({
                "fiber": str(e.fiber),
                "count": e.count,
                "place": e.place.place_json() if e.place is not None else None,
            })
        return {
            "surface": self.surface.to_json(),
            "configuration": fibers,
            "configuration_summary": str(self.configuration),
            "picard": self.picard,
            "mw_rank_assumed": self.mw_rank,
            "torsion": self.torsion.to_json(),
            "det_ns": self.det_ns,
            "fixed_point_total": self.fixed_point_total,
            "euler_total": self.euler_total,
            "notes": list(self.notes),
        }


def surface_report(s: TwoTorsionSurface, mw_rank: int = 0) -> SurfaceReport:
    cfg = classify_surface(s)
    tor = torsion(s)
    picard = shioda_tate(cfg, mw_rank)
    notes = [f"Mordell-Weil rank {mw_rank} is an input assumption, not computed."]
    det = None
    if mw_rank == 0:
        try:
            det = det_ns(cfg, tor.order, picard)
        except NonIntegralDeterminant as exc:
            notes.append(f"det NS not reported: {exc}")
        else:
            notes.append("det NS from |det NS| = prod m1 / |tor|^2 (Shioda, cited).")
    else:
        notes.append("det NS needs the height pairing when the rank is positive; not reported.")
    if picard > 20:
        notes.append("Picard number exceeds 20: the assumed Mordell-Weil rank is inconsistent.")
    return SurfaceReport(s, cfg, picard, tor, det, cfg.fixed_points, cfg.euler, mw_rank, notes)


def verify_isogeny(s: TwoTorsionSurface, t0, points: Sequence[AffinePoint] | None = None) -> dict:
    """Check phi_hat(phi(P)) = 2P on the fiber over t0 for the given or searched points."""
    cx = specialize(s, t0)
    cy = cx.companion()
    if cy.dual_companion() != cx:
        raise AssertionError("dual companion does not return to the original fiber")
    if apply_isogeny(cx, AffinePoint.of(0, 0)) != INFINITY:
        raise AssertionError("(0, 0) is not in the kernel of phi")
    pts = list(points) if points is not None else list(small_rational_points(cx))
    checks = []
    for p in pts:
        q = apply_isogeny(cx, p)
        if not cy.contains(q):
            raise AssertionError(f"phi({p}) = {q} is off the quotient fiber")
        back = apply_dual(cy, q)
        twice = double(cx, p)
        checks.append({
            "P": p.to_json(),
            "phi_P": q.to_json(),
            "phi_hat_phi_P": back.to_json(),
            "two_P": twice.to_json(),
            "ok": back == twice,
        })
    return {
        "t0": str(to_fraction(t0)),
        "curve": [str(cx.a0), str(cx.b0)],
        "quotient_curve": [str(cy.a0), str(cy.b0)],
        "points": checks,
        "ok": all(c["ok"] for c in checks),
    }


def random_surface(rng, coeff_range: int = 3) -> TwoTorsionSurface | None:
    """Random (a, b) with integer coefficients in [-coeff_range, coeff_range].

    Returns None when the draw is singular or not minimal.
    """
    a = [rng.randint(-coeff_range, coeff_range) for _ in range(5)]
    b = [rng.randint(-coeff_range, coeff_range) for _ in range(9)]
    try:
        return TwoTorsionSurface.from_coeffs(a, b)
    except DomainError:
        return None
