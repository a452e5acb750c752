"""Exact univariate polynomials over Q and valuations at places of P^1.

Polynomials are immutable coefficient tuples of `fractions.Fraction` in
ascending degree order with no trailing zeros; ``()`` is the zero
polynomial. The degree of zero is ``-math.inf`` so that expressions like
``4 - deg(a)`` evaluate to ``inf`` instead of a misleading integer.

Places are never found by factoring over Q. Instead the squarefree support
of a discriminant is split along gcds with the tracked polynomials until
every root of a piece has the same multiplicity in each of them; such a
piece is a `PlaceCluster`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import DegreeBoundViolated, ZeroPolynomial

NEG_INF = -math.inf
INF = math.inf

Coeff = Union[int, str, Fraction]


def to_fraction(value: Coeff) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as an exact coefficient")


def fraction_to_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def is_rational_square(value: Fraction) -> Fraction | None:
    """Return a nonnegative rational square root of `value`, if any."""
    if value < 0:
        return None
    p, q = value.numerator, value.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


class UniPoly:
    """Univariate polynomial in t with rational coefficients."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Iterable[Coeff] = ()):
        cs = [to_fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(cs)
        self._hash = hash(self.coeffs)

    # construction helpers

    @classmethod
    def constant(cls, c: Coeff) -> "UniPoly":
        return cls([c])

    @classmethod
    def monomial(cls, k: int, c: Coeff = 1) -> "UniPoly":
        return cls([0] * k + [c])

    @classmethod
    def from_json(cls, data: Sequence[Coeff]) -> "UniPoly":
        return cls(data)

    def to_json(self) -> list[str]:
        return [fraction_to_str(c) for c in self.coeffs]

    # basic properties

    @property
    def deg(self) -> float | int:
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == UniPoly([other]).coeffs
        return NotImplemented

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"UniPoly({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c == 0:
                continue
            sign = "-" if c < 0 else "+"
            mag = abs(c)
            if k == 0:
                body = str(mag)
            else:
                mono = "t" if k == 1 else f"t^{k}"
                body = mono if mag == 1 else f"{mag}*{mono}"
            terms.append((sign, body))
        first_sign, first_body = terms[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in terms[1:]:
            out += f" {sign} {body}"
        return out

    def sort_key(self) -> tuple:
        return (len(self.coeffs), tuple(reversed(self.coeffs)))

    # arithmetic

    @staticmethod
    def _lift(other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly([to_fraction(other)])

    def __add__(self, other) -> "UniPoly":
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return UniPoly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self) -> "UniPoly":
        return UniPoly(-c for c in self.coeffs)

    def __sub__(self, other) -> "UniPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "UniPoly":
        return self._lift(other) - self

    def __mul__(self, other) -> "UniPoly":
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, x in enumerate(self.coeffs):
            if x == 0:
                continue
            for j, y in enumerate(other.coeffs):
                out[i + j] += x * y
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "UniPoly":
        if k < 0:
            raise ValueError("negative power")
        result = UniPoly([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __divmod__(self, other) -> tuple["UniPoly", "UniPoly"]:
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(other.coeffs) - 1
        if len(rem) - 1 < dq:
            return UniPoly(), self
        quot = [Fraction(0)] * (len(rem) - dq)
        inv = 1 / other.lc
        for k in range(len(rem) - 1 - dq, -1, -1):
            c = rem[k + dq] * inv
            quot[k] = c
            if c:
                for j, y in enumerate(other.coeffs):
                    rem[k + j] -= c * y
        return UniPoly(quot), UniPoly(rem[:dq])

    def __floordiv__(self, other) -> "UniPoly":
        return divmod(self, other)[0]

    def __mod__(self, other) -> "UniPoly":
        return divmod(self, other)[1]

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        q, r = divmod(self, other)
        if r:
            raise ArithmeticError(f"{other} does not divide {self}")
        return q

    def divides(self, other: "UniPoly") -> bool:
        return not (other % self)

    def __call__(self, x: Coeff) -> Fraction:
        x = to_fraction(x)
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def monic(self) -> "UniPoly":
        if not self.coeffs:
            return self
        return self * (1 / self.lc)

    def derivative(self) -> "UniPoly":
        return UniPoly(k * c for k, c in enumerate(self.coeffs) if k > 0)

    def reversed_to(self, n: int) -> "UniPoly":
        """Return s^n * f(1/s); requires deg f <= n."""
        if self.deg > n:
            raise DegreeBoundViolated(f"degree {self.deg} exceeds {n}")
        padded = self.coeffs + (Fraction(0),) * (n + 1 - len(self.coeffs))
        return UniPoly(reversed(padded))

    def ord_at_zero(self) -> float | int:
        if not self.coeffs:
            return INF
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        raise AssertionError("unreachable")


T = UniPoly([0, 1])


def poly_gcd(f: UniPoly, g: UniPoly) -> UniPoly:
    """Monic gcd; zero only when both inputs are zero."""
    while g:
        f, g = g, f % g
    return f.monic()


def squarefree_decompose(f: UniPoly) -> list[tuple[UniPoly, int]]:
    """Yun's algorithm: f = lc(f) * prod g_i^m_i with monic squarefree coprime g_i."""
    if f.is_zero():
        raise ZeroPolynomial("squarefree decomposition of the zero polynomial")
    if f.is_constant():
        return []
    fp = f.derivative()
    a = poly_gcd(f, fp)
    b = f.exact_div(a)
    c = fp.exact_div(a)
    d = c - b.derivative()
    out = []
    i = 1
    while not b.is_constant():
        g = poly_gcd(b, d)
        if not g.is_constant():
            out.append((g, i))
        b = b.exact_div(g)
        c = d.exact_div(g)
        d = c - b.derivative()
        i += 1
    return out


def squarefree_part(f: UniPoly) -> UniPoly:
    part = UniPoly([1])
    for g, _ in squarefree_decompose(f):
        part = part * g
    return part


def multiplicity(h: UniPoly, f: UniPoly) -> float | int:
    """Largest k with h^k | f, for nonconstant h; inf when f is zero."""
    if f.is_zero():
        return INF
    k = 0
    q, r = divmod(f, h)
    while not r:
        k += 1
        f = q
        q, r = divmod(f, h)
    return k


@dataclass(frozen=True)
class PlaceCluster:
    """A Galois-stable packet of places carrying uniform valuations.

    `modulus` is None for the place at infinity.
    """

    modulus: UniPoly | None
    point_count: int
    valuations: Mapping[str, float | int] = field(default_factory=dict)

    @property
    def at_infinity(self) -> bool:
        return self.modulus is None

    def label(self) -> str:
        return "inf" if self.modulus is None else str(self.modulus)

    def place_json(self):
        return "inf" if self.modulus is None else self.modulus.to_json()

    def sort_key(self) -> tuple:
        if self.modulus is None:
            return (1,)
        return (0, self.modulus.sort_key())

    def __getitem__(self, name: str):
        return self.valuations[name]


def _split_by(h: UniPoly, f: UniPoly) -> list[tuple[UniPoly, float | int]]:
    # Roots of squarefree h grouped by their exact multiplicity in f.
    if f.is_zero():
        return [(h, INF)]
    pieces = []
    rest, g, k = h, f, 0
    while not rest.is_constant():
        common = poly_gcd(rest, g)
        exact_k = rest.exact_div(common)
        if not exact_k.is_constant():
            pieces.append((exact_k.monic(), k))
        if common.is_constant():
            break
        g = g.exact_div(common)
        rest = common
        k += 1
    return pieces


def coprime_refine(support: UniPoly, tracked) -> list[PlaceCluster]:
    """Split a squarefree support into clusters of uniform valuation.

    `tracked` is a mapping name -> polynomial, or a sequence (named f0, f1, ...).
    """
    if support.is_zero():
        raise ZeroPolynomial("empty support")
    if not isinstance(tracked, Mapping):
        tracked = {f"f{i}": f for i, f in enumerate(tracked)}
    clusters: list[tuple[UniPoly, dict]] = []
    if not support.is_constant():
        clusters = [(support.monic(), {})]
    for name, f in tracked.items():
        refined = []
        for h, vals in clusters:
            for piece, k in _split_by(h, f):
                refined.append((piece, {**vals, name: k}))
        clusters = refined
    out = [PlaceCluster(h, int(h.deg), vals) for h, vals in clusters]
    return sorted(out, key=PlaceCluster.sort_key)


def infinity_valuations(a: UniPoly, b: UniPoly) -> PlaceCluster:
    """Valuations of (a, b, c = a^2 - 4b) at t = infinity with weights (4, 8)."""
    if a.deg > 4:
        raise DegreeBoundViolated(f"deg a = {a.deg} > 4", place="inf")
    if b.deg > 8:
        raise DegreeBoundViolated(f"deg b = {b.deg} > 8", place="inf")
    a_s = a.reversed_to(4)
    b_s = b.reversed_to(8)
    c_s = a_s * a_s - 4 * b_s
    v_a, v_b, v_c = a_s.ord_at_zero(), b_s.ord_at_zero(), c_s.ord_at_zero()
    vals = {"a": v_a, "b": v_b, "c": v_c, "delta": 2 * v_b + v_c}
    return PlaceCluster(None, 1, vals)


def is_square_rational(f: UniPoly) -> UniPoly | None:
    """Square root of f in Q[t] when one exists."""
    if f.is_zero():
        return UniPoly()
    if f.deg % 2:
        return None
    top = is_rational_square(f.lc)
    if top is None:
        return None
    n = int(f.deg) // 2
    # Coefficients of the root from the top down, then verify.
    root = [Fraction(0)] * (n + 1)
    root[n] = top
    for k in range(n - 1, -1, -1):
        # coefficient of t^(n+k) in root^2 must equal f's
        acc = sum(root[i] * root[n + k - i] for i in range(k + 1, n))
        root[k] = (f.coeffs[n + k] - acc) / (2 * top)
    s = UniPoly(root)
    return s if s * s == f else None


def is_square_geometric(f: UniPoly) -> bool:
    """Whether f is a square in C[t]: every root multiplicity is even."""
    if f.is_zero():
        raise ZeroPolynomial("squareness of the zero polynomial")
    return all(m % 2 == 0 for _, m in squarefree_decompose(f))


def geometric_sqrt_class(f: UniPoly) -> UniPoly | None:
    """For a geometric square f = lc * g^2, return the monic g (else None)."""
    if not is_square_geometric(f):
        return None
    g = UniPoly([1])
    for piece, m in squarefree_decompose(f):
        g = g * piece ** (m // 2)
    return g
