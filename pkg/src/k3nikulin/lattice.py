"""Integral lattices, discriminant forms and rational divisors.

Root lattices are negative definite (fiber components are (-2)-curves); U and
M_d keep their indefinite signs. Discriminant groups come from the Smith normal
form of the Gram matrix: if S G T = diag(d_1, ..., d_n) then the columns of T
divided by d_i lift a basis of L^*/L.

Values of the discriminant quadratic form live in Q/2Z and are stored as
fractions in [0, 2); bilinear values live in Q/Z, stored in [0, 1).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence

from .errors import (
    DegenerateLattice,
    InvalidParameter,
    LatticeMismatch,
    WrongFiberKind,
)
from .kodaira import FiberType

Vector = tuple[Fraction, ...]


def _lcm(values: Iterable[int]) -> int:
    return reduce(lambda x, y: x * y // math.gcd(x, y), values, 1)


def mod2(x: Fraction) -> Fraction:
    return x - 2 * math.floor(x / 2)


def mod1(x: Fraction) -> Fraction:
    return x - math.floor(x)


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Return (U, D, V) with U M V = D, D diagonal, d_1 | d_2 | ..., U and V unimodular."""
    from sympy import Matrix, ZZ
    from sympy.polys.matrices import DomainMatrix
    from sympy.polys.matrices.normalforms import smith_normal_decomp

    rows = [list(map(int, r)) for r in m]
    if not rows or not rows[0]:
        return [], [], []
    dm = DomainMatrix.from_Matrix(Matrix(rows)).convert_to(ZZ)
    d, u, v = smith_normal_decomp(dm)
    d = [[int(x) for x in r] for r in d.to_Matrix().tolist()]
    u = [[int(x) for x in r] for r in u.to_Matrix().tolist()]
    v = [[int(x) for x in r] for r in v.to_Matrix().tolist()]
    for i in range(min(len(d), len(d[0]))):
        if d[i][i] < 0:
            d[i][i] = -d[i][i]
            u[i] = [-x for x in u[i]]
    return u, d, v


def _det(gram: Sequence[Sequence[int]]) -> int:
    # Fraction-exact Gaussian elimination.
    n = len(gram)
    m = [[Fraction(x) for x in row] for row in gram]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            f = m[r][col] / m[col][col]
            if f:
                for k in range(col, n):
                    m[r][k] -= f * m[col][k]
    return int(det)


@dataclass(frozen=True)
class IntLattice:
    gram: tuple[tuple[int, ...], ...]
    basis_labels: tuple[str, ...] = ()

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        n = len(g)
        if any(len(row) != n for row in g):
            raise ValueError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(n)):
            raise ValueError("Gram matrix must be symmetric")
        if not self.basis_labels:
            object.__setattr__(self, "basis_labels", tuple(f"e{i + 1}" for i in range(n)))
        elif len(self.basis_labels) != n:
            raise ValueError("one label per basis vector")

    @classmethod
    def from_json(cls, data) -> "IntLattice":
        if isinstance(data, dict):
            return cls(tuple(map(tuple, data["gram"])), tuple(data.get("labels", ())))
        return cls(tuple(map(tuple, data)))

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return _det(self.gram) if self.gram else 1

    @property
    def is_even(self) -> bool:
        return all(self.gram[i][i] % 2 == 0 for i in range(self.rank))

    def inner(self, u: Sequence, v: Sequence) -> Fraction:
        g = self.gram
        return sum(
            (Fraction(u[i]) * g[i][j] * v[j] for i in range(self.rank) for j in range(self.rank) if u[i] and v[j]),
            Fraction(0),
        )

    def __add__(self, other: "IntLattice") -> "IntLattice":
        return direct_sum(self, other)

    def index(self, label: str) -> int:
        return self.basis_labels.index(label)


def direct_sum(*lattices: IntLattice, prefixes: Sequence[str] | None = None) -> IntLattice:
    n = sum(lat.rank for lat in lattices)
    gram = [[0] * n for _ in range(n)]
    labels: list[str] = []
    off = 0
    for k, lat in enumerate(lattices):
        for i in range(lat.rank):
            for j in range(lat.rank):
                gram[off + i][off + j] = lat.gram[i][j]
        pre = prefixes[k] + "." if prefixes else ""
        labels.extend(pre + lab for lab in lat.basis_labels)
        off += lat.rank
    if not prefixes and len(set(labels)) != len(labels):
        labels = [f"e{i + 1}" for i in range(n)]
    return IntLattice(tuple(map(tuple, gram)), tuple(labels))


def rescale(lat: IntLattice, k: int) -> IntLattice:
    if k == 0:
        raise InvalidParameter("cannot rescale by 0")
    return IntLattice(tuple(tuple(k * x for x in row) for row in lat.gram), lat.basis_labels)


# Named lattices.


def _from_edges(n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str]) -> IntLattice:
    gram = [[-2 if i == j else 0 for j in range(n)] for i in range(n)]
    for i, j in edges:
        gram[i][j] = gram[j][i] = 1
    return IntLattice(tuple(map(tuple, gram)), tuple(labels))


def A(n: int) -> IntLattice:
    """A_n on the chain Theta_1, ..., Theta_n."""
    if n < 1:
        raise InvalidParameter(f"A_n needs n >= 1, got {n}")
    return _from_edges(n, [(i, i + 1) for i in range(n - 1)], [f"Theta{i + 1}" for i in range(n)])


def D(n: int) -> IntLattice:
    """D_n with basis Theta1, Gamma0..Gamma(n-4), Theta2, Theta3 as in an I*_(n-4) fiber."""
    if n < 4:
        raise InvalidParameter(f"D_n needs n >= 4, got {n}")
    labels = ["Theta1"] + [f"Gamma{k}" for k in range(n - 3)] + ["Theta2", "Theta3"]
    edges = [(i, i + 1) for i in range(n - 3)] + [(n - 3, n - 2), (n - 3, n - 1)]
    return _from_edges(n, edges, labels)


def _E(n: int) -> IntLattice:
    edges = [(i, i + 1) for i in range(n - 2)] + [(2, n - 1)]
    return _from_edges(n, edges, [f"r{i + 1}" for i in range(n)])


def E7() -> IntLattice:
    return _E(7)


def E8() -> IntLattice:
    return _E(8)


def U() -> IntLattice:
    return IntLattice(((0, 1), (1, 0)), ("e", "f"))


def rank1(k: int) -> IntLattice:
    if k == 0:
        raise InvalidParameter("<0> is degenerate")
    return IntLattice(((k,),), ("g",))


def Md(d: int) -> IntLattice:
    """U + U + <-2d>."""
    if d < 1:
        raise InvalidParameter(f"M_d needs d >= 1, got {d}")
    return direct_sum(U(), U(), rank1(-2 * d), prefixes=["U1", "U2", "v"])


def nikulin() -> IntLattice:
    """Span of eight disjoint (-2)-vectors and half their sum; basis e1..e7, h."""
    gram = [[-2 if i == j else 0 for j in range(8)] for i in range(8)]
    for i in range(7):
        gram[i][7] = gram[7][i] = -1
    gram[7][7] = -4
    return IntLattice(tuple(map(tuple, gram)), tuple([f"e{i + 1}" for i in range(7)] + ["h"]))


def standard_lattice(kind: str, param: int | None = None) -> IntLattice:
    builders = {"A": A, "D": D, "rank1": rank1, "Md": Md}
    fixed = {"E7": E7, "E8": E8, "U": U, "Nikulin": nikulin}
    if kind in fixed:
        return fixed[kind]()
    if kind in builders:
        if param is None:
            raise InvalidParameter(f"{kind} needs a parameter")
        return builders[kind](param)
    raise InvalidParameter(f"unknown lattice kind {kind!r}")


def root_lattice_by_name(name: str | None) -> IntLattice | None:
    if name is None:
        return None
    if name in ("E7", "E8"):
        return standard_lattice(name)
    return standard_lattice(name[0], int(name[1:]))


# Finite quadratic forms.


@dataclass(frozen=True)
class FiniteQuadForm:
    """A discriminant form with a chosen basis of cyclic generators.

    `lift_gram[i][j]` is the exact pairing of the lifted generators; q and b of
    any element are read off it modulo 2Z and Z respectively.
    """

    invariant_factors: tuple[int, ...]
    generator_lifts: tuple[Vector, ...]
    lift_gram: tuple[tuple[Fraction, ...], ...]
    ambient: IntLattice | None = None

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def q_generators(self) -> tuple[Fraction, ...]:
        return tuple(mod2(self.lift_gram[i][i]) for i in range(len(self.invariant_factors)))

    def elements(self) -> Iterator[tuple[int, ...]]:
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def add(self, x: Sequence[int], y: Sequence[int]) -> tuple[int, ...]:
        return tuple((a + b) % d for a, b, d in zip(x, y, self.invariant_factors))

    def scale(self, k: int, x: Sequence[int]) -> tuple[int, ...]:
        return tuple((k * a) % d for a, d in zip(x, self.invariant_factors))

    def q(self, x: Sequence[int]) -> Fraction:
        g = self.lift_gram
        r = len(x)
        return mod2(sum((x[i] * x[j] * g[i][j] for i in range(r) for j in range(r) if x[i] and x[j]), Fraction(0)))

    def b(self, x: Sequence[int], y: Sequence[int]) -> Fraction:
        g = self.lift_gram
        r = len(x)
        return mod1(sum((x[i] * y[j] * g[i][j] for i in range(r) for j in range(r) if x[i] and y[j]), Fraction(0)))

    def element_order(self, x: Sequence[int]) -> int:
        return _lcm(d // math.gcd(d, a) for a, d in zip(x, self.invariant_factors))

    def lift(self, x: Sequence[int]) -> Vector:
        n = len(self.generator_lifts[0]) if self.generator_lifts else 0
        out = [Fraction(0)] * n
        for c, v in zip(x, self.generator_lifts):
            if c:
                for k in range(n):
                    out[k] += c * v[k]
        return tuple(out)

    def to_json(self) -> dict:
        return {
            "group": list(self.invariant_factors),
            "q": [f"{v.numerator}/{v.denominator}" for v in self.q_generators],
        }

    def group_name(self) -> str:
        return group_name(self.invariant_factors)

    @cached_property
    def _profile(self) -> tuple:
        from collections import Counter

        return tuple(sorted(Counter((self.element_order(x), self.q(x)) for x in self.elements()).items()))

    def is_isomorphic(self, other: "FiniteQuadForm") -> bool:
        return find_isometry(self, other) is not None


def group_name(factors: Sequence[int]) -> str:
    if not factors:
        return "0"
    from collections import Counter

    parts = []
    for d, c in sorted(Counter(factors).items()):
        parts.append(f"(Z/{d})^{c}" if c > 1 else f"Z/{d}")
    return " x ".join(parts)


def primary_parts(factors: Iterable[int]) -> tuple[int, ...]:
    """Split cyclic factors into prime-power factors, sorted."""
    out = []
    for d in factors:
        p = 2
        while d > 1:
            if d % p == 0:
                q = 1
                while d % p == 0:
                    d //= p
                    q *= p
                out.append(q)
            p += 1
    return tuple(sorted(out))


def invariant_factors_of(factors: Iterable[int]) -> tuple[int, ...]:
    """Canonical invariant factors d_1 | d_2 | ... of a product of cyclic groups."""
    by_prime: dict[int, list[int]] = {}
    for q in primary_parts(factors):
        p = next(k for k in range(2, q + 1) if q % k == 0)
        by_prime.setdefault(p, []).append(q)
    length = max((len(v) for v in by_prime.values()), default=0)
    out = [1] * length
    for qs in by_prime.values():
        qs.sort(reverse=True)
        for i, q in enumerate(qs):
            out[length - 1 - i] *= q
    return tuple(out)


def find_isometry(f: FiniteQuadForm, g: FiniteQuadForm) -> list[tuple[int, ...]] | None:
    """Images of f's generators defining an isometry onto g, by backtracking."""
    if invariant_factors_of(f.invariant_factors) != invariant_factors_of(g.invariant_factors):
        return None
    if f._profile != g._profile:
        return None
    gens = [tuple(int(i == k) for i in range(len(f.invariant_factors))) for k in range(len(f.invariant_factors))]
    candidates = []
    g_elems = list(g.elements())
    for x, d in zip(gens, f.invariant_factors):
        qx = f.q(x)
        candidates.append([y for y in g_elems if g.element_order(y) == d and g.q(y) == qx])
    chosen: list[tuple[int, ...]] = []

    def generated_order(images) -> int:
        seen = {tuple([0] * len(g.invariant_factors))}
        frontier = list(seen)
        while frontier:
            nxt = []
            for e in frontier:
                for im in images:
                    s = g.add(e, im)
                    if s not in seen:
                        seen.add(s)
                        nxt.append(s)
            frontier = nxt
        return len(seen)

    def search(k: int) -> bool:
        if k == len(gens):
            return generated_order(chosen) == g.order
        for y in candidates[k]:
            if all(g.b(y, chosen[j]) == f.b(gens[k], gens[j]) for j in range(k)):
                chosen.append(y)
                if search(k + 1):
                    return True
                chosen.pop()
        return False

    return list(chosen) if search(0) else None


def discriminant_form(lat: IntLattice) -> FiniteQuadForm:
    if lat.rank == 0 or lat.det == 0:
        raise DegenerateLattice("discriminant form of a degenerate lattice")
    _, dmat, v = smith_normal_form(lat.gram)
    n = lat.rank
    factors, lifts = [], []
    for i in range(n):
        d = dmat[i][i]
        if d > 1:
            factors.append(d)
            lifts.append(tuple(Fraction(v[k][i], d) for k in range(n)))
    gram = tuple(tuple(lat.inner(x, y) for y in lifts) for x in lifts)
    return FiniteQuadForm(tuple(factors), tuple(lifts), gram, lat)


def has_element_of_order(group, q: int) -> bool:
    factors = group.invariant_factors if isinstance(group, FiniteQuadForm) else group
    return any(d % q == 0 for d in factors)


def exponent_profile(factors: Iterable[int]) -> dict[int, int]:
    """Largest prime-power element order for each prime."""
    out: dict[int, int] = {}
    for q in primary_parts(factors):
        p = next(k for k in range(2, q + 1) if q % k == 0)
        out[p] = max(out.get(p, 1), q)
    return out


def element_orders_compatible(candidate: Iterable[int], host: Iterable[int]) -> bool:
    """Every prime-power element order of `candidate` also occurs in `host`."""
    host = list(host)
    return all(has_element_of_order(host, q) for q in exponent_profile(candidate).values())


def overlattice(lat: IntLattice, glue: Sequence[Vector]) -> IntLattice:
    """The lattice spanned by `lat` and rational vectors `glue` (in lat's basis)."""
    n = lat.rank
    den = _lcm(x.denominator for v in glue for x in v)
    rows = [[den * int(i == j) for j in range(n)] for i in range(n)]
    rows += [[int(x * den) for x in v] for v in glue]
    _, dmat, v = smith_normal_form(rows)
    from sympy import Matrix

    vinv = Matrix(v).inv()
    basis = [[Fraction(int(dmat[i][i] * vinv[i, j]), den) for j in range(n)] for i in range(n)]
    gram = [[lat.inner(x, y) for y in basis] for x in basis]
    if any(g.denominator != 1 for row in gram for g in row):
        raise LatticeMismatch("glue vectors do not give an integral overlattice")
    return IntLattice(tuple(tuple(int(g) for g in row) for row in gram))


def isotropic_reductions(form: FiniteQuadForm) -> list[FiniteQuadForm]:
    """Forms h^perp / <h> for isotropic h of order 2, up to isometry."""
    if form.ambient is None:
        raise ValueError("isotropic reduction needs the ambient lattice")
    out: list[FiniteQuadForm] = []
    for h in form.elements():
        if form.element_order(h) != 2 or form.q(h) != 0:
            continue
        reduced = discriminant_form_or_trivial(overlattice(form.ambient, [form.lift(h)]))
        if not any(r.is_isomorphic(reduced) for r in out):
            out.append(reduced)
    return out


def discriminant_form_or_trivial(lat: IntLattice) -> FiniteQuadForm:
    if abs(lat.det) == 1:
        return FiniteQuadForm((), (), (), lat)
    return discriminant_form(lat)


# Rational divisors.


@dataclass(frozen=True)
class QDivisor:
    lattice: IntLattice
    coords: Vector

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))
        if len(self.coords) != self.lattice.rank:
            raise LatticeMismatch("coordinate vector does not match the lattice rank")

    def __add__(self, other: "QDivisor") -> "QDivisor":
        _same(self, other)
        return QDivisor(self.lattice, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __rmul__(self, k) -> "QDivisor":
        return QDivisor(self.lattice, tuple(k * x for x in self.coords))

    @property
    def norm(self) -> Fraction:
        return qdiv_inner(self, self)


def _same(u: QDivisor, v: QDivisor) -> None:
    if u.lattice != v.lattice:
        raise LatticeMismatch("divisors live in different lattices")


def qdiv_inner(u: QDivisor, v: QDivisor) -> Fraction:
    _same(u, v)
    return u.lattice.inner(u.coords, v.coords)


def qdiv_order_mod_L(v: QDivisor) -> int:
    return _lcm(x.denominator for x in v.coords)


def qdiv_in_dual(v: QDivisor) -> bool:
    g = v.lattice.gram
    n = v.lattice.rank
    return all(sum((g[i][j] * v.coords[j] for j in range(n)), Fraction(0)).denominator == 1 for i in range(n))


def pairing_with_incidence(v: QDivisor, incidence: Sequence[int]) -> Fraction:
    """Intersection with a curve meeting basis element k with multiplicity incidence[k]."""
    return sum((c * m for c, m in zip(v.coords, incidence)), Fraction(0))


def theta_divisor(m: int) -> QDivisor:
    """(1/2m) sum_k k Theta_k on the A_(2m-1) chain of an I_2m fiber of type (ii)."""
    if m < 1:
        raise WrongFiberKind("theta divisor needs an I_2m fiber with m >= 1")
    return QDivisor(A(2 * m - 1), tuple(Fraction(k, 2 * m) for k in range(1, 2 * m)))


def theta_for_fiber(f: FiberType) -> QDivisor:
    if f.kind != "I" or f.action != "ii":
        raise WrongFiberKind(f"{f} is not an I_2m fiber of type (ii)")
    return theta_divisor(f.n // 2)


# Fiber blocks of the trivial lattice with the 2-torsion section's incidences.


@dataclass(frozen=True)
class FiberBlock:
    fiber: FiberType
    lattice: IntLattice
    section_incidence: tuple[int, ...]


def fiber_block(f: FiberType) -> FiberBlock:
    """Root lattice of the non-identity components and where sigma meets them.

    I_n(i): sigma meets Theta_0. I_2m(ii): sigma meets Theta_m. I*(i): Theta_1.
    I*_2k(ii) and I*_0: Theta_2.
    """
    from .kodaira import fiber_invariants

    inv = fiber_invariants(f)
    lat = root_lattice_by_name(inv.root_lattice)
    if lat is None:
        return FiberBlock(f, IntLattice((), ()), ())
    inc = [0] * lat.rank
    if f.kind == "I" and f.action == "ii":
        inc[f.n // 2 - 1] = 1
    elif f.kind == "I*":
        # I*_0: all three non-identity simple components are equivalent
        inc[lat.index("Theta1" if f.action == "i" else "Theta2")] = 1
    elif f.kind == "III":
        inc[0] = 1
    elif f.kind == "III*":
        # the other simple component ends the long arm r4-r5-r6
        inc[5] = 1
    return FiberBlock(f, lat, tuple(inc))


def block_sum(blocks: Sequence[FiberBlock]) -> tuple[IntLattice, tuple[int, ...]]:
    lats = [b.lattice for b in blocks if b.lattice.rank]
    prefixes = [str(b.fiber) + f"#{i}" for i, b in enumerate(blocks) if b.lattice.rank]
    inc: list[int] = []
    for b in blocks:
        inc.extend(b.section_incidence)
    return direct_sum(*lats, prefixes=prefixes), tuple(inc)


def embed(block_index: int, blocks: Sequence[FiberBlock], local: Sequence) -> Vector:
    out: list[Fraction] = []
    for i, b in enumerate(blocks):
        if i == block_index:
            out.extend(Fraction(x) for x in local)
        else:
            out.extend([Fraction(0)] * b.lattice.rank)
    return tuple(out)
