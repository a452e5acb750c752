"""Kodaira fibers of y^2 = x(x^2 + a x + b) and their behaviour under the 2-isogeny.

A fiber is determined by the valuations (v_b, v_c) of b and c = a^2 - 4b at
its place. The involution type (i)/(ii) records which component the 2-torsion
section meets, and it is visible in the valuations: type (ii) multiplicative
fibers have v_b > 0, type (ii) I*_2k fibers have v_c = 2.

Observe that ord c equals the number of fixed points of the translation, so
the "8 fixed points" condition is the same as deg c = 8 in weighted form.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import NonMinimalModel, NotInTable, RegularFiber

I, ISTAR, III, IIISTAR, REG = "I", "I*", "III", "III*", "reg"
_KIND_ORDER = {I: 0, ISTAR: 1, III: 2, IIISTAR: 3, REG: 4}


@dataclass(frozen=True)
class FiberType:
    kind: str
    n: int = 0
    action: str | None = None

    def __post_init__(self):
        k, n, act = self.kind, self.n, self.action
        if k == I:
            if n < 1 or act not in ("i", "ii"):
                raise ValueError(f"bad I_n fiber: n={n}, action={act}")
            if act == "ii" and n % 2:
                raise ValueError("type (ii) I_n needs n even")
        elif k == ISTAR:
            if n < 0:
                raise ValueError("I*_n needs n >= 0")
            if n == 0 and act is not None:
                raise ValueError("I*_0 carries no action tag")
            if n % 2 and act != "i":
                raise ValueError("odd I*_n only occurs with action (i)")
            if n > 0 and n % 2 == 0 and act not in ("i", "ii"):
                raise ValueError("I*_2k needs an action tag")
        elif k in (III, IIISTAR, REG):
            if n or act is not None:
                raise ValueError(f"{k} carries no index or action")
        else:
            raise ValueError(f"unknown fiber kind {k!r}")

    def __str__(self) -> str:
        if self.kind == I:
            return f"I{self.n}({self.action})"
        if self.kind == ISTAR:
            return f"I*{self.n}" if self.action is None else f"I*{self.n}({self.action})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "FiberType":
        text = text.strip()
        if text in (III, IIISTAR, REG):
            return cls(text)
        m = re.fullmatch(r"I(\*?)(\d+)(?:\((i|ii)\))?", text)
        if not m:
            raise ValueError(f"cannot parse fiber {text!r}")
        star, n, act = m.groups()
        return cls(ISTAR if star else I, int(n), act)

    def sort_key(self) -> tuple:
        return (_KIND_ORDER[self.kind], self.n, self.action or "")

    @property
    def is_additive(self) -> bool:
        return self.kind in (ISTAR, III, IIISTAR)

    def valuations(self) -> tuple[int, int, int]:
        """A canonical (v_a, v_b, v_c) triple realizing this fiber."""
        k, n, act = self.kind, self.n, self.action
        if k == REG:
            return (0, 0, 0)
        if k == I:
            return (0, 0, n) if act == "i" else (0, n // 2, 0)
        if k == III:
            return (1, 1, 1)
        if k == IIISTAR:
            return (2, 3, 3)
        if act == "ii":
            return (1, n // 2 + 2, 2)
        return (1, 2, n + 2)


def I_(n: int, action: str = "i") -> FiberType:
    return FiberType(I, n, action)


def IStar(n: int, action: str | None = None) -> FiberType:
    if action is None and n > 0:
        action = "i"
    return FiberType(ISTAR, n, None if n == 0 else action)


FIBER_III = FiberType(III)
FIBER_IIISTAR = FiberType(IIISTAR)
REGULAR = FiberType(REG)


def classify_from_valuations(v_a, v_b, v_c) -> FiberType:
    """Read a fiber type off the valuations of a, b and c = a^2 - 4b."""
    if v_a >= 2 and v_b >= 4:
        raise NonMinimalModel(f"(v_a, v_b) = ({v_a}, {v_b}) admits the (2, 4) rescaling")
    if v_b == 0:
        return REGULAR if v_c == 0 else I_(v_c, "i")
    if v_c == 0:
        return I_(2 * v_b, "ii")
    if (v_b, v_c) == (1, 1):
        return FIBER_III
    if (v_b, v_c) == (3, 3):
        return FIBER_IIISTAR
    if v_b == 2 and v_c >= 2:
        return IStar(v_c - 2, "i")
    if v_b >= 3 and v_c == 2:
        return IStar(2 * (v_b - 2), "ii")
    raise NotInTable(f"valuations (v_b, v_c) = ({v_b}, {v_c}) are not in the fiber table")


@dataclass(frozen=True)
class FiberInvariants:
    root_lattice: str | None
    ord_delta: int
    m: int
    m1: int
    n_fixed: int
    component_group: tuple[int, ...]


def fiber_invariants(f: FiberType) -> FiberInvariants:
    k, n, act = f.kind, f.n, f.action
    if k == REG:
        raise RegularFiber("regular fiber has no invariants row")
    if k == I:
        return FiberInvariants(
            f"A{n - 1}" if n > 1 else None, n, n, n, n if act == "i" else 0,
            (n,) if n > 1 else (),
        )
    if k == III:
        return FiberInvariants("A1", 3, 2, 2, 1, (2,))
    if k == IIISTAR:
        return FiberInvariants("E7", 9, 8, 2, 3, (2,))
    if n % 2 == 0:
        fixed = n + 2 if act in ("i", None) else 2
        return FiberInvariants(f"D{n + 4}", n + 6, n + 5, 4, fixed, (2, 2))
    return FiberInvariants(f"D{n + 4}", n + 6, n + 5, 4, n + 2, (4,))


def _table_quotient(f: FiberType) -> tuple[str, int]:
    # The g^{-1}(nu) row: (kind, n) only.
    k, n, act = f.kind, f.n, f.action
    if k == I:
        return (I, 2 * n) if act == "i" else (I, n // 2)
    if k == ISTAR:
        if n % 2:
            return (ISTAR, 2 * n)  # I*_{2k+1} -> I*_{4k+2}
        return (ISTAR, 2 * n) if act in ("i", None) else (ISTAR, n // 2)
    return (k, 0)


def quotient_fiber(f: FiberType) -> FiberType:
    """Fiber of the quotient surface over the same place.

    The kind and index come from the table row; the action tag is recomputed by
    classifying the swapped valuations (b_Y = c and c_Y = 16 b), and the two
    routes must agree.
    """
    if f.kind == REG:
        return REGULAR
    v_a, v_b, v_c = f.valuations()
    via_vals = classify_from_valuations(v_a, v_c, v_b)
    kind, n = _table_quotient(f)
    if (via_vals.kind, via_vals.n) != (kind, n):
        raise AssertionError(f"quotient table row disagrees with valuations for {f}")
    return via_vals


@dataclass(frozen=True)
class ConfigEntry:
    fiber: FiberType
    count: int
    place: object = None  # PlaceCluster or None


@dataclass(frozen=True)
class Configuration:
    """A multiset of singular fibers, optionally attached to places."""

    entries: tuple[ConfigEntry, ...] = ()

    @classmethod
    def from_counts(cls, counts) -> "Configuration":
        if isinstance(counts, dict):
            items = counts.items()
        else:
            items = Counter(counts).items()
        entries = [ConfigEntry(f, c) for f, c in items if c > 0 and f.kind != REG]
        return cls(tuple(sorted(entries, key=lambda e: e.fiber.sort_key())))

    @classmethod
    def parse(cls, text: str) -> "Configuration":
        counts: Counter = Counter()
        for part in text.split("+"):
            m = re.fullmatch(r"\s*(\d*)\s*(\S+)\s*", part)
            if not m:
                raise ValueError(f"cannot parse configuration term {part!r}")
            mult, fib = m.groups()
            counts[FiberType.parse(fib)] += int(mult) if mult else 1
        return cls.from_counts(counts)

    def counts(self) -> Counter:
        out: Counter = Counter()
        for e in self.entries:
            out[e.fiber] += e.count
        return out

    def fibers(self) -> Iterator[FiberType]:
        for e in self.entries:
            for _ in range(e.count):
                yield e.fiber

    def __eq__(self, other) -> bool:
        if not isinstance(other, Configuration):
            return NotImplemented
        return self.counts() == other.counts()

    def __hash__(self) -> int:
        return hash(frozenset(self.counts().items()))

    def _sum(self, attr: str) -> int:
        return sum(getattr(fiber_invariants(e.fiber), attr) * e.count for e in self.entries)

    @property
    def euler(self) -> int:
        return self._sum("ord_delta")

    @property
    def fixed_points(self) -> int:
        return self._sum("n_fixed")

    @property
    def sum_m_minus_1(self) -> int:
        return sum((fiber_invariants(e.fiber).m - 1) * e.count for e in self.entries)

    @property
    def prod_m1(self) -> int:
        out = 1
        for e in self.entries:
            out *= fiber_invariants(e.fiber).m1 ** e.count
        return out

    def trivial_lattice_group(self) -> list[int]:
        """Cyclic factors of the direct sum of the L_nu^* / L_nu."""
        out = []
        for e in self.entries:
            out.extend(fiber_invariants(e.fiber).component_group * e.count)
        return out

    def quotient(self) -> "Configuration":
        return Configuration(
            tuple(ConfigEntry(quotient_fiber(e.fiber), e.count, e.place) for e in self.entries)
        )

    def canonical(self) -> list[str]:
        counts = self.counts()
        out = []
        for f in sorted(counts, key=FiberType.sort_key):
            c = counts[f]
            out.append(f"{c}{f}" if c > 1 else str(f))
        return out

    def __str__(self) -> str:
        return " + ".join(self.canonical()) or "(no singular fibers)"

    def plain(self) -> str:
        """Fiber list without action tags, e.g. '6I1 + I2 + I6 + I10'."""
        counts: Counter = Counter()
        for f, c in self.counts().items():
            counts[f.kind + str(f.n) if f.kind in (I, ISTAR) else f.kind] += c
        keys = sorted(counts, key=lambda s: (s.startswith("III"), "*" in s, int(re.sub(r"\D", "", s) or 0)))
        return " + ".join(f"{counts[k]}{k}" if counts[k] > 1 else k for k in keys)


def table_fibers(max_index: int = 24) -> Iterable[FiberType]:
    """Every row of the fiber table, instantiated up to `max_index`."""
    for n in range(1, max_index + 1):
        yield I_(n, "i")
        if n % 2 == 0:
            yield I_(n, "ii")
    yield IStar(0)
    for n in range(1, max_index + 1):
        yield IStar(n, "i")
        if n % 2 == 0:
            yield IStar(n, "ii")
    yield FIBER_III
    yield FIBER_IIISTAR
