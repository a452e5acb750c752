"""Exhaustive search over singular-fiber configurations of rank-0 elliptic K3
surfaces with a 2-torsion section whose translation could give T_X = M_d.

Only necessary conditions are imposed, so the surviving values of d are an
upper bound for what actually occurs; realizability is a separate question.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterator

from .errors import NotAdmissible
from .kodaira import (
    Configuration,
    FiberType,
    fiber_invariants,
    table_fibers,
)
from .lattice import element_orders_compatible, exponent_profile, has_element_of_order

log = logging.getLogger(__name__)

D15_CAVEAT = (
    "Necessary conditions only: the d = 15 configuration 6I1 + I2 + I6 + I10 is known "
    "not to realize K3 surfaces with T_X = M_15 (cited, not computed)."
)


@dataclass(frozen=True)
class TorsionGroup:
    name: str
    factors: tuple[int, ...]

    @property
    def order(self) -> int:
        out = 1
        for d in self.factors:
            out *= d
        return out


Z2 = TorsionGroup("Z/2", (2,))
Z2xZ2 = TorsionGroup("(Z/2)^2", (2, 2))
Z4 = TorsionGroup("Z/4", (4,))
Z8 = TorsionGroup("Z/8", (8,))
Z2xZ4 = TorsionGroup("Z/2 x Z/4", (2, 4))
Z4xZ4 = TorsionGroup("(Z/4)^2", (4, 4))
Z2xZ8 = TorsionGroup("Z/2 x Z/8", (2, 8))

# 2-power torsion groups containing sigma; the odd part is irrelevant to the
# 2-isogeny and is absorbed by the determinant test.
DEFAULT_TORSION = (Z2, Z2xZ2, Z4)
EXTENDED_TORSION = DEFAULT_TORSION + (Z8, Z2xZ4, Z4xZ4, Z2xZ8)


def torsion_embeds(group: TorsionGroup, f: FiberType) -> bool:
    """Can `group` inject into the simple-point group of fiber f?

    I_n: C^* x Z/n, whose torsion is Q/Z x Z/n. I*_2k: C x (Z/2)^2.
    I*_2k+1: C x Z/4. III, III*: C x Z/2.
    """
    fs = group.factors
    if f.kind == "I":
        # needs at most one cyclic factor beyond the roots of unity in C^*
        if len(fs) == 1:
            return True
        small = min(fs)
        return len(fs) == 2 and f.n % small == 0
    if f.kind == "I*":
        host = (2, 2) if f.n % 2 == 0 else (4,)
    elif f.kind in ("III", "III*"):
        host = (2,)
    else:
        return True
    return _subgroup_of(fs, host)


def _subgroup_of(small: tuple[int, ...], host: tuple[int, ...]) -> bool:
    # Finite abelian 2-groups: compare sorted exponents of cyclic factors.
    s, h = sorted(small, reverse=True), sorted(host, reverse=True)
    return len(s) <= len(h) and all(x <= y and y % x == 0 for x, y in zip(s, h))


@dataclass(frozen=True)
class SearchConstraints:
    picard: int = 17
    mw_rank: int = 0
    euler: int = 24
    fixed_points: int = 8
    torsion_options_x: tuple[TorsionGroup, ...] = DEFAULT_TORSION
    torsion_options_y: tuple[TorsionGroup, ...] = DEFAULT_TORSION
    torsion_ratio_exponents: tuple[int, ...] = (-1, 0, 1)

    @property
    def sum_m_minus_1(self) -> int:
        return self.picard - 2 - self.mw_rank


@dataclass(frozen=True)
class CandidateWitness:
    d: int
    x_config: Configuration
    y_config: Configuration
    torsion_x: TorsionGroup
    torsion_y: TorsionGroup

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "x": self.x_config.canonical(),
            "y": self.y_config.canonical(),
            "torsion_x": self.torsion_x.name,
            "torsion_y": self.torsion_y.name,
        }


def allowed_fiber_alphabet(c: SearchConstraints = SearchConstraints()) -> list[FiberType]:
    """Fibers that fit at all: m - 1 within the Shioda-Tate budget and at most 8 fixed points."""
    out = []
    for f in table_fibers(max_index=c.sum_m_minus_1 + c.fixed_points + c.euler):
        inv = fiber_invariants(f)
        if inv.m - 1 <= c.sum_m_minus_1 and inv.n_fixed <= c.fixed_points and inv.ord_delta <= c.euler:
            out.append(f)
    return sorted(out, key=FiberType.sort_key)


def enumerate_configurations(c: SearchConstraints = SearchConstraints()) -> Iterator[Configuration]:
    """All fiber multisets meeting the rank, fixed-point and Euler budgets, in canonical order."""
    alphabet = allowed_fiber_alphabet(c)
    rows = [(f, fiber_invariants(f)) for f in alphabet]

    def rec(i: int, rank_left: int, fixed_left: int, euler_left: int, chosen: list):
        if rank_left == 0 and fixed_left == 0 and euler_left == 0:
            yield Configuration.from_counts(dict(chosen))
            return
        if i == len(rows) or euler_left <= 0:
            return
        f, inv = rows[i]
        cost = (inv.m - 1, inv.n_fixed, inv.ord_delta)
        k = 0
        while True:
            r = rank_left - k * cost[0]
            x = fixed_left - k * cost[1]
            e = euler_left - k * cost[2]
            if r < 0 or x < 0 or e < 0:
                break
            if k:
                chosen.append((f, k))
            yield from rec(i + 1, r, x, e, chosen)
            if k:
                chosen.pop()
            k += 1

    yield from rec(0, c.sum_m_minus_1, c.fixed_points, c.euler, [])


def _prime_powers_exactly_dividing(n: int) -> list[int]:
    return list(exponent_profile([n]).values())


@dataclass
class SearchResult:
    admissible: dict[int, list[CandidateWitness]]
    configurations_examined: int
    torsion_filter: dict | None = None

    def to_json(self) -> dict:
        return {
            "admissible": sorted(self.admissible),
            "witnesses": {
                str(d): [w.to_json() for w in ws] for d, ws in sorted(self.admissible.items())
            },
            "configurations_examined": self.configurations_examined,
            "torsion_filter": self.torsion_filter,
            "caveat": D15_CAVEAT,
        }


def check_candidate(x_cfg: Configuration, tor_x: TorsionGroup, tor_y: TorsionGroup,
                    c: SearchConstraints = SearchConstraints()) -> CandidateWitness | str:
    """Run the constraint battery; return a witness or the name of the failed test."""
    y_cfg = x_cfg.quotient()
    if (y_cfg.sum_m_minus_1, y_cfg.fixed_points, y_cfg.euler) != (c.sum_m_minus_1, c.fixed_points, c.euler):
        return "quotient budgets"
    if not all(torsion_embeds(tor_x, f) for f in x_cfg.counts()):
        return "torsion embedding X"
    if not all(torsion_embeds(tor_y, f) for f in y_cfg.counts()):
        return "torsion embedding Y"
    ratio = tor_x.order / tor_y.order
    if ratio not in {2.0**e for e in c.torsion_ratio_exponents}:
        return "torsion ratio"
    px, py = x_cfg.prod_m1, y_cfg.prod_m1
    if px % (tor_x.order**2):
        return "det X integrality"
    det_x = px // tor_x.order**2
    if det_x % 2:
        return "det X parity"
    d = det_x // 2
    if py != 64 * d * tor_y.order**2:
        return "det Y"
    # Redundant: the two determinant equations force prod m1(Y) = 2^(5 - 2 eps) prod m1(X).
    assert any(py == 2 ** (5 - 2 * e) * px for e in c.torsion_ratio_exponents), (x_cfg, tor_x, tor_y)
    x_group = x_cfg.trivial_lattice_group()
    if not all(has_element_of_order(x_group, q) for q in _prime_powers_exactly_dividing(2 * d)):
        return "X discriminant subquotient"
    y_target = [2, 2, 2, 2, 4 * d]
    if not element_orders_compatible(y_target, y_cfg.trivial_lattice_group()):
        return "Y discriminant subquotient"
    return CandidateWitness(d, x_cfg, y_cfg, tor_x, tor_y)


def admissible_d_search(c: SearchConstraints = SearchConstraints()) -> SearchResult:
    admissible: dict[int, list[CandidateWitness]] = {}
    examined = 0
    for x_cfg in enumerate_configurations(c):
        examined += 1
        for tor_x in c.torsion_options_x:
            for tor_y in c.torsion_options_y:
                w = check_candidate(x_cfg, tor_x, tor_y, c)
                if isinstance(w, CandidateWitness):
                    admissible.setdefault(w.d, []).append(w)
    for d in admissible:
        admissible[d].sort(key=lambda w: (w.x_config.canonical(), w.torsion_x.name, w.torsion_y.name))
    log.info("examined %d configurations, admissible d = %s", examined, sorted(admissible))
    return SearchResult(admissible, examined)


def torsion_bound_filter(c: SearchConstraints = SearchConstraints(), baseline: set[int] | None = None) -> dict:
    """Re-run the battery allowing torsion of order 8 and 16; report survivors and any new d."""
    wide = SearchConstraints(
        c.picard, c.mw_rank, c.euler, c.fixed_points, EXTENDED_TORSION, EXTENDED_TORSION,
        c.torsion_ratio_exponents,
    )
    big = [g for g in EXTENDED_TORSION if g.order >= 8]
    survivors: Counter = Counter()
    for x_cfg in enumerate_configurations(wide):
        for tx in EXTENDED_TORSION:
            for ty in EXTENDED_TORSION:
                if tx not in big and ty not in big:
                    continue
                w = check_candidate(x_cfg, tx, ty, wide)
                if isinstance(w, CandidateWitness):
                    survivors[(w.d, str(w.x_config), tx.name, ty.name)] += 1
    if baseline is None:
        baseline = set(admissible_d_search(c).admissible)
    new_d = sorted({key[0] for key in survivors} - baseline)
    return {
        "survivors": [f"d={d}: X={x} tor_X={tx} tor_Y={ty}" for (d, x, tx, ty) in sorted(survivors)],
        "new_d": new_d,
    }


def distinct_configurations(ws: list[CandidateWitness]) -> list[tuple[Configuration, Configuration]]:
    seen, out = set(), []
    for w in ws:
        key = tuple(w.x_config.canonical())
        if key not in seen:
            seen.add(key)
            out.append((w.x_config, w.y_config))
    return out


# Degenerations of the generic configuration 8 I2 (b = 0) + 8 I1 (c = 0) on X.


@dataclass(frozen=True)
class Confluence:
    fiber: FiberType
    from_b_zeros: int
    from_c_zeros: int

    def describe(self) -> str:
        parts = []
        if self.from_b_zeros:
            parts.append(f"{self.from_b_zeros} I2 [b=0]")
        if self.from_c_zeros:
            parts.append(f"{self.from_c_zeros} I1 [c=0]")
        return f"{self.fiber} <- " + " + ".join(parts)


def confluences(x_cfg: Configuration) -> list[Confluence]:
    out = []
    for f in x_cfg.fibers():
        _, v_b, v_c = f.valuations()
        out.append(Confluence(f, v_b, v_c))
    return out


def degeneration_chain(x_cfg: Configuration) -> dict:
    """Express x_cfg as merging b-zeros first, then c-zeros (and mixed additive fibers)."""
    merges = confluences(x_cfg)
    total_b = sum(m.from_b_zeros for m in merges)
    total_c = sum(m.from_c_zeros for m in merges)
    euler = sum(2 * m.from_b_zeros + m.from_c_zeros for m in merges)
    if (total_b, total_c, euler) != (8, 8, 24):
        raise ValueError(f"{x_cfg} is not a degeneration of 8I2 + 8I1: ({total_b}, {total_c}, {euler})")

    def stage(use_b: bool, use_c: bool) -> Configuration:
        counts: Counter = Counter()
        for m in merges:
            mixed = m.from_b_zeros and m.from_c_zeros
            if mixed and not (use_b and use_c):
                counts[FiberType.parse("I2(ii)")] += m.from_b_zeros
                counts[FiberType.parse("I1(i)")] += m.from_c_zeros
            elif m.from_b_zeros and not m.from_c_zeros and not use_b:
                counts[FiberType.parse("I2(ii)")] += m.from_b_zeros
            elif m.from_c_zeros and not m.from_b_zeros and not use_c:
                counts[FiberType.parse("I1(i)")] += m.from_c_zeros
            else:
                counts[m.fiber] += 1
        return Configuration.from_counts(counts)

    x_stages = [stage(False, False)]
    for nxt in (stage(True, False), stage(True, True)):
        if nxt != x_stages[-1]:
            x_stages.append(nxt)
    y_stages = [s.quotient() for s in x_stages]
    return {
        "x_chain": [str(s) for s in x_stages],
        "y_chain": [str(s) for s in y_stages],
        "confluences": [m.describe() for m in merges if m.from_b_zeros + m.from_c_zeros > 1],
        "b_zero_total": total_b,
        "c_zero_total": total_c,
        "euler_total": euler,
    }


def degeneration_report(d: int, result: SearchResult | None = None) -> dict:
    result = result or admissible_d_search()
    if d not in result.admissible:
        raise NotAdmissible(f"d = {d} is not admissible; admissible values: {sorted(result.admissible)}")
    out = []
    for x_cfg, y_cfg in distinct_configurations(result.admissible[d]):
        out.append({"x": str(x_cfg), "y": str(y_cfg), **degeneration_chain(x_cfg)})
    report = {"d": d, "configurations": out}
    if d == 15:
        report["caveat"] = D15_CAVEAT
    return report
