"""The explicit families X(d, P): y^2 = x(x^2 + P x + t^d) and
X'_n: y^2 = x(x^2 + P x + t^n (t - 1)^(8 - n)), with their lattice checks.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import InvalidFamilyParameter
from .kodaira import Configuration, FiberType
from .lattice import (
    FiberBlock,
    IntLattice,
    QDivisor,
    U,
    block_sum,
    direct_sum,
    discriminant_form,
    element_orders_compatible,
    embed,
    fiber_block,
    isotropic_reductions,
    Md,
    group_name,
    mod2,
    pairing_with_incidence,
    qdiv_in_dual,
    qdiv_order_mod_L,
    rank1,
    rescale,
    theta_for_fiber,
)
from .polys import T, UniPoly, poly_gcd, squarefree_part
from .surface import (
    TwoTorsionSurface,
    classify_surface,
    quotient_surface,
    surface_report,
)

SAMPLE_P = UniPoly([1, 1, 0, 1])  # t^3 + t + 1
SAMPLE_XPRIME_PARAMS = (0, 1, 1)
NIKULIN_CITATION = "isomorphism class of NS from its discriminant form per Nikulin's uniqueness theorem (cited, not computed)"


@dataclass(frozen=True)
class FamilySpec:
    family: str  # "Xd" or "XPrime"
    index: int  # d or n
    P: UniPoly

    @classmethod
    def xd(cls, d: int, p_coeffs: Sequence = (1, 1, 0, 1)) -> "FamilySpec":
        P = UniPoly(p_coeffs)
        if not 0 <= d <= 8:
            raise InvalidFamilyParameter(f"X(d, P) needs 0 <= d <= 8, got {d}")
        if P.deg != 3:
            raise InvalidFamilyParameter(f"P must be cubic, got degree {P.deg}")
        return cls("Xd", d, P)

    @classmethod
    def xprime(cls, n: int, a1=0, a2=1, a3=1) -> "FamilySpec":
        if n not in (5, 7):
            raise InvalidFamilyParameter(f"X'_n is defined for n in {{5, 7}}, got {n}")
        P = UniPoly([a3, a2, a1, -(8 - n), 2])
        return cls("XPrime", n, P)

    @property
    def b(self) -> UniPoly:
        if self.family == "Xd":
            return T ** self.index
        return T ** self.index * (T - 1) ** (8 - self.index)

    def label(self) -> str:
        return f"X_{self.index}" if self.family == "Xd" else f"X'_{self.index}"


def build_family(spec: FamilySpec) -> TwoTorsionSurface:
    return TwoTorsionSurface(spec.P, spec.b)


def genericity_problems(spec: FamilySpec) -> list[str]:
    """Checks that the sample P avoids the special loci the fiber tables assume."""
    problems = []
    c = spec.P * spec.P - 4 * spec.b
    if squarefree_part(c) != c.monic():
        problems.append("c = P^2 - 4b is not squarefree")
    special = [UniPoly([0, 1])]
    if spec.family == "XPrime":
        special.append(UniPoly([-1, 1]))
    for h in special:
        if (spec.family == "Xd" and spec.index == 0) and h == special[0]:
            continue
        if not poly_gcd(c, h).is_constant():
            problems.append(f"c vanishes at the designated place {h} = 0")
    expected_deg = {"Xd": max(6, spec.index), "XPrime": 6}[spec.family]
    if c.deg != expected_deg:
        problems.append(f"deg c = {c.deg}, expected {expected_deg}")
    return problems


# Fiber tables.


def _cell(cfg: Configuration, which) -> str:
    counts: Counter = Counter()
    for e in cfg.entries:
        if which(e.place):
            counts[_plain(e.fiber)] += e.count
    if not counts:
        return "reg."
    return " + ".join(f"{c} {k}" if c > 1 else k for k, c in sorted(counts.items()))


def _plain(f: FiberType) -> str:
    if f.kind == "I":
        return f"I{f.n}"
    if f.kind == "I*":
        return f"I*{f.n}"
    return f.kind


def fiber_table(P: UniPoly = SAMPLE_P) -> dict:
    """Fibers of X_d and Y_d over t = 0, over c = 0 and at infinity, d = 0..8."""
    rows: dict[str, dict[str, str]] = {"t=0": {}, "c(t)=0": {}, "t=inf": {}}
    for d in range(9):
        spec = FamilySpec.xd(d, P.coeffs)
        x = build_family(spec)
        c = x.c
        for name, surf in ((f"X_{d}", x), (f"Y_{d}", quotient_surface(x))):
            cfg = classify_surface(surf)
            rows["t=0"][name] = _cell(cfg, lambda pl: pl is not None and not pl.at_infinity and pl.modulus == T)
            rows["c(t)=0"][name] = _cell(
                cfg, lambda pl: pl is not None and not pl.at_infinity and pl.modulus.divides(c)
            )
            rows["t=inf"][name] = _cell(cfg, lambda pl: pl is not None and pl.at_infinity)
    columns = [f"X_{d}" for d in range(9)] + [f"Y_{d}" for d in range(9)]
    return {"P": P.to_json(), "columns": columns, "rows": rows}


def determinant_table(P: UniPoly = SAMPLE_P, xprime_params=SAMPLE_XPRIME_PARAMS) -> list[dict]:
    out = []
    specs = [FamilySpec.xd(d, P.coeffs) for d in range(7)]
    specs += [FamilySpec.xprime(n, *xprime_params) for n in (5, 7)]
    for spec in specs:
        x = build_family(spec)
        for name, surf in ((spec.label(), x), (spec.label().replace("X", "Y"), quotient_surface(x))):
            rep = surface_report(surf)
            out.append({
                "surface": name,
                "configuration": str(rep.configuration),
                "picard": rep.picard,
                "torsion": rep.torsion.group,
                "det_ns": rep.det_ns,
            })
    return out


# Glue divisors Gamma and the discriminant group of NS.


@dataclass
class GlueReport:
    surface: str
    norm: Fraction
    order: int
    in_dual: bool
    section_pairing: Fraction
    det_ns: int
    notes: list[str] = field(default_factory=list)

    @property
    def cyclic_generator(self) -> bool:
        """Gamma has order |det NS|, so it generates NS^*/NS."""
        return self.in_dual and self.section_pairing.denominator == 1 and self.order == abs(self.det_ns)

    def to_json(self) -> dict:
        return {
            "surface": self.surface,
            "gamma_norm": str(self.norm),
            "gamma_order": self.order,
            "in_dual": self.in_dual,
            "gamma_dot_sigma": str(self.section_pairing),
            "det_ns": self.det_ns,
            "generates_discriminant_group": self.cyclic_generator,
            "notes": list(self.notes),
        }


def _blocks(cfg: Configuration) -> tuple[list[FiberBlock], list]:
    blocks, places = [], []
    for e in cfg.entries:
        for _ in range(e.count):
            blocks.append(fiber_block(e.fiber))
            places.append(e.place)
    return blocks, places


def gamma_divisor(surface: TwoTorsionSurface) -> tuple[QDivisor, tuple[int, ...]]:
    """Sum of theta divisors of type (ii) I_2m fibers plus half-sums on other fibers.

    On a type (ii) I*_2k fiber the contribution is (Theta_2 + Theta_3)/2; on a type
    (i) I_2 fiber it is Theta_1/2. This is the divisor used for X_d and X'_n.
    """
    cfg = classify_surface(surface)
    blocks, _ = _blocks(cfg)
    lat, incidence = block_sum(blocks)
    coords = [Fraction(0)] * lat.rank
    for i, blk in enumerate(blocks):
        f = blk.fiber
        if f.kind == "I" and f.action == "ii":
            local = theta_for_fiber(f).coords
        elif f.kind == "I*" and f.action in ("ii", None) and f.n % 2 == 0:
            names = blk.lattice.basis_labels
            local = [Fraction(1, 2) if lab in ("Theta2", "Theta3") else Fraction(0) for lab in names]
        elif f.kind == "I" and f.action == "i" and f.n == 2:
            local = [Fraction(1, 2)]
        else:
            continue
        vec = embed(i, blocks, local)
        coords = [a + b for a, b in zip(coords, vec)]
    return QDivisor(lat, tuple(coords)), incidence


def glue_report(spec: FamilySpec) -> GlueReport:
    x = build_family(spec)
    gamma, incidence = gamma_divisor(x)
    rep = surface_report(x)
    out = GlueReport(
        spec.label(),
        gamma.norm,
        qdiv_order_mod_L(gamma),
        qdiv_in_dual(gamma),
        pairing_with_incidence(gamma, incidence),
        rep.det_ns,
    )
    if out.cyclic_generator:
        out.notes.append(f"NS^*/NS is cyclic of order {out.order}, q(Gamma) = {mod2(gamma.norm)} mod 2Z")
        out.notes.append(NIKULIN_CITATION)
    return out


# Transcendental lattice of Y_d for even d: one isotropic step above M_d(2).


def ty_candidates(d: int, P: UniPoly = SAMPLE_P) -> dict:
    form = discriminant_form(rescale(Md(d), 2))
    candidates = isotropic_reductions(form)
    y = quotient_surface(build_family(FamilySpec.xd(d, P.coeffs)))
    host = classify_surface(y).trivial_lattice_group()
    compatible = [c for c in candidates if element_orders_compatible(c.invariant_factors, host)]
    return {
        "d": d,
        "start": form.group_name(),
        "candidates": [c.group_name() for c in candidates],
        "trivial_lattice_group": group_name(sorted(host)),
        "compatible": [c.group_name() for c in compatible],
        "compatible_forms": compatible,
    }



def m30_lattice() -> IntLattice:
    """U + [[2, 1], [1, -2]] + <-6>, the candidate transcendental lattice of X'_5."""
    return direct_sum(U(), IntLattice(((2, 1), (1, -2))), rank1(-6))


def delta_report() -> dict:
    """A generator delta of M^*/M for the rank-5 lattice above, with q(delta)."""
    form = discriminant_form(m30_lattice())
    delta = QDivisor(form.ambient, form.lift((1,)))
    return {
        "group": form.group_name(),
        "delta": [str(x) for x in delta.coords],
        "delta_norm": str(delta.norm),
        "q_delta": str(form.q((1,))),
        "order": qdiv_order_mod_L(delta),
        "in_dual": qdiv_in_dual(delta),
    }


def paper_tables(P: UniPoly = SAMPLE_P, xprime_params=SAMPLE_XPRIME_PARAMS) -> dict:
    """Everything the family section tabulates, regenerated from the sample data."""
    specs = [FamilySpec.xd(d, P.coeffs) for d in range(9)] + [FamilySpec.xprime(n, *xprime_params) for n in (5, 7)]
    return {
        "genericity": {s.label(): genericity_problems(s) for s in specs},
        "fiber_table": fiber_table(P),
        "determinants": determinant_table(P, xprime_params),
        "gamma": [glue_report(s).to_json() for s in specs if s.family == "XPrime" or 1 <= s.index <= 6],
        "delta": delta_report(),
        "overlattice": [{k: v for k, v in ty_candidates(d, P).items() if k != "compatible_forms"} for d in (2, 4, 6)],
        "notes": [
            "mw_rank assumed 0 throughout",
            NIKULIN_CITATION,
        ],
    }
