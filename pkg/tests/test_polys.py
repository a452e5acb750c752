from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from k3nikulin.errors import DegreeBoundViolated, ZeroPolynomial
from k3nikulin.polys import (
    T,
    UniPoly,
    coprime_refine,
    infinity_valuations,
    is_square_geometric,
    is_square_rational,
    poly_gcd,
    squarefree_decompose,
    squarefree_part,
)

t = sympy.Symbol("t")

small_fracs = st.fractions(min_value=-5, max_value=5, max_denominator=4)
polys = st.lists(small_fracs, min_size=0, max_size=7).map(UniPoly)
nonzero_polys = polys.filter(lambda p: not p.is_zero())


def to_sympy(p: UniPoly) -> sympy.Poly:
    return sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in reversed(p.coeffs)] or [0], t, domain="QQ")


def from_sympy(p: sympy.Poly) -> UniPoly:
    return UniPoly([Fraction(int(c.p), int(c.q)) for c in reversed(p.all_coeffs())])


def P(*coeffs) -> UniPoly:
    return UniPoly(coeffs)


class TestBasics:
    def test_trailing_zeros_stripped(self):
        assert P(1, 2, 0, 0) == P(1, 2)
        assert P(0, 0).is_zero()

    def test_zero_degree_is_sentinel(self):
        assert P().deg < -1000
        assert P().deg != -1

    def test_json_round_trip(self):
        p = P(0, Fraction(1, 2), 3)
        assert p.to_json() == ["0/1", "1/2", "3/1"]
        assert UniPoly.from_json(["0", "1/2", "3"]) == p
        assert UniPoly.from_json(p.to_json()) == p

    def test_rationals_normalized(self):
        p = UniPoly(["2/4", "-6/3"])
        assert p.coeffs == (Fraction(1, 2), Fraction(-2))

    @given(polys, polys)
    def test_arithmetic_matches_sympy(self, f, g):
        assert to_sympy(f + g) == to_sympy(f) + to_sympy(g)
        assert to_sympy(f * g) == to_sympy(f) * to_sympy(g)

    @given(polys, nonzero_polys)
    def test_divmod_matches_sympy(self, f, g):
        q, r = divmod(f, g)
        sq, sr = sympy.div(to_sympy(f), to_sympy(g))
        assert to_sympy(q) == sq and to_sympy(r) == sr

    @given(polys, small_fracs)
    def test_evaluation(self, f, x):
        assert f(x) == to_sympy(f).eval(sympy.Rational(x.numerator, x.denominator))


class TestGcd:
    def test_examples(self):
        assert poly_gcd(T * T - 1, T - 1) == T - 1
        f = P(2, 0, 4)
        assert poly_gcd(f, P()) == f.monic()
        assert poly_gcd(T * T + 1, T * T - 1) == P(1)
        assert poly_gcd(P(), P()).is_zero()

    @given(polys, polys)
    def test_matches_sympy(self, f, g):
        expected = sympy.gcd(to_sympy(f), to_sympy(g))
        got = poly_gcd(f, g)
        if f.is_zero() and g.is_zero():
            assert got.is_zero()
        else:
            assert to_sympy(got) == expected.monic()


class TestSquarefree:
    def test_examples(self):
        assert squarefree_decompose(T**3 * (T - 1)) == [(T - 1, 1), (T, 3)]
        assert squarefree_decompose(T * T + 2 * T + 1) == [(T + 1, 2)]
        f = (T * T - 2) ** 2 * (T**3 - T)
        assert squarefree_decompose(f) == [(T**3 - T, 1), (T * T - 2, 2)]

    def test_zero_rejected(self):
        with pytest.raises(ZeroPolynomial):
            squarefree_decompose(P())

    @given(nonzero_polys)
    def test_reconstruction_and_shape(self, f):
        parts = squarefree_decompose(f)
        prod = UniPoly.constant(f.lc)
        for g, m in parts:
            assert g.lc == 1
            assert poly_gcd(g, g.derivative()).is_constant()
            prod = prod * g**m
        assert prod == f
        mults = [m for _, m in parts]
        assert mults == sorted(set(mults))
        for i, (g, _) in enumerate(parts):
            for h, _ in parts[i + 1:]:
                assert poly_gcd(g, h).is_constant()

    @given(nonzero_polys)
    def test_matches_sympy_sqf(self, f):
        _, sym = sympy.sqf_list(to_sympy(f))
        expected = sorted((m, from_sympy(g).monic()) for g, m in sym if g.degree() > 0)
        got = sorted((m, g) for g, m in squarefree_decompose(f))
        assert [(m, g) for m, g in got] == [(m, g) for m, g in expected]

    @given(nonzero_polys)
    def test_squarefree_part(self, f):
        assert to_sympy(squarefree_part(f)) == sympy.sqf_part(to_sympy(f)).monic() or f.is_constant()


class TestCoprimeRefine:
    def test_read_off_example(self):
        support = T * (T - 1) * (T + 1)
        clusters = coprime_refine(support, [T * T * (T - 1), T * (T + 1)])
        by_mod = {c.modulus: (c["f0"], c["f1"]) for c in clusters}
        assert by_mod == {T: (2, 1), T - 1: (1, 0), T + 1: (0, 1)}

    def test_family_cluster_at_zero(self):
        a, b = T**3 + 1, T
        c = a * a - 4 * b
        support = squarefree_part(b * b * c)
        clusters = coprime_refine(support, {"b": b, "c": c})
        zero = [cl for cl in clusters if cl.modulus == T]
        assert len(zero) == 1 and (zero[0]["b"], zero[0]["c"]) == (1, 0)

    def test_zero_support_rejected(self):
        with pytest.raises(ZeroPolynomial):
            coprime_refine(P(), [T])

    @settings(max_examples=60)
    @given(st.lists(nonzero_polys, min_size=1, max_size=3))
    def test_uniform_valuations(self, tracked):
        support = UniPoly([1])
        for f in tracked:
            if not f.is_constant():
                support = support * f
        if support.is_constant():
            return
        support = squarefree_part(support)
        clusters = coprime_refine(support, tracked)
        prod = UniPoly([1])
        for cl in clusters:
            prod = prod * cl.modulus
            assert cl.point_count == cl.modulus.deg
        assert prod == support
        # Oracle: h^k | f and gcd(h, f / h^k) = 1, checked with sympy arithmetic.
        for cl in clusters:
            h = to_sympy(cl.modulus)
            for i, f in enumerate(tracked):
                k = cl[f"f{i}"]
                q, r = sympy.div(to_sympy(f), h**k)
                assert r.is_zero
                assert sympy.gcd(h, q).degree() == 0

    @given(nonzero_polys, nonzero_polys)
    def test_valuation_sum_is_degree(self, f, g):
        if (f * g).is_constant():
            return
        support = squarefree_part(f * g)
        clusters = coprime_refine(support, {"f": f})
        assert sum(cl.point_count * cl["f"] for cl in clusters) == f.deg


class TestInfinity:
    def test_saturated_top_degrees(self):
        # b = t^8 with a monic of degree 4 is regular at infinity.
        cl = infinity_valuations(T**4 + 1, T**8)
        assert (cl["a"], cl["b"], cl["c"], cl["delta"]) == (0, 0, 0, 0)

    def test_cancelling_leading_terms(self):
        # 2t^4 + 1 with t^8: the leading terms of c cancel, leaving deg c = 4.
        cl = infinity_valuations(2 * T**4 + 1, T**8)
        assert (cl["a"], cl["b"], cl["c"]) == (0, 0, 4)

    def test_x0_and_x8(self):
        p = T**3 + T + 1
        cl = infinity_valuations(p, P(1))
        assert (cl["b"], cl["c"]) == (8, 2)
        cl = infinity_valuations(p, T**8)
        assert (cl["b"], cl["c"]) == (0, 0)

    def test_degree_bounds(self):
        with pytest.raises(DegreeBoundViolated):
            infinity_valuations(T**5, P(1))
        with pytest.raises(DegreeBoundViolated):
            infinity_valuations(P(1), T**9)

    @given(st.lists(small_fracs, max_size=5), st.lists(small_fracs, min_size=1, max_size=9))
    def test_delta_rule(self, a, b):
        a, b = UniPoly(a), UniPoly(b)
        if b.is_zero() or (a * a - 4 * b).is_zero():
            return
        cl = infinity_valuations(a, b)
        assert cl["delta"] == 2 * cl["b"] + cl["c"]
        assert cl["b"] == 8 - b.deg


class TestSquares:
    def test_rational(self):
        assert is_square_rational(T * T + 2 * T + 1) == T + 1 or is_square_rational(T * T + 2 * T + 1) == -(T + 1)
        root = is_square_rational(16 * T**6)
        assert root is not None and root * root == 16 * T**6
        assert is_square_rational(2 * T * T) is None

    def test_geometric(self):
        assert is_square_geometric(2 * T * T)
        assert not is_square_geometric(T**3)
        p = T**3 + T + 1
        assert not is_square_geometric(p * p - 4 * T**5)

    @given(nonzero_polys)
    def test_square_of_anything_is_square(self, f):
        root = is_square_rational(f * f)
        assert root is not None and root * root == f * f
        assert is_square_geometric(f * f)

    @given(nonzero_polys)
    def test_rational_implies_geometric(self, f):
        if is_square_rational(f) is not None:
            assert is_square_geometric(f)
