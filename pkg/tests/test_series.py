"""Expansion kernel checked against sympy series and closed-form tables."""

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from qva.errors import DivergentProduct, InvalidParameter, RegionMismatch
from qva.scalars import QScalar, format_qscalar
from qva.series import (AffineMap, MultiPoly, Region, Series, VarSpec, delta_series, derivative,
                        iota_expand, parse_rational, residue, series_from_json, series_from_poly,
                        series_mul, series_to_json)

from conftest import random_qscalar

Z, INF = Region.AT_ZERO, Region.AT_INFINITY
x, u, Q = sympy.symbols("x u q")


def binom(n: int, k: int) -> int:
    """Generalized binomial coefficient, n any integer, k >= 0."""
    out = Fraction(1)
    for j in range(k):
        out = out * (n - j) / (j + 1)
    return int(out)


def sym_coeffs_at_zero(expr, var, lo, hi):
    """Laurent coefficients of expr at var = 0 from sympy."""
    ser = sympy.expand(sympy.series(expr, var, 0, hi + 1).removeO())
    return {k: sympy.simplify(ser.coeff(var, k)) for k in range(lo, hi + 1)}


def as_sym(c: QScalar):
    return sympy.sympify(format_qscalar(c).replace("^", "**"), locals={"q": Q})


def random_univariate(rng: random.Random) -> str:
    def poly():
        return "+".join(f"({rng.randint(-4, 4)})*x**{k}" for k in range(rng.randint(1, 3)))
    den = poly()
    while sympy.sympify(den) == 0:
        den = poly()
    return f"({poly()})/({den})"


@pytest.mark.parametrize("seed", range(12))
def test_expansion_at_zero_matches_sympy(seed):
    rng = random.Random(seed)
    text = random_univariate(rng)
    s = iota_expand(parse_rational(text, ["x"]), [VarSpec("x", Z)], [(-3, 4)])
    for k, c in sym_coeffs_at_zero(sympy.sympify(text), x, -3, 4).items():
        assert as_sym(s.coeff((k,))) == c, (text, k)


@pytest.mark.parametrize("seed", range(12))
def test_expansion_at_infinity_matches_sympy(seed):
    rng = random.Random(100 + seed)
    text = random_univariate(rng)
    s = iota_expand(parse_rational(text, ["x"]), [VarSpec("x", INF)], [(-4, 3)])
    # x = 1/u, so the x^k coefficient is the u^-k coefficient
    for k, c in sym_coeffs_at_zero(sympy.sympify(text).subs(x, 1 / u), u, -3, 4).items():
        assert as_sym(s.coeff((-k,))) == c, (text, k)


def test_two_variable_orders_give_opposite_geometric_series():
    f = parse_rational("1/(x1-x2)", ["x1", "x2"])
    win = [(-5, 5), (-5, 5)]
    a = iota_expand(f, [VarSpec("x1", Z), VarSpec("x2", Z)], win)
    b = iota_expand(f, [VarSpec("x2", Z), VarSpec("x1", Z)], win)
    # keys follow the listed order; the last listed variable is the outer one
    assert a.terms == {(-i - 1, i): QScalar.from_rational(1) for i in range(5)}
    assert b.terms == {(-i - 1, i): QScalar.from_rational(-1) for i in range(5)}


def test_both_expansion_conventions_for_the_q_kernel():
    q = QScalar.q()
    for sign in (1, -1):
        f = parse_rational(f"1/({sign}*q+x1-x2)", ["x1", "x2"])
        # at zero in both variables: sum (sign q)^(-i-1) (x2 - x1)^i
        s = iota_expand(f, [VarSpec("x1", Z), VarSpec("x2", Z)], [(0, 3), (0, 3)])
        for a in range(4):
            for b in range(4):
                i = a + b
                assert s.coeff((a, b)) == (q * sign) ** (-i - 1) * (binom(i, a) * (-1) ** a)
        # x1 large: sum (-sign q)^i (x1 - x2)^(-1-i), keys ordered (x2, x1)
        t = iota_expand(f, [VarSpec("x2", Z), VarSpec("x1", INF)], [(0, 3), (-7, -1)])
        for b in range(4):
            for a in range(-7, 0):
                i = -1 - a - b
                want = (-sign * q) ** i * (binom(-1 - i, b) * (-1) ** b) if i >= 0 else 0
                assert t.coeff((b, a)) == want


def test_delta_identity_window():
    d = delta_series(AffineMap(), 0, "x1", "x2", [(-4, 3), (-4, 3)])
    assert set(d.terms) == {(a, b) for a in range(-4, 4) for b in range(-4, 4) if a + b == -1}


def test_shifted_delta_binomials():
    c = QScalar.from_rational(3)
    d = delta_series(AffineMap.shift(c), 0, "x1", "x2", [(-4, 3), (-4, 3)])
    want = {}
    for e1 in range(-4, 4):
        n = -e1 - 1
        for r in range(-4, 4):
            i = n - r
            if i >= 0 and binom(n, i):
                want[(e1, r)] = c ** i * binom(n, i)
    assert d.terms == want


@pytest.mark.parametrize("k", range(5))
def test_delta_annihilation_exact_power(k):
    lin = MultiPoly.linear(("x1", "x2"), {"x1": 1, "x2": -1})
    d = delta_series(AffineMap(), k, "x1", "x2", [(-12, 12), (-12, 12)])
    win = [(-5, 5), (-5, 5)]
    assert series_mul(series_from_poly(lin ** (k + 1)), d, win).is_zero()
    assert not series_mul(series_from_poly(lin ** k), d, win).is_zero()


def test_region_mismatch_and_divergence():
    g = parse_rational("1/(1-x)", ["x"])
    a = iota_expand(g, [VarSpec("x", Z)], [(-4, 4)])
    b = iota_expand(g, [VarSpec("x", INF)], [(-4, 4)])
    with pytest.raises(RegionMismatch):
        series_mul(a, b)
    d = delta_series(AffineMap(), 0, "x1", "x2", [(-4, 4), (-4, 4)])
    with pytest.raises(DivergentProduct):
        series_mul(d, d, [(-1, 1), (-1, 1)])


def test_zero_function_multiplies_with_anything():
    zero = iota_expand(parse_rational("0", ["x"]), [VarSpec("x", Z)], [(-8, 8)])
    g = iota_expand(parse_rational("1/(x*(1-x))", ["x"]), [VarSpec("x", Z)], [(-8, 8)])
    assert series_mul(zero, g, [(-2, 2)]).is_zero()


def test_derivative_and_residue():
    g = parse_rational("1/(1-x)", ["x"])
    a = iota_expand(g, [VarSpec("x", INF)], [(-6, 2)])
    da = derivative(a, "x")
    # d/dx sum -x^(-n) = sum n x^(-n-1)
    for e in range(-6, -1):
        assert da.coeff((e,)) == QScalar.from_rational(-e - 1)
    assert residue(a, "x").terms == {(): QScalar.from_rational(-1)}


@st.composite
def series_instances(draw):
    ids = ["x1", "x2", "x3"][:draw(st.integers(1, 3))]
    regions = [draw(st.sampled_from(list(Region))) for _ in ids]
    window = [tuple(sorted((draw(st.integers(-5, 5)), draw(st.integers(-5, 5))))) for _ in ids]
    rng = random.Random(draw(st.integers(0, 10 ** 6)))
    terms = {}
    for _ in range(draw(st.integers(0, 6))):
        terms[tuple(rng.randint(lo, hi) for lo, hi in window)] = random_qscalar(rng)
    floor = [draw(st.one_of(st.none(), st.integers(-9, 0))) for _ in ids]
    return Series([VarSpec(i, r) for i, r in zip(ids, regions)], terms, window, floor)


@given(series_instances())
def test_series_json_round_trip(s):
    assert series_from_json(series_to_json(s)) == s


@given(st.integers(0, 2 ** 31))
def test_iota_is_multiplicative_univariate(seed):
    rng = random.Random(seed)
    f = parse_rational(random_univariate(rng), ["x"])
    g = parse_rational(random_univariate(rng), ["x"])
    order = [VarSpec("x", Z)]
    prod = series_mul(iota_expand(f, order, [(-8, 8)]), iota_expand(g, order, [(-8, 8)]), [(-2, 2)])
    assert prod.agrees_on(iota_expand(f * g, order, [(-2, 2)]), [(-2, 2)])


def test_parse_rational_errors():
    with pytest.raises(InvalidParameter):
        parse_rational("1/(x-y)", ["x"])
    with pytest.raises(InvalidParameter):
        parse_rational("1/(x-", ["x"])
