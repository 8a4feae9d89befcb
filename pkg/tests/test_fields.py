import pytest
import sympy
from hypothesis import given, strategies as st

from qva.errors import InvalidCertificate, InvalidParameter, MalformedDecomposition
from qva.fields import (AT_INFINITY, AT_ZERO, AbstractField, DecompositionEntry, LocalityCertificate,
                        bracket_nth_products, check_certificate, decomposition_certificate,
                        derivative_field, dong_order, fields_agree, identity_field,
                        residue_nth_product, scale_field, search_certificate, y_eo_product,
                        y_products, zero_field)
from qva.gamma import fock_basis, heisenberg_infinity_field, heisenberg_mode
from qva.linear import LinComb
from qva.scalars import QScalar, format_qscalar
from qva.series import AffineMap, MultiPoly, parse_rational
from qva.suites import (heisenberg_independence_check, heisenberg_products_check,
                        heisenberg_vacuum_check, superfock_field)
from qva.superfock import E, F, H, basis_up_to

LEVEL = sympy.Symbol("l")
VECTORS = fock_basis(2, 3)
MODES = list(range(-6, 7))


# ---------------------------------------------------------------------------
# independent Heisenberg model: a(n >= 0) multiplies by y_n, a(-k) = -l k d/dy_k

Y = sympy.symbols("y0:24")


def oracle_mode(n: int, poly):
    if n >= 0:
        return sympy.expand(Y[n] * poly)
    return sympy.expand(LEVEL * n * sympy.diff(poly, Y[-n]))


def key_to_poly(key):
    out = sympy.Integer(1)
    for k in key:
        out *= Y[k]
    return out


def lincomb_to_poly(v: LinComb):
    out = sympy.Integer(0)
    for key, c in v.terms.items():
        coeff = sympy.sympify(format_qscalar(c).replace("^", "**"), locals={"q": LEVEL})
        out += coeff * key_to_poly(key)
    return sympy.expand(out)


@given(st.sampled_from(VECTORS), st.integers(-4, 4))
def test_heisenberg_modes_match_polynomial_model(key, n):
    got = heisenberg_mode(n, key, QScalar.q())
    assert lincomb_to_poly(got) == oracle_mode(n, key_to_poly(key))


@given(st.sampled_from(VECTORS), st.integers(-4, 4), st.integers(-4, 4))
def test_heisenberg_commutator(key, m, n):
    a = heisenberg_infinity_field()
    w = LinComb.basis(key)
    comm = a.apply(m, a.apply(n, w)) - a.apply(n, a.apply(m, w))
    want = w.scale(QScalar.q() * m) if m + n == 0 else LinComb()
    assert comm == want


# ---------------------------------------------------------------------------
# n-th products


def test_heisenberg_products_frozen():
    # a_0 a = 0, a_1 a = -l 1_W, a_n a = 0 for n = 2..6
    assert heisenberg_products_check(QScalar.q(), VECTORS, MODES).verified


def test_products_at_a_numeric_level():
    assert heisenberg_products_check(QScalar.from_rational(5), VECTORS, MODES).verified


def test_certificate_independence_and_vacuum():
    assert heisenberg_independence_check(QScalar.q(), VECTORS, MODES).verified
    assert heisenberg_vacuum_check(QScalar.q(), VECTORS, MODES).verified


def normal_ordered(i: int, j: int, poly):
    """:a(i)a(j): with the annihilating (negative) mode on the right."""
    if i < 0 <= j:
        i, j = j, i
    return oracle_mode(i, oracle_mode(j, poly))


def test_normal_ordered_product_matches_oracle():
    """(a_{-1}a)(m) = sum over i + j = m - 1 of :a(i)a(j):."""
    a = heisenberg_infinity_field()
    nop = y_eo_product(a, a, LocalityCertificate.power(2), -1)
    for key in [(), (1,), (2, 0), (1, 1)]:
        poly = key_to_poly(key)
        for m in range(-4, 5):
            want = sum(normal_ordered(i, m - 1 - i, poly) for i in range(-8, 9))
            assert lincomb_to_poly(nop.act(m, key)) == sympy.expand(want), (key, m)


def test_locality_order_search():
    a = heisenberg_infinity_field()
    c = search_certificate(a, a, VECTORS[:6], [(-4, 4), (-4, 4)])
    assert c is not None and c.k == 2
    r = check_certificate(LocalityCertificate.power(1), a, a, VECTORS[:6], [(-4, 4), (-4, 4)])
    assert r.status == "failed" and len(r.counterexample["cell"]) == 2


def test_truncation_threshold():
    a = heisenberg_infinity_field()
    res = y_products(a, a, LocalityCertificate.power(2), range(0, 4))
    assert res.threshold == 2
    assert fields_agree(res.products[3], zero_field(), VECTORS, MODES) is None


def test_rational_braiding_rejected_for_products():
    a = heisenberg_infinity_field()
    f = parse_rational("1/(1+x)", ["x"])
    with pytest.raises(InvalidCertificate):
        y_eo_product(a, a, LocalityCertificate.power(2, [(f, a, a)]), 0)


def test_rational_braiding_rejected_at_zero():
    e, f = superfock_field(E), superfock_field(F)
    g = parse_rational("1/(1+x)", ["x"])
    with pytest.raises(InvalidCertificate):
        check_certificate(LocalityCertificate.power(1, [(g, e, f)]), e, f, basis_up_to(1),
                          [(-2, 2), (-2, 2)])


def test_zero_certificate_rejected():
    with pytest.raises(InvalidCertificate):
        LocalityCertificate(MultiPoly.const(("x1", "x2"), 0))


def test_mixed_kinds_rejected():
    with pytest.raises(InvalidParameter):
        y_eo_product(heisenberg_infinity_field(), superfock_field(E), LocalityCertificate.power(1), 0)


# ---------------------------------------------------------------------------
# super-Fock fields at zero


def test_superfock_residue_formula_and_e0f():
    e, f, h = superfock_field(E), superfock_field(F), superfock_field(H)
    cert = LocalityCertificate.power(1, [(-1, e, f)])
    vectors = basis_up_to(3)
    assert check_certificate(cert, e, f, vectors, [(-5, 5), (-5, 5)]).verified
    for n in range(4):
        assert fields_agree(y_eo_product(e, f, cert, n), residue_nth_product(e, f, n, [(-1, e, f)]),
                            vectors, range(-5, 6)) is None
    assert fields_agree(y_eo_product(e, f, cert, 0), h, vectors, range(-5, 6)) is None


def test_residue_needs_nonnegative_n():
    e = superfock_field(E)
    with pytest.raises(InvalidParameter):
        residue_nth_product(e, e, -1)


def test_derivative_field_modes():
    a = heisenberg_infinity_field()
    da = derivative_field(a)
    for key in VECTORS[:8]:
        for m in range(-4, 5):
            assert da.act(m, key) == a.act(m - 1, key).scale(-m)


# ---------------------------------------------------------------------------
# bracket decompositions


def test_bracket_nth_products_reads_identity_entries():
    one = identity_field()
    a = heisenberg_infinity_field()
    entries = [DecompositionEntry(AffineMap(), 1, scale_field(one, -QScalar.q())),
               DecompositionEntry(AffineMap.shift(2), 0, a)]
    psi = bracket_nth_products(entries)
    assert sorted(psi) == [0, 1]
    assert fields_agree(psi[0], zero_field(), VECTORS, MODES) is None
    assert decomposition_certificate(entries).p.degree_in("x1") == 3


@pytest.mark.parametrize("entries", [
    [(AffineMap.shift(1), 0, None)],
    [(AffineMap(), 0, None), (AffineMap(), 0, None)],
    [(AffineMap(), -1, None)],
])
def test_malformed_decompositions(entries):
    a = heisenberg_infinity_field()
    entries = [(g, k, a) for g, k, _ in entries]
    with pytest.raises(MalformedDecomposition):
        bracket_nth_products(entries)


@pytest.mark.parametrize("r,s,t,n,want", [(2, 2, 2, 0, 5), (2, 0, 0, 1, 0), (1, 1, 1, 5, 0),
                                           (3, 2, 1, 2, 3)])
def test_dong_order(r, s, t, n, want):
    assert dong_order(r, s, t, n) == want


def test_field_kind_validation():
    with pytest.raises(InvalidParameter):
        AbstractField("x", "Elsewhere", lambda n, k: LinComb(), lambda k: 0)
    assert identity_field(AT_ZERO).kind == AT_ZERO
    assert heisenberg_infinity_field().kind == AT_INFINITY
