from fractions import Fraction

import pytest
import sympy
from hypothesis import given, strategies as st

from qva.gamma import (GL_Z, T, TRIVIAL_ABELIAN, QuotientLieElement, decomposition_mode_coefficient,
                       expand_at_infinity, fock_basis, fock_normal, gamma_bracket, gamma_generators,
                       gamma_z_bracket_decomposition, jacobi_check, lemma_relabeling_check,
                       quotient_canonicalize, residue_at_infinity, shifted_heisenberg_instance,
                       t_shift)
from qva.errors import InvalidParameter
from qva.suites import shifted_cross_check
from qva.scalars import QScalar

ts, u = sympy.symbols("t u")
powers = st.integers(-2, 2)
indices = st.integers(-2, 2)


def to_sympy(p):
    return sympy.sympify(str(p.as_expr()).replace("^", "**"), locals={"t": ts})


def evaluate(p, k: int) -> Fraction:
    v = to_sympy(p).subs(ts, k)
    return Fraction(int(v.p), int(v.q))


@given(indices, powers, indices, powers)
def test_bracket_matches_operators_on_laurent_monomials(m, a, n, b):
    """E_{m,0} p(t) acts on z^k as p(k) z^(m+k); compare commutators on z^k, k >= 3."""
    x = QuotientLieElement.generator(GL_Z, (m, 0), a)
    y = QuotientLieElement.generator(GL_Z, (n, 0), b)
    br = gamma_bracket(x, y)
    assert set(br.terms) <= {(m + n, 0)}
    r = br.terms.get((m + n, 0))
    for k in range(3, 9):
        want = Fraction(n + k) ** a * Fraction(k) ** b - Fraction(m + k) ** b * Fraction(k) ** a
        got = evaluate(r, k) if r is not None else Fraction(0)
        assert got == want


def test_central_terms_frozen():
    x = QuotientLieElement.generator(GL_Z, (0, 0), 1)
    y = QuotientLieElement.generator(GL_Z, (0, 0), -1)
    assert gamma_bracket(x, y) == QuotientLieElement.k(GL_Z, 1)
    x = QuotientLieElement.generator(GL_Z, (1, 0), 1)
    y = QuotientLieElement.generator(GL_Z, (-1, 0), -1)
    assert gamma_bracket(x, y).central == 1


def test_affine_heisenberg_on_the_trivial_group():
    for m in range(-2, 3):
        for n in range(-2, 3):
            x = QuotientLieElement.generator(TRIVIAL_ABELIAN, "a", m)
            y = QuotientLieElement.generator(TRIVIAL_ABELIAN, "a", n)
            # [a t^m, a t^n] = m delta_{m+n,0} k
            assert gamma_bracket(x, y) == QuotientLieElement.k(TRIVIAL_ABELIAN, m if m + n == 0 else 0)


def test_canonical_form():
    e = quotient_canonicalize(GL_Z, (1, 1), T ** 2)
    assert e.terms == {(0, 0): (T - 1) ** 2}
    assert quotient_canonicalize(GL_Z, (3, 1), T).terms == {(2, 0): T - 1}


def test_small_jacobi():
    assert jacobi_check(gamma_generators(GL_Z, 1, 1)).verified
    assert jacobi_check(gamma_generators(TRIVIAL_ABELIAN, 2, 2)).verified


@pytest.mark.parametrize("shift", [-2, 0, 1])
def test_relabeling(shift):
    assert lemma_relabeling_check(shift, window=(-3, 3)).verified


@given(st.integers(-3, 3), st.integers(-2, 2), st.integers(1, 3))
def test_expand_at_infinity_matches_sympy(a, c, d):
    p = T ** a / (T + c) ** d
    got = expand_at_infinity(p, -8, 4)
    expr = (ts ** a / (ts + c) ** d).subs(ts, 1 / u)
    ser = sympy.expand(sympy.series(expr, u, 0, 9).removeO())
    for e in range(-8, 5):
        want = ser.coeff(u, -e)
        assert got.get(e, Fraction(0)) == Fraction(int(want.p), int(want.q))


def test_residue_and_shift():
    assert residue_at_infinity(1 / T) == 1
    assert residue_at_infinity(1 / (T - 3)) == 1
    assert residue_at_infinity(T / (T - 3)) == 3
    assert t_shift(T ** 2, 1) == (T + 1) ** 2


def test_mode_form_of_the_decomposition_matches_the_bracket():
    """Coefficients of the delta expansion agree with gamma_bracket mode by mode."""
    for m, n in [(1, -1), (2, 0), (0, 0), (-1, 2)]:
        terms = gamma_z_bracket_decomposition(m, n)
        for j in range(-3, 3):
            for i in range(-3, 3):
                fields, central = decomposition_mode_coefficient(terms, j, i, (-12, 6))
                x = QuotientLieElement.generator(GL_Z, (m, 0), j)
                y = QuotientLieElement.generator(GL_Z, (n, 0), i)
                br = gamma_bracket(x, y)
                assert br.central == central
                want = expand_at_infinity(br.terms.get((m + n, 0), 0 * T), -12, 6)
                assert fields.get(("A", m + n), {}) == want


def test_fock_helpers():
    assert fock_normal([0, 2, 1]) == (2, 1, 0)
    with pytest.raises(InvalidParameter):
        fock_normal([-1])
    # vacuum, 4 single modes, 10 pairs
    assert len(fock_basis(2, 3)) == 15


@pytest.mark.parametrize("n", [1, -1, 2])
def test_shifted_instance_cross_check(n):
    a, b, decomposition, cert = shifted_heisenberg_instance(n)
    assert cert.p.degree_in("x1") == 4
    assert shifted_cross_check(n, QScalar.q(), fock_basis(2, 3), list(range(-6, 7))).verified
