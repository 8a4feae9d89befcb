import sympy
from hypothesis import given, strategies as st

from qva.phi import phi_apply, phi_derivative_at, phi_lemma_suite, phi_shift_coefficients
from qva.superfock import E, F, H, StateVector, apply_mode, basis_up_to, format_monomial

t = sympy.Symbol("t")

# Phi(t) u(m) = P_u(t, shift) u(m) Phi(t), written as {index shift: coefficient in t}
RULES = {E: {0: t, 1: -1}, F: {0: t, 1: -1}, H: {0: t ** 2, 1: -2 * t, 2: 1}}


def oracle(mono) -> dict:
    """Phi(t) on a monomial by peeling modes off the left: {monomial: sympy poly in t}."""
    if not mono:
        return {(): sympy.Integer(1)}
    (g, i), rest = mono[0], mono[1:]
    out: dict = {}
    for m, p in oracle(rest).items():
        for shift, c in RULES[g].items():
            for m2, c2 in apply_mode((g, i + shift), StateVector.basis(m)).terms.items():
                out[m2] = out.get(m2, 0) + c * p * int(c2.constant_value())
    return {m: sympy.expand(p) for m, p in out.items() if sympy.expand(p) != 0}


def as_table(mono) -> dict:
    img = phi_apply(StateVector.basis(mono))
    out: dict = {}
    for j, vec in img.coefficients.items():
        for m, c in vec.terms.items():
            out[m] = out.get(m, 0) + int(c.constant_value()) * t ** j
    return {m: sympy.expand(p) for m, p in out.items()}


@given(st.sampled_from(basis_up_to(4)))
def test_phi_matches_oracle(mono):
    assert as_table(mono) == oracle(mono), format_monomial(mono)


def test_frozen_values():
    e2 = StateVector.basis(((E, -2),))
    assert as_table(((E, -2),)) == {((E, -2),): t, ((E, -1),): sympy.Integer(-1)}
    assert as_table(((H, -2),)) == {((H, -2),): t ** 2, ((H, -1),): -2 * t}
    assert phi_apply(e2).degree() == 1


def test_phi_lemma_suite_verifies():
    for r in phi_lemma_suite(4, (-6, 6)):
        assert r.verified, r.to_dict()


@given(st.sampled_from(basis_up_to(3)), st.integers(0, 2), st.integers(-3, 3))
def test_derivative_at_a_point(mono, i, point):
    table = as_table(mono)
    got = phi_derivative_at(StateVector.basis(mono), i, point)
    want = {m: sympy.diff(p, t, i).subs(t, point) for m, p in table.items()}
    want = {m: c for m, c in want.items() if c != 0}
    assert {m: int(c.constant_value()) for m, c in got.terms.items()} == want


@given(st.sampled_from(basis_up_to(3)), st.sampled_from([1, -1]))
def test_shift_coefficients(mono, sign):
    q, xs = sympy.symbols("q x")
    table = as_table(mono)
    got = phi_shift_coefficients(mono, sign)
    for m, p in table.items():
        poly = sympy.Poly(sympy.expand(p.subs(t, sign * q + xs)), xs)
        for (i,), c in poly.terms():
            terms = got.get(i, {})
            mine = sum(v * q ** k for (mm, k), v in terms.items() if mm == m)
            assert sympy.expand(mine - c) == 0


def test_phi_has_integer_coefficients():
    img = phi_apply(StateVector.basis(((E, -1), (F, -2), (H, -1))))
    for vec in img.coefficients.values():
        assert all(c.is_constant() for c in vec.terms.values())
