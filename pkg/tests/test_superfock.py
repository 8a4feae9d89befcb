import pytest
from hypothesis import given, strategies as st

from qva.errors import InvalidParameter
from qva.superfock import (E, F, H, StateVector, apply_mode, apply_word, basis_up_to, d_operator,
                           format_monomial, parse_monomial, weight_basis)

# Frozen from the generating-function oracle below (e, f odd, h even).
DIMS = [1, 3, 7, 16, 32, 61, 112]


def generating_function_dims(top: int) -> list:
    """Coefficients of prod_{n>=1} (1 + x^n)^2 / (1 - x^n) up to x^top."""
    coeffs = [1] + [0] * top
    for n in range(1, top + 1):
        for _ in range(2):  # (1 + x^n) for e(-n) and f(-n)
            coeffs = [coeffs[k] + (coeffs[k - n] if k >= n else 0) for k in range(top + 1)]
        for k in range(n, top + 1):  # 1 / (1 - x^n) for h(-n)
            coeffs[k] += coeffs[k - n]
    return coeffs


def test_dimension_oracle_is_frozen():
    assert generating_function_dims(6) == DIMS


def test_weight_basis_dimensions():
    assert [len(weight_basis(d)) for d in range(7)] == DIMS


def test_negative_weight_rejected():
    with pytest.raises(InvalidParameter):
        weight_basis(-1)


BASIS = basis_up_to(3)
modes = st.integers(-3, 3)
vectors = st.sampled_from(BASIS)


@given(vectors, modes, modes)
def test_anticommutator_of_e_and_f(mono, m, n):
    v = StateVector.basis(mono)
    lhs = apply_word([(E, m), (F, n)], v) + apply_word([(F, n), (E, m)], v)
    assert lhs == apply_mode((H, m + n), v)


@given(vectors, st.sampled_from([E, F]), modes, modes)
def test_odd_modes_anticommute(mono, g, m, n):
    v = StateVector.basis(mono)
    assert apply_word([(g, m), (g, n)], v) == -apply_word([(g, n), (g, m)], v)


@given(vectors, st.sampled_from([E, F, H]), modes, modes)
def test_h_is_central(mono, g, m, n):
    v = StateVector.basis(mono)
    assert apply_word([(H, m), (g, n)], v) == apply_word([(g, n), (H, m)], v)


@given(st.sampled_from([E, F, H]), st.integers(0, 4))
def test_nonnegative_modes_kill_vacuum(g, m):
    assert not apply_mode((g, m), StateVector.vacuum())


@given(vectors, st.sampled_from([E, F, H]), modes)
def test_translation_commutator(mono, g, m):
    v = StateVector.basis(mono)
    lhs = d_operator(apply_mode((g, m), v)) - apply_mode((g, m), d_operator(v))
    assert lhs == apply_mode((g, m - 1), v).scale(-m)


def test_translation_kills_vacuum():
    assert not d_operator(StateVector.vacuum())


@given(st.sampled_from(basis_up_to(5)))
def test_monomial_text_round_trip(mono):
    assert parse_monomial(format_monomial(mono)) == mono


def test_normal_order_is_increasing_within_blocks():
    v = apply_word([(E, -1), (E, -2)])
    assert v == StateVector.basis(((E, -2), (E, -1))).scale(-1)
    assert format_monomial(((E, -2), (E, -1), (H, -1))) == "e(-2)e(-1) h(-1) |0>"
    with pytest.raises(InvalidParameter):
        parse_monomial("e(-1)e(-2) |0>")
