from itertools import combinations_with_replacement, product

import pytest
from hypothesis import given, strategies as st

from qva.errors import InvalidParameter
from qva.realization import (E, F, H, RelationTemplate, admissible_words, basis_rank_check,
                             check_d_compatibility, check_mode_commutator, dy_apply_qvec,
                             dy_templates, dy_word_qvec, filtration_check, qvec_add,
                             template_by_id, verify_relation)
from qva.series import RationalDistribution
from qva.superfock import basis_up_to, partitions

# (-q + x1 - x2) a(x1) b(x2) = (q + x1 - x2) b(x2) a(x1) for sign = +1; q -> -q for sign = -1
POLY_FORMS = {"ee": (E, E, 1), "he": (H, E, 1), "ff": (F, F, -1), "hf": (H, F, -1), "hh": (H, H, 0)}


def mode_form_residual(ga, gb, sign, m, n, vec):
    """Coefficient of x1^(-m-1) x2^(-n-1) in the polynomial form, as a q-vector."""
    def ab(i, j):
        return dy_word_qvec([(ga, i), (gb, j)], vec)

    def ba(i, j):
        return dy_word_qvec([(gb, j), (ga, i)], vec)

    acc: dict = {}
    # left: -sign q a(m)b(n) + a(m+1)b(n) - a(m)b(n+1)
    if sign:
        qvec_add(acc, ab(m, n), -sign, 1)
    qvec_add(acc, ab(m + 1, n))
    qvec_add(acc, ab(m, n + 1), -1)
    # right: sign q b(n)a(m) + b(n)a(m+1) - b(n+1)a(m)
    if sign:
        qvec_add(acc, ba(m, n), -sign, 1)
    qvec_add(acc, ba(m + 1, n), -1)
    qvec_add(acc, ba(m, n + 1), 1)
    return acc


@pytest.mark.parametrize("rid", sorted(POLY_FORMS))
def test_relations_in_polynomial_form(rid):
    ga, gb, sign = POLY_FORMS[rid]
    for mono in basis_up_to(2):
        vec = {(mono, 0): 1}
        for m, n in product(range(-4, 4), repeat=2):
            assert not mode_form_residual(ga, gb, sign, m, n, vec), (rid, mono, m, n)


@pytest.mark.parametrize("rid", ["ee", "he", "ff", "hf"])
def test_polynomial_form_detects_wrong_sign(rid):
    ga, gb, sign = POLY_FORMS[rid]
    vec = {((), 0): 1}
    assert any(mode_form_residual(ga, gb, -sign, m, n, vec) for m, n in product(range(-3, 1), repeat=2))


@pytest.mark.parametrize("rid", ["ee", "ff", "ef", "he", "hh", "hf"])
def test_windowed_verifier(rid):
    r = verify_relation(template_by_id(rid), (-4, 4), basis_up_to(2))
    assert r.verified, r.to_dict()
    assert r.cells_checked > 0


@pytest.mark.parametrize("q0", [3, -2, "1/2"])
def test_rational_q_mode(q0):
    for t in dy_templates():
        assert verify_relation(t, (-3, 3), basis_up_to(1), q0).verified


def test_zero_q_rejected():
    with pytest.raises(InvalidParameter):
        verify_relation(template_by_id("ee"), (-3, 3), basis_up_to(1), 0)


def test_infinity_templates_are_rejected_on_the_realization():
    with pytest.raises(InvalidParameter):
        verify_relation(dy_templates("AtInfinityX1")[0], (-3, 3), basis_up_to(1))


def test_wrong_braiding_is_caught_with_a_cell():
    ee = template_by_id("ee")
    ff = template_by_id("ff")
    bad = RelationTemplate("ee", ee.left, ee.right, "braided", ff.coefficient, ee.expansion_mode)
    r = verify_relation(bad, (-4, 4), basis_up_to(2))
    assert r.status == "failed"
    assert len(r.counterexample["cell"]) == 2
    assert r.counterexample["discrepancy"]


def test_inverse_braiding_fails_too():
    ee = template_by_id("ee")
    c = ee.coefficient
    flipped = RationalDistribution(c.den, c.num)
    bad = RelationTemplate("ee", ee.left, ee.right, "braided", flipped, ee.expansion_mode)
    assert not verify_relation(bad, (-3, 3), basis_up_to(1)).verified


def test_mode_commutator_and_translation():
    assert check_mode_commutator(3, 3).verified
    assert check_d_compatibility(4, 3).verified


@given(st.integers(0, 5), st.sampled_from([E, F, H]))
def test_nonnegative_modes_kill_vacuum(m, g):
    assert not dy_apply_qvec(g, m, {((), 0): 1})


def count_words(n: int, d: int) -> int:
    """Independent count: strict e parts, strict f parts, weak h parts, total length <= n."""
    total = 0
    for w in range(d + 1):
        for a, b in ((a, b) for a in range(w + 1) for b in range(w - a + 1)):
            c = w - a - b
            for pe in partitions(a, strict=True):
                for pf in partitions(b, strict=True):
                    for ph in partitions(c):
                        total += len(pe) + len(pf) + len(ph) <= n
    return total


def brute_count(n: int, d: int) -> int:
    """Multisets of modes with e, f indices distinct, length <= n and weight <= d."""
    modes = [(g, k) for g in "efh" for k in range(1, d + 1)]
    seen = 0
    for length in range(n + 1):
        for combo in combinations_with_replacement(modes, length):
            odd = [x for x in combo if x[0] != "h"]
            if len(odd) != len(set(odd)):
                continue
            if sum(k for _, k in combo) <= d:
                seen += 1
    return seen


@pytest.mark.parametrize("n,d", [(n, d) for n in range(4) for d in range(6)])
def test_admissible_word_counts(n, d):
    assert len(admissible_words(n, d)) == brute_count(n, d) == count_words(n, d)


@pytest.mark.parametrize("n,d", [(2, 3), (3, 5)])
def test_rank_equals_count(n, d):
    r = basis_rank_check(n, d)
    assert r.verified and r.count == r.rank == brute_count(n, d)


def test_frozen_rank_values():
    # brute-force multiset counts for (n, d) = (3, 5) and (2, 4)
    assert basis_rank_check(3, 5).count == brute_count(3, 5) == 100
    assert basis_rank_check(2, 4).count == brute_count(2, 4) == 39


@pytest.mark.parametrize("d", range(5))
def test_filtration(d):
    assert filtration_check(d).verified
