"""Acceptance criteria 1-9, run at full size with exact arithmetic.

Each test prints one ``ACCEPTANCE n PASS|FAIL`` line, visible with or without -s.
"""

import random

import pytest

from qva.expansions import (SIGNATURES, check_convention_tables, check_delta_annihilation,
                            check_iota_homomorphism)
from qva.gamma import GL_Z, fock_basis, gamma_generators, jacobi_check, lemma_relabeling_check
from qva.phi import phi_lemma_suite
from qva.realization import (basis_rank_check, check_mode_commutator, filtration_check,
                             verify_all_relations)
from qva.reports import RunConfig, canonical_bytes, emit_report, parse_report, run_suite
from qva.scalars import QScalar, format_qscalar, parse_qscalar
from qva.series import Region, Series, VarSpec, series_from_json, series_to_json
from qva.suites import (bracket_cross_check, heisenberg_associativity_check,
                        heisenberg_jacobi_check, heisenberg_products_check, shifted_cross_check)

from conftest import random_qscalar
from test_reports import random_report


@pytest.fixture
def announce(capsys):
    def emit(n: int, ok: bool, note: str = ""):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {'PASS' if ok else 'FAIL'} {note}".rstrip())
        assert ok, f"criterion {n} failed: {note}"
    return emit


def test_criterion_1_relations(announce):
    reports = verify_all_relations(max_weight=4, window=(-6, 6))
    bad = [r.relation_id for r in reports if not r.verified]
    announce(1, len(reports) == 6 and not bad, f"relations={len(reports)} failed={bad}")


def test_criterion_2_mode_commutator(announce):
    r = check_mode_commutator(3, 3)
    announce(2, r.verified, f"cells={r.cells_checked}")


def test_criterion_3_basis_and_filtration(announce):
    ranks = [basis_rank_check(n, d) for n in range(0, 4) for d in range(0, 6)]
    filt = [filtration_check(d) for d in range(0, 5)]
    ok = all(r.verified for r in ranks) and all(f.verified for f in filt)
    announce(3, ok, f"rank checks={len(ranks)} filtration checks={len(filt)}")


def test_criterion_4_phi_lemma(announce):
    results = phi_lemma_suite(4, (-6, 6))
    bad = [r.id for r in results if not r.verified]
    announce(4, not bad, f"checks={sum(r.checks for r in results)} failed={bad}")


def test_criterion_5_expansion_kernel(announce):
    results = [check_iota_homomorphism(s, count=200, seed=0) for s in SIGNATURES]
    results += [check_convention_tables(), check_delta_annihilation(4)]
    bad = [r.id for r in results if not r.verified]
    pairs = sum(r.checks for r in results[:len(SIGNATURES)])
    announce(5, not bad, f"pairs={pairs} failed={bad}")


def test_criterion_6_module_at_infinity(announce):
    level = QScalar.q()
    vectors = fock_basis(2, 3)
    results = [heisenberg_products_check(level, vectors, list(range(-6, 7))),
               heisenberg_associativity_check(level, vectors, radius=4, k=2),
               heisenberg_jacobi_check(level, vectors, radius=4)]
    bad = [r.id for r in results if not r.verified]
    announce(6, not bad, f"vectors={len(vectors)} failed={bad}")


def test_criterion_7_bracket_cross_check(announce):
    level = QScalar.q()
    vectors = fock_basis(2, 3)
    modes = list(range(-6, 7))
    results = [bracket_cross_check(level, vectors, modes)]
    results += [shifted_cross_check(n, level, vectors, modes) for n in (1, 2)]
    bad = [r.id for r in results if not r.verified]
    announce(7, not bad, f"instances={len(results)} failed={bad}")


def test_criterion_8_gamma_lie(announce):
    results = [jacobi_check(gamma_generators(GL_Z, 2, 2))]
    results += [lemma_relabeling_check(n, window=(-5, 5)) for n in range(-2, 3)]
    bad = [r.id for r in results if not r.verified]
    announce(8, not bad, f"checks={sum(r.checks for r in results)} failed={bad}")


def _random_series(rng: random.Random) -> Series:
    ids = ["x1", "x2", "x3"][:rng.randint(1, 3)]
    window = [tuple(sorted((rng.randint(-5, 5), rng.randint(-5, 5)))) for _ in ids]
    terms = {tuple(rng.randint(lo, hi) for lo, hi in window): random_qscalar(rng)
             for _ in range(rng.randint(0, 6))}
    floor = [rng.choice([None, rng.randint(-9, 0)]) for _ in ids]
    return Series([VarSpec(i, rng.choice(list(Region))) for i in ids], terms, window, floor)


def test_criterion_9_infrastructure(announce):
    n = 500
    bad = []
    for seed in range(n):
        rng = random.Random(seed)
        c = random_qscalar(rng)
        if parse_qscalar(format_qscalar(c)) != c:
            bad.append(("qscalar", seed))
        s = _random_series(rng)
        if series_from_json(series_to_json(s)) != s:
            bad.append(("series", seed))
        r = random_report(rng)
        if parse_report(emit_report(r, "json")) != r:
            bad.append(("report", seed))
    cfg = RunConfig(suite="phi-lemma")
    same = canonical_bytes(run_suite(cfg)) == canonical_bytes(run_suite(cfg))
    announce(9, not bad and same, f"round trips={3 * n} mismatches={bad[:3]} deterministic={same}")
