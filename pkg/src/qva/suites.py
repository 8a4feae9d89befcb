"""Named check sets.

Each suite is a function of the run parameters returning a list of
``(check id, thunk)`` pairs; a thunk returns one CheckResult.  Keeping the
work behind thunks lets the runner schedule checks on a worker pool.
"""

from __future__ import annotations

from math import factorial
from typing import Callable

from .checks import CheckResult, failed, passed
from .errors import ConfigError
from .expansions import SIGNATURES, check_convention_tables, check_delta_annihilation, \
    check_iota_homomorphism
from .fields import (AT_ZERO, AbstractField, LocalFamily, LocalityCertificate, bracket_nth_products,
                     check_certificate, derivative_field, fields_agree, identity_field,
                     residue_nth_product, scale_field, verify_opposite_jacobi,
                     verify_weak_associativity, y_eo_product, y_products, zero_field)
from .gamma import (GL_Z, TRIVIAL_ABELIAN, fock_basis, gamma_generators, heisenberg_certificate,
                    heisenberg_decomposition, heisenberg_infinity_field, jacobi_check,
                    lemma_relabeling_check, shifted_heisenberg_instance)
from .linear import LinComb
from .phi import (check_phi_commutativity, check_phi_field_commutation, check_phi_leading,
                  check_phi_translation, check_phi_values)
from .realization import (basis_rank_check, check_d_compatibility, check_mode_commutator,
                          dy_templates, filtration_check, template_by_id, verify_relation)
from .scalars import QScalar, as_qscalar
from .superfock import E, F, GEN_NAMES, H, StateVector, apply_mode, basis_up_to, weight

# Heisenberg checks run on Fock vectors with at most two creation modes
HEISENBERG_RADIUS = 4
HEISENBERG_VECTORS = (2, 3)


def _from_relation_report(r, anchor: str) -> CheckResult:
    return CheckResult(r.relation_id, r.status, r.cells_checked, r.counterexample, anchor)


# ---------------------------------------------------------------------------
# DY relations and basis


def dyq_relations(max_weight: int, radius: int, q0=None, **_) -> list:
    anchors = {t.id: t.anchor for t in dy_templates()}

    def relation(rid):
        def run():
            r = verify_relation(template_by_id(rid), (-radius, radius), basis_up_to(max_weight), q0)
            return _from_relation_report(r, anchors[rid])
        return run

    tasks = [(f"relation-{rid}", relation(rid)) for rid in anchors]
    tasks.append(("ef-modes", lambda: _from_relation_report(
        check_mode_commutator(3, min(max_weight, 3)), "[e(m), f(n)] = h(m+n)")))
    tasks.append(("d-compat", lambda: _from_relation_report(
        check_d_compatibility(4, min(max_weight, 3)), "[D, u(m)] = -m u(m-1)")))
    return tasks


def _rank_task(n: int, d: int):
    def run():
        r = basis_rank_check(n, d)
        cex = None if r.verified else {"n": n, "d": d, "count": r.count, "rank": r.rank}
        return CheckResult(f"basis-rank[n={n},d={d}]", "verified" if r.verified else "failed",
                           r.count, cex, "E_n has a basis consisting of the vectors",
                           {"count": r.count, "rank": r.rank})
    return run


def _filtration_task(d: int):
    def run():
        r = filtration_check(d)
        return CheckResult(f"filtration[d={d}]", r.status, r.checks, r.counterexample,
                           "a(m)F_k in F_{k-m}, T_m w0 = 0 for m >= 1")
    return run


def dyq_basis(max_n: int = 3, max_d: int = 5, filtration_d: int = 4, **_) -> list:
    tasks = [(f"basis-rank[n={n},d={d}]", _rank_task(n, d))
             for n in range(max_n + 1) for d in range(max_d + 1)]
    tasks += [(f"filtration[d={d}]", _filtration_task(d)) for d in range(filtration_d + 1)]
    return tasks


# ---------------------------------------------------------------------------
# Phi


def phi_lemma(max_weight: int, radius: int, **_) -> list:
    win = (-radius, radius)
    return [
        ("phi-values", check_phi_values),
        ("phi-commute", lambda: check_phi_commutativity(max_weight)),
        ("phi-translation", lambda: check_phi_translation(max_weight)),
        ("phi-field", lambda: check_phi_field_commutation(max_weight, win)),
        ("phi-leading", lambda: check_phi_leading(max_weight)),
    ]


# ---------------------------------------------------------------------------
# fields on the super-Fock vacuum module


def superfock_field(gen: int) -> AbstractField:
    """u(x) = sum u(n) x^(-n-1) on the super-Fock module, a field at zero."""

    def action(n, key):
        return LinComb._wrap(dict(apply_mode((gen, n), StateVector.basis(key)).terms))

    return AbstractField(GEN_NAMES[gen], AT_ZERO, action, lambda key: weight(key) + 1)


def _agree(id: str, f, g, vectors, modes, anchor: str) -> CheckResult:
    cex = fields_agree(f, g, vectors, modes)
    checks = len(vectors) * len(modes)
    return passed(id, checks, anchor) if cex is None else failed(id, checks, cex, anchor)


def field_products(max_weight: int, radius: int, **_) -> list:
    w = min(max_weight, 3)
    vectors = basis_up_to(w)
    modes = list(range(-radius + 1, radius))
    e, f, h = superfock_field(E), superfock_field(F), superfock_field(H)
    cert = LocalityCertificate.power(1, [(-1, e, f)])

    def certificate():
        r = check_certificate(cert, e, f, vectors, [(-radius + 1, radius - 1)] * 2)
        r.id, r.anchor = "superfock-certificate", "(x1-x2) e(x1)f(x2) = -(x1-x2) f(x2)e(x1)"
        return r

    def residue(n):
        def run():
            prod = y_eo_product(e, f, cert, n)
            return _agree(f"superfock-residue[n={n}]", prod, residue_nth_product(e, f, n, [(-1, e, f)]),
                          vectors, modes, "a(x)_n b(x) = Res_x1 of the braided commutator")
        return run

    def e0f():
        return _agree("superfock-e0f", y_eo_product(e, f, cert, 0), h, vectors, modes,
                      "e(x)_0 f(x) = h(x)")

    def threshold():
        k0 = y_products(e, f, cert, range(0, 1)).threshold
        ok = k0 == 1
        return CheckResult("superfock-truncation", "verified" if ok else "failed", 1,
                           None if ok else {"threshold": k0}, "a(x)_n b(x) = 0 for n >= k")

    tasks = [("superfock-certificate", certificate), ("superfock-e0f", e0f),
             ("superfock-truncation", threshold)]
    tasks += [(f"superfock-residue[n={n}]", residue(n)) for n in range(4)]
    return tasks


# ---------------------------------------------------------------------------
# Heisenberg module at infinity


def heisenberg_products_check(level, vectors, modes) -> CheckResult:
    """a_0 a = 0, a_1 a = -level 1_W, a_n a = 0 for 2 <= n <= 6."""
    level = as_qscalar(level)
    a = heisenberg_infinity_field(level)
    res = y_products(a, a, heisenberg_certificate(2), range(0, 7))
    one = identity_field()
    checks = 0
    for n in range(0, 7):
        target = scale_field(one, -level) if n == 1 else zero_field()
        cex = fields_agree(res.products[n], target, vectors, modes)
        checks += len(vectors) * len(modes)
        if cex is not None:
            cex["n"] = n
            return failed("heisenberg-products", checks, cex, "a(x)_1 a(x) = -l 1_W")
    return passed("heisenberg-products", checks, "a(x)_1 a(x) = -l 1_W")


def heisenberg_independence_check(level, vectors, modes) -> CheckResult:
    """Products from (x1-x2)^2 and (x1-x2)^3 coincide."""
    a = heisenberg_infinity_field(level)
    r2 = y_products(a, a, LocalityCertificate.power(2), range(-3, 3))
    r3 = y_products(a, a, LocalityCertificate.power(3), range(-3, 3))
    anchor = "Y_E(a, x) does not depend on the choice of certificate"
    checks = 0
    for n in range(-3, 3):
        cex = fields_agree(r2.products[n], r3.products[n], vectors, modes)
        checks += len(vectors) * len(modes)
        if cex is not None:
            cex["n"] = n
            return failed("certificate-independence", checks, cex, anchor)
    return passed("certificate-independence", checks, anchor)


def heisenberg_vacuum_check(level, vectors, modes) -> CheckResult:
    """1_W is a left unit and a(x)_{-j-1} 1_W = a^(j)(x)/j!."""
    a = heisenberg_infinity_field(level)
    one = identity_field()
    c0 = LocalityCertificate.power(0)
    anchor = "Y_E(1_W, x) = 1, a(x)_{-j-1} 1_W = a^(j)(x)/j!"
    checks = 0
    for n in range(-1, 3):
        cex = fields_agree(y_eo_product(one, a, c0, n), a if n == -1 else zero_field(), vectors, modes)
        checks += len(vectors) * len(modes)
        if cex is not None:
            return failed("vacuum-products", checks, {"left": "1_W", "n": n, **cex}, anchor)
    for j in range(0, 3):
        want = a if j == 0 else scale_field(derivative_field(a, j), QScalar.from_rational(1) / factorial(j))
        cex = fields_agree(y_eo_product(a, one, c0, -j - 1), want, vectors, modes)
        checks += len(vectors) * len(modes)
        if cex is not None:
            return failed("vacuum-products", checks, {"right": "1_W", "j": j, **cex}, anchor)
    return passed("vacuum-products", checks, anchor)


def heisenberg_associativity_check(level, vectors, radius: int = HEISENBERG_RADIUS, k: int = 2) -> CheckResult:
    a = heisenberg_infinity_field(level)
    family = LocalFamily(lambda x, y: 2 if (x is a and y is a) else 0)
    r = verify_weak_associativity(a, a, a, family, k, vectors, [(-radius, radius)] * 3)
    r.anchor = "(x0+x2)^k Y(a, x0+x2)Y(b, x2)w = (x0+x2)^k Y(Y(a, x0)b, x2)w"
    return r


def heisenberg_jacobi_check(level, vectors, radius: int = HEISENBERG_RADIUS) -> CheckResult:
    a = heisenberg_infinity_field(level)
    r = verify_opposite_jacobi(a, a, heisenberg_certificate(2), vectors, [(-radius, radius)] * 3)
    r.anchor = "opposite Jacobi identity for a module-at-infinity"
    return r


def bracket_cross_check(level, vectors, modes) -> CheckResult:
    """bracket_nth_products agrees with the y-product on the Heisenberg pair."""
    a = heisenberg_infinity_field(level)
    decomposition = heisenberg_decomposition(level, a)
    return _decomposition_agrees("bracket-cross[heisenberg]", a, a, decomposition,
                                 heisenberg_certificate(2), vectors, modes)


def shifted_cross_check(n: int, level, vectors, modes) -> CheckResult:
    a, b, decomposition, cert = shifted_heisenberg_instance(n, level)
    return _decomposition_agrees(f"bracket-cross[shift={n}]", a, b, decomposition, cert, vectors, modes)


def _decomposition_agrees(id, a, b, decomposition, cert, vectors, modes) -> CheckResult:
    anchor = "a(x)_n b(x) = Psi_{1,n}(x)"
    psi = bracket_nth_products(decomposition)
    top = max(psi) + 3
    checks = 0
    for n in range(0, top + 1):
        want = psi.get(n, zero_field())
        cex = fields_agree(y_eo_product(a, b, cert, n), want, vectors, modes)
        checks += len(vectors) * len(modes)
        if cex is not None:
            cex["n"] = n
            return failed(id, checks, cex, anchor)
    return passed(id, checks, anchor)


def heisenberg_suite(level, **_) -> list:
    vectors = fock_basis(*HEISENBERG_VECTORS)
    modes = list(range(-6, 7))
    return [
        ("heisenberg-products", lambda: heisenberg_products_check(level, vectors, modes)),
        ("certificate-independence", lambda: heisenberg_independence_check(level, vectors, modes)),
        ("vacuum-products", lambda: heisenberg_vacuum_check(level, vectors, modes)),
        ("weak-associativity", lambda: heisenberg_associativity_check(level, vectors)),
        ("opposite-jacobi", lambda: heisenberg_jacobi_check(level, vectors)),
        ("bracket-cross[heisenberg]", lambda: bracket_cross_check(level, vectors, modes)),
        ("bracket-cross[shift=1]", lambda: shifted_cross_check(1, level, vectors, modes)),
        ("bracket-cross[shift=2]", lambda: shifted_cross_check(2, level, vectors, modes)),
    ]


# ---------------------------------------------------------------------------
# Gamma-affinization


def _named(r: CheckResult, id: str, anchor: str) -> CheckResult:
    r.id, r.anchor = id, anchor
    return r


def gamma_suite(**_) -> list:
    tasks = [
        ("gamma-lie[Z]", lambda: _named(jacobi_check(gamma_generators(GL_Z, 2, 2)), "gamma-lie[Z]",
                                        "the quotient is a Lie algebra")),
        ("gamma-lie[trivial]", lambda: _named(jacobi_check(gamma_generators(TRIVIAL_ABELIAN, 2, 2)),
                                              "gamma-lie[trivial]",
                                              "[a t^m, b t^n] = [a,b] t^(m+n) + m delta_{m+n,0} <a,b> k")),
    ]
    for s in range(-2, 3):
        tasks.append((f"relabeling[n={s}]", (lambda s=s: _named(
            lemma_relabeling_check(s), f"relabeling[n={s}]", "(ga)_Gamma(x) = a_Gamma(g(x))"))))
    return tasks


# ---------------------------------------------------------------------------
# expansions


def expansions(seed: int = 0, count: int = 200, **_) -> list:
    tasks = [(f"iota-hom[{s}]", (lambda s=s: check_iota_homomorphism(s, count, seed)))
             for s in SIGNATURES]
    tasks.append(("convention-tables", check_convention_tables))
    tasks.append(("delta-annihilation", check_delta_annihilation))
    return tasks


SUITES: dict[str, Callable] = {
    "dyq-relations": dyq_relations,
    "dyq-basis": dyq_basis,
    "phi-lemma": phi_lemma,
    "field-products": field_products,
    "heisenberg-infinity": heisenberg_suite,
    "gamma-jacobi": gamma_suite,
    "expansions": expansions,
}


def suite_tasks(name: str, **params) -> list:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    return SUITES[name](**params)
