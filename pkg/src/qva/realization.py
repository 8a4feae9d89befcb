"""Free-field realization of DY_q(sl2) on the super-Fock space and its checks.

    e(x) = e(x) Phi(q + x),  f(x) = f(x) Phi(-q + x),
    h(x) = q h(x) Phi(q + x) Phi(-q + x)

(bars dropped on the right-hand sides).  All structure constants lie in
Z[q], so the hot path works with integer vectors keyed by
(monomial, power of q).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct
from math import comb
from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import InvalidParameter
from .linear import rank_over_qq
from .phi import phi_shift_coefficients, phi_two_int
from .scalars import QScalar
from .series import MultiPoly, RationalDistribution, DeltaTerm, AffineMap, VarSpec, Region, iota_expand
from .superfock import (E, F, H, GEN_NAMES, Monomial, StateVector, _apply, basis_up_to,
                        d_operator_int, format_monomial, partitions, weight, weight_basis)

GENS = {"e": E, "f": F, "h": H}

# ---------------------------------------------------------------------------
# integer Laurent vectors: {(monomial, q-exponent): int}


def qvec_add(acc: dict, vec: dict, scale: int = 1, qshift: int = 0) -> dict:
    for (m, k), c in vec.items():
        key = (m, k + qshift)
        v = acc.get(key, 0) + scale * c
        if v:
            acc[key] = v
        else:
            acc.pop(key, None)
    return acc


def qvec_from_state(v: StateVector) -> dict:
    out: dict = {}
    for m, c in v.terms.items():
        lt = c.laurent_terms()
        if lt is None:
            raise InvalidParameter("coefficient is not a Laurent polynomial in q")
        for k, a in lt.items():
            out[(m, k)] = a
    return out


def qvec_to_state(vec: dict) -> StateVector:
    grouped: dict = {}
    for (m, k), c in vec.items():
        grouped.setdefault(m, {})[k] = c
    return StateVector({m: QScalar.laurent(t) for m, t in grouped.items()})


def qvec_max_weight(vec: dict) -> int:
    return max((weight(m) for m, _ in vec), default=0)


def qvec_is_zero_at(vec: dict, q0) -> bool:
    grouped: dict = {}
    for (m, k), c in vec.items():
        grouped[m] = grouped.get(m, 0) + mpq(c) * mpq(q0) ** k
    return all(v == 0 for v in grouped.values())


# ---------------------------------------------------------------------------
# mode action


@lru_cache(maxsize=None)
def _dy_mono(gen: int, m: int, mono: Monomial) -> tuple:
    out: dict = {}
    if gen == H:
        if m >= 0:
            return ()
        for (i, j), vec in phi_two_int(mono):
            # [x^n] (q + x)^i (-q + x)^j
            for a in range(i + 1):
                ca = comb(i, a)
                for b in range(j + 1):
                    coef = ca * comb(j, b) * (-1) ** (j - b)
                    qe = i - a + j - b + 1
                    k = m + a + b
                    if k >= 0:
                        continue
                    for w, c in vec:
                        for w2, c2 in _apply(H, k, w):
                            key = (w2, qe)
                            val = out.get(key, 0) + coef * c * c2
                            if val:
                                out[key] = val
                            else:
                                out.pop(key, None)
        return tuple(out.items())
    if m >= weight(mono):
        return ()
    sign = 1 if gen == E else -1
    for i, vec in phi_shift_coefficients(mono, sign).items():
        for (w, qe), c in vec.items():
            for w2, c2 in _apply(gen, m + i, w):
                key = (w2, qe)
                val = out.get(key, 0) + c * c2
                if val:
                    out[key] = val
                else:
                    out.pop(key, None)
    return tuple(out.items())


def dy_apply_qvec(gen: int, m: int, vec: dict) -> dict:
    acc: dict = {}
    for (mono, k), c in vec.items():
        for (w, qe), c2 in _dy_mono(gen, m, mono):
            key = (w, qe + k)
            v = acc.get(key, 0) + c * c2
            if v:
                acc[key] = v
            else:
                acc.pop(key, None)
    return acc


def dy_mode_apply(gen, m: int, v: StateVector) -> StateVector:
    if isinstance(gen, str):
        gen = GENS[gen]
    acc: dict = {}
    for mono, c in v.terms.items():
        grouped: dict = {}
        for (w, qe), c2 in _dy_mono(gen, m, mono):
            grouped.setdefault(w, {})[qe] = c2
        for w, t in grouped.items():
            val = acc.get(w)
            add = c * QScalar.laurent(t)
            val = add if val is None else val + add
            if val:
                acc[w] = val
            else:
                acc.pop(w, None)
    return StateVector._wrap(acc)


def dy_word_qvec(word: Sequence, vec: dict) -> dict:
    """Apply (gen, mode) pairs right to left."""
    for g, m in reversed(list(word)):
        vec = dy_apply_qvec(g, m, vec)
    return vec


def annihilation_bound(gen: int, max_weight: int) -> int:
    """Smallest M with gen(m) v = 0 for all m >= M and weight(v) <= max_weight."""
    if gen == H:
        return 0
    return max_weight


@dataclass(frozen=True)
class RealizedField:
    name: str

    @property
    def gen(self) -> int:
        return GENS[self.name]

    def mode_action(self, m: int, v: StateVector) -> StateVector:
        return dy_mode_apply(self.gen, m, v)

    def annihilation_bound(self, w: int) -> int:
        return annihilation_bound(self.gen, w)


def realized_fields() -> dict:
    return {n: RealizedField(n) for n in ("e", "f", "h")}


# ---------------------------------------------------------------------------
# relation templates

AT_ZERO_BIVARIATE = "AtZeroBivariate"
AT_INFINITY_X1 = "AtInfinityX1"
XV = ("x1", "x2")


def _y_plus(c) -> MultiPoly:
    """c + x1 - x2."""
    return MultiPoly.linear(XV, {"x1": 1, "x2": -1}, c)


@dataclass(frozen=True)
class RelationTemplate:
    id: str
    left: tuple
    right: tuple
    kind: str  # "braided", "bracket" or "commute"
    coefficient: RationalDistribution | None
    expansion_mode: str
    delta_terms: tuple = ()
    anchor: str = ""

    def expansion_order(self) -> list:
        if self.expansion_mode == AT_ZERO_BIVARIATE:
            return [VarSpec("x1", Region.AT_ZERO), VarSpec("x2", Region.AT_ZERO)]
        return [VarSpec("x2", Region.AT_ZERO), VarSpec("x1", Region.AT_INFINITY)]

    def expand_coefficient(self, window) -> object:
        if self.coefficient is None:
            raise InvalidParameter("template has no rational coefficient")
        order = self.expansion_order()
        win = [window[0], window[1]] if order[0].id == "x1" else [window[1], window[0]]
        return iota_expand(self.coefficient, order, win)


def dy_templates(mode: str = AT_ZERO_BIVARIATE) -> list:
    """The six defining relations; mode selects DY_q or DY_q^infinity."""
    q = QScalar.q()
    plus = RationalDistribution(_y_plus(q), _y_plus(-q))
    minus = RationalDistribution(_y_plus(-q), _y_plus(q))
    delta = DeltaTerm("x1", "x2", AffineMap(), 0, "h")
    return [
        RelationTemplate("ee", ("e", "e"), ("e", "e"), "braided", plus, mode,
                         anchor="e(x1)e(x2) = (q+x1-x2)/(-q+x1-x2) e(x2)e(x1)"),
        RelationTemplate("ff", ("f", "f"), ("f", "f"), "braided", minus, mode,
                         anchor="f(x1)f(x2) = (-q+x1-x2)/(q+x1-x2) f(x2)f(x1)"),
        RelationTemplate("ef", ("e", "f"), ("f", "e"), "bracket", None, mode, (delta,),
                         anchor="[e(x1),f(x2)] = x1^-1 delta(x2/x1) h(x2)"),
        RelationTemplate("he", ("h", "e"), ("e", "h"), "braided", plus, mode,
                         anchor="h(x1)e(x2) = (q+x1-x2)/(-q+x1-x2) e(x2)h(x1)"),
        RelationTemplate("hh", ("h", "h"), ("h", "h"), "commute", None, mode,
                         anchor="h(x1)h(x2) = h(x2)h(x1)"),
        RelationTemplate("hf", ("h", "f"), ("f", "h"), "braided", minus, mode,
                         anchor="h(x1)f(x2) = (-q+x1-x2)/(q+x1-x2) f(x2)h(x1)"),
    ]


def template_by_id(rid: str, mode: str = AT_ZERO_BIVARIATE) -> RelationTemplate:
    for t in dy_templates(mode):
        if t.id == rid:
            return t
    raise InvalidParameter(f"unknown relation {rid}")


# ---------------------------------------------------------------------------
# verification


@dataclass
class RelationReport:
    relation_id: str
    window: tuple
    vectors: list
    status: str
    cells_checked: int = 0
    counterexample: dict | None = None

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_dict(self) -> dict:
        return {
            "relation_id": self.relation_id,
            "window": list(self.window),
            "vectors": list(self.vectors),
            "status": self.status,
            "cells_checked": self.cells_checked,
            "counterexample": self.counterexample,
        }


def _poly_to_int_table(p: MultiPoly) -> dict:
    """{(i, j): {q-exponent: coefficient}} for a polynomial in x1, x2 over Z[q, 1/q]."""
    out = {}
    for e, c in p.aligned(XV).terms.items():
        lt = c.laurent_terms()
        if lt is None:
            raise InvalidParameter("coefficient is not a Laurent polynomial in q")
        out[e] = lt
    return out


def _mul_table(table: dict, get, a: int, b: int) -> dict:
    acc: dict = {}
    for (i, j), lt in table.items():
        vec = get(a - i, b - j)
        if not vec:
            continue
        for k, c in lt.items():
            qvec_add(acc, vec, c, k)
    return acc


def _is_zero(vec: dict, q0) -> bool:
    if not vec:
        return True
    if q0 is None:
        return False
    return qvec_is_zero_at(vec, q0)


def _counterexample(a, b, v_text, vec) -> dict:
    return {"cell": [a, b], "vector": v_text,
            "discrepancy": str(qvec_to_state(vec))}


def verify_relation(t: RelationTemplate, window=(-6, 6), vectors: Iterable = (),
                    q0=None) -> RelationReport:
    """Check a defining relation on the coefficient box window x window.

    Cell (a, b) is the coefficient of x1^a x2^b, i.e. modes n = -a-1, k = -b-1.
    Vectors are normal monomials or StateVectors with Laurent coefficients.
    """
    if t.expansion_mode != AT_ZERO_BIVARIATE:
        raise InvalidParameter("the realization is a highest-weight module; only DY_q templates apply")
    lo, hi = window
    if q0 is not None and mpq(q0) == 0:
        raise InvalidParameter("q must be nonzero")
    texts, vecs = [], []
    for v in vectors:
        if isinstance(v, StateVector):
            vecs.append(qvec_from_state(v))
            texts.append(str(v))
        else:
            vecs.append({(tuple(v), 0): 1})
            texts.append(format_monomial(tuple(v)))
    ga, gb = GENS[t.left[0]], GENS[t.left[1]]
    cells = 0
    for vec, text in zip(vecs, texts):
        wt = qvec_max_weight(vec)
        if t.kind == "braided":
            res = _verify_braided(t, ga, gb, vec, wt, lo, hi, q0)
        else:
            res = _verify_cellwise(t, ga, gb, vec, lo, hi, q0)
        n, bad = res
        cells += n
        if bad is not None:
            a, b, dvec = bad
            return RelationReport(t.id, (lo, hi), texts, "failed", cells,
                                  _counterexample(a, b, text, dvec))
    return RelationReport(t.id, (lo, hi), texts, "verified", cells)


def _verify_cellwise(t, ga, gb, vec, lo, hi, q0):
    cells = 0
    for a in range(lo, hi + 1):
        n = -a - 1
        for b in range(lo, hi + 1):
            k = -b - 1
            lhs = dy_apply_qvec(ga, n, dy_apply_qvec(gb, k, vec))
            rhs = dy_apply_qvec(gb, k, dy_apply_qvec(ga, n, vec))
            diff = qvec_add(dict(lhs), rhs, -1)
            if t.kind == "bracket":
                # x1^-1 delta(x2/x1) h(x2) has mode form h(n + k)
                qvec_add(diff, dy_apply_qvec(H, n + k, vec), -1)
            cells += 1
            if not _is_zero(diff, q0):
                return cells, (a, b, diff)
    return cells, None


def _verify_braided(t, ga, gb, vec, wt, lo, hi, q0):
    """D(y) * LHS = N(y) * RHS solved for the discrepancy by recurrence.

    With Z = a(x1)b(x2)v - F(y) b(x2)a(x1)v and F = N/D expanded in
    C[[x1, x2]], D*Z = D*LHS - N*G.  Every series involved is supported in
    a + b >= -wt - 1, and D has nonzero constant term, so Z is recovered
    cell by cell from the lowest total degree upwards.
    """
    Dt = _poly_to_int_table(t.coefficient.den)
    Nt = _poly_to_int_table(t.coefficient.num)
    d00 = Dt.get((0, 0))
    if d00 is None or len(d00) != 1:
        raise InvalidParameter("denominator constant term must be a monomial in q")
    (k00, c00), = d00.items()
    cone = -wt - 1
    floor = cone - hi
    # b(-b-1) v for each b, a(-a-1) v for each a
    bv = {b: dy_apply_qvec(gb, -b - 1, vec) for b in range(floor, hi + 1)}
    av = {a: dy_apply_qvec(ga, -a - 1, vec) for a in range(floor, hi + 1)}
    lhs_cache: dict = {}
    g_cache: dict = {}

    def lhs(a, b):
        if a < floor or b < floor or a + b < cone:
            return {}
        key = (a, b)
        if key not in lhs_cache:
            lhs_cache[key] = dy_apply_qvec(ga, -a - 1, bv[b]) if bv[b] else {}
        return lhs_cache[key]

    def g(a, b):
        if a < floor or b < floor or a + b < cone:
            return {}
        key = (a, b)
        if key not in g_cache:
            g_cache[key] = dy_apply_qvec(gb, -b - 1, av[a]) if av[a] else {}
        return g_cache[key]

    Z: dict = {}
    # window cells below the cone vanish by support
    cells = sum(1 for a in range(lo, hi + 1) for b in range(lo, hi + 1) if a + b < cone)
    rest = {k: v for k, v in Dt.items() if k != (0, 0)}
    for s in range(cone, 2 * hi + 1):
        for a in range(max(floor, s - hi), min(hi, s - floor) + 1):
            b = s - a
            w = _mul_table(Dt, lhs, a, b)
            qvec_add(w, _mul_table(Nt, g, a, b), -1)
            qvec_add(w, _mul_table(rest, lambda x, y: Z.get((x, y), {}), a, b), -1)
            z = {}
            for (m, k), c in w.items():
                quo, r = divmod(c, c00) if isinstance(c, int) else (mpq(c) / c00, 0)
                if r:
                    quo = mpq(c) / c00
                z[(m, k - k00)] = quo
            if z:
                Z[(a, b)] = z
            if lo <= a <= hi and lo <= b <= hi:
                cells += 1
                if not _is_zero(z, q0):
                    return cells, (a, b, z)
    return cells, None


def verify_all_relations(max_weight: int = 4, window=(-6, 6), q0=None) -> list:
    vectors = basis_up_to(max_weight)
    return [verify_relation(t, window, vectors, q0) for t in dy_templates()]


def check_mode_commutator(mode_range: int = 3, max_weight: int = 3) -> RelationReport:
    """[e(m), f(n)] v = h(m+n) v for |m|, |n| <= mode_range."""
    vectors = basis_up_to(max_weight)
    cells = 0
    for mono in vectors:
        vec = {(mono, 0): 1}
        for m in range(-mode_range, mode_range + 1):
            for n in range(-mode_range, mode_range + 1):
                diff = dy_apply_qvec(E, m, dy_apply_qvec(F, n, vec))
                qvec_add(diff, dy_apply_qvec(F, n, dy_apply_qvec(E, m, vec)), -1)
                qvec_add(diff, dy_apply_qvec(H, m + n, vec), -1)
                cells += 1
                if diff:
                    return RelationReport("ef-modes", (-mode_range, mode_range),
                                          [format_monomial(v) for v in vectors], "failed", cells,
                                          {"cell": [m, n], "vector": format_monomial(mono),
                                           "discrepancy": str(qvec_to_state(diff))})
    return RelationReport("ef-modes", (-mode_range, mode_range),
                          [format_monomial(v) for v in vectors], "verified", cells)


def _d_qvec(vec: dict) -> dict:
    acc: dict = {}
    for (m, k), c in vec.items():
        for w, c2 in d_operator_int({m: 1}).items():
            key = (w, k)
            v = acc.get(key, 0) + c * c2
            if v:
                acc[key] = v
            else:
                acc.pop(key, None)
    return acc


def check_d_compatibility(mode_range: int = 4, max_weight: int = 3) -> RelationReport:
    """[D, u(m)] = -m u(m-1) on the realization."""
    vectors = basis_up_to(max_weight)
    cells = 0
    for mono in vectors:
        vec = {(mono, 0): 1}
        for g in (E, F, H):
            for m in range(-mode_range, mode_range + 1):
                diff = _d_qvec(dy_apply_qvec(g, m, vec))
                qvec_add(diff, dy_apply_qvec(g, m, _d_qvec(vec)), -1)
                qvec_add(diff, dy_apply_qvec(g, m - 1, vec), m)
                cells += 1
                if diff:
                    return RelationReport("d-compat", (-mode_range, mode_range), [], "failed", cells,
                                          {"cell": [g, m], "vector": format_monomial(mono),
                                           "discrepancy": str(qvec_to_state(diff))})
    return RelationReport("d-compat", (-mode_range, mode_range), [], "verified", cells)


# ---------------------------------------------------------------------------
# basis and filtration


def admissible_words(n: int, d: int) -> list:
    """DY words e(-m1)..e(-mr) f(-n1)..f(-ns) h(-k1)..h(-kl) with r+s+l <= n, weight <= d."""
    out = []
    for total in range(d + 1):
        for a in range(total + 1):
            for b in range(total - a + 1):
                c = total - a - b
                for pe in partitions(a, strict=True):
                    for pf in partitions(b, strict=True):
                        for ph in partitions(c):
                            if len(pe) + len(pf) + len(ph) > n:
                                continue
                            out.append(tuple([(E, -m) for m in pe] + [(F, -m) for m in pf]
                                             + [(H, -m) for m in ph]))
    return out


def word_to_row(word) -> dict:
    vec = dy_word_qvec(word, {((), 0): 1})
    row: dict = {}
    for (m, k), c in vec.items():
        row.setdefault(m, {})[k] = c
    return {m: QScalar.laurent(t) for m, t in row.items()}


@dataclass
class RankReport:
    n: int
    d: int
    count: int
    rank: int

    @property
    def verified(self) -> bool:
        return self.count == self.rank

    def to_dict(self):
        return {"n": self.n, "d": self.d, "count": self.count, "rank": self.rank,
                "status": "verified" if self.verified else "failed"}


def basis_rank_check(n: int, d: int) -> RankReport:
    words = admissible_words(n, d)
    rows = [word_to_row(w) for w in words]
    return RankReport(n, d, len(words), rank_over_qq(rows))


def format_word(word) -> str:
    return "".join(f"{GEN_NAMES[g]}({m})" for g, m in word) + " |0>"


@dataclass
class FiltrationReport:
    d: int
    status: str
    checks: int
    counterexample: dict | None = None

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    def to_dict(self):
        return {"d": self.d, "status": self.status, "checks": self.checks,
                "counterexample": self.counterexample}


def filtration_check(d: int) -> FiltrationReport:
    """a(m) F_k in F_{k-m} and T_m w0 = 0 for m >= 1.

    F_k is spanned by DY words of degree <= k; the rank check with
    unrestricted length shows it equals the span of PBW monomials of weight
    <= k, so membership becomes a weight-support test.
    """
    checks = 0
    # F_k equals the weight <= k span
    rk = basis_rank_check(d + 1, d)
    dim = sum(len(weight_basis(k)) for k in range(d + 1))
    checks += 1
    if rk.rank != dim:
        return FiltrationReport(d, "failed", checks, {"reason": "F_d differs from weight filtration",
                                                      "rank": rk.rank, "dim": dim})
    for k in range(d + 1):
        for mono in basis_up_to(k):
            vec = {(mono, 0): 1}
            for g in (E, F, H):
                for m in range(-d, d + 1):
                    img = dy_apply_qvec(g, m, vec)
                    checks += 1
                    if img and qvec_max_weight(img) > k - m:
                        return FiltrationReport(d, "failed", checks, {
                            "mode": [GEN_NAMES[g], m], "vector": format_monomial(mono),
                            "image_weight": qvec_max_weight(img), "bound": k - m})
    # T_m w0 = 0: words of length <= 3 with total degree >= 1
    modes = [(g, m) for g in (E, F, H) for m in range(-d, d + 1)]
    vac = {((), 0): 1}
    for length in (1, 2, 3):
        for word in iproduct(modes, repeat=length):
            if sum(m for _, m in word) < 1:
                continue
            checks += 1
            if dy_word_qvec(word, vac):
                return FiltrationReport(d, "failed", checks, {"word": format_word(word)})
    return FiltrationReport(d, "verified", checks)
