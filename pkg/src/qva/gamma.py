"""Gamma-affinization examples and the Heisenberg Fock module at infinity.

Contents:

* the Fock module of the rank-one Heisenberg algebra of lowest weight type
  (vacuum killed by a(n), n <= -1) and its generating field;
* the Gamma-deformed loop bracket on gl_Gamma for Gamma = Z (shifts) and the
  trivial group, on canonical representatives of the quotient algebra;
* the bracket decomposition of the pseudo-differential generating fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable

from sympy import QQ, field as _sympy_field

from .checks import CheckResult
from .errors import InvalidParameter
from .fields import (AT_INFINITY, AbstractField, DecompositionEntry, LocalityCertificate,
                     identity_field, scale_field, shifted_field, sum_fields)
from .linear import LinComb
from .scalars import QScalar, as_qscalar
from .series import AffineMap, gbinom

# ---------------------------------------------------------------------------
# Heisenberg Fock module at infinity
#
# Basis keys are weakly decreasing tuples (n1 >= ... >= nr >= 0) standing for
# a(n1)...a(nr)|0>.  [a(m), a(n)] = m delta_{m+n,0} level.


def fock_normal(parts: Iterable[int]) -> tuple:
    parts = tuple(sorted((int(p) for p in parts), reverse=True))
    if parts and parts[-1] < 0:
        raise InvalidParameter("creation modes are non-negative")
    return parts


def fock_weight(key: tuple) -> int:
    return sum(key)


def fock_basis(max_modes: int, max_index: int) -> list:
    """All monomials with at most max_modes creation modes of index <= max_index."""
    out = [()]
    frontier = [()]
    for _ in range(max_modes):
        nxt = []
        for key in frontier:
            top = key[-1] if key else max_index
            for n in range(top, -1, -1):
                nxt.append(key + (n,))
        out.extend(nxt)
        frontier = nxt
    return out


def _remove_one(key: tuple, n: int) -> tuple:
    lst = list(key)
    lst.remove(n)
    return tuple(lst)


def heisenberg_mode(n: int, key: tuple, level) -> LinComb:
    """a(n) on a basis monomial."""
    level = as_qscalar(level)
    if n >= 0:
        return LinComb.basis(fock_normal(key + (n,)))
    c = key.count(-n)
    if not c or not level:
        return LinComb()
    return LinComb.basis(_remove_one(key, -n), level * (c * n))


def heisenberg_bound(key: tuple) -> int:
    """a(n) kills the monomial for n < -(largest creation index)."""
    return -key[0] if key else 0


def heisenberg_infinity_field(level=None, label: str = "a") -> AbstractField:
    """a(x) = sum a(n) x^{-n-1} on the lowest-weight Fock module.

    A symbolic level is the field generator of Q(q), printed as ``q``.
    """
    level = QScalar.q() if level is None else as_qscalar(level)
    return AbstractField(label, AT_INFINITY,
                         lambda n, key: heisenberg_mode(n, key, level), heisenberg_bound)


def heisenberg_certificate(k: int = 2) -> LocalityCertificate:
    return LocalityCertificate.power(k)


def heisenberg_decomposition(level=None, a: AbstractField | None = None) -> list:
    """-[a(x1), a(x2)] = -level d/dx2 x1^-1 delta(x2/x1)."""
    level = QScalar.q() if level is None else as_qscalar(level)
    return [DecompositionEntry(AffineMap(), 1, scale_field(identity_field(), -level, "-l*1_W"))]


# ---------------------------------------------------------------------------
# rational functions of t, expanded at t = infinity

T_FIELD, T = _sympy_field("t", QQ)
_T_RING = T.numer.ring
_T_GEN = _T_RING.gens[0]


def t_shift(p, c):
    """p(t + c) for a rational function p."""
    c = QQ(Fraction(c)) if not isinstance(c, int) else c
    num = p.numer.compose(_T_GEN, _T_GEN + c)
    den = p.denom.compose(_T_GEN, _T_GEN + c)
    return T_FIELD(num) / T_FIELD(den)


def _dense(poly) -> list:
    """Coefficients [c_0, ..., c_d] of a univariate PolyElement."""
    d = poly.degree()
    out = [Fraction(0)] * (d + 1)
    for (k,), c in poly.terms():
        out[k] = Fraction(int(c.numerator), int(c.denominator))
    return out


def expand_at_infinity(p, lo: int, hi: int) -> dict:
    """Coefficients of t^e, lo <= e <= hi, of p expanded in C((t^-1))."""
    if p == 0:
        return {}
    num, den = _dense(p.numer), _dense(p.denom)
    top = len(num) - len(den)  # leading exponent
    if hi > top:
        hi = top
    if lo > hi:
        return {}
    # in u = 1/t: p = t^top * A(u)/B(u) with A, B reversed coefficient lists
    A, B = num[::-1], den[::-1]
    count = hi - lo + 1 + (top - hi)
    series = []
    for k in range(count):
        s = A[k] if k < len(A) else Fraction(0)
        for j in range(1, min(k, len(B) - 1) + 1):
            s -= B[j] * series[k - j]
        series.append(s / B[0])
    out = {}
    for k, c in enumerate(series):
        e = top - k
        if lo <= e <= hi and c:
            out[e] = c
    return out


def residue_at_infinity(p) -> Fraction:
    """Coefficient of t^-1 in the expansion of p at infinity."""
    return expand_at_infinity(p, -1, -1).get(-1, Fraction(0))


# ---------------------------------------------------------------------------
# Gamma-affinization of a Lie algebra with invariant form


@dataclass(frozen=True)
class GammaSetup:
    """A Lie algebra g with form, an action of Gamma and a map Gamma -> affine maps.

    ``relevant(a, b)`` lists the group elements g with [ga, b] or <ga, b>
    possibly nonzero, for basis elements a and b.
    """

    name: str
    bracket: object  # (a, b) -> {basis: Fraction}
    form: object  # (a, b) -> Fraction
    act: object  # (g, a) -> basis
    affine: object  # g -> (g0, g1)
    relevant: object  # (a, b) -> iterable of g
    canonical: object  # a -> (g, canonical basis) with g.a canonical


def _gl_bracket(a, b):
    (al, be), (mu, nu) = a, b
    out: dict = {}
    if be == mu:
        out[(al, nu)] = out.get((al, nu), 0) + 1
    if nu == al:
        out[(mu, be)] = out.get((mu, be), 0) - 1
    return {k: Fraction(v) for k, v in out.items() if v}


def _gl_form(a, b):
    (al, be), (mu, nu) = a, b
    return Fraction(1 if (al == nu and be == mu) else 0)


GL_Z = GammaSetup(
    "Z",
    _gl_bracket,
    _gl_form,
    lambda g, a: (a[0] + g, a[1] + g),
    lambda g: (1, g),
    lambda a, b: sorted({b[0] - a[1], b[1] - a[0]}),
    lambda a: (-a[1], (a[0] - a[1], 0)),
)

TRIVIAL_ABELIAN = GammaSetup(
    "trivial",
    lambda a, b: {},
    lambda a, b: Fraction(1),
    lambda g, a: a,
    lambda g: (1, 0),
    lambda a, b: [0],
    lambda a: (0, a),
)

SETUPS = {"Z": GL_Z, "trivial": TRIVIAL_ABELIAN}


class QuotientLieElement:
    """Sum of canonical basis elements tensor rational functions of t, plus c*k."""

    __slots__ = ("setup", "terms", "central")

    def __init__(self, setup: GammaSetup, terms: dict | None = None, central=0):
        self.setup = setup
        self.terms = {k: v for k, v in (terms or {}).items() if v != 0}
        self.central = Fraction(central)

    @classmethod
    def generator(cls, setup: GammaSetup, a, k: int) -> "QuotientLieElement":
        """pi(a tensor t^k)."""
        return quotient_canonicalize(setup, a, T ** k)

    @classmethod
    def k(cls, setup: GammaSetup, c=1) -> "QuotientLieElement":
        return cls(setup, {}, c)

    def __add__(self, other: "QuotientLieElement") -> "QuotientLieElement":
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return QuotientLieElement(self.setup, terms, self.central + other.central)

    def __neg__(self):
        return QuotientLieElement(self.setup, {k: -v for k, v in self.terms.items()}, -self.central)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "QuotientLieElement":
        c = Fraction(c)
        return QuotientLieElement(self.setup, {k: v * QQ(c.numerator, c.denominator)
                                               for k, v in self.terms.items()}, self.central * c)

    def is_zero(self) -> bool:
        return not self.terms and not self.central

    def __eq__(self, other):
        if not isinstance(other, QuotientLieElement):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.central))

    def __repr__(self):
        parts = [f"pi({k})*({v})" for k, v in sorted(self.terms.items())]
        if self.central:
            parts.append(f"({self.central})*k")
        return " + ".join(parts) or "0"


def quotient_canonicalize(setup: GammaSetup, a, p) -> QuotientLieElement:
    """a tensor p(t) -> g.a tensor p(g^-1 ... ) in canonical form.

    Uses g.a tensor p(g(t)) = a tensor p(t) modulo the ideal.
    """
    g, ca = setup.canonical(a)
    g0, g1 = setup.affine(g)
    if g0 != 1:
        raise InvalidParameter("only translations are supported")
    return QuotientLieElement(setup, {ca: t_shift(p, g1) if g1 else p})


def gamma_bracket(u: QuotientLieElement, v: QuotientLieElement) -> QuotientLieElement:
    """[a p(t), b q(t)] = sum_g [ga, b] p(g(t)) q(t) + Res_t p'(g(t)) g'(t) q(t) <ga, b> k."""
    setup = u.setup
    out = QuotientLieElement(setup)
    for a, p in u.terms.items():
        dp = p.diff(T)
        for b, q in v.terms.items():
            for g in setup.relevant(a, b):
                ga = setup.act(g, a)
                g0, g1 = setup.affine(g)
                pg = t_shift(p, g1) if g1 else p
                for c, coef in setup.bracket(ga, b).items():
                    out = out + quotient_canonicalize(setup, c, pg * q).scale(coef)
                f = setup.form(ga, b)
                if f:
                    dpg = t_shift(dp, g1) if g1 else dp
                    out = out + QuotientLieElement.k(setup, f * residue_at_infinity(dpg * q * g0))
    return out


def gamma_generators(setup: GammaSetup, max_index: int = 2, max_degree: int = 2) -> list:
    """pi(E_{m,0} t^k) for |m| <= max_index, |k| <= max_degree (or a t^k if Gamma is trivial)."""
    if setup is TRIVIAL_ABELIAN:
        basis = ["a"]
    else:
        basis = [(m, 0) for m in range(-max_index, max_index + 1)]
    return [QuotientLieElement.generator(setup, b, k) for b in basis
            for k in range(-max_degree, max_degree + 1)]


def jacobi_check(elements: list, triples=None) -> CheckResult:
    """Antisymmetry on all pairs and the Jacobi identity on all triples."""
    checks = 0
    cache: dict = {}

    def br(i, j):
        if (i, j) not in cache:
            cache[(i, j)] = gamma_bracket(elements[i], elements[j])
        return cache[(i, j)]

    n = len(elements)
    for i in range(n):
        for j in range(i, n):
            checks += 1
            s = br(i, j) + br(j, i)
            if not s.is_zero():
                return CheckResult("antisymmetry", "failed", checks,
                                    {"pair": [repr(elements[i]), repr(elements[j])], "sum": repr(s)})
    for i, j, k in (triples or combinations_with_replacement(range(n), 3)):
        u, v, w = elements[i], elements[j], elements[k]
        s = gamma_bracket(u, br(j, k)) + gamma_bracket(v, br(k, i)) + gamma_bracket(w, br(i, j))
        checks += 1
        if not s.is_zero():
            return CheckResult("jacobi", "failed", checks,
                                {"triple": [repr(u), repr(v), repr(w)], "sum": repr(s)})
    return CheckResult("jacobi", "verified", checks)


def lemma_relabeling_check(shift: int, m: int = 0, window=(-5, 5), t_window=(-12, 5)) -> CheckResult:
    """(g a)_Gamma(x) = a_Gamma(x + n) for g = n, compared mode by mode.

    The left side pi(ga tensor t^k) is canonicalized and expanded at t = oo;
    the right side is the binomial re-expansion sum_i C(-k+i-1, i) n^i pi(a t^(k-i)).
    """
    setup = GL_Z
    a = (m, 0)
    ga = setup.act(shift, a)
    checks = 0
    for k in range(window[0], window[1] + 1):
        lhs = quotient_canonicalize(setup, ga, T ** k)
        lt = expand_at_infinity(lhs.terms.get(a, T_FIELD(0)), *t_window)
        if set(lhs.terms) - {a}:
            return CheckResult("relabeling", "failed", checks, {"k": k, "lhs": repr(lhs)})
        for e in range(t_window[0], t_window[1] + 1):
            i = k - e
            rhs = Fraction(gbinom(-k + i - 1, i) * shift ** i) if i >= 0 else Fraction(0)
            checks += 1
            if lt.get(e, Fraction(0)) != rhs:
                return CheckResult("relabeling", "failed", checks,
                                    {"k": k, "t_exponent": e, "lhs": str(lt.get(e, 0)), "rhs": str(rhs)})
    return CheckResult("relabeling", "verified", checks)


# ---------------------------------------------------------------------------
# the Z example as a bracket decomposition


@dataclass(frozen=True)
class GammaTerm:
    """coefficient * X(inner(x2)) * (d/dx2)^order x1^-1 delta(argument(x2)/x1).

    ``field`` is ("A", index) for a generating field or ("k",) for the central element.
    """

    argument: AffineMap
    order: int
    field: tuple
    inner: AffineMap
    coefficient: int


def gamma_z_bracket_decomposition(m: int, n: int) -> list:
    """[A_m(x1), A_n(x2)] as delta terms with arguments x2 + n and x2 - m."""
    terms = [
        GammaTerm(AffineMap.shift(n), 0, ("A", m + n), AffineMap(), 1),
        GammaTerm(AffineMap.shift(-m), 0, ("A", m + n), AffineMap.shift(-m), -1),
    ]
    if m + n == 0:
        terms.append(GammaTerm(AffineMap.shift(n), 1, ("k",), AffineMap(), 1))
    return terms


def decomposition_mode_coefficient(terms: list, j: int, i: int, t_window=(-10, 6)) -> tuple:
    """Coefficient of x1^(-j-1) x2^(-i-1) in the bracket, as (t-expansions per field, central).

    A_r(x) stands for sum_u pi(E_{r,0} t^u) x^(-u-1).
    """
    fields: dict = {}
    central = Fraction(0)
    for term in terms:
        s = term.argument.g1.constant_value() if term.argument.g1 else 0
        if term.field == ("k",):
            # d/dx2 (x2 + s)^j, coefficient of x2^(-i-1)
            e = j - 1 - (-i - 1)  # power of s
            if e >= 0:
                central += Fraction(term.coefficient * j * gbinom(j - 1, e)) * Fraction(s) ** e
            continue
        c = term.inner.g1.constant_value() if term.inner.g1 else 0
        d = fields.setdefault(term.field, {})
        for u in range(t_window[0], t_window[1] + 1):
            if c == 0:
                # A(x2)(x2 + s)^j: x2^(-u-1) * C(j, r) s^r x2^(j-r)
                r = j - u - 1 + i + 1
                val = Fraction(gbinom(j, r)) * Fraction(s) ** r if r >= 0 else Fraction(0)
            else:
                if s != c:
                    raise InvalidParameter("shifted field must share the delta argument")
                # (x2 + c)^(j - u - 1) expanded in powers of c
                r = j - u + i
                val = Fraction(gbinom(j - u - 1, r)) * Fraction(c) ** r if r >= 0 else Fraction(0)
            if val:
                d[u] = d.get(u, Fraction(0)) + term.coefficient * val
    return {k: {u: v for u, v in d.items() if v} for k, d in fields.items()}, central


def realize_decomposition(terms: list, realize) -> list:
    """Decomposition entries of -[a(x1), b(x2)] from bracket terms.

    ``realize(term)`` returns the AbstractField standing for the term's
    coefficient field (with its inner shift applied) or None to drop it.
    Entries sharing (argument, order) are summed; the identity argument
    comes first.
    """
    grouped: dict = {}
    order = []
    for term in terms:
        f = realize(term)
        if f is None:
            continue
        key = (term.argument, term.order)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(scale_field(f, -term.coefficient))
    order.sort(key=lambda k: (not k[0].is_identity(), k[1]))
    return [DecompositionEntry(arg, o, grouped[(arg, o)][0] if len(grouped[(arg, o)]) == 1
                               else sum_fields(grouped[(arg, o)]))
            for arg, o in order]


def shifted_heisenberg_instance(n: int, level=None):
    """a(x) and b(x) = a(x) + a(x + n) on the Fock module at infinity.

    The decomposition of -[a(x1), b(x2)] is built from the central terms of
    the Z example at (m, n) = (0, 0) and (-n, n), with k acting as the level.
    """
    level = QScalar.q() if level is None else as_qscalar(level)
    a = heisenberg_infinity_field(level)
    b = sum_fields([a, shifted_field(a, AffineMap.shift(n))], f"a+a(x+{n})")
    one = identity_field()

    def realize(term):
        if term.field == ("k",):
            return scale_field(one, level, "l*1_W")
        return None

    terms = gamma_z_bracket_decomposition(0, 0) + gamma_z_bracket_decomposition(-n, n)
    decomposition = realize_decomposition(terms, realize)
    cert = LocalityCertificate.shifts([(0, 2), (n, 2)])
    return a, b, decomposition, cert
