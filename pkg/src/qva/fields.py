"""Fields on a module, their n-th products, and identity checks.

A field a(x) = sum_n a(n) x^{-n-1} is given by its mode action on basis
vectors of an opaque module.  Two kinds are supported:

* ``AtInfinity``: a(n)w = 0 for n < bound(w)  (fields in Hom(W, W((x^-1))))
* ``AtZero``:     a(n)w = 0 for n >= bound(w) (fields in Hom(W, W((x))))

The n-th product a(x)_n b(x) is computed from a locality certificate p by
expanding  i(1/p(x0+x, x)) * (p(x1, x) a(x1) b(x))|_{x1 = x + x0}.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .errors import DivergentProduct, InvalidCertificate, InvalidParameter, MalformedDecomposition
from .checks import CheckResult as CheckReport
from .linear import LinComb
from .scalars import QSCALAR_ONE, as_qscalar, format_qscalar
from .series import (AffineMap, MultiPoly, RationalDistribution, Region, Series, VarSpec,
                     gbinom, iota_expand)

AT_INFINITY = "AtInfinityModule"
AT_ZERO = "AtZeroModule"


def _vec_items(v):
    return v.terms.items()


class AbstractField:
    """A field given by a memoized basis-level mode action."""

    def __init__(self, label: str, kind: str, action: Callable, bound: Callable):
        if kind not in (AT_INFINITY, AT_ZERO):
            raise InvalidParameter(f"unknown module kind {kind}")
        self.label = label
        self.kind = kind
        self._action = action
        self._bound = bound
        self._cache: dict = {}

    def __repr__(self):
        return f"AbstractField({self.label!r}, {self.kind})"

    def bound(self, key) -> int:
        return self._bound(key)

    def bound_vec(self, v) -> int:
        keys = list(v.keys())
        if not keys:
            return 0
        bs = [self._bound(k) for k in keys]
        return min(bs) if self.kind == AT_INFINITY else max(bs)

    def vanishes(self, n: int, key) -> bool:
        b = self._bound(key)
        return n < b if self.kind == AT_INFINITY else n >= b

    def act(self, n: int, key):
        ck = (n, key)
        if ck in self._cache:
            return self._cache[ck]
        if self.vanishes(n, key):
            out = LinComb()
        else:
            out = self._action(n, key)
        self._cache[ck] = out
        return out

    def apply(self, n: int, v):
        acc: dict = {}
        for k, c in v.terms.items():
            img = self.act(n, k)
            for k2, c2 in img.terms.items():
                w = acc.get(k2)
                t = c2 * c
                w = t if w is None else w + t
                if w:
                    acc[k2] = w
                else:
                    acc.pop(k2, None)
        return LinComb._wrap(acc)

    def __call__(self, n: int, v):
        return self.apply(n, v)


# ---------------------------------------------------------------------------
# elementary fields


def identity_field(kind: str = AT_INFINITY) -> AbstractField:
    """1_W: the only nonzero mode is n = -1."""
    def action(n, key):
        return LinComb.basis(key) if n == -1 else LinComb()
    if kind == AT_INFINITY:
        return AbstractField("1_W", kind, action, lambda key: -1)
    return AbstractField("1_W", kind, action, lambda key: 0)


def zero_field(kind: str = AT_INFINITY, label: str = "0") -> AbstractField:
    return AbstractField(label, kind, lambda n, key: LinComb(),
                         lambda key: 0)


def scale_field(a: AbstractField, c, label: str | None = None) -> AbstractField:
    c = as_qscalar(c)
    return AbstractField(label or f"({c})*{a.label}", a.kind,
                         lambda n, key: a.act(n, key).scale(c), a.bound)


def sum_fields(fields: Sequence[AbstractField], label: str | None = None) -> AbstractField:
    kinds = {f.kind for f in fields}
    if len(kinds) != 1:
        raise InvalidParameter("cannot add fields of different kinds")
    kind = kinds.pop()

    def action(n, key):
        out = LinComb()
        for f in fields:
            out = out + f.act(n, key)
        return out

    def bound(key):
        bs = [f.bound(key) for f in fields]
        return min(bs) if kind == AT_INFINITY else max(bs)

    return AbstractField(label or "+".join(f.label for f in fields), kind, action, bound)


def derivative_field(a: AbstractField, order: int = 1) -> AbstractField:
    """(d/dx)^order a(x); mode m picks up (-m)(-m+1)...(-m+order-1) a(m-order)."""
    def action(n, key):
        c = 1
        for i in range(order):
            c *= -n + i
        if not c:
            return LinComb()
        return a.act(n - order, key).scale(c)

    if a.kind == AT_INFINITY:
        bound = lambda key: a.bound(key) + order
    else:
        bound = lambda key: a.bound(key) + order
    return AbstractField(f"d^{order}{a.label}", a.kind, action, bound)


def shifted_field(a: AbstractField, g: AffineMap) -> AbstractField:
    """b(x) = a(g(x)) with (g0 x + g1)^{-k-1} expanded in non-negative powers of g1.

    b(m) = sum_i C(-(m-i)-1, i) g0^{-(m-i)-1-i} g1^i a(m-i).
    """
    g0, g1 = g.g0, g.g1

    def action(n, key):
        out = LinComb()
        if not g1:
            return a.act(n, key).scale(g0 ** (-n - 1))
        if a.kind == AT_INFINITY:
            top = n - a.bound(key)
            if top < 0:
                return out
            rng = range(0, top + 1)
        else:
            # a(k) = 0 for k >= B; k = n - i ranges upwards only if i < 0: finite
            raise InvalidParameter("shifted fields are supported on modules at infinity")
        for i in rng:
            k = n - i
            c = gbinom(-k - 1, i)
            if not c:
                continue
            coef = g0 ** (-k - 1 - i) * g1 ** i * c
            out = out + a.act(k, key).scale(coef)
        return out

    return AbstractField(f"{a.label}({g})", a.kind, action, a.bound)


# ---------------------------------------------------------------------------
# certificates


@dataclass
class LocalityCertificate:
    """p(x1, x2) a(x1) b(x2) = p(x1, x2) sum_i f_i(x2 - x1) b_i(x2) a_i(x1).

    ``pairs`` holds (f_i, a_i, b_i); an empty list means the commutative
    certificate with f = 1, a_i = a, b_i = b.  f_i is a constant QScalar or
    a RationalDistribution in the single variable ``x``.
    """

    p: MultiPoly
    pairs: list = field(default_factory=list)
    k: int | None = None

    def __post_init__(self):
        self.p = self.p.aligned(("x1", "x2"))
        if self.p.is_zero():
            raise InvalidCertificate("certificate polynomial must be nonzero")

    @classmethod
    def power(cls, k: int, pairs=None) -> "LocalityCertificate":
        xv = ("x1", "x2")
        p = MultiPoly.linear(xv, {"x1": 1, "x2": -1}) ** k
        return cls(p, list(pairs or []), k)

    @classmethod
    def shifts(cls, factors: Sequence, pairs=None) -> "LocalityCertificate":
        """prod (x1 - x2 - c)^e for (c, e) in factors."""
        xv = ("x1", "x2")
        p = MultiPoly.const(xv, 1)
        for c, e in factors:
            p = p * MultiPoly.linear(xv, {"x1": 1, "x2": -1}, -as_qscalar(c)) ** e
        return cls(p, list(pairs or []))

    def resolved_pairs(self, a, b) -> list:
        if not self.pairs:
            return [(QSCALAR_ONE, a, b)]
        return self.pairs

    def constant_pairs(self, a, b) -> list:
        out = []
        for f, ai, bi in self.resolved_pairs(a, b):
            if isinstance(f, RationalDistribution):
                if not f.num.is_constant() or not f.den.is_constant():
                    raise InvalidCertificate("n-th products need constant braiding coefficients")
                f = f.num.constant_value() / f.den.constant_value()
            out.append((as_qscalar(f), ai, bi))
        return out


def _univariate_expansion(f, region: Region, lo: int, hi: int) -> dict:
    """Coefficients of i_{x, region}(f)(x) for exponents in [lo, hi]."""
    if not isinstance(f, RationalDistribution):
        c = as_qscalar(f)
        return {0: c} if lo <= 0 <= hi and c else {}
    s = iota_expand(f, [VarSpec("x", region)], [(lo, hi)])
    return {e[0]: c for e, c in s.terms.items()}


def _univariate_ceiling(f) -> int:
    if not isinstance(f, RationalDistribution):
        return 0
    return f.num.degree_in("x") - f.den.degree_in("x")


# ---------------------------------------------------------------------------
# window products


def _a_b(a: AbstractField, b: AbstractField, s: int, t: int, key, cache: dict):
    """a(s) b(t) w with b(t) w cached."""
    bk = (t, key)
    if bk not in cache:
        cache[bk] = b.act(t, key)
    bv = cache[bk]
    if not bv:
        return bv
    return a.apply(s, bv)


def pair_product_window(a: AbstractField, b: AbstractField, w, window) -> Series:
    """Coefficients of a(x1) b(x2) w on window [(lo1, hi1), (lo2, hi2)]."""
    if a.kind != b.kind:
        raise InvalidParameter("fields act on modules of different kinds")
    (l1, h1), (l2, h2) = window
    terms = {}
    cache: dict = {}
    for key, c in _vec_items(w):
        for al in range(l1, h1 + 1):
            for be in range(l2, h2 + 1):
                v = _a_b(a, b, -al - 1, -be - 1, key, cache).scale(c)
                if v:
                    old = terms.get((al, be))
                    terms[(al, be)] = v if old is None else old + v
    region = Region.AT_INFINITY if a.kind == AT_INFINITY else Region.AT_ZERO
    return Series((VarSpec("x1", region), VarSpec("x2", region)), terms, window)


def _vec_text(v) -> str:
    if not v:
        return "0"
    return " + ".join(f"({format_qscalar(c)})*{k!r}" for k, c in sorted(v.terms.items(), key=repr))


def _certificate_sides(c: LocalityCertificate, a, b, key, al, be, cache_ab, cache_ba):
    """Coefficient of x1^al x2^be in p a b w and in p sum f_i b_i a_i w."""
    lhs = LinComb()
    rhs = LinComb()
    for (i, j), pc in c.p.terms.items():
        lhs = lhs + _a_b(a, b, -(al - i) - 1, -(be - j) - 1, key, cache_ab).scale(pc)
    for f, ai, bi in c.resolved_pairs(a, b):
        # i_{x,inf}(f)(-x1 + x2) = sum_k phi_k (-x1 + x2)^k, non-negative powers of x2
        ceil = _univariate_ceiling(f)
        ba = cache_ba.setdefault(id(ai), {})
        for (i, j), pc in c.p.terms.items():
            A, Bx = al - i, be - j
            # need x1^A x2^Bx in sum_k phi_k (-x1+x2)^k b_i(x2) a_i(x1) w
            Ba = ai.bound(key) if ai.kind == AT_INFINITY else None
            top_a = -Ba - 1 if Ba is not None else None  # a_i exponent ceiling on w
            if not isinstance(f, RationalDistribution):
                ks = [0]
                phis = {0: as_qscalar(f)}
            else:
                if top_a is None:
                    raise InvalidCertificate("rational braiding needs a module at infinity")
                lo_k = A - top_a
                if lo_k > ceil:
                    continue
                phis = _univariate_expansion(f, Region.AT_INFINITY, lo_k, ceil)
                ks = sorted(phis)
            for k in ks:
                phi = phis.get(k)
                if not phi:
                    continue
                # (-x1 + x2)^k = sum_r C(k, r) (-x1)^(k-r) x2^r
                r_hi = None
                if top_a is not None:
                    # x1 exponent of a_i is A - (k - r) <= top_a  =>  r <= top_a - A + k
                    r_hi = top_a - A + k
                if k >= 0:
                    r_hi = k if r_hi is None else min(r_hi, k)
                if r_hi is None:
                    raise DivergentProduct("cannot bound braided expansion")
                for r in range(0, r_hi + 1):
                    bc = gbinom(k, r)
                    if not bc:
                        continue
                    sgn = -1 if (k - r) % 2 else 1
                    ex1 = A - (k - r)
                    ex2 = Bx - r
                    kk = (ex2, ex1)
                    if kk not in ba:
                        av = ai.act(-ex1 - 1, key)
                        ba[kk] = bi.apply(-ex2 - 1, av) if av else LinComb()
                    val = ba[kk]
                    if val:
                        rhs = rhs + val.scale(pc * phi * (bc * sgn))
    return lhs, rhs


def check_certificate(c: LocalityCertificate, a: AbstractField, b: AbstractField,
                      vectors: Iterable, window) -> CheckReport:
    """Verify the certificate identity coefficient-wise on the window."""
    (l1, h1), (l2, h2) = window
    checks = 0
    for key in vectors:
        cache_ab: dict = {}
        cache_ba: dict = {}
        for al in range(l1, h1 + 1):
            for be in range(l2, h2 + 1):
                lhs, rhs = _certificate_sides(c, a, b, key, al, be, cache_ab, cache_ba)
                checks += 1
                diff = lhs - rhs
                if diff:
                    return CheckReport("certificate", "failed", checks,
                                       {"cell": [al, be], "vector": repr(key),
                                        "discrepancy": _vec_text(diff)})
    return CheckReport("certificate", "verified", checks)


def search_certificate(a, b, vectors, window, max_k: int = 6):
    """Smallest k <= max_k for which (x1 - x2)^k is a commutative certificate."""
    for k in range(max_k + 1):
        c = LocalityCertificate.power(k)
        if check_certificate(c, a, b, vectors, window).verified:
            return c
    return None


# ---------------------------------------------------------------------------
# n-th products


class _Slices:
    """x0-slices of i_{x, r; x0, 0}(1/p(x0 + x, x)) as univariate expansions in x."""

    def __init__(self, p: MultiPoly, region: Region):
        xv = ("x", "x0")
        # p(x0 + x, x)
        sub = p.substitute("x1", MultiPoly.linear(("x", "x0"), {"x": 1, "x0": 1}))
        sub = sub.substitute("x2", MultiPoly.var(xv, "x")).aligned(xv)
        parts = sub.split("x0")
        self.k0 = min(parts)
        self.D = {d - self.k0: c.aligned(("x",)) for d, c in parts.items()}
        self.region = region
        self.P = [MultiPoly.const(("x",), 1)]
        self.D0pow = [MultiPoly.const(("x",), 1)]
        self._exp: dict = {}

    def _pow(self, k):
        while len(self.D0pow) <= k:
            self.D0pow.append(self.D0pow[-1] * self.D[0])
        return self.D0pow[k]

    def _p(self, j):
        while len(self.P) <= j:
            jj = len(self.P)
            acc = MultiPoly.const(("x",), 0)
            for l in range(1, jj + 1):
                if l in self.D:
                    acc = acc - self.D[l] * self.P[jj - l] * self._pow(l - 1)
            self.P.append(acc)
        return self.P[j]

    def edge(self, e: int):
        """Ceiling (at infinity) or floor (at zero) of slice e, or None if zero."""
        j = e + self.k0
        num = self._p(j)
        if num.is_zero():
            return None
        den = self._pow(j + 1)
        if self.region == Region.AT_INFINITY:
            return num.degree_in("x") - den.degree_in("x")
        return num.low_degree_in("x") - den.low_degree_in("x")

    def coeffs(self, e: int, lo: int, hi: int) -> dict:
        j = e + self.k0
        key = (e,)
        have = self._exp.get(key)
        if have is not None and have[0] <= lo and have[1] >= hi:
            return have[2]
        num = self._p(j)
        if num.is_zero():
            out = {}
        else:
            f = RationalDistribution(num, self._pow(j + 1), reduce=False)
            s = iota_expand(f, [VarSpec("x", self.region)], [(lo, hi)])
            out = {t[0]: c for t, c in s.terms.items()}
        self._exp[key] = (lo, hi, out)
        return out


def truncation_order(c: LocalityCertificate) -> int:
    """k with x0^k i(1/p(x0+x, x)) regular at x0 = 0."""
    return _Slices(c.p, Region.AT_INFINITY).k0


class _ProductData:
    """Per-vector data for one (a, b, certificate) triple."""

    def __init__(self, a, b, cert, slices):
        self.a, self.b, self.cert, self.slices = a, b, cert, slices
        self.pairs = cert.constant_pairs(a, b)
        self.inf = a.kind == AT_INFINITY
        self.p_terms = list(cert.p.terms.items())
        self.deg1 = max(e[0] for e in cert.p.terms)
        self.deg2 = max(e[1] for e in cert.p.terms)
        self.low1 = min(e[0] for e in cert.p.terms)
        self.low2 = min(e[1] for e in cert.p.terms)
        self._ab: dict = {}
        self._c: dict = {}
        self._Q: dict = {}

    def edges(self, key):
        b = self.b
        if self.inf:
            ca = max(-ai.bound(key) - 1 for _, ai, _ in self.pairs) + self.deg1
            cb = -b.bound(key) - 1 + self.deg2
            return ca, cb
        fa = min(-ai.bound(key) for _, ai, _ in self.pairs) + self.low1
        fb = -b.bound(key) + self.low2
        return fa, fb

    def A(self, key, al, be):
        return _a_b(self.a, self.b, -al - 1, -be - 1, key, self._ab.setdefault(key, {}))

    def c(self, key, al, be):
        ck = (key, al, be)
        if ck not in self._c:
            out = LinComb()
            for (i, j), pc in self.p_terms:
                v = self.A(key, al - i, be - j)
                if v:
                    out = out + v.scale(pc)
            self._c[ck] = out
        return self._c[ck]

    def Q(self, key, j, r):
        """[x0^j x^r] of (p a b w)(x + x0, x)."""
        qk = (key, j, r)
        if qk in self._Q:
            return self._Q[qk]
        e1, e2 = self.edges(key)
        out = LinComb()
        if self.inf:
            rng = range(r + j - e2, e1 + 1)
        else:
            rng = range(e1, r + j - e2 + 1)
        for al in rng:
            bc = gbinom(al, j)
            if not bc:
                continue
            v = self.c(key, al, r + j - al)
            if v:
                out = out + v.scale(bc)
        self._Q[qk] = out
        return out

    def q_edge(self, key, j):
        e1, e2 = self.edges(key)
        return e1 + e2 - j

    def coefficient(self, key, N: int, M: int):
        """[x0^N x^M] of Y(a, x0) b(x) w."""
        sl = self.slices
        out = LinComb()
        for e in range(-sl.k0, N + 1):
            j = N - e
            edge = sl.edge(e)
            if edge is None:
                continue
            qe = self.q_edge(key, j)
            if self.inf:
                lo, hi = M - qe, edge
            else:
                lo, hi = edge, M - qe
            if lo > hi:
                continue
            R = sl.coeffs(e, lo, hi)
            for r1, rc in R.items():
                v = self.Q(key, j, M - r1)
                if v:
                    out = out + v.scale(rc)
        return out

    def mode_edge(self, key, N: int):
        """Extreme x-exponent of the x0^N coefficient (ceiling or floor)."""
        sl = self.slices
        vals = []
        for e in range(-sl.k0, N + 1):
            edge = sl.edge(e)
            if edge is None:
                continue
            vals.append(edge + self.q_edge(key, N - e))
        if not vals:
            return None
        return max(vals) if self.inf else min(vals)


def y_eo_product(a: AbstractField, b: AbstractField, c: LocalityCertificate, n: int,
                 _data: _ProductData | None = None) -> AbstractField:
    """The n-th product a(x)_n b(x) as a lazily evaluated field."""
    if a.kind != b.kind:
        raise InvalidParameter("fields act on modules of different kinds")
    region = Region.AT_INFINITY if a.kind == AT_INFINITY else Region.AT_ZERO
    data = _data or _ProductData(a, b, c, _Slices(c.p, region))
    N = -n - 1
    inf = a.kind == AT_INFINITY

    if n >= data.slices.k0:
        return zero_field(a.kind, f"{a.label}_{n}{b.label}")

    def action(m, key):
        return data.coefficient(key, N, -m - 1)

    def bound(key):
        edge = data.mode_edge(key, N)
        if edge is None:
            return 0
        # inf: x-exponent M <= edge, M = -m-1  => zero for m < -edge-1
        return -edge - 1 if inf else -edge

    return AbstractField(f"{a.label}_{n}{b.label}", a.kind, action, bound)


@dataclass
class ProductResult:
    products: dict
    threshold: int


def y_products(a, b, c: LocalityCertificate, n_range: Iterable) -> ProductResult:
    region = Region.AT_INFINITY if a.kind == AT_INFINITY else Region.AT_ZERO
    data = _ProductData(a, b, c, _Slices(c.p, region))
    return ProductResult({n: y_eo_product(a, b, c, n, data) for n in n_range}, data.slices.k0)


def residue_nth_product(a, b, n: int, pairs=None) -> AbstractField:
    """E(W)-side product for n >= 0 with constant braiding:

    (a_n b)(m) = sum_j C(n,j) (-1)^(n-j) [a(j) b(m+n-j) - sum_i f_i b_i(m+n-j) a_i(j)].
    """
    if n < 0:
        raise InvalidParameter("residue formula needs n >= 0")
    pairs = pairs or [(QSCALAR_ONE, a, b)]

    def action(m, key):
        out = LinComb()
        w = LinComb.basis(key)
        for j in range(n + 1):
            s = gbinom(n, j) * (-1) ** (n - j)
            t = a.apply(j, b.apply(m + n - j, w))
            for f, ai, bi in pairs:
                t = t - bi.apply(m + n - j, ai.apply(j, w)).scale(as_qscalar(f))
            out = out + t.scale(s)
        return out

    def bound(key):
        w = LinComb.basis(key)
        if a.kind == AT_ZERO:
            # first term vanishes once m + n - j >= B_b for j <= n, i.e. m >= B_b
            out = b.bound(key)
            for j in range(n + 1):
                for _, ai, bi in pairs:
                    v = ai.apply(j, w)
                    if v:
                        out = max(out, bi.bound_vec(v) - n + j)
            return out
        out = b.bound(key) - n
        for j in range(n + 1):
            for _, ai, bi in pairs:
                v = ai.apply(j, w)
                if v:
                    out = min(out, bi.bound_vec(v) - n + j)
        return out

    return AbstractField(f"{a.label}_({n}){b.label}", a.kind, action, bound)


def fields_agree(f: AbstractField, g: AbstractField, vectors, modes) -> dict | None:
    """None if f(m)w == g(m)w for all vectors and modes, else a counterexample."""
    for key in vectors:
        for m in modes:
            x, y = f.act(m, key), g.act(m, key)
            if x != y:
                return {"mode": m, "vector": repr(key), "lhs": _vec_text(x), "rhs": _vec_text(y)}
    return None


# ---------------------------------------------------------------------------
# bracket decompositions


@dataclass(frozen=True)
class DecompositionEntry:
    """Psi(x2) (1/j!) (d/dx2)^j x1^-1 delta(g(x2)/x1)."""

    argument: AffineMap
    order: int
    psi: AbstractField


def bracket_nth_products(decomposition: Sequence) -> dict:
    """a(x)_n b(x) = Psi_{1,n}(x) for n >= 0, read off the identity-argument entries.

    The first entry must carry the identity argument; (argument, order) pairs
    must be distinct and every other argument must differ from the identity.
    """
    entries = [e if isinstance(e, DecompositionEntry) else DecompositionEntry(*e)
               for e in decomposition]
    if not entries:
        return {}
    if not entries[0].argument.is_identity():
        raise MalformedDecomposition("first entry must have argument x2")
    seen = set()
    for e in entries:
        k = (e.argument, e.order)
        if k in seen:
            raise MalformedDecomposition("repeated (argument, order) pair")
        seen.add(k)
        if e.order < 0:
            raise MalformedDecomposition("negative derivative order")
    kind = entries[0].psi.kind
    ident = {e.order: e.psi for e in entries if e.argument.is_identity()}
    r = max(ident)
    out = {}
    for n in range(r + 1):
        out[n] = ident.get(n, zero_field(kind, f"Psi_1,{n}"))
    return out


def decomposition_certificate(decomposition: Sequence) -> LocalityCertificate:
    """prod over arguments g of (x1 - g(x2))^(max order + 1)."""
    xv = ("x1", "x2")
    orders: dict = {}
    for e in decomposition:
        e = e if isinstance(e, DecompositionEntry) else DecompositionEntry(*e)
        orders[e.argument] = max(orders.get(e.argument, -1), e.order)
    p = MultiPoly.const(xv, 1)
    for g, r in orders.items():
        lin = MultiPoly.var(xv, "x1") - MultiPoly.var(xv, "x2") * g.g0 - g.g1
        p = p * lin ** (r + 1)
    return LocalityCertificate(p)


# ---------------------------------------------------------------------------
# weak associativity and opposite Jacobi


def dong_order(r: int, s: int, t: int, n: int) -> int:
    """Locality order of (a, b_n c) from pairwise orders r = (a,b), s = (a,c), t = (b,c)."""
    return max(0, r + s + t - n - 1)


class LocalFamily:
    """Fields with commutative locality orders, closed under cached n-th products.

    ``base_order(a, b)`` gives a locality order for a pair of base fields;
    orders involving products follow Dong's bound.
    """

    def __init__(self, base_order):
        self.base_order = base_order
        self._products: dict = {}
        self._derived: dict = {}

    def order_with(self, x, y) -> int:
        if id(y) in self._derived:
            b, c, n = self._derived[id(y)]
            return dong_order(self.order_with(x, b), self.order_with(x, c),
                              self.order_with(b, c), n)
        if id(x) in self._derived:
            return self.order_with(y, x)
        return self.base_order(x, y)

    def product_with(self, a, b, n: int) -> AbstractField:
        k = (id(a), id(b), n)
        if k in self._products:
            return self._products[k][0]
        cert = LocalityCertificate.power(self.order_with(a, b))
        out = y_eo_product(a, b, cert, n)
        # keep a and b alive so their ids stay unique
        self._products[k] = (out, a, b)
        self._derived[id(out)] = (a, b, n)
        return out


def verify_weak_associativity(psi, phi, theta, family: LocalFamily, k: int, vectors,
                              window) -> CheckReport:
    """(x0+x2)^k Y(psi, x0+x2) Y(phi, x2) theta = (x0+x2)^k Y(Y(psi, x0) phi, x2) theta.

    Both sides are series in x0, x2 with field coefficients; window gives
    ranges for the exponents of x0, x2 and the field variable x.
    """
    (l0, h0), (l2, h2), (lx, hx) = window
    modes = [-M - 1 for M in range(lx, hx + 1)]
    checks = 0
    t_pt = truncation_bound(family, phi, theta)
    t_ps = truncation_bound(family, psi, phi)
    for A in range(l0, h0 + 1):
        for C in range(l2, h2 + 1):
            lhs_terms = []
            # LHS: (x0+x2)^(k-m-1) x2^(-n-1) psi_m(phi_n theta), expanded in
            # non-negative powers of x2: C(k-m-1, i) x0^(k-m-1-i) x2^i
            # so i = k-m-1-A >= 0 and n = i-C-1 < t_pt
            m_hi = k - 1 - A
            m_lo = k - 1 - A - C - t_pt
            for m in range(m_lo, m_hi + 1):
                i = k - m - 1 - A
                n = i - C - 1
                if n >= t_pt:
                    continue
                bc = gbinom(k - m - 1, i)
                if not bc:
                    continue
                inner = family.product_with(phi, theta, n)
                lhs_terms.append((bc, family.product_with(psi, inner, m)))
            rhs_terms = []
            # RHS: sum_i C(k, i) x0^(i-p-1) x2^(k-i-n-1) (psi_p phi)_n theta
            for i in range(0, k + 1):
                p = i - A - 1
                if p >= t_ps:
                    continue
                n = k - i - C - 1
                bc = gbinom(k, i)
                inner = family.product_with(psi, phi, p)
                rhs_terms.append((bc, family.product_with(inner, theta, n)))
            for key in vectors:
                for m in modes:
                    l = LinComb()
                    for c, f in lhs_terms:
                        l = l + f.act(m, key).scale(c)
                    r = LinComb()
                    for c, f in rhs_terms:
                        r = r + f.act(m, key).scale(c)
                    checks += 1
                    if l != r:
                        return CheckReport("weak-associativity", "failed", checks,
                                           {"cell": [A, C, -m - 1], "vector": repr(key),
                                            "lhs": _vec_text(l), "rhs": _vec_text(r)})
    return CheckReport("weak-associativity", "verified", checks)


def truncation_bound(family: LocalFamily, a, b) -> int:
    return family.order_with(a, b)


def verify_opposite_jacobi(u: AbstractField, v: AbstractField, cert: LocalityCertificate,
                           vectors, window, family: LocalFamily | None = None) -> CheckReport:
    """Three-term delta identity for a module at infinity, coefficient-wise in (x0, x1, x2).

      - x0^-1 d((x2-x1)/(-x0)) u(x1) v(x2)
      + x0^-1 d((x1-x2)/x0) sum_i i_{x,inf}(f_i)(-x0) v_i(x2) u_i(x1)
      = x2^-1 d((x1-x0)/x2) Y(Y(u, x0) v, x2)
    """
    if u.kind != AT_INFINITY:
        raise InvalidParameter("opposite Jacobi identity is for modules at infinity")
    (l0, h0), (l1, h1), (l2, h2) = window
    pairs = cert.resolved_pairs(u, v)
    kk = truncation_order(cert)
    prods = y_products(u, v, cert, range(-(h0 + 1) - (h1 - l1) - 20, kk)).products
    checks = 0

    def prod(p):
        if p >= kk:
            return None
        if p not in prods:
            prods.update(y_products(u, v, cert, [p]).products)
        return prods[p]

    for key in vectors:
        Bv = v.bound(key)
        for N in range(l0, h0 + 1):
            for A in range(l1, h1 + 1):
                for B in range(l2, h2 + 1):
                    w = LinComb.basis(key)
                    # term 1
                    n = -N - 1
                    t1 = LinComb()
                    sgn = -1 if n % 2 else 1
                    i_hi = n - B - 1 - Bv
                    if n >= 0:
                        i_hi = min(i_hi, n)
                    for i in range(0, i_hi + 1):
                        bc = gbinom(n, i)
                        if not bc:
                            continue
                        val = u.apply(i - A - 1, v.apply(n - B - i - 1, w))
                        if val:
                            t1 = t1 + val.scale(-sgn * bc * (-1) ** i)
                    # term 2
                    t2 = LinComb()
                    for f, ui, vi in pairs:
                        ceil = _univariate_ceiling(f)
                        lo_k = -200 if isinstance(f, RationalDistribution) else 0
                        phis = _univariate_expansion(f, Region.AT_INFINITY, max(lo_k, -200), ceil) \
                            if isinstance(f, RationalDistribution) else {0: as_qscalar(f)}
                        Bui = ui.bound(key)
                        for kx, phi in phis.items():
                            # i(f)(-x0): phi_k (-1)^k x0^k; the delta then sits at x0^(N-k)
                            nn = -(N - kx) - 1
                            j_hi = nn - A - 1 - Bui
                            if nn >= 0:
                                j_hi = min(j_hi, nn)
                            for j in range(0, j_hi + 1):
                                bc = gbinom(nn, j)
                                if not bc:
                                    continue
                                val = vi.apply(j - B - 1, ui.apply(nn - A - j - 1, w))
                                if val:
                                    t2 = t2 + val.scale(phi * (bc * (-1) ** j * (-1) ** (kx % 2)))
                    # right-hand side
                    rhs = LinComb()
                    for j in range(0, N + kk + 1):
                        p = j - N - 1
                        f = prod(p)
                        if f is None:
                            continue
                        bc = gbinom(A + j, j)
                        if not bc:
                            continue
                        val = f.act(-A - j - B - 2, key)
                        if val:
                            rhs = rhs + val.scale(bc * (-1) ** j)
                    checks += 1
                    diff = t1 + t2 - rhs
                    if diff:
                        return CheckReport("opposite-jacobi", "failed", checks,
                                           {"cell": [N, A, B], "vector": repr(key),
                                            "discrepancy": _vec_text(diff)})
    return CheckReport("opposite-jacobi", "verified", checks)
