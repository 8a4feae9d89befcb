"""Sparse multivariate Laurent series with expansion-region tags.

A :class:`Series` stores exact coefficients on a box ``window`` of exponent
space.  Per-variable ``floor``/``ceil`` values record that every coefficient
inside the window vanishes below/above them; products use these to prove
that each output coefficient is a finite sum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from math import comb
from typing import Mapping, Sequence

from gmpy2 import mpq

from .errors import (DivergentProduct, DivergentSubstitution, DivisionByZero,
                     InvalidParameter, RegionMismatch)
from .scalars import (QSCALAR_ONE, QSCALAR_ZERO, QScalar, as_qscalar,
                      format_qscalar, parse_qscalar)

DEFAULT_RADIUS = 8
INF = float("inf")


class Region(str, Enum):
    AT_ZERO = "AtZero"
    AT_INFINITY = "AtInfinity"
    BILATERAL = "Bilateral"


@dataclass(frozen=True)
class VarSpec:
    id: str
    region: Region = Region.BILATERAL

    def __post_init__(self):
        object.__setattr__(self, "region", Region(self.region))


def gbinom(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) for any integer n and k >= 0."""
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k) if k <= n else 0
    # C(n, k) = (-1)^k C(k - n - 1, k)
    return (-1) ** k * comb(k - n - 1, k)


# ---------------------------------------------------------------------------
# polynomials in named variables

class MultiPoly:
    """Polynomial in named variables with QScalar coefficients."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Mapping | None = None):
        self.vars = tuple(vars)
        d = {}
        for e, c in (terms or {}).items():
            e = tuple(e)
            if len(e) != len(self.vars):
                raise InvalidParameter("exponent length does not match variables")
            if any(x < 0 for x in e):
                raise InvalidParameter("MultiPoly exponents must be non-negative")
            c = as_qscalar(c)
            if c:
                d[e] = d[e] + c if e in d else c
                if not d[e]:
                    del d[e]
        self.terms = d

    @classmethod
    def _wrap(cls, vars, terms):
        p = object.__new__(cls)
        p.vars, p.terms = tuple(vars), terms
        return p

    @classmethod
    def const(cls, vars, c) -> "MultiPoly":
        c = as_qscalar(c)
        return cls._wrap(vars, {(0,) * len(vars): c} if c else {})

    @classmethod
    def var(cls, vars, name, power=1) -> "MultiPoly":
        e = [0] * len(vars)
        e[list(vars).index(name)] = power
        return cls._wrap(vars, {tuple(e): QSCALAR_ONE})

    @classmethod
    def linear(cls, vars, coeffs: Mapping, const=0) -> "MultiPoly":
        """Affine polynomial sum c_v * v + const."""
        out = cls.const(vars, const)
        for v, c in coeffs.items():
            out = out + cls.var(vars, v) * as_qscalar(c)
        return out

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def aligned(self, vars: Sequence[str]) -> "MultiPoly":
        vars = tuple(vars)
        if vars == self.vars:
            return self
        idx = []
        for v in self.vars:
            if v not in vars:
                raise InvalidParameter(f"variable {v} missing from target")
            idx.append(vars.index(v))
        out = {}
        for e, c in self.terms.items():
            ne = [0] * len(vars)
            for i, x in zip(idx, e):
                ne[i] = x
            out[tuple(ne)] = c
        return MultiPoly._wrap(vars, out)

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.vars != self.vars:
                return other.aligned(self.vars)
            return other
        return MultiPoly.const(self.vars, other)

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        d = dict(self.terms)
        for e, c in other.terms.items():
            v = d[e] + c if e in d else c
            if v:
                d[e] = v
            else:
                d.pop(e, None)
        return MultiPoly._wrap(self.vars, d)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._wrap(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            s = as_qscalar(other)
            if not s:
                return MultiPoly._wrap(self.vars, {})
            return MultiPoly._wrap(self.vars, {e: c * s for e, c in self.terms.items()})
        other = self._coerce(other)
        d: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = d[e] + c1 * c2 if e in d else c1 * c2
                if v:
                    d[e] = v
                else:
                    d.pop(e, None)
        return MultiPoly._wrap(self.vars, d)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MultiPoly":
        out = MultiPoly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        allv = tuple(dict.fromkeys(self.vars + other.vars))
        return self.aligned(allv).terms == other.aligned(allv).terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def degree_in(self, v: str) -> int:
        i = self.vars.index(v)
        return max((e[i] for e in self.terms), default=-1)

    def low_degree_in(self, v: str) -> int:
        i = self.vars.index(v)
        return min((e[i] for e in self.terms), default=-1)

    def split(self, v: str) -> dict:
        """Return {degree in v: coefficient MultiPoly in the other variables}."""
        i = self.vars.index(v)
        rest = self.vars[:i] + self.vars[i + 1:]
        out: dict = {}
        for e, c in self.terms.items():
            out.setdefault(e[i], {})[e[:i] + e[i + 1:]] = c
        return {d: MultiPoly._wrap(rest, t) for d, t in out.items()}

    def constant_value(self) -> QScalar:
        if not self.terms:
            return QSCALAR_ZERO
        if len(self.terms) == 1:
            (e, c), = self.terms.items()
            if not any(e):
                return c
        raise InvalidParameter("polynomial is not constant")

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def substitute(self, v: str, replacement: "MultiPoly") -> "MultiPoly":
        """Replace variable v by a polynomial in the remaining variables."""
        rest = [x for x in self.vars if x != v]
        for x in replacement.vars:
            if x not in rest:
                rest.append(x)
        rep = replacement.aligned(rest)
        out = MultiPoly._wrap(tuple(rest), {})
        pows = {}
        for d, coeff in self.split(v).items():
            if d not in pows:
                pows[d] = rep ** d
            out = out + coeff.aligned(rest) * pows[d]
        return out

    def evaluate(self, values: Mapping) -> QScalar:
        acc = QSCALAR_ZERO
        for e, c in self.terms.items():
            t = c
            for name, x in zip(self.vars, e):
                if x:
                    t = t * as_qscalar(values[name]) ** x
            acc = acc + t
        return acc

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items(), reverse=True):
            mono = "*".join(f"{v}^{x}" if x != 1 else v for v, x in zip(self.vars, e) if x)
            parts.append(f"({c})" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# rational distributions

def _to_sympy(p: MultiPoly, syms: dict, qsym):
    import sympy
    expr = sympy.Integer(0)
    for e, c in p.terms.items():
        num = sum(sympy.Rational(int(a.numerator), int(a.denominator)) * qsym ** i
                  for i, a in enumerate(c.num.c) if a)
        den = sum(sympy.Rational(int(a.numerator), int(a.denominator)) * qsym ** i
                  for i, a in enumerate(c.den.c) if a)
        mono = sympy.Integer(1)
        for v, x in zip(p.vars, e):
            mono *= syms[v] ** x
        expr += (num / den) * mono
    return expr


def _from_sympy(expr, vars, syms, qsym) -> MultiPoly:
    import sympy
    gens = [syms[v] for v in vars] + [qsym]
    poly = sympy.Poly(sympy.expand(expr), *gens)
    terms: dict = {}
    for mon, coeff in poly.terms():
        e, qd = tuple(mon[:-1]), mon[-1]
        c = QScalar.laurent({qd: mpq(int(coeff.p), int(coeff.q))})
        terms[e] = terms[e] + c if e in terms else c
    return MultiPoly(vars, terms)


class RationalDistribution:
    """Quotient of two MultiPolys over the same variables, gcd-reduced."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None, reduce: bool = True):
        if den is None:
            den = MultiPoly.const(num.vars, 1)
        allv = tuple(dict.fromkeys(num.vars + den.vars))
        num, den = num.aligned(allv), den.aligned(allv)
        if den.is_zero():
            raise DivisionByZero("zero denominator in rational distribution")
        if reduce and not den.is_constant() and not num.is_zero():
            num, den = _cancel(num, den)
        self.num, self.den = num, den

    @property
    def vars(self):
        return self.num.vars

    def __mul__(self, other: "RationalDistribution") -> "RationalDistribution":
        return RationalDistribution(self.num * other.num, self.den * other.den)

    def __add__(self, other: "RationalDistribution") -> "RationalDistribution":
        return RationalDistribution(self.num * other.den + other.num * self.den,
                                    self.den * other.den)

    def equals(self, other: "RationalDistribution") -> bool:
        allv = tuple(dict.fromkeys(self.vars + other.vars))
        a = self.num.aligned(allv) * other.den.aligned(allv)
        b = other.num.aligned(allv) * self.den.aligned(allv)
        return a == b

    def substitute(self, v: str, replacement: MultiPoly) -> "RationalDistribution":
        return RationalDistribution(self.num.substitute(v, replacement),
                                    self.den.substitute(v, replacement), reduce=False)

    def __repr__(self):
        return f"({self.num!r}) / ({self.den!r})"


def parse_rational(text: str, vars: Sequence[str]) -> RationalDistribution:
    """Read a rational function of the given variables and q, e.g. ``(q+x1-x2)/(x1-x2)``."""
    import sympy
    syms = {v: sympy.Symbol(v) for v in vars}
    qsym = sympy.Symbol("q")
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals={**syms, "q": qsym})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise InvalidParameter(f"cannot parse {text!r}: {exc}") from None
    extra = expr.free_symbols - set(syms.values()) - {qsym}
    if extra:
        raise InvalidParameter(f"unknown symbols in {text!r}: {sorted(map(str, extra))}")
    num, den = sympy.fraction(sympy.together(expr))
    # clear negative powers of q into the denominator
    num, den = sympy.fraction(sympy.cancel(num / den))
    try:
        return RationalDistribution(_from_sympy(num, tuple(vars), syms, qsym),
                                    _from_sympy(den, tuple(vars), syms, qsym))
    except sympy.PolynomialError as exc:
        raise InvalidParameter(f"not a rational function: {text!r}") from exc


def _cancel(num: MultiPoly, den: MultiPoly):
    import sympy
    syms = {v: sympy.Symbol(f"v_{i}") for i, v in enumerate(num.vars)}
    qsym = sympy.Symbol("q_param")
    expr = sympy.cancel(_to_sympy(num, syms, qsym) / _to_sympy(den, syms, qsym))
    n, d = sympy.fraction(expr)
    N = _from_sympy(n, num.vars, syms, qsym)
    D = _from_sympy(d, num.vars, syms, qsym)
    # make the leading term of the denominator monic (lexicographic order)
    lead = D.terms[max(D.terms)]
    inv = lead.inverse()
    return N * inv, D * inv


# ---------------------------------------------------------------------------
# series

def _bound(x):
    return None if x is None else int(x)


class Series:
    """Exact coefficients of a formal Laurent series on a window."""

    __slots__ = ("vars", "terms", "window", "floor", "ceil")

    def __init__(self, vars: Sequence[VarSpec], terms: Mapping, window: Sequence,
                 floor: Sequence | None = None, ceil: Sequence | None = None):
        self.vars = tuple(vars)
        ids = [v.id for v in self.vars]
        if len(set(ids)) != len(ids):
            raise InvalidParameter("duplicate variable ids")
        self.window = tuple((int(lo), int(hi)) for lo, hi in window)
        if len(self.window) != len(self.vars):
            raise InvalidParameter("window length does not match variables")
        for lo, hi in self.window:
            if lo > hi:
                raise InvalidParameter("empty window interval")
        n = len(self.vars)
        self.floor = tuple(_bound(x) for x in (floor or (None,) * n))
        self.ceil = tuple(_bound(x) for x in (ceil or (None,) * n))
        d = {}
        for e, c in terms.items():
            e = tuple(e)
            if not c:
                continue
            if all(lo <= x <= hi for x, (lo, hi) in zip(e, self.window)):
                d[e] = c
        self.terms = d

    @classmethod
    def _wrap(cls, vars, terms, window, floor, ceil):
        s = object.__new__(cls)
        s.vars, s.terms, s.window, s.floor, s.ceil = vars, terms, window, floor, ceil
        return s

    @property
    def ids(self):
        return tuple(v.id for v in self.vars)

    def index(self, vid: str) -> int:
        return self.ids.index(vid)

    def coeff(self, exp) -> object:
        exp = tuple(exp)
        for x, (lo, hi) in zip(exp, self.window):
            if not lo <= x <= hi:
                raise InvalidParameter(f"exponent {exp} outside window")
        return self.terms.get(exp, QSCALAR_ZERO)

    def restrict(self, window: Sequence) -> "Series":
        window = tuple((int(a), int(b)) for a, b in window)
        for (a, b), (lo, hi) in zip(window, self.window):
            if a < lo or b > hi:
                raise InvalidParameter("restriction must lie inside the window")
        return Series(self.vars, self.terms, window, self.floor, self.ceil)

    def scale(self, s) -> "Series":
        return Series._wrap(self.vars, {e: c * s for e, c in self.terms.items() if c * s},
                            self.window, self.floor, self.ceil)

    def __neg__(self) -> "Series":
        return Series._wrap(self.vars, {e: -c for e, c in self.terms.items()},
                            self.window, self.floor, self.ceil)

    def __add__(self, other: "Series") -> "Series":
        if self.ids != other.ids:
            raise InvalidParameter("series variables differ")
        for a, b in zip(self.vars, other.vars):
            if a.region != b.region:
                raise RegionMismatch(f"region mismatch in {a.id}")
        window = tuple((max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.window, other.window))
        d = {}
        for e in set(self.terms) | set(other.terms):
            if all(lo <= x <= hi for x, (lo, hi) in zip(e, window)):
                v = self.terms.get(e)
                w = other.terms.get(e)
                s = v if w is None else (w if v is None else v + w)
                if s:
                    d[e] = s
        floor = tuple(None if a is None or b is None else min(a, b) for a, b in zip(self.floor, other.floor))
        ceil = tuple(None if a is None or b is None else max(a, b) for a, b in zip(self.ceil, other.ceil))
        return Series._wrap(self.vars, d, window, floor, ceil)

    def __sub__(self, other: "Series") -> "Series":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.terms

    def same_window_equal(self, other: "Series") -> bool:
        return self.ids == other.ids and self.window == other.window and self.terms == other.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, Series):
            return NotImplemented
        return (self.vars == other.vars and self.window == other.window
                and self.terms == other.terms and self.floor == other.floor
                and self.ceil == other.ceil)

    def agrees_on(self, other: "Series", window: Sequence | None = None) -> bool:
        """Coefficient equality on the intersection of windows (or a given box)."""
        if self.ids != other.ids:
            return False
        if window is None:
            window = [(max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(self.window, other.window)]
        for e in set(self.terms) | set(other.terms):
            if all(lo <= x <= hi for x, (lo, hi) in zip(e, window)):
                if self.terms.get(e, QSCALAR_ZERO) != other.terms.get(e, QSCALAR_ZERO):
                    return False
        return True

    def __repr__(self):
        return f"Series(vars={self.ids}, terms={len(self.terms)}, window={self.window})"


def series_from_poly(p: MultiPoly, regions: Mapping[str, Region] | None = None,
                     window: Sequence | None = None) -> Series:
    """A polynomial as a finite Series (floor and ceiling recorded)."""
    regions = regions or {}
    vars = tuple(VarSpec(v, regions.get(v, Region.BILATERAL)) for v in p.vars)
    n = len(p.vars)
    if p.terms:
        floor = [min(e[i] for e in p.terms) for i in range(n)]
        ceil = [max(e[i] for e in p.terms) for i in range(n)]
    else:
        floor, ceil = [0] * n, [0] * n
    if window is None:
        window = list(zip(floor, ceil))
    return Series(vars, p.terms, window, floor, ceil)


def monomial_series(vars: Sequence[VarSpec], exps: Mapping, coeff, window) -> Series:
    e = tuple(exps.get(v.id, 0) for v in vars)
    return Series(vars, {e: as_qscalar(coeff)}, window, e, e)


# ---------------------------------------------------------------------------
# iota expansion

def iota_expand(f: RationalDistribution, order: Sequence[VarSpec], window: Sequence) -> Series:
    """Expand f in the iterated Laurent field given by ``order``.

    ``order`` lists variables from innermost to outermost: the last entry is
    the outermost series variable (as in C((x1^-1))((x2^-1)) for
    ``[x1@inf, x2@inf]``).  Coefficients are exact on ``window``.
    """
    order = tuple(order)
    ids = [v.id for v in order]
    for v in f.vars:
        if v not in ids:
            raise InvalidParameter(f"variable {v} missing from expansion order")
    for v in order:
        if v.region == Region.BILATERAL:
            raise RegionMismatch(f"no expansion direction for bilateral {v.id}")
    if f.den.is_zero():
        raise DivisionByZero("zero denominator")
    N = f.num.aligned(ids)
    D = f.den.aligned(ids)
    box = [tuple(w) for w in window]
    terms, floor, ceil = _expand(N, D, order, box)
    return Series(order, terms, box, floor, ceil)


def _expand(N: MultiPoly, D: MultiPoly, order, box):
    if not order:
        return ({(): N.constant_value() / D.constant_value()} if N.terms else {}), [], []
    if N.is_zero():
        # the zero series: any bound inside the window is a valid certificate
        return {}, [lo for lo, _ in box], [lo for lo, _ in box]
    v = order[-1]
    inner = order[:-1]
    lo, hi = box[-1]
    Dd = D.split(v.id)
    Nd = N.split(v.id)
    inner_ids = tuple(x.id for x in inner)
    at_zero = v.region == Region.AT_ZERO
    if at_zero:
        s = min(Dd)
        Dl = {d - s: c for d, c in Dd.items()}
    else:
        s = max(Dd)
        Dl = {s - d: c for d, c in Dd.items()}
    finite = len(Dl) == 1
    D0 = Dl[0]
    a_min, a_max = min(Nd), max(Nd)
    if at_zero:
        floor_v = a_min - s
        ceil_v = a_max - s if finite else None
        e_range = range(max(lo, floor_v), hi + 1)
    else:
        ceil_v = a_max - s
        floor_v = a_min - s if finite else None
        e_range = range(lo, min(hi, ceil_v) + 1)

    const_D0 = D0.is_constant()
    # slices are power series in the inner variables when they all expand at
    # zero and D0 has a nonzero constant term
    zero_safe = (all(x.region == Region.AT_ZERO for x in inner)
                 and D0.evaluate({x: 0 for x in inner_ids}) != 0)
    P = [MultiPoly.const(inner_ids, 1)]
    D0pows = [MultiPoly.const(inner_ids, 1)]

    def get_P(j):
        while len(P) <= j:
            jj = len(P)
            acc = MultiPoly._wrap(inner_ids, {})
            for l in range(1, jj + 1):
                if l in Dl:
                    acc = acc - Dl[l] * P[jj - l] * get_pow(l - 1)
            P.append(acc)
        return P[j]

    def get_pow(k):
        while len(D0pows) <= k:
            D0pows.append(D0pows[-1] * D0)
        return D0pows[k]

    terms: dict = {}
    n_inner = len(inner)
    in_floor = [INF] * n_inner
    in_ceil = [-INF] * n_inner
    unknown_floor = [False] * n_inner
    unknown_ceil = [False] * n_inner
    for e in e_range:
        if at_zero:
            pairs = [(a, e - a + s) for a in Nd if e - a + s >= 0]
        else:
            pairs = [(a, a - s - e) for a in Nd if a - s - e >= 0]
        if not pairs:
            continue
        J = max(j for _, j in pairs)
        num = MultiPoly._wrap(inner_ids, {})
        for a, j in pairs:
            pj = get_P(j)
            if pj.terms:
                num = num + Nd[a] * pj * get_pow(J - j)
        if num.is_zero():
            continue
        if const_D0:
            c0 = D0.constant_value() ** (J + 1)
            den = MultiPoly.const(inner_ids, c0)
        else:
            den = get_pow(J + 1)
        sub, fl, cl = _expand(num, den, inner, box[:-1])
        for k in range(n_inner):
            if fl[k] is None:
                unknown_floor[k] = True
            else:
                in_floor[k] = min(in_floor[k], fl[k])
            if cl[k] is None:
                unknown_ceil[k] = True
            else:
                in_ceil[k] = max(in_ceil[k], cl[k])
        for ie, c in sub.items():
            terms[ie + (e,)] = c
    if at_zero:
        truncated = (not finite) or hi < ceil_v
    else:
        truncated = (not finite) or lo > floor_v
    if truncated:
        # only the slices inside the box were seen; polynomial slices still
        # give a global floor of 0
        floors = [0 if const_D0 or zero_safe else None] * n_inner
        ceils = [None] * n_inner
    else:
        floors = [None if unknown_floor[k] else (0 if in_floor[k] == INF else int(in_floor[k]))
                  for k in range(n_inner)]
        ceils = [None if unknown_ceil[k] else (0 if in_ceil[k] == -INF else int(in_ceil[k]))
                 for k in range(n_inner)]
    return terms, floors + [floor_v], ceils + [ceil_v]


# ---------------------------------------------------------------------------
# products

def _merge_vars(a: Series, b: Series):
    out = list(a.vars)
    ids = [v.id for v in out]
    for v in b.vars:
        if v.id in ids:
            i = ids.index(v.id)
            r1, r2 = out[i].region, v.region
            if r1 != r2:
                if r1 == Region.BILATERAL:
                    out[i] = v
                elif r2 != Region.BILATERAL:
                    raise RegionMismatch(f"variable {v.id}: {r1.value} vs {r2.value}")
        else:
            out.append(v)
            ids.append(v.id)
    return tuple(out)


def _var_data(s: Series, vid: str):
    if vid in s.ids:
        i = s.index(vid)
        lo, hi = s.window[i]
        return i, lo, hi, s.floor[i], s.ceil[i]
    return None, 0, 0, 0, 0


def _valid_interval(A, B):
    """Exactness interval for one variable of a product, or None.

    Returns (lo, hi, open_lo, open_hi); an open side means every coefficient
    beyond it is certified zero, so the interval extends without bound.
    """
    _, la, ha, fa, ca = A
    _, lb, hb, fb, cb = B
    cov_fa = fa is not None and la <= fa
    cov_fb = fb is not None and lb <= fb
    cov_ca = ca is not None and ha >= ca
    cov_cb = cb is not None and hb >= cb
    options = []
    if cov_fb and cov_cb:
        options.append((la + cb, ha + fb, cov_fa, cov_ca))
    if cov_fa and cov_ca:
        options.append((lb + ca, hb + fa, cov_fb, cov_cb))
    if cov_fa and cov_fb:
        options.append((fa + fb, min(ha + fb, hb + fa), True, cov_ca and cov_cb))
    if cov_ca and cov_cb:
        options.append((max(la + cb, lb + ca), ca + cb, cov_fa and cov_fb, True))
    options = [o for o in options if o[0] <= o[1] or (o[2] and o[3])]
    if not options:
        return None
    return max(options, key=lambda o: (o[2] + o[3], o[1] - o[0]))


def series_mul(a: Series, b: Series, window: Sequence | Mapping | None = None) -> Series:
    """Exact product on the largest window where every coefficient is a finite sum."""
    vars = _merge_vars(a, b)
    ids = [v.id for v in vars]
    if isinstance(window, Mapping):
        req = [window.get(v) for v in ids]
    elif window is None:
        req = [None] * len(ids)
    else:
        req = list(window)
    box, floor, ceil = [], [], []
    for k, vid in enumerate(ids):
        A, B = _var_data(a, vid), _var_data(b, vid)
        iv = _valid_interval(A, B)
        if iv is None:
            raise DivergentProduct(f"cannot certify finiteness in variable {vid}")
        lo, hi, open_lo, open_hi = iv
        if req[k] is not None:
            lo = req[k][0] if open_lo else max(lo, req[k][0])
            hi = req[k][1] if open_hi else min(hi, req[k][1])
        if lo > hi:
            raise DivergentProduct(f"requested window in {vid} is not computable")
        box.append((lo, hi))
        fa, fb, ca, cb = A[3], B[3], A[4], B[4]
        floor.append(None if fa is None or fb is None else fa + fb)
        ceil.append(None if ca is None or cb is None else ca + cb)
    ia = [ids.index(v) for v in a.ids]
    ib = [ids.index(v) for v in b.ids]
    n = len(ids)
    lo_hi = box
    d: dict = {}
    # index b terms for pruning
    bt = list(b.terms.items())
    for ea, ca_ in a.terms.items():
        base = [0] * n
        for i, x in zip(ia, ea):
            base[i] = x
        for eb, cb_ in bt:
            e = list(base)
            for i, x in zip(ib, eb):
                e[i] += x
            ok = True
            for x, (lo, hi) in zip(e, lo_hi):
                if x < lo or x > hi:
                    ok = False
                    break
            if not ok:
                continue
            t = ca_ * cb_
            key = tuple(e)
            if key in d:
                v = d[key] + t
                if v:
                    d[key] = v
                else:
                    del d[key]
            elif t:
                d[key] = t
    return Series(vars, d, box, floor, ceil)


# ---------------------------------------------------------------------------
# derivative, residue, substitution

def derivative(a: Series, var: str, order: int = 1) -> Series:
    i = a.index(var)
    out = a
    for _ in range(order):
        d = {}
        for e, c in out.terms.items():
            if e[i]:
                ne = e[:i] + (e[i] - 1,) + e[i + 1:]
                d[ne] = c * e[i]
        lo, hi = out.window[i]
        window = out.window[:i] + ((lo - 1, hi - 1),) + out.window[i + 1:]
        fl = out.floor[i]
        cl = out.ceil[i]
        floor = out.floor[:i] + ((None if fl is None else fl - 1),) + out.floor[i + 1:]
        ceil = out.ceil[:i] + ((None if cl is None else cl - 1),) + out.ceil[i + 1:]
        out = Series(out.vars, d, window, floor, ceil)
    return out


def residue(a: Series, var: str) -> Series:
    """Coefficient of var^-1 as a Series in the remaining variables."""
    i = a.index(var)
    lo, hi = a.window[i]
    fl, cl = a.floor[i], a.ceil[i]
    known_zero = (fl is not None and fl > -1) or (cl is not None and cl < -1)
    if not (lo <= -1 <= hi) and not known_zero:
        raise InvalidParameter(f"residue in {var} lies outside the window")
    d = {}
    for e, c in a.terms.items():
        if e[i] == -1:
            d[e[:i] + e[i + 1:]] = c
    drop = lambda t: t[:i] + t[i + 1:]
    return Series(drop(a.vars), d, drop(a.window), drop(a.floor), drop(a.ceil))


def substitute_shift(a: Series, from_var: str, to_expr: tuple, window: Mapping | None = None,
                     shift_region: Region = Region.AT_ZERO) -> Series:
    """Replace from_var by base_var + shift_var (binomial expansion in the shift).

    The output coefficient of base^r shift^j is sum over s + t = r + j of
    C(s, j) A[s, t].  ``window`` may fix output intervals for base/shift.
    """
    base, shift = to_expr
    if shift in a.ids:
        raise InvalidParameter("shift variable already present")
    i_s = a.index(from_var)
    has_base = base in a.ids
    i_t = a.index(base) if has_base else None
    lo_s, hi_s = a.window[i_s]
    f_s, c_s = a.floor[i_s], a.ceil[i_s]
    if has_base:
        lo_t, hi_t = a.window[i_t]
        f_t, c_t = a.floor[i_t], a.ceil[i_t]
        base_spec = a.vars[i_t]
    else:
        lo_t = hi_t = f_t = c_t = 0
        base_spec = VarSpec(base, a.vars[i_s].region)
    # effective ranges where A may be nonzero
    s_min = f_s if f_s is not None else -INF
    s_max = c_s if c_s is not None else INF
    t_min = f_t if f_t is not None else -INF
    t_max = c_t if c_t is not None else INF
    # known ranges
    ks = (-INF if (f_s is not None and lo_s <= f_s) else lo_s,
          INF if (c_s is not None and hi_s >= c_s) else hi_s)
    kt = (-INF if (f_t is not None and lo_t <= f_t) else lo_t,
          INF if (c_t is not None and hi_t >= c_t) else hi_t)

    def s_range(N):
        lo = max(s_min, N - t_max)
        hi = min(s_max, N - t_min)
        return lo, hi

    def valid(N):
        lo, hi = s_range(N)
        if lo > hi:
            return True
        if lo == -INF or hi == INF:
            return False
        return ks[0] <= lo and hi <= ks[1] and kt[0] <= N - hi and N - lo <= kt[1]

    window = dict(window or {})
    if shift in window:
        j_lo, j_hi = window[shift]
    else:
        j_lo = 0
        if f_s is not None and f_s >= 0 and c_s is not None:
            j_hi = c_s
        else:
            j_hi = DEFAULT_RADIUS
    if base in window:
        r_lo, r_hi = window[base]
        for N in range(r_lo + j_lo, r_hi + j_hi + 1):
            if not valid(N):
                lo, hi = s_range(N)
                if lo == -INF or hi == INF:
                    raise DivergentSubstitution("infinitely many terms contribute")
                raise DivergentSubstitution("window of the input is too small for the request")
    else:
        cand = range(int(lo_s + lo_t) - 2, int(hi_s + hi_t) + 3)
        good = [N for N in cand if valid(N)]
        if not good:
            lo, hi = s_range(cand[0])
            if lo == -INF or hi == INF:
                raise DivergentSubstitution("infinitely many terms contribute")
            raise DivergentSubstitution("no computable output window")
        # largest contiguous run
        runs, cur = [], [good[0]]
        for N in good[1:]:
            if N == cur[-1] + 1:
                cur.append(N)
            else:
                runs.append(cur)
                cur = [N]
        runs.append(cur)
        run = max(runs, key=len)
        r_lo, r_hi = run[0] - j_lo, run[-1] - j_hi
        if r_lo > r_hi:
            raise DivergentSubstitution("no computable output window")
    other = [k for k in range(len(a.vars)) if k != i_s and k != i_t]
    out_vars = tuple(a.vars[k] for k in other) + (base_spec, VarSpec(shift, shift_region))
    d: dict = {}
    for e, c in a.terms.items():
        s = e[i_s]
        t = e[i_t] if has_base else 0
        rest = tuple(e[k] for k in other)
        for j in range(j_lo, j_hi + 1):
            r = s + t - j
            if not r_lo <= r <= r_hi:
                continue
            b = gbinom(s, j)
            if not b:
                continue
            key = rest + (r, j)
            v = d[key] + c * b if key in d else c * b
            if v:
                d[key] = v
            else:
                d.pop(key, None)
    out_window = tuple(a.window[k] for k in other) + ((r_lo, r_hi), (j_lo, j_hi))
    fl = tuple(a.floor[k] for k in other)
    cl = tuple(a.ceil[k] for k in other)
    return Series(out_vars, d, out_window, fl + (None, 0), cl + (None, None))


def set_variable(a: Series, var: str, value_var: str) -> Series:
    """Restriction a|_{var = value_var} (identify two variables)."""
    i = a.index(var)
    j = a.index(value_var)
    d: dict = {}
    for e, c in a.terms.items():
        ne = list(e)
        ne[j] += ne[i]
        del ne[i]
        key = tuple(ne)
        v = d[key] + c if key in d else c
        if v:
            d[key] = v
        else:
            d.pop(key, None)
    keep = [k for k in range(len(a.vars)) if k != i]
    # exactness needs finitely many contributions; require var to be finite
    if a.floor[i] is None or a.ceil[i] is None:
        raise DivergentSubstitution("restriction needs finite support in the eliminated variable")
    lo_i, hi_i = a.window[i]
    if lo_i > a.floor[i] or hi_i < a.ceil[i]:
        raise DivergentSubstitution("window does not cover the support")
    lo_j, hi_j = a.window[j]
    win = []
    for k in keep:
        if k == j:
            win.append((lo_j + a.ceil[i], hi_j + a.floor[i]))
        else:
            win.append(a.window[k])
    if win[keep.index(j)][0] > win[keep.index(j)][1]:
        raise DivergentSubstitution("empty restriction window")
    return Series(tuple(a.vars[k] for k in keep), d, win,
                  tuple(a.floor[k] for k in keep), tuple(a.ceil[k] for k in keep))


def evaluate_at_zero(a: Series, var: str) -> Series:
    """Set an AtZero variable to 0 (coefficient of var^0)."""
    i = a.index(var)
    if a.floor[i] is None or a.floor[i] < 0:
        raise DivergentSubstitution("evaluation at 0 needs non-negative powers")
    d = {e[:i] + e[i + 1:]: c for e, c in a.terms.items() if e[i] == 0}
    drop = lambda t: t[:i] + t[i + 1:]
    return Series(drop(a.vars), d, drop(a.window), drop(a.floor), drop(a.ceil))


# ---------------------------------------------------------------------------
# delta distributions

@dataclass(frozen=True)
class AffineMap:
    """g(x) = g0 * x + g1 with g0 nonzero."""

    g0: QScalar = QSCALAR_ONE
    g1: QScalar = QSCALAR_ZERO

    def __post_init__(self):
        object.__setattr__(self, "g0", as_qscalar(self.g0))
        object.__setattr__(self, "g1", as_qscalar(self.g1))
        if not self.g0:
            raise InvalidParameter("affine map needs nonzero linear coefficient")

    @classmethod
    def shift(cls, c) -> "AffineMap":
        return cls(QSCALAR_ONE, as_qscalar(c))

    def compose(self, other: "AffineMap") -> "AffineMap":
        """(self o other)(x) = self(other(x))."""
        return AffineMap(self.g0 * other.g0, self.g0 * other.g1 + self.g1)

    def inverse(self) -> "AffineMap":
        inv = self.g0.inverse()
        return AffineMap(inv, -(self.g1 * inv))

    def is_identity(self) -> bool:
        return self.g0 == QSCALAR_ONE and not self.g1

    def __call__(self, x):
        return self.g0 * x + self.g1

    def __str__(self):
        return f"{self.g0}*x + {self.g1}"


@dataclass(frozen=True)
class DeltaTerm:
    """coefficient * (d/d target)^order [source^-1 delta(g(target)/source)]."""

    source_var: str
    target_var: str
    argument: AffineMap
    derivative_order: int
    coefficient: object = QSCALAR_ONE

    def __post_init__(self):
        if self.derivative_order < 0:
            raise InvalidParameter("derivative order must be non-negative")


def delta_series(argument: AffineMap, order: int, source: str, target: str,
                 window: Sequence) -> Series:
    """Materialize (d/dtarget)^order source^-1 delta(g(target)/source) on a window.

    ``window`` is [(lo, hi) for source, (lo, hi) for target].  The binomial
    expansion of g(target)^n is in non-negative powers of g1.
    """
    (l1, h1), (l2, h2) = window
    g0, g1 = argument.g0, argument.g1
    d: dict = {}
    for e1 in range(l1, h1 + 1):
        n = -e1 - 1
        for r in range(l2, h2 + 1):
            rr = r + order  # exponent before differentiation
            fall = 1
            for k in range(order):
                fall *= rr - k
            if not fall:
                continue
            i = n - rr
            if i < 0:
                continue
            if not g1 and i:
                continue
            b = gbinom(n, i)
            if not b:
                continue
            c = g0 ** rr * (g1 ** i if i else QSCALAR_ONE) * (b * fall)
            if c:
                d[(e1, r)] = c
    vars = (VarSpec(source, Region.BILATERAL), VarSpec(target, Region.BILATERAL))
    return Series(vars, d, window)


def delta_materialize(d: DeltaTerm, window: Sequence) -> Series:
    base = delta_series(d.argument, d.derivative_order, d.source_var, d.target_var, window)
    if isinstance(d.coefficient, Series):
        return series_mul(base, d.coefficient)
    return base.scale(d.coefficient)


def _substitute_affine(f: Series, source: str, target: str, g: AffineMap,
                       target_window: tuple) -> Series:
    """Return f with source replaced by g(target)."""
    i_s = f.index(source)
    if f.floor[i_s] is None or f.ceil[i_s] is None:
        raise DivergentSubstitution("source dependence must be finite")
    lo_s, hi_s = f.window[i_s]
    if lo_s > f.floor[i_s] or hi_s < f.ceil[i_s]:
        raise DivergentSubstitution("window does not cover the source support")
    has_t = target in f.ids
    i_t = f.index(target) if has_t else None
    if has_t and (f.floor[i_t] is None or f.ceil[i_t] is None):
        raise DivergentSubstitution("target dependence must be finite")
    other = [k for k in range(len(f.vars)) if k != i_s and k != i_t]
    lo, hi = target_window
    d: dict = {}
    g0, g1 = g.g0, g.g1
    for e, c in f.terms.items():
        s = e[i_s]
        t = e[i_t] if has_t else 0
        rest = tuple(e[k] for k in other)
        if not g1:
            ks = [0]
        elif s >= 0:
            ks = range(0, s + 1)
        else:
            ks = range(0, max(0, s + t - lo) + 1)
        for k in ks:
            r = s - k + t
            if not lo <= r <= hi:
                continue
            b = gbinom(s, k)
            if not b:
                continue
            cc = c * (g0 ** (s - k)) * (g1 ** k if k else QSCALAR_ONE) * b
            key = rest + (r,)
            v = d[key] + cc if key in d else cc
            if v:
                d[key] = v
            else:
                d.pop(key, None)
    tvar = f.vars[i_t] if has_t else VarSpec(target, Region.BILATERAL)
    vars = tuple(f.vars[k] for k in other) + (tvar,)
    win = tuple(f.window[k] for k in other) + ((lo, hi),)
    fl = tuple(f.floor[k] for k in other)
    cl = tuple(f.ceil[k] for k in other)
    finite = (not g1) or f.floor[i_s] >= 0
    if finite:
        tf = (f.floor[i_s] if not g1 else 0) + (f.floor[i_t] if has_t else 0)
        tc = f.ceil[i_s] + (f.ceil[i_t] if has_t else 0)
        return Series(vars, d, win, fl + (tf,), cl + (tc,))
    return Series(vars, d, win, fl + (None,), cl + (None,))


def delta_apply(d: DeltaTerm, a: Series, target_window: tuple = (-DEFAULT_RADIUS, DEFAULT_RADIUS)) -> list:
    """Rewrite a(source) * delta-term into delta-terms free of the source variable.

    Uses a(x1) d^j delta(g(x2)/x1) = sum_i C(j,i) g0^i a^{(i)}(g(x2)) d^{j-i} delta.
    """
    out = []
    j = d.derivative_order
    g = d.argument
    for i in range(j + 1):
        fi = derivative(a, d.source_var, i) if i else a
        sub = _substitute_affine(fi, d.source_var, d.target_var, g, target_window)
        factor = g.g0 ** i * comb(j, i)
        sub = sub.scale(factor)
        coeff = d.coefficient
        if isinstance(coeff, Series):
            new = series_mul(coeff, sub)
        else:
            new = sub.scale(coeff)
        out.append(DeltaTerm(d.source_var, d.target_var, g, j - i, new))
    return out


# ---------------------------------------------------------------------------
# serialization

def series_to_json(s: Series) -> str:
    obj = {
        "vars": [{"id": v.id, "region": v.region.value} for v in s.vars],
        "terms": [{"exp": list(e), "coeff": format_qscalar(c)} for e, c in sorted(s.terms.items())],
        "window": {v.id: list(w) for v, w in zip(s.vars, s.window)},
        "bounds": {v.id: [f, c] for v, f, c in zip(s.vars, s.floor, s.ceil)},
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def series_from_json(text: str) -> Series:
    obj = json.loads(text)
    vars = tuple(VarSpec(v["id"], Region(v["region"])) for v in obj["vars"])
    window = [tuple(obj["window"][v.id]) for v in vars]
    bounds = obj.get("bounds", {})
    floor = [bounds.get(v.id, [None, None])[0] for v in vars]
    ceil = [bounds.get(v.id, [None, None])[1] for v in vars]
    terms = {tuple(t["exp"]): parse_qscalar(t["coeff"]) for t in obj["terms"]}
    return Series(vars, terms, window, floor, ceil)
