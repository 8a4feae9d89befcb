"""Sparse linear combinations and exact rank computations."""

from __future__ import annotations

from typing import Callable, Hashable, Iterable, Mapping

from gmpy2 import mpq

from .scalars import QSCALAR_ONE, QScalar, as_qscalar, qscalar_eval
from .errors import PoleAtEvaluationPoint


class LinComb:
    """Finite formal sum of hashable basis keys with QScalar coefficients.

    Instances are treated as immutable; every operation returns a new value.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        d = {}
        if terms:
            for k, c in terms.items():
                c = as_qscalar(c)
                if c:
                    d[k] = c
        self.terms = d

    @classmethod
    def _wrap(cls, d: dict):
        out = object.__new__(cls)
        out.terms = d
        return out

    @classmethod
    def basis(cls, key, coeff=QSCALAR_ONE):
        c = as_qscalar(coeff)
        return cls._wrap({key: c} if c else {})

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def items(self):
        return self.terms.items()

    def keys(self):
        return self.terms.keys()

    def coeff(self, key) -> QScalar:
        return self.terms.get(key, QScalar())

    def __add__(self, other):
        if not isinstance(other, LinComb):
            return NotImplemented
        if not other.terms:
            return self
        d = dict(self.terms)
        for k, c in other.terms.items():
            v = d.get(k)
            if v is None:
                d[k] = c
            else:
                v = v + c
                if v:
                    d[k] = v
                else:
                    del d[k]
        return type(self)._wrap(d)

    def __neg__(self):
        return type(self)._wrap({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        s = as_qscalar(s)
        if not s:
            return type(self)._wrap({})
        if s == QSCALAR_ONE:
            return self
        return type(self)._wrap({k: c * s for k, c in self.terms.items()})

    def __mul__(self, s):
        if isinstance(s, LinComb):
            return NotImplemented
        return self.scale(s)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if isinstance(other, LinComb):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def map_linear(self, f: Callable[[Hashable], "LinComb"]):
        """Extend a basis-level map linearly."""
        acc: dict = {}
        for k, c in self.terms.items():
            img = f(k)
            for k2, c2 in img.terms.items():
                v = acc.get(k2)
                v = c2 * c if v is None else v + c2 * c
                if v:
                    acc[k2] = v
                else:
                    acc.pop(k2, None)
        return type(self)._wrap(acc)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.terms!r})"


def lin_sum(items: Iterable[LinComb], cls=LinComb) -> LinComb:
    acc: dict = {}
    for v in items:
        for k, c in v.terms.items():
            w = acc.get(k)
            w = c if w is None else w + c
            if w:
                acc[k] = w
            else:
                acc.pop(k, None)
    return cls._wrap(acc)


def rank_rational(rows: list[dict]) -> int:
    """Rank of a sparse matrix over Q by Gaussian elimination (rows: col -> mpq)."""
    pivots: dict = {}
    rank = 0
    for row in rows:
        r = {k: mpq(v) for k, v in row.items() if v}
        while r:
            col = min(r, key=_sort_key)
            if col in pivots:
                prow = pivots[col]
                f = r[col]
                for k, v in prow.items():
                    nv = r.get(k, 0) - f * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
            else:
                inv = 1 / r[col]
                pivots[col] = {k: v * inv for k, v in r.items()}
                rank += 1
                break
    return rank


def _sort_key(k):
    return repr(k)


def rank_symbolic(rows: list[dict]) -> int:
    """Rank over Q(q) by Gaussian elimination with QScalar pivots."""
    pivots: dict = {}
    rank = 0
    for row in rows:
        r = {k: as_qscalar(v) for k, v in row.items() if v}
        while r:
            col = min(r, key=_sort_key)
            if col in pivots:
                prow = pivots[col]
                f = r[col]
                for k, v in prow.items():
                    nv = r.get(k, QScalar()) - f * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
            else:
                inv = r[col].inverse()
                pivots[col] = {k: v * inv for k, v in r.items()}
                rank += 1
                break
    return rank


def specialize_rows(rows: list[dict], q0) -> list[dict]:
    return [{k: qscalar_eval(as_qscalar(v), q0) for k, v in row.items()} for row in rows]


def rank_over_qq(rows: list[dict], points=(3, -5, 7)) -> int:
    """Exact rank over Q(q).

    Specializing q can only lower the rank, so a specialization reaching the
    row count proves full row rank. Otherwise fall back to symbolic elimination.
    """
    n = len(rows)
    for q0 in points:
        try:
            r = rank_rational(specialize_rows(rows, q0))
        except PoleAtEvaluationPoint:
            continue
        if r == n:
            return n
    return rank_symbolic(rows)
