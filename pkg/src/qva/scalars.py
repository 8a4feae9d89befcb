"""Exact scalars: rationals, polynomials in q and the field Q(q).

Rationals are gmpy2 ``mpq`` values. ``QPolynomial`` stores a dense
coefficient tuple (lowest degree first, no trailing zeros) and
``QScalar`` is a reduced fraction of two such polynomials whose
denominator is monic.
"""

from __future__ import annotations

import re
from functools import reduce
from math import lcm
from typing import Iterable, Union

from gmpy2 import mpq, mpz

from .errors import DivisionByZero, InvalidParameter, PoleAtEvaluationPoint

Rational = type(mpq(0))
ZERO = mpq(0)
ONE = mpq(1)

RationalLike = Union[int, "Rational", str]


def rational(x) -> Rational:
    """Coerce ints, strings like ``-3/4`` and mpq values to mpq."""
    if isinstance(x, Rational):
        return x
    if isinstance(x, str):
        return mpq(x.strip())
    return mpq(x)


def _strip(coeffs: list) -> tuple:
    n = len(coeffs)
    while n and not coeffs[n - 1]:
        n -= 1
    return tuple(coeffs[:n])


class QPolynomial:
    """Univariate polynomial over Q in the formal parameter q."""

    __slots__ = ("c", "_hash")

    ZERO_DEGREE = -1  # sentinel degree of the zero polynomial

    def __init__(self, coeffs: Iterable = ()):
        self.c = _strip([rational(a) for a in coeffs])
        self._hash = None

    @classmethod
    def _raw(cls, c: tuple) -> "QPolynomial":
        p = object.__new__(cls)
        p.c = c
        p._hash = None
        return p

    @classmethod
    def from_map(cls, terms: dict) -> "QPolynomial":
        """Build from a degree -> coefficient map."""
        if not terms:
            return cls._raw(())
        if min(terms) < 0:
            raise InvalidParameter("negative degree in QPolynomial")
        out = [ZERO] * (max(terms) + 1)
        for d, a in terms.items():
            out[d] += rational(a)
        return cls._raw(_strip(out))

    @classmethod
    def monomial(cls, k: int, coeff=1) -> "QPolynomial":
        coeff = rational(coeff)
        if not coeff:
            return cls._raw(())
        return cls._raw((ZERO,) * k + (coeff,))

    @classmethod
    def constant(cls, a) -> "QPolynomial":
        return cls.monomial(0, a)

    # structure
    @property
    def degree(self) -> int:
        return len(self.c) - 1

    @property
    def coefficients(self) -> dict:
        return {i: a for i, a in enumerate(self.c) if a}

    def is_zero(self) -> bool:
        return not self.c

    def __bool__(self) -> bool:
        return bool(self.c)

    def lead(self) -> Rational:
        return self.c[-1] if self.c else ZERO

    def low_degree(self) -> int:
        for i, a in enumerate(self.c):
            if a:
                return i
        return self.ZERO_DEGREE

    def __eq__(self, other) -> bool:
        if isinstance(other, QPolynomial):
            return self.c == other.c
        if isinstance(other, (int, Rational)):
            return self.c == _strip([rational(other)])
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.c)
        return self._hash

    # arithmetic
    def __add__(self, other: "QPolynomial") -> "QPolynomial":
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] += x
        return QPolynomial._raw(_strip(out))

    def __neg__(self) -> "QPolynomial":
        return QPolynomial._raw(tuple(-x for x in self.c))

    def __sub__(self, other: "QPolynomial") -> "QPolynomial":
        return self + (-other)

    def __mul__(self, other) -> "QPolynomial":
        if not isinstance(other, QPolynomial):
            s = rational(other)
            if not s:
                return QPolynomial._raw(())
            return QPolynomial._raw(tuple(x * s for x in self.c))
        a, b = self.c, other.c
        if not a or not b:
            return QPolynomial._raw(())
        out = [ZERO] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return QPolynomial._raw(_strip(out))

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "QPolynomial":
        out = QPolynomial.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def shift_degree(self, k: int) -> "QPolynomial":
        """Multiply by q**k (k may be negative when the low terms vanish)."""
        if not self.c or k == 0:
            return self
        if k > 0:
            return QPolynomial._raw((ZERO,) * k + self.c)
        if self.low_degree() < -k:
            raise InvalidParameter("shift would create negative degrees")
        return QPolynomial._raw(self.c[-k:])

    def divmod(self, other: "QPolynomial") -> tuple:
        if not other.c:
            raise DivisionByZero("polynomial division by zero")
        r = list(self.c)
        db = len(other.c) - 1
        lb = other.c[-1]
        if len(r) - 1 < db:
            return QPolynomial._raw(()), self
        quo = [ZERO] * (len(r) - db)
        for i in range(len(r) - 1, db - 1, -1):
            coef = r[i]
            if not coef:
                continue
            t = coef / lb
            quo[i - db] = t
            for j, y in enumerate(other.c):
                r[i - db + j] -= t * y
        return QPolynomial._raw(_strip(quo)), QPolynomial._raw(_strip(r[:db]))

    def monic(self) -> "QPolynomial":
        if not self.c:
            return self
        lc = self.c[-1]
        if lc == 1:
            return self
        return QPolynomial._raw(tuple(x / lc for x in self.c))

    def gcd(self, other: "QPolynomial") -> "QPolynomial":
        """Monic gcd by the Euclidean algorithm."""
        a, b = self, other
        while b.c:
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def derivative(self) -> "QPolynomial":
        return QPolynomial._raw(_strip([i * x for i, x in enumerate(self.c)][1:]))

    def taylor_shift(self, a) -> "QPolynomial":
        """Return p(q + a)."""
        a = rational(a)
        out = [ZERO] * len(self.c)
        # Horner in the shifted variable
        for x in reversed(self.c):
            for i in range(len(out) - 1, 0, -1):
                out[i] = out[i] * a + out[i - 1]
            out[0] = out[0] * a + x
        return QPolynomial._raw(_strip(out))

    def __call__(self, x):
        acc = ZERO if isinstance(x, (int, Rational)) else None
        if acc is None:
            acc = 0
        for a in reversed(self.c):
            acc = acc * x + a
        return acc

    def __repr__(self) -> str:
        return f"QPolynomial({format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)


_Q_ZERO = QPolynomial._raw(())
_Q_ONE = QPolynomial._raw((ONE,))


def _is_monic_monomial(p: QPolynomial) -> int:
    """Return k when p == q**k, else -1."""
    c = p.c
    if not c or c[-1] != 1:
        return -1
    for x in c[:-1]:
        if x:
            return -1
    return len(c) - 1


class QScalar:
    """Element of Q(q) in canonical form: gcd(num, den) = 1, den monic."""

    __slots__ = ("num", "den", "_mono", "_hash")

    def __init__(self, num=0, den=1):
        if not isinstance(num, QPolynomial):
            num = QPolynomial.constant(num)
        if not isinstance(den, QPolynomial):
            den = QPolynomial.constant(den)
        c = canonicalize(num, den)
        self.num, self.den, self._mono, self._hash = c.num, c.den, c._mono, None

    @classmethod
    def _make(cls, num: QPolynomial, den: QPolynomial, mono: int) -> "QScalar":
        s = object.__new__(cls)
        s.num, s.den, s._mono, s._hash = num, den, mono, None
        return s

    @classmethod
    def q(cls) -> "QScalar":
        return cls._make(QPolynomial._raw((ZERO, ONE)), _Q_ONE, 0)

    @classmethod
    def from_rational(cls, a) -> "QScalar":
        a = rational(a)
        return cls._make(QPolynomial._raw((a,) if a else ()), _Q_ONE, 0)

    @classmethod
    def laurent(cls, terms: dict) -> "QScalar":
        """Build sum of c * q**k for a map k -> c (k may be negative)."""
        terms = {k: v for k, v in terms.items() if v}
        if not terms:
            return QSCALAR_ZERO
        low = min(terms)
        if low >= 0:
            return cls._make(QPolynomial.from_map(terms), _Q_ONE, 0)
        return cls._make(QPolynomial.from_map({k - low: v for k, v in terms.items()}),
                         QPolynomial.monomial(-low), -low)

    # predicates
    def is_zero(self) -> bool:
        return not self.num.c

    def __bool__(self) -> bool:
        return bool(self.num.c)

    def is_constant(self) -> bool:
        return len(self.num.c) <= 1 and self._mono == 0

    def constant_value(self) -> Rational:
        if not self.is_constant():
            raise InvalidParameter("scalar depends on q")
        return self.num.c[0] if self.num.c else ZERO

    def __eq__(self, other) -> bool:
        if isinstance(other, QScalar):
            return self.num.c == other.num.c and self.den.c == other.den.c
        if isinstance(other, (int, Rational)):
            return self.is_constant() and self.constant_value() == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num.c, self.den.c))
        return self._hash

    # arithmetic
    def __add__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            other = as_qscalar(other)
        if not other.num.c:
            return self
        if not self.num.c:
            return other
        m1, m2 = self._mono, other._mono
        if m1 >= 0 and m2 >= 0:
            # both denominators are powers of q
            if m1 >= m2:
                n = self.num + other.num.shift_degree(m1 - m2)
                return _reduce_mono(n, m1)
            n = self.num.shift_degree(m2 - m1) + other.num
            return _reduce_mono(n, m2)
        return canonicalize(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "QScalar":
        return QScalar._make(-self.num, self.den, self._mono)

    def __sub__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            other = as_qscalar(other)
        return self + (-other)

    def __rsub__(self, other) -> "QScalar":
        return as_qscalar(other) - self

    def __mul__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            if isinstance(other, (int, Rational)):
                s = rational(other)
                if not s:
                    return QSCALAR_ZERO
                return QScalar._make(self.num * s, self.den, self._mono)
            return NotImplemented
        if not self.num.c or not other.num.c:
            return QSCALAR_ZERO
        m1, m2 = self._mono, other._mono
        if m1 >= 0 and m2 >= 0:
            return _reduce_mono(self.num * other.num, m1 + m2)
        return canonicalize(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "QScalar":
        if not self.num.c:
            raise DivisionByZero("inverse of zero")
        lc = self.num.c[-1]
        num = self.den * (ONE / lc)
        den = self.num.monic()
        return QScalar._make(num, den, _is_monic_monomial(den))

    def __truediv__(self, other) -> "QScalar":
        if not isinstance(other, QScalar):
            other = as_qscalar(other)
        if not other.num.c:
            raise DivisionByZero("division by zero in Q(q)")
        return self * other.inverse()

    def __rtruediv__(self, other) -> "QScalar":
        return as_qscalar(other) / self

    def __pow__(self, k: int) -> "QScalar":
        if k < 0:
            return self.inverse() ** (-k)
        out = QSCALAR_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def laurent_terms(self):
        """Return {k: c} when self is a Laurent polynomial in q, else None."""
        if self._mono < 0:
            return None
        m = self._mono
        return {i - m: a for i, a in enumerate(self.num.c) if a}

    def substitute_shift(self, a) -> "QScalar":
        """Return s(q + a) for rational a."""
        return canonicalize(self.num.taylor_shift(a), self.den.taylor_shift(a))

    def derivative(self) -> "QScalar":
        n, d = self.num, self.den
        return canonicalize(n.derivative() * d - n * d.derivative(), d * d)

    def __repr__(self) -> str:
        return f"QScalar({format_qscalar(self)!r})"

    def __str__(self) -> str:
        return format_qscalar(self)


def _reduce_mono(num: QPolynomial, k: int) -> QScalar:
    """Reduce num / q**k by cancelling common powers of q."""
    if not num.c:
        return QSCALAR_ZERO
    if k:
        low = num.low_degree()
        t = min(low, k)
        if t:
            num = QPolynomial._raw(num.c[t:])
            k -= t
    return QScalar._make(num, QPolynomial.monomial(k) if k else _Q_ONE, k)


def canonicalize(num: QPolynomial, den: QPolynomial) -> QScalar:
    """Return the gcd-reduced, monic-denominator form of num/den."""
    if not den.c:
        raise DivisionByZero("zero denominator")
    if not num.c:
        return QSCALAR_ZERO
    k = _is_monic_monomial(den)
    if k >= 0:
        return _reduce_mono(num, k)
    # monomial denominators with a non-unit coefficient
    dl = den.low_degree()
    if dl == den.degree:
        lc = den.c[-1]
        return _reduce_mono(num * (ONE / lc), dl)
    g = num.gcd(den)
    if g.degree > 0:
        num = num.divmod(g)[0]
        den = den.divmod(g)[0]
    lc = den.c[-1]
    if lc != 1:
        num = num * (ONE / lc)
        den = den.monic()
    return QScalar._make(num, den, _is_monic_monomial(den))


QSCALAR_ZERO = QScalar._make(_Q_ZERO, _Q_ONE, 0)
QSCALAR_ONE = QScalar._make(_Q_ONE, _Q_ONE, 0)


def as_qscalar(x) -> QScalar:
    if isinstance(x, QScalar):
        return x
    if isinstance(x, QPolynomial):
        return QScalar._make(x, _Q_ONE, 0)
    if isinstance(x, str):
        return parse_qscalar(x)
    return QScalar.from_rational(x)


def qscalar_arith(op: str, a: QScalar, b: QScalar) -> QScalar:
    """Dispatch one of add, sub, mul, div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise InvalidParameter(f"unknown operation {op!r}")


def qscalar_canonicalize(num: QPolynomial, den: QPolynomial) -> QScalar:
    return canonicalize(num, den)


def qscalar_eval(s: QScalar, q0) -> Rational:
    """Specialize q to a nonzero rational value."""
    q0 = rational(q0)
    if not q0:
        raise InvalidParameter("q must be nonzero")
    d = s.den(q0)
    if not d:
        raise PoleAtEvaluationPoint(f"denominator vanishes at q = {q0}")
    return mpq(s.num(q0)) / d


# text form

def _format_int_poly(coeffs: list) -> str:
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if not c:
            continue
        mag = abs(c)
        if k == 0:
            body = str(mag)
        else:
            mono = "q" if k == 1 else f"q^{k}"
            body = mono if mag == 1 else f"{mag}*{mono}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts) if parts else "0"


def format_poly(p: QPolynomial) -> str:
    """Format a polynomial; rational coefficients are written c/d."""
    parts = []
    for k in range(len(p.c) - 1, -1, -1):
        c = p.c[k]
        if not c:
            continue
        mag = abs(c)
        ms = str(mag.numerator) if mag.denominator == 1 else f"{mag.numerator}/{mag.denominator}"
        if k == 0:
            body = ms
        else:
            mono = "q" if k == 1 else f"q^{k}"
            body = mono if mag == 1 else f"{ms}*{mono}"
        if not parts:
            parts.append(("-" if c < 0 else "") + body)
        else:
            parts.append((" - " if c < 0 else " + ") + body)
    return "".join(parts) if parts else "0"


def format_qscalar(s: QScalar) -> str:
    """Serialize with integer coefficients: ``<poly>`` or ``(<poly>)/(<poly>)``."""
    dens = [int(x.denominator) for x in s.num.c + s.den.c if x]
    scale = reduce(lcm, dens, 1)
    num = [int(mpz(x * scale)) for x in s.num.c]
    den = [int(mpz(x * scale)) for x in s.den.c]
    if den == [1]:
        return _format_int_poly(num)
    return f"({_format_int_poly(num)})/({_format_int_poly(den)})"


_TERM = re.compile(r"^(\d+)?(\*?q(\^(\d+))?)?$")


def _parse_poly(text: str) -> QPolynomial:
    t = text.replace(" ", "")
    if not t:
        raise InvalidParameter("empty polynomial")
    terms: dict = {}
    # split into signed chunks
    chunks = re.findall(r"[+-]?[^+-]+", t)
    if "".join(chunks) != t:
        raise InvalidParameter(f"cannot parse polynomial {text!r}")
    for ch in chunks:
        sign = -1 if ch[0] == "-" else 1
        body = ch.lstrip("+-")
        m = _TERM.match(body)
        if not body or not m or (m.group(1) is None and m.group(2) is None):
            raise InvalidParameter(f"bad term {ch!r}")
        if m.group(2) and m.group(2).startswith("*") and m.group(1) is None:
            raise InvalidParameter(f"bad term {ch!r}")
        coeff = int(m.group(1)) if m.group(1) else 1
        if m.group(2):
            deg = int(m.group(4)) if m.group(4) else 1
        else:
            deg = 0
        terms[deg] = terms.get(deg, 0) + sign * coeff
    return QPolynomial.from_map(terms)


def parse_qscalar(text: str) -> QScalar:
    """Inverse of :func:`format_qscalar`."""
    t = text.strip()
    m = re.fullmatch(r"\((.*)\)\s*/\s*\((.*)\)", t)
    if m:
        return canonicalize(_parse_poly(m.group(1)), _parse_poly(m.group(2)))
    return canonicalize(_parse_poly(t), _Q_ONE)


def q_power(k: int) -> QScalar:
    return QScalar.laurent({k: 1})
