"""Vacuum module of the loop algebra of the 3-dimensional superalgebra <e, f, h>.

Brackets: [e, f]_+ = h, [e, e] = [f, f] = 0, h central.  Monomials are stored
in normal order: e-block, f-block, h-block, indices increasing left to right
inside each block (so ``e(-2)e(-1)``).  Modes of index >= 0 kill the vacuum.
"""

from __future__ import annotations

import re
from functools import lru_cache
from typing import Iterable

from .errors import InvalidParameter
from .linear import LinComb
from .scalars import QScalar, format_qscalar, parse_qscalar

E, F, H = 0, 1, 2
GEN_NAMES = ("e", "f", "h")
GEN_INDEX = {"e": E, "f": F, "h": H, "E": E, "F": F, "H": H}

Mode = tuple  # (generator, index)
Monomial = tuple  # sorted tuple of modes, all indices <= -1
VACUUM: Monomial = ()


def is_odd(gen: int) -> bool:
    return gen != H


def mode(gen, index: int) -> Mode:
    if isinstance(gen, str):
        gen = GEN_INDEX[gen]
    return (gen, int(index))


def weight(mono: Monomial) -> int:
    return -sum(i for _, i in mono)


class StateVector(LinComb):
    """Element of the super-Fock space: monomial -> QScalar."""

    __slots__ = ()

    @classmethod
    def vacuum(cls) -> "StateVector":
        return cls.basis(VACUUM)

    @classmethod
    def from_int(cls, d: dict) -> "StateVector":
        return cls({k: QScalar.from_rational(v) for k, v in d.items()})

    def max_weight(self) -> int:
        return max((weight(m) for m in self.terms), default=0)

    def sorted_items(self):
        return sorted(self.terms.items(), key=lambda kv: monomial_sort_key(kv[0]))

    def __str__(self) -> str:
        return format_state(self)


def monomial_sort_key(mono: Monomial):
    return (weight(mono), len(mono), mono)


# ---------------------------------------------------------------------------
# normal-order rewriting on integer coefficients

def _insert_even(m: Mode, mono: Monomial) -> Monomial:
    lst = list(mono)
    k = len(lst)
    while k > 0 and lst[k - 1] > m:
        k -= 1
    lst.insert(k, m)
    return tuple(lst)


@lru_cache(maxsize=None)
def _apply(gen: int, idx: int, mono: Monomial) -> tuple:
    """u(idx) applied to a normal monomial, as a tuple of (monomial, int)."""
    if gen == H:
        if idx >= 0:
            return ()
        return ((_insert_even((H, idx), mono), 1),)
    x = (gen, idx)
    if not mono:
        return (((x,), 1),) if idx < 0 else ()
    y = mono[0]
    if idx < 0:
        if x < y:
            return (((x,) + mono, 1),)
        if x == y:
            return ()
    rest = mono[1:]
    out: dict = {}
    # x y rest = sign * y (x rest) + [x, y] rest
    if y[0] == H:
        sign = 1
    else:
        sign = -1
    for m1, c1 in _apply(gen, idx, rest):
        for m2, c2 in _apply(y[0], y[1], m1):
            out[m2] = out.get(m2, 0) + sign * c1 * c2
    if y[0] != H and y[0] != gen:
        # anticommutator of e and f is h
        for m2, c2 in _apply(H, idx + y[1], rest):
            out[m2] = out.get(m2, 0) + c2
    return tuple((m, c) for m, c in out.items() if c)


def apply_mode_int(gen: int, idx: int, vec: dict) -> dict:
    """Apply a mode to an integer-coefficient vector {monomial: int}."""
    out: dict = {}
    for mono, c in vec.items():
        for m2, c2 in _apply(gen, idx, mono):
            v = out.get(m2, 0) + c * c2
            if v:
                out[m2] = v
            else:
                out.pop(m2, None)
    return out


def apply_mode(m: Mode, v: StateVector) -> StateVector:
    gen, idx = m
    acc: dict = {}
    for mono, c in v.terms.items():
        for m2, c2 in _apply(gen, idx, mono):
            t = c * c2
            w = acc.get(m2)
            w = t if w is None else w + t
            if w:
                acc[m2] = w
            else:
                acc.pop(m2, None)
    return StateVector._wrap(acc)


def apply_word(word: Iterable[Mode], v: StateVector | None = None) -> StateVector:
    """u1(n1) ... uk(nk) v, applying the rightmost mode first."""
    if v is None:
        v = StateVector.vacuum()
    for m in reversed(list(word)):
        v = apply_mode(m, v)
    return v


def word_int(word, mono: Monomial = VACUUM) -> dict:
    vec = {mono: 1}
    for g, i in reversed(list(word)):
        vec = apply_mode_int(g, i, vec)
    return vec


# ---------------------------------------------------------------------------
# translation operator

@lru_cache(maxsize=None)
def _d_mono(mono: Monomial) -> tuple:
    out: dict = {}
    for k, (g, i) in enumerate(mono):
        if i == 0:
            continue
        word = mono[:k] + ((g, i - 1),) + mono[k + 1:]
        for m2, c2 in word_int(word).items():
            out[m2] = out.get(m2, 0) + (-i) * c2
    return tuple((m, c) for m, c in out.items() if c)


def d_operator_int(vec: dict) -> dict:
    out: dict = {}
    for mono, c in vec.items():
        for m2, c2 in _d_mono(mono):
            v = out.get(m2, 0) + c * c2
            if v:
                out[m2] = v
            else:
                out.pop(m2, None)
    return out


def d_operator(v: StateVector) -> StateVector:
    acc: dict = {}
    for mono, c in v.terms.items():
        for m2, c2 in _d_mono(mono):
            t = c * c2
            w = acc.get(m2)
            w = t if w is None else w + t
            if w:
                acc[m2] = w
            else:
                acc.pop(m2, None)
    return StateVector._wrap(acc)


# ---------------------------------------------------------------------------
# PBW basis

def partitions(n: int, max_part: int | None = None, strict: bool = False):
    """Partitions of n as weakly (or strictly) decreasing tuples."""
    if max_part is None:
        max_part = n
    if n == 0:
        yield ()
        return
    for p in range(min(n, max_part), 0, -1):
        nxt = p - 1 if strict else p
        for rest in partitions(n - p, nxt, strict):
            yield (p,) + rest


def monomial_from_parts(e_parts, f_parts, h_parts) -> Monomial:
    """Monomial e(-m1)..e(-mr) f(..) h(..) from positive parts."""
    modes = [(E, -m) for m in e_parts] + [(F, -m) for m in f_parts] + [(H, -m) for m in h_parts]
    return tuple(sorted(modes))


@lru_cache(maxsize=None)
def weight_basis(d: int) -> tuple:
    if d < 0:
        raise InvalidParameter("weight must be non-negative")
    out = []
    for a in range(d + 1):
        for b in range(d - a + 1):
            c = d - a - b
            for pe in partitions(a, strict=True):
                for pf in partitions(b, strict=True):
                    for ph in partitions(c):
                        out.append(monomial_from_parts(pe, pf, ph))
    out.sort(key=monomial_sort_key)
    return tuple(out)


def basis_up_to(d: int) -> list:
    out = []
    for k in range(d + 1):
        out.extend(weight_basis(k))
    return out


# ---------------------------------------------------------------------------
# text form

def format_monomial(mono: Monomial) -> str:
    if not mono:
        return "|0>"
    blocks = []
    for g in (E, F, H):
        part = "".join(f"{GEN_NAMES[g]}({i})" for gg, i in mono if gg == g)
        if part:
            blocks.append(part)
    return " ".join(blocks) + " |0>"


_MODE_RE = re.compile(r"([efh])\((-?\d+)\)")


def parse_monomial(text: str) -> Monomial:
    text = text.strip()
    if not text.endswith("|0>"):
        raise InvalidParameter(f"monomial must end with |0>: {text!r}")
    body = text[:-3]
    modes = [(GEN_INDEX[g], int(i)) for g, i in _MODE_RE.findall(body)]
    if _MODE_RE.sub("", body).strip():
        raise InvalidParameter(f"cannot parse monomial {text!r}")
    vec = word_int(modes)
    if len(vec) != 1 or list(vec.values())[0] != 1 or list(vec)[0] != tuple(modes):
        raise InvalidParameter(f"monomial not in normal form: {text!r}")
    return tuple(modes)


def format_state(v: StateVector) -> str:
    if not v.terms:
        return "0"
    return " + ".join(f"({format_qscalar(c)}) {format_monomial(m)}" for m, c in v.sorted_items())


def state_to_pairs(v: StateVector) -> list:
    return [[format_qscalar(c), format_monomial(m)] for m, c in v.sorted_items()]


def state_from_pairs(pairs) -> StateVector:
    return StateVector({parse_monomial(m): parse_qscalar(c) for c, m in pairs})
