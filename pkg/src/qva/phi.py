"""The operator Phi(t): V -> V[t], defined by its commutation recursion.

    Phi(t) e(m) = (t e(m) - e(m+1)) Phi(t)
    Phi(t) f(m) = (t f(m) - f(m+1)) Phi(t)
    Phi(t) h(m) = (t^2 h(m) - 2t h(m+1) + h(m+2)) Phi(t)
    Phi(t) |0> = |0>
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

from .checks import CheckResult, failed, passed
from .scalars import as_qscalar
from .superfock import (E, F, GEN_NAMES, H, Monomial, StateVector, _apply, apply_mode,
                        basis_up_to, d_operator, format_monomial, weight)

# mode polynomial in t for each generator: list of (t-degree, index shift, coefficient)
_RULES = {
    0: ((1, 0, 1), (0, 1, -1)),
    1: ((1, 0, 1), (0, 1, -1)),
    2: ((2, 0, 1), (1, 1, -2), (0, 2, 1)),
}


def _add_into(acc: dict, key, mono, c):
    d = acc.setdefault(key, {})
    v = d.get(mono, 0) + c
    if v:
        d[mono] = v
    else:
        d.pop(mono, None)
        if not d:
            del acc[key]


@lru_cache(maxsize=None)
def phi_int(mono: Monomial) -> tuple:
    """Phi(t) on a normal monomial: tuple of (t-degree, ((monomial, int), ...))."""
    if not mono:
        return ((0, (((), 1),)),)
    (g, i), rest = mono[0], mono[1:]
    acc: dict = {}
    for j, vec in phi_int(rest):
        for m, c in vec:
            for dt, shift, k in _RULES[g]:
                for m2, c2 in _apply(g, i + shift, m):
                    _add_into(acc, j + dt, m2, k * c * c2)
    return tuple(sorted((j, tuple(d.items())) for j, d in acc.items()))


@lru_cache(maxsize=None)
def phi_degree(mono: Monomial) -> int:
    return max((j for j, _ in phi_int(mono)), default=0)


class PhiImage:
    """Polynomial in t with StateVector coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: dict):
        self.coefficients = {j: v for j, v in coefficients.items() if v}

    def degree(self) -> int:
        return max(self.coefficients, default=-1)

    def coeff(self, j: int) -> StateVector:
        return self.coefficients.get(j, StateVector())

    def derivative(self) -> "PhiImage":
        return PhiImage({j - 1: v.scale(j) for j, v in self.coefficients.items() if j})

    def __eq__(self, other):
        if not isinstance(other, PhiImage):
            return NotImplemented
        return self.coefficients == other.coefficients

    def __sub__(self, other: "PhiImage") -> "PhiImage":
        keys = set(self.coefficients) | set(other.coefficients)
        return PhiImage({j: self.coeff(j) - other.coeff(j) for j in keys})

    def is_zero(self) -> bool:
        return not self.coefficients

    def __repr__(self):
        return f"PhiImage({self.coefficients!r})"


def phi_apply(v: StateVector) -> PhiImage:
    acc: dict = {}
    for mono, c in v.terms.items():
        for j, vec in phi_int(mono):
            d = acc.setdefault(j, {})
            for m, k in vec:
                t = c * k
                w = d.get(m)
                w = t if w is None else w + t
                if w:
                    d[m] = w
                else:
                    d.pop(m, None)
    return PhiImage({j: StateVector._wrap(d) for j, d in acc.items()})


def phi_derivative_at(v: StateVector, i: int, point) -> StateVector:
    """Phi^{(i)}(point) v."""
    point = as_qscalar(point)
    img = phi_apply(v)
    out = StateVector()
    for j, vec in img.coefficients.items():
        if j < i:
            continue
        fall = 1
        for k in range(i):
            fall *= j - k
        out = out + vec.scale(point ** (j - i) * fall)
    return out


def phi_shift_coefficients(mono: Monomial, sign: int) -> dict:
    """[x^i] Phi(sign*q + x) applied to mono as {i: {(monomial, q-exponent): int}}.

    Uses [x^i] (sq + x)^j = C(j, i) (sq)^(j-i).
    """
    out: dict = {}
    for j, vec in phi_int(mono):
        for i in range(j + 1):
            b = comb(j, i) * (sign ** (j - i))
            d = out.setdefault(i, {})
            for m, c in vec:
                key = (m, j - i)
                v = d.get(key, 0) + b * c
                if v:
                    d[key] = v
                else:
                    d.pop(key, None)
    return {i: d for i, d in out.items() if d}


@lru_cache(maxsize=None)
def phi_two_int(mono: Monomial) -> tuple:
    """Phi(s)Phi(t) mono as ((s-degree, t-degree), ((monomial, int), ...))."""
    acc: dict = {}
    for j, vec in phi_int(mono):
        for m, c in vec:
            for i, vec2 in phi_int(m):
                for m2, c2 in vec2:
                    _add_into(acc, (i, j), m2, c * c2)
    return tuple(sorted((k, tuple(d.items())) for k, d in acc.items()))


# ---------------------------------------------------------------------------
# checks of the stated properties of Phi

def _apply_to_image(gen: int, idx: int, img: PhiImage) -> dict:
    return {j: apply_mode((gen, idx), vec) for j, vec in img.coefficients.items()}


def check_phi_values() -> CheckResult:
    """Phi(t)1 = 1, Phi(t)e = e t, Phi(t)f = f t, Phi(t)h = h t^2."""
    cases = [((), {0: ()}), (((E, -1),), {1: ((E, -1),)}),
             (((F, -1),), {1: ((F, -1),)}), (((H, -1),), {2: ((H, -1),)})]
    for k, (mono, want) in enumerate(cases, 1):
        got = phi_apply(StateVector.basis(mono))
        expect = PhiImage({j: StateVector.basis(m) for j, m in want.items()})
        if got != expect:
            return failed("phi-values", k, {"vector": format_monomial(mono), "image": repr(got)},
                          "Phi(t)1 = 1, Phi(t)e = e t, Phi(t)h = h t^2")
    return passed("phi-values", len(cases), "Phi(t)1 = 1, Phi(t)e = e t, Phi(t)h = h t^2")


def check_phi_commutativity(max_weight: int = 4) -> CheckResult:
    """Phi(x)Phi(t) = Phi(t)Phi(x) on basis vectors."""
    anchor = "Phi(x)Phi(t) = Phi(t)Phi(x)"
    checks = 0
    for mono in basis_up_to(max_weight):
        table = {k: dict(vec) for k, vec in phi_two_int(mono)}
        for (i, j), vec in table.items():
            checks += 1
            if table.get((j, i)) != vec:
                return failed("phi-commute", checks,
                              {"vector": format_monomial(mono), "degrees": [i, j]}, anchor)
    return passed("phi-commute", checks, anchor)


def check_phi_translation(max_weight: int = 4) -> CheckResult:
    """[D, Phi(t)] = d/dt Phi(t) on basis vectors."""
    anchor = "[D, Phi(t)] = d/dt Phi(t)"
    checks = 0
    for mono in basis_up_to(max_weight):
        v = StateVector.basis(mono)
        img = phi_apply(v)
        lhs = PhiImage({j: d_operator(vec) for j, vec in img.coefficients.items()}) - phi_apply(d_operator(v))
        checks += 1
        if lhs != img.derivative():
            return failed("phi-translation", checks, {"vector": format_monomial(mono)}, anchor)
    return passed("phi-translation", checks, anchor)


_FIELD_FACTOR = {E: ((1, 0, 1), (0, 1, -1)), F: ((1, 0, 1), (0, 1, -1)),
                 H: ((2, 0, 1), (1, 1, -2), (0, 2, 1))}


def check_phi_field_commutation(max_weight: int = 4, window=(-6, 6)) -> CheckResult:
    """Phi(t) u(x) = (t - x)^k u(x) Phi(t), k = 1 for e, f and 2 for h, per x-coefficient."""
    anchor = "Phi(t)e(x) = (t - x)e(x)Phi(t)"
    checks = 0
    for mono in basis_up_to(max_weight):
        v = StateVector.basis(mono)
        img = phi_apply(v)
        for gen in (E, F, H):
            for a in range(window[0], window[1] + 1):
                m = -a - 1
                lhs = phi_apply(apply_mode((gen, m), v))
                acc: dict = {}
                for dt, shift, k in _FIELD_FACTOR[gen]:
                    for j, vec in _apply_to_image(gen, m + shift, img).items():
                        acc[j + dt] = acc.get(j + dt, StateVector()) + vec.scale(k)
                checks += 1
                if lhs != PhiImage(acc):
                    return failed("phi-field", checks,
                                  {"vector": format_monomial(mono), "generator": GEN_NAMES[gen],
                                   "cell": [a]}, anchor)
    return passed("phi-field", checks, anchor)


def check_phi_leading(max_weight: int = 4) -> CheckResult:
    """Phi(t)w = t^m w modulo lower weight, m = #e + #f + 2 #h."""
    anchor = "Phi(t)w = t^m w mod F_{n-1}[t]"
    checks = 0
    for mono in basis_up_to(max_weight):
        m = sum(2 if g == H else 1 for g, _ in mono)
        n = weight(mono)
        img = phi_apply(StateVector.basis(mono))
        checks += 1
        rest = img - PhiImage({m: StateVector.basis(mono)})
        bad = [j for j, vec in rest.coefficients.items() if any(weight(k) >= n for k in vec.terms)]
        if bad:
            return failed("phi-leading", checks, {"vector": format_monomial(mono), "degrees": bad}, anchor)
    return passed("phi-leading", checks, anchor)


def phi_lemma_suite(max_weight: int = 4, window=(-6, 6)) -> list:
    return [check_phi_values(), check_phi_commutativity(max_weight),
            check_phi_translation(max_weight), check_phi_field_commutation(max_weight, window),
            check_phi_leading(max_weight)]
