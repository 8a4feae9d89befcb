"""Checks of the expansion kernel: iota homomorphism, conventions, delta calculus."""

from __future__ import annotations

import random

from .checks import CheckResult, failed, passed
from .errors import DivergentProduct
from .scalars import QScalar, format_qscalar
from .series import (AffineMap, MultiPoly, RationalDistribution, Region, VarSpec, delta_series,
                     gbinom, iota_expand, series_from_poly, series_mul)

Z, INF = Region.AT_ZERO, Region.AT_INFINITY

# expansion orders, innermost variable first
SIGNATURES = {
    "x@0": [VarSpec("x", Z)],
    "x@inf": [VarSpec("x", INF)],
    "x1@0,x2@0": [VarSpec("x1", Z), VarSpec("x2", Z)],
    "x2@0,x1@inf": [VarSpec("x2", Z), VarSpec("x1", INF)],
    "x1@inf,x2@inf": [VarSpec("x1", INF), VarSpec("x2", INF)],
}


def random_poly(rng: random.Random, vars, max_deg: int = 3, allow_q: bool = True) -> MultiPoly:
    q = QScalar.q()
    terms = {}
    for _ in range(rng.randint(1, 4)):
        exps = [0] * len(vars)
        budget = rng.randint(0, max_deg)
        for _ in range(budget):
            exps[rng.randrange(len(vars))] += 1
        c = QScalar.from_rational(rng.choice([-3, -2, -1, 1, 2, 3]))
        if allow_q and rng.random() < 0.3:
            c = c * q
        terms[tuple(exps)] = terms.get(tuple(exps), QScalar()) + c
    p = MultiPoly(vars, terms)
    return p if not p.is_zero() else MultiPoly.const(vars, 1)


def random_rational(rng: random.Random, vars, max_deg: int = 3) -> RationalDistribution:
    return RationalDistribution(random_poly(rng, vars, max_deg), random_poly(rng, vars, max_deg))


def check_iota_homomorphism(signature: str, count: int = 200, seed: int = 0,
                            target: int = 2, margin: int = 5) -> CheckResult:
    """iota(f g) = iota(f) iota(g) on a window for seeded random pairs.

    Pairs whose product the engine cannot certify finite on the target
    window are redrawn; the number of redraws is reported.
    """
    order = SIGNATURES[signature]
    vars = tuple(v.id for v in order)
    rng = random.Random(f"{seed}:{signature}")
    win = [(-target, target)] * len(order)
    big = [(-target - margin, target + margin)] * len(order)
    done = redrawn = 0
    anchor = "iota is a ring homomorphism"
    while done < count:
        f = random_rational(rng, vars)
        g = random_rational(rng, vars)
        fs = iota_expand(f, order, big)
        gs = iota_expand(g, order, big)
        try:
            prod = series_mul(fs, gs, win)
        except DivergentProduct:
            redrawn += 1
            continue
        if [tuple(w) for w in prod.window] != win:
            redrawn += 1
            continue
        whole = iota_expand(f * g, order, win)
        done += 1
        if not prod.agrees_on(whole, win):
            return failed(f"iota-hom[{signature}]", done,
                          {"f": repr(f), "g": repr(g)}, anchor)
    return CheckResult(f"iota-hom[{signature}]", "verified", done, None, anchor,
                       {"redrawn": redrawn})


def check_convention_tables(window=(-6, 6)) -> CheckResult:
    """The two documented expansions of 1/(x1 - x2 +- q), coefficient by coefficient.

    * at zero in both variables: (+-q + x1 - x2)^-1 = sum (+-q)^(-i-1) (x2 - x1)^i
    * x1 at infinity:           (x1 - x2 +- q)^-1 = sum (-+q)^i (x1 - x2)^(-1-i)
    """
    q = QScalar.q()
    xv = ("x1", "x2")
    lo, hi = window
    checks = 0
    for sign in (1, -1):
        sq = q * sign
        f = RationalDistribution(MultiPoly.const(xv, 1),
                                 MultiPoly.linear(xv, {"x1": 1, "x2": -1}, sq))
        s0 = iota_expand(f, [VarSpec("x1", Z), VarSpec("x2", Z)], [window, window])
        sinf = iota_expand(f, [VarSpec("x2", Z), VarSpec("x1", INF)], [window, window])
        for a in range(lo, hi + 1):
            for b in range(lo, hi + 1):
                # table at zero: i = a + b, C(i, a) (-1)^a (sq)^(-i-1)
                i = a + b
                want0 = QScalar()
                if a >= 0 and b >= 0:
                    want0 = sq ** (-i - 1) * (gbinom(i, a) * (-1) ** a)
                # table at infinity in x1, written in the order (x2, x1)
                want_inf = QScalar()
                i2 = -1 - a - b
                if b >= 0 and i2 >= 0:
                    want_inf = (-sq) ** i2 * (gbinom(-1 - i2, b) * (-1) ** b)
                checks += 2
                got0 = s0.coeff((a, b))
                got_inf = sinf.coeff((b, a))
                if got0 != want0 or got_inf != want_inf:
                    return failed("expansion-conventions", checks,
                                  {"sign": sign, "cell": [a, b],
                                   "at_zero": [format_qscalar(got0), format_qscalar(want0)],
                                   "at_infinity": [format_qscalar(got_inf), format_qscalar(want_inf)]},
                                  "(+-q + x1 - x2)^-1 = sum (+-q)^(-i-1)(x2 - x1)^i")
        # the two embeddings really differ
        checks += 1
        if all(s0.coeff((a, b)) == sinf.coeff((b, a)) for a in range(lo, hi + 1)
               for b in range(lo, hi + 1)):
            return failed("expansion-conventions", checks, {"sign": sign, "reason": "expansions agree"})
    return passed("expansion-conventions", checks, "(+-q + x1 - x2)^-1 = sum (+-q)^(-i-1)(x2 - x1)^i")


def check_delta_annihilation(max_order: int = 4, radius: int = 8) -> CheckResult:
    """(x1 - x2)^(k+1) (d/dx2)^k x1^-1 delta(x2/x1) = 0 on windows, also for shifted arguments."""
    xv = ("x1", "x2")
    checks = 0
    anchor = "(x1 - x2)^(k+1) d^k delta = 0"
    for shift in (0, 1, -2):
        g = AffineMap.shift(shift)
        for k in range(max_order + 1):
            w = [(-radius - k - 2, radius + k + 2)] * 2
            d = delta_series(g, k, "x1", "x2", w)
            p = MultiPoly.linear(xv, {"x1": 1, "x2": -1}, -shift) ** (k + 1)
            prod = series_mul(series_from_poly(p), d, [(-radius, radius)] * 2)
            checks += 1
            if not prod.is_zero():
                return failed("delta-annihilation", checks, {"order": k, "shift": shift}, anchor)
            if k:
                # one power fewer does not suffice
                p_low = MultiPoly.linear(xv, {"x1": 1, "x2": -1}, -shift) ** k
                prod = series_mul(series_from_poly(p_low), d, [(-radius, radius)] * 2)
                checks += 1
                if prod.is_zero():
                    return failed("delta-annihilation", checks,
                                  {"order": k, "shift": shift, "reason": "k-th power already kills"},
                                  anchor)
    return passed("delta-annihilation", checks, anchor)


def expansions_suite(seed: int = 0, count: int = 200) -> list:
    out = [check_iota_homomorphism(s, count, seed) for s in SIGNATURES]
    out.append(check_convention_tables())
    out.append(check_delta_annihilation())
    return out
