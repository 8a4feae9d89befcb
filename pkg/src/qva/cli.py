"""Command line entry point.

Exit codes: 0 when every check verified, 1 when any check failed, 2 for
configuration and usage errors.
"""

from __future__ import annotations

import sys
import time

import click

from . import suites
from ._version import __version__
from .checks import CheckResult
from .errors import QVAError
from .fields import LocalityCertificate, check_certificate, y_eo_product
from .gamma import SETUPS, fock_basis, gamma_generators, heisenberg_infinity_field, jacobi_check, \
    lemma_relabeling_check
from .phi import phi_apply
from .realization import basis_rank_check, dy_templates, filtration_check, template_by_id, \
    verify_relation
from .reports import CheckEntry, CheckReport, emit_report, load_config, run_suite
from .scalars import format_qscalar, parse_qscalar
from .series import Region, VarSpec, iota_expand, parse_rational
from .superfock import E, F, StateVector, basis_up_to, format_state, parse_monomial, weight_basis

FORMATS = click.Choice(["text", "json"])


def _window(text: str) -> tuple:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise click.BadParameter(f"expected LO:HI, got {text!r}") from None
    if lo > hi:
        raise click.BadParameter(f"empty window {text!r}")
    return lo, hi


def _emit(name: str, results, config: dict, fmt: str, output: str | None = None) -> int:
    entries = []
    for r, t in results:
        entries.append(CheckEntry.from_result(r.id, r, round(t, 6)))
    report = CheckReport(name, config, entries)
    _write(emit_report(report, fmt), output)
    return report.exit_code


def _write(data: bytes, output: str | None) -> None:
    if output:
        with open(output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode())


def _timed(fn, *args, **kwargs):
    start = time.perf_counter()
    r = fn(*args, **kwargs)
    return r, time.perf_counter() - start


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="qva")
def main():
    """Exact verification of vertex-algebra constructions on truncated windows."""


def run() -> None:
    try:
        code = main.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.exceptions.Abort:
        sys.exit(2)
    except QVAError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    sys.exit(code or 0)


# ---------------------------------------------------------------------------
# expansions


@main.command()
@click.argument("expression")
@click.option("--at", "points", multiple=True, required=True, metavar="VAR=0|inf",
              help="Expansion point per variable, innermost first.")
@click.option("--window", default="-3:3", show_default=True, help="Exponent window LO:HI for every variable.")
def expand(expression, points, window):
    """Print the iota-expansion of a rational function of the given variables and q."""
    order = []
    for p in points:
        var, _, where = p.partition("=")
        if where not in ("0", "inf"):
            raise click.BadParameter(f"expected VAR=0 or VAR=inf, got {p!r}")
        order.append(VarSpec(var, Region.AT_ZERO if where == "0" else Region.AT_INFINITY))
    lo, hi = _window(window)
    f = parse_rational(expression, [v.id for v in order])
    s = iota_expand(f, order, [(lo, hi)] * len(order))
    for e, c in sorted(s.terms.items()):
        mono = " ".join(f"{v.id}^{k}" for v, k in zip(order, e))
        click.echo(f"{mono}: {format_qscalar(c)}")
    return 0


# ---------------------------------------------------------------------------
# DY relations, basis and Phi


@main.command("verify-dy")
@click.option("--relation", "relations", multiple=True,
              type=click.Choice([t.id for t in dy_templates()]), help="Relation id (default: all six).")
@click.option("--max-weight", default=4, show_default=True)
@click.option("--radius", default=6, show_default=True)
@click.option("--q", "q_mode", default="symbolic", show_default=True, help="'symbolic' or a nonzero rational.")
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def verify_dy(relations, max_weight, radius, q_mode, fmt):
    """Check the defining relations on the realization."""
    cfg = load_config(overrides={"suite": "dyq-relations", "max_weight": max_weight,
                                 "window_radius": radius, "q_mode": q_mode})
    ids = relations or [t.id for t in dy_templates()]
    results = []
    for rid in ids:
        t = template_by_id(rid)
        r, dt = _timed(verify_relation, t, (-radius, radius), basis_up_to(max_weight), cfg.q0)
        results.append((CheckResult(f"relation-{rid}", r.status, r.cells_checked, r.counterexample,
                                    t.anchor), dt))
    return _emit("verify-dy", results, cfg.echo(), fmt)


@main.command()
@click.option("--n", "max_n", default=3, show_default=True, help="Largest word length.")
@click.option("--d", "max_d", default=5, show_default=True, help="Largest degree.")
@click.option("--filtration", "filtration_d", default=4, show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def basis(max_n, max_d, filtration_d, fmt):
    """Rank of admissible words and the filtration properties."""
    results = []
    for n in range(max_n + 1):
        for d in range(max_d + 1):
            r, dt = _timed(basis_rank_check, n, d)
            results.append((CheckResult(f"basis-rank[n={n},d={d}]", "verified" if r.verified else "failed",
                                        r.count, None if r.verified else r.to_dict(),
                                        "E_n has a basis consisting of the vectors",
                                        {"count": r.count, "rank": r.rank}), dt))
    for d in range(filtration_d + 1):
        r, dt = _timed(filtration_check, d)
        results.append((CheckResult(f"filtration[d={d}]", r.status, r.checks, r.counterexample,
                                    "a(m)F_k in F_{k-m}"), dt))
    if fmt == "text":
        dims = [len(weight_basis(d)) for d in range(max_d + 1)]
        click.echo("weight-space dimensions: " + " ".join(map(str, dims)))
    return _emit("basis", results, {"n": max_n, "d": max_d, "filtration": filtration_d}, fmt)


@main.command()
@click.argument("vector", required=False)
@click.option("--check", is_flag=True, help="Run the Phi property checks instead.")
@click.option("--max-weight", default=4, show_default=True)
@click.option("--radius", default=6, show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def phi(vector, check, max_weight, radius, fmt):
    """Phi(t) applied to a monomial such as 'e(-2) h(-1) |0>'."""
    if check or vector is None:
        tasks = suites.phi_lemma(max_weight=max_weight, radius=radius)
        results = [_timed(t) for _, t in tasks]
        return _emit("phi", results, {"max_weight": max_weight, "window_radius": radius}, fmt)
    img = phi_apply(StateVector.basis(parse_monomial(vector)))
    for j in sorted(img.coefficients, reverse=True):
        click.echo(f"t^{j}: {format_state(img.coefficients[j])}")
    return 0


# ---------------------------------------------------------------------------
# field calculus


def _pair(name: str, level):
    if name == "heisenberg":
        a = heisenberg_infinity_field(level)
        return a, a, [(0, 2)], fock_basis(2, 3)
    e, f = suites.superfock_field(E), suites.superfock_field(F)
    return e, f, [(-1, e, f)], basis_up_to(3)


PAIRS = click.Choice(["heisenberg", "superfock-ef"])


@main.command()
@click.argument("pair", type=PAIRS, default="heisenberg")
@click.option("--n", "n", type=int, required=True, help="Product index.")
@click.option("--k", default=None, type=int, help="Certificate power (default: 2 or 1).")
@click.option("--level", default="q", show_default=True)
@click.option("--modes", default="-3:3", show_default=True)
def product(pair, n, k, level, modes):
    """Print (a_n b)(m) on the small basis for the chosen pair."""
    a, b, braid, vectors = _pair(pair, parse_qscalar(level))
    if pair == "heisenberg":
        cert = LocalityCertificate.power(2 if k is None else k)
    else:
        cert = LocalityCertificate.power(1 if k is None else k, braid)
    f = y_eo_product(a, b, cert, n)
    lo, hi = _window(modes)
    for key in vectors:
        for m in range(lo, hi + 1):
            v = f.act(m, key)
            if v:
                click.echo(f"({f.label})({m}) {key!r} = {v!r}")
    return 0


@main.command("check-locality")
@click.argument("pair", type=PAIRS, default="heisenberg")
@click.option("--k", type=int, required=True, help="Power of (x1 - x2).")
@click.option("--level", default="q", show_default=True)
@click.option("--radius", default=4, show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def check_locality(pair, k, level, radius, fmt):
    """Verify a (x1 - x2)^k locality certificate on a window."""
    a, b, braid, vectors = _pair(pair, parse_qscalar(level))
    cert = LocalityCertificate.power(k, braid if pair != "heisenberg" else None)
    r, dt = _timed(check_certificate, cert, a, b, vectors, [(-radius, radius)] * 2)
    r.id, r.anchor = f"certificate[{pair},k={k}]", "(x1-x2)^k a(x1)b(x2) = (x1-x2)^k sum f_i b_i(x2)a_i(x1)"
    return _emit("check-locality", [(r, dt)], {"pair": pair, "k": k, "level": level, "radius": radius}, fmt)


@main.command()
@click.option("--level", default="q", show_default=True)
@click.option("--radius", default=4, show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def jacobi(level, radius, fmt):
    """Opposite Jacobi identity for the Heisenberg field at infinity."""
    lv = parse_qscalar(level)
    r, dt = _timed(suites.heisenberg_jacobi_check, lv, fock_basis(2, 3), radius)
    r.id = "opposite-jacobi"
    return _emit("jacobi", [(r, dt)], {"level": level, "radius": radius}, fmt)


@main.command()
@click.option("--k", default=2, show_default=True)
@click.option("--level", default="q", show_default=True)
@click.option("--radius", default=4, show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def assoc(k, level, radius, fmt):
    """Weak associativity for the Heisenberg field at infinity."""
    lv = parse_qscalar(level)
    r, dt = _timed(suites.heisenberg_associativity_check, lv, fock_basis(2, 3), radius, k)
    r.id = f"weak-associativity[k={k}]"
    return _emit("assoc", [(r, dt)], {"k": k, "level": level, "radius": radius}, fmt)


@main.command("gamma-jacobi")
@click.option("--setup", type=click.Choice(sorted(SETUPS)), default="Z", show_default=True)
@click.option("--max-index", default=2, show_default=True)
@click.option("--max-degree", default=2, show_default=True)
@click.option("--shifts", default=2, show_default=True, help="Relabeling checked for |n| <= shifts.")
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def gamma_jacobi(setup, max_index, max_degree, shifts, fmt):
    """Antisymmetry, Jacobi and relabeling for the Gamma-affinization."""
    gens = gamma_generators(SETUPS[setup], max_index, max_degree)
    r, dt = _timed(jacobi_check, gens)
    r.id, r.anchor = f"gamma-lie[{setup}]", "the quotient is a Lie algebra"
    results = [(r, dt)]
    if setup == "Z":
        for s in range(-shifts, shifts + 1):
            rr, dt = _timed(lemma_relabeling_check, s)
            rr.id, rr.anchor = f"relabeling[n={s}]", "(ga)_Gamma(x) = a_Gamma(g(x))"
            results.append((rr, dt))
    return _emit("gamma-jacobi", results, {"setup": setup, "max_index": max_index,
                                           "max_degree": max_degree, "shifts": shifts}, fmt)


@main.command()
@click.option("--level", default="q", show_default=True)
@click.option("--format", "fmt", type=FORMATS, default="text", show_default=True)
def heisenberg(level, fmt):
    """n-th products, vacuum axioms and bracket cross-checks for the Heisenberg field."""
    lv = parse_qscalar(level)
    tasks = [t for t in suites.heisenberg_suite(lv)
             if t[0] not in ("weak-associativity", "opposite-jacobi")]
    results = []
    for id, thunk in tasks:
        r, dt = _timed(thunk)
        r.id = id
        results.append((r, dt))
    return _emit("heisenberg", results, {"level": level}, fmt)


# ---------------------------------------------------------------------------
# suites


@main.command()
@click.argument("name", required=False)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key = value config file.")
@click.option("--max-weight", type=int)
@click.option("--radius", "window_radius", type=int)
@click.option("--q", "q_mode")
@click.option("--level")
@click.option("--seed", type=int)
@click.option("--count", type=int, help="Random pairs per signature (expansions).")
@click.option("--output", "output_path", type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=FORMATS, default="json", show_default=True)
def suite(name, config_path, fmt, **flags):
    """Run a named suite and emit a report_v1 document."""
    cfg = load_config(config_path, {"suite": name, **flags})
    report = run_suite(cfg)
    _write(emit_report(report, fmt), cfg.output_path)
    return report.exit_code


if __name__ == "__main__":
    run()
