"""Run configuration, suite execution and the report_v1 serialization.

The canonical section of a report holds everything that depends only on the
configuration: suite name, engine version, config echo and per-check results
sorted by id.  Timings live outside it, so canonical bytes are reproducible.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from ._version import __version__
from .checks import CheckResult
from .errors import ConfigError, QVAError
from .scalars import QScalar, parse_qscalar, qscalar_eval
from .suites import SUITES, suite_tasks

SCHEMA = "report_v1"

# dotted config-file keys and the RunConfig field each one sets
CONFIG_KEYS = {
    "run.suite": "suite",
    "run.seed": "seed",
    "run.output": "output_path",
    "scalars.q": "q_mode",
    "scalars.level": "level",
    "window.max_weight": "max_weight",
    "window.radius": "window_radius",
    "expansions.count": "count",
}
_INT_FIELDS = {"seed", "max_weight", "window_radius", "count"}


@dataclass(frozen=True)
class RunConfig:
    """What to run and with which parameters.

    ``q_mode`` is ``"symbolic"`` or a nonzero rational such as ``"3/2"``;
    ``level`` is a Laurent expression in q, specialized at q in rational mode.
    """

    suite: str = "expansions"
    q_mode: str = "symbolic"
    max_weight: int = 4
    window_radius: int = 6
    level: str = "q"
    seed: int = 0
    count: int = 200
    output_path: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose from {', '.join(SUITES)}")
        if self.max_weight < 0:
            raise ConfigError("max_weight must be non-negative")
        if self.window_radius < self.max_weight + 2:
            raise ConfigError(f"window_radius {self.window_radius} < max_weight + 2 = {self.max_weight + 2}")
        if self.count < 1:
            raise ConfigError("count must be positive")
        q0 = self.q0
        if q0 is not None and q0 == 0:
            raise ConfigError("q must be nonzero in rational mode")
        try:
            parse_qscalar(self.level)
        except (QVAError, ValueError) as exc:
            raise ConfigError(f"cannot parse level {self.level!r}: {exc}") from None

    @property
    def q0(self) -> Fraction | None:
        if self.q_mode == "symbolic":
            return None
        try:
            return Fraction(self.q_mode)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"q must be 'symbolic' or a rational number, got {self.q_mode!r}") from None

    def level_value(self):
        lv = parse_qscalar(self.level)
        q0 = self.q0
        if q0 is None:
            return lv
        return QScalar.from_rational(qscalar_eval(lv, q0))

    def echo(self) -> dict:
        """Config as stored in the canonical section (the output path is not echoed)."""
        out = asdict(self)
        out.pop("output_path")
        return out


def parse_config_text(text: str) -> dict:
    """``key = value`` lines with dotted keys; ``#`` starts a comment."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        name = CONFIG_KEYS[key]
        if name in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[name] = value
    return out


def _coerce(values: Mapping) -> dict:
    out = {}
    for k, v in values.items():
        if k in _INT_FIELDS and not isinstance(v, int):
            try:
                v = int(v)
            except ValueError:
                raise ConfigError(f"{k} must be an integer, got {v!r}") from None
        out[k] = v
    return out


def load_config(path: str | os.PathLike | None = None, overrides: Mapping | None = None) -> RunConfig:
    """Defaults, then the config file, then flag overrides (None means not given)."""
    values: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values.update(parse_config_text(text))
    names = {f.name for f in fields(RunConfig)}
    for k, v in (overrides or {}).items():
        if k not in names:
            raise ConfigError(f"unknown setting {k!r}")
        if v is not None:
            values[k] = v
    return RunConfig(**_coerce(values))


# ---------------------------------------------------------------------------
# reports


def _plain(x):
    """JSON-normal form: tuples become lists, unknown objects their str."""
    if x is None:
        return None
    return json.loads(json.dumps(x, default=str))


@dataclass
class CheckEntry:
    id: str
    status: str
    anchor: str = ""
    checks: int = 0
    counterexample: dict | None = None
    details: dict | None = None
    timing: float = 0.0

    def __post_init__(self):
        if self.status not in ("verified", "failed"):
            raise ValueError(f"bad status {self.status!r}")
        if (self.counterexample is not None) != (self.status == "failed"):
            raise ValueError("counterexample must be present exactly when a check fails")

    @property
    def verified(self) -> bool:
        return self.status == "verified"

    @classmethod
    def from_result(cls, id: str, r: CheckResult, timing: float = 0.0) -> "CheckEntry":
        cex = r.counterexample
        if r.status == "failed" and cex is None:
            cex = {"reason": "no counterexample recorded"}
        return cls(id, r.status, r.anchor, r.checks, _plain(cex) if r.status == "failed" else None,
                   _plain(r.details) or None, timing)

    def canonical(self) -> dict:
        out = {"id": self.id, "status": self.status, "anchor": self.anchor, "checks": self.checks,
               "counterexample": self.counterexample}
        if self.details:
            out["details"] = self.details
        return out


@dataclass
class CheckReport:
    suite: str
    config: dict
    checks: list = field(default_factory=list)
    engine_version: str = __version__

    def __post_init__(self):
        self.checks = sorted(self.checks, key=lambda c: c.id)

    @property
    def passed(self) -> bool:
        return all(c.verified for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def summary(self) -> dict:
        ok = sum(c.verified for c in self.checks)
        return {"total": len(self.checks), "verified": ok, "failed": len(self.checks) - ok}

    def canonical(self) -> dict:
        return {"suite": self.suite, "engine_version": self.engine_version, "config": self.config,
                "checks": [c.canonical() for c in self.checks], "summary": self.summary()}


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()


def canonical_bytes(r: CheckReport) -> bytes:
    return _json_bytes({"schema": SCHEMA, "canonical": r.canonical()})


def emit_report(r: CheckReport, format: str = "json") -> bytes:
    """Serialize a report; json is canonical apart from the ``timing`` member."""
    if format == "json":
        return _json_bytes({"schema": SCHEMA, "canonical": r.canonical(),
                            "timing": {c.id: c.timing for c in r.checks}})
    if format == "text":
        return _text(r).encode()
    raise ConfigError(f"unknown report format {format!r}")


def _text(r: CheckReport) -> str:
    lines = [f"{SCHEMA} suite={r.suite} engine={r.engine_version}",
             "config: " + " ".join(f"{k}={r.config[k]}" for k in sorted(r.config))]
    for c in r.checks:
        tag = "PASS" if c.verified else "FAIL"
        lines.append(f"[{tag}] {c.id} checks={c.checks} time={c.timing:.3f}s")
        lines.append(f'    anchor: "{c.anchor}"')
        if c.details:
            lines.append("    details: " + json.dumps(c.details, sort_keys=True))
        if c.counterexample is not None:
            lines.append("    counterexample: " + json.dumps(c.counterexample, sort_keys=True))
    s = r.summary()
    lines.append(f"summary: {s['verified']}/{s['total']} verified")
    return "\n".join(lines) + "\n"


def parse_report(data: bytes | str) -> CheckReport:
    """Inverse of ``emit_report(r, "json")``."""
    obj = json.loads(data)
    if obj.get("schema") != SCHEMA:
        raise ValueError(f"not a {SCHEMA} report")
    can = obj["canonical"]
    timing = obj.get("timing", {})
    checks = [CheckEntry(c["id"], c["status"], c["anchor"], c["checks"], c["counterexample"],
                         c.get("details"), timing.get(c["id"], 0.0)) for c in can["checks"]]
    return CheckReport(can["suite"], can["config"], checks, can["engine_version"])


# ---------------------------------------------------------------------------
# running


def worker_count(n_tasks: int) -> int:
    """QVA_THREADS caps the pool; the default is one worker."""
    raw = os.environ.get("QVA_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"QVA_THREADS must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ConfigError("QVA_THREADS must be at least 1")
    return max(1, min(cap, n_tasks))


def _run_task(id: str, thunk) -> CheckEntry:
    start = time.perf_counter()
    try:
        r = thunk()
    except Exception as exc:  # a crashing check is a failed check, not a failed suite
        r = CheckResult(id, "failed", 0, {"error": f"{type(exc).__name__}: {exc}"})
    return CheckEntry.from_result(id, r, round(time.perf_counter() - start, 6))


def run_suite(cfg: RunConfig) -> CheckReport:
    cfg.validate()
    tasks = suite_tasks(cfg.suite, max_weight=cfg.max_weight, radius=cfg.window_radius,
                        q0=cfg.q0, level=cfg.level_value(), seed=cfg.seed, count=cfg.count)
    workers = worker_count(len(tasks))
    if workers == 1:
        entries = [_run_task(i, t) for i, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda it: _run_task(*it), tasks))
    return CheckReport(cfg.suite, cfg.echo(), entries)


def write_report(r: CheckReport, path, format: str = "json") -> None:
    Path(path).write_bytes(emit_report(r, format))

