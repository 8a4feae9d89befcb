import json
import random

import pytest
from hypothesis import given, strategies as st

from qva.checks import CheckResult
from qva.errors import ConfigError
from qva.reports import (SCHEMA, CheckEntry, CheckReport, RunConfig, canonical_bytes, emit_report,
                         load_config, parse_config_text, parse_report, run_suite, worker_count)


def random_report(rng: random.Random) -> CheckReport:
    entries = []
    for i in range(rng.randint(0, 5)):
        status = rng.choice(["verified", "failed"])
        cex = {"cell": [rng.randint(-6, 6), rng.randint(-6, 6)], "vector": "e(-1) |0>"} \
            if status == "failed" else None
        details = {"redrawn": rng.randint(0, 9)} if rng.random() < 0.3 else None
        entries.append(CheckEntry(f"check-{i}-{rng.randint(0, 99)}", status, f"anchor {i}",
                                  rng.randint(0, 10 ** 6), cex, details, round(rng.random(), 6)))
    cfg = RunConfig(suite=rng.choice(["expansions", "phi-lemma"]), seed=rng.randint(0, 99)).echo()
    return CheckReport(cfg["suite"], cfg, entries)


@given(st.integers(0, 2 ** 32))
def test_json_round_trip(seed):
    r = random_report(random.Random(seed))
    assert parse_report(emit_report(r, "json")) == r


def test_sorted_keys_and_schema():
    r = random_report(random.Random(5))
    data = emit_report(r, "json")
    obj = json.loads(data)
    assert obj["schema"] == SCHEMA
    assert data == (json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode()
    assert [c["id"] for c in obj["canonical"]["checks"]] == sorted(c.id for c in r.checks)


def test_timing_stays_outside_the_canonical_section():
    r = random_report(random.Random(9))
    for c in r.checks:
        c.timing += 1.0
    r2 = random_report(random.Random(9))
    assert canonical_bytes(r) == canonical_bytes(r2)
    assert emit_report(r) != emit_report(r2) or not r.checks


def test_counterexample_invariant():
    with pytest.raises(ValueError):
        CheckEntry("x", "failed")
    with pytest.raises(ValueError):
        CheckEntry("x", "verified", counterexample={"cell": [0, 0]})
    e = CheckEntry.from_result("x", CheckResult("x", "failed", 3))
    assert e.counterexample == {"reason": "no counterexample recorded"}


def test_text_format_quotes_anchors():
    r = CheckReport("demo", {"a": 1}, [CheckEntry("c1", "failed", "e(x1)e(x2) = ...", 4,
                                                  {"cell": [1, -2]})])
    text = emit_report(r, "text").decode()
    assert 'anchor: "e(x1)e(x2) = ..."' in text
    assert '"cell": [1, -2]' in text
    assert "[FAIL] c1" in text and "summary: 0/1 verified" in text


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(max_weight=4, window_radius=5)
    with pytest.raises(ConfigError):
        RunConfig(q_mode="0")
    with pytest.raises(ConfigError):
        RunConfig(q_mode="abc")
    with pytest.raises(ConfigError):
        RunConfig(suite="nope")
    with pytest.raises(ConfigError):
        RunConfig(level="q +* 2")
    assert RunConfig(q_mode="3/2").q0 == pytest.approx(1.5)


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# demo\nrun.suite = phi-lemma\nwindow.max_weight = 3\nwindow.radius = 5  # tight\n"
                    "scalars.q = \"2\"\n")
    cfg = load_config(path, {"max_weight": 2, "seed": None})
    assert (cfg.suite, cfg.max_weight, cfg.window_radius, cfg.q_mode) == ("phi-lemma", 2, 5, "2")


@pytest.mark.parametrize("text", ["run.suite phi-lemma", "nested.unknown = 1",
                                  "run.seed = 1\nrun.seed = 2"])
def test_bad_config_text(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_non_integer_setting():
    with pytest.raises(ConfigError):
        load_config(overrides={"seed": "many"})


def test_threads_env(monkeypatch):
    monkeypatch.setenv("QVA_THREADS", "3")
    assert worker_count(10) == 3 and worker_count(2) == 2
    monkeypatch.setenv("QVA_THREADS", "0")
    with pytest.raises(ConfigError):
        worker_count(4)


def test_suite_determinism_across_thread_counts(monkeypatch):
    cfg = RunConfig(suite="gamma-jacobi")
    a = run_suite(cfg)
    monkeypatch.setenv("QVA_THREADS", "4")
    b = run_suite(cfg)
    assert a.passed and canonical_bytes(a) == canonical_bytes(b)


def test_crashing_check_is_reported_not_raised(monkeypatch):
    from qva import suites

    def boom(**_):
        return [("explodes", lambda: 1 / 0), ("fine", lambda: CheckResult("fine", "verified", 1))]

    monkeypatch.setitem(suites.SUITES, "phi-lemma", boom)
    r = run_suite(RunConfig(suite="phi-lemma"))
    assert r.exit_code == 1
    bad = [c for c in r.checks if c.id == "explodes"][0]
    assert "ZeroDivisionError" in bad.counterexample["error"]
