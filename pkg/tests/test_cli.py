import json
import subprocess
import sys

import pytest


def qva(*args, env=None):
    return subprocess.run([sys.executable, "-m", "qva", *args], capture_output=True, text=True,
                          env=env)


def test_expand():
    out = qva("expand", "1/(x1-x2)", "--at", "x1=0", "--at", "x2=0", "--window", "-2:2")
    assert out.returncode == 0
    assert "x1^-1 x2^0: 1" in out.stdout


def test_suite_json_and_exit_code():
    out = qva("suite", "dyq-basis")
    assert out.returncode == 0
    obj = json.loads(out.stdout)
    assert obj["schema"] == "report_v1" and obj["canonical"]["summary"]["failed"] == 0


@pytest.mark.parametrize("args", [["suite", "dyq-relations", "--max-weight", "4", "--radius", "5"],
                                  ["suite", "unknown"], ["suite", "phi-lemma", "--q", "0"],
                                  ["expand"], ["nonsense-verb"]])
def test_config_errors_exit_2(args):
    assert qva(*args).returncode == 2


def test_failed_check_exits_1():
    out = qva("check-locality", "heisenberg", "--k", "1", "--format", "json")
    assert out.returncode == 1
    obj = json.loads(out.stdout)
    cex = obj["canonical"]["checks"][0]["counterexample"]
    assert len(cex["cell"]) == 2


@pytest.mark.parametrize("args", [["verify-dy", "--relation", "ee", "--max-weight", "1", "--radius", "3"],
                                  ["basis", "--n", "2", "--d", "3"], ["phi", "--check", "--max-weight", "2"],
                                  ["phi", "e(-1) h(-1) |0>"], ["product", "heisenberg", "--n", "1"],
                                  ["check-locality", "superfock-ef", "--k", "1"],
                                  ["gamma-jacobi", "--max-index", "1", "--max-degree", "1", "--shifts", "1"],
                                  ["heisenberg"]])
def test_verbs_succeed(args):
    out = qva(*args)
    assert out.returncode == 0, out.stderr + out.stdout


def test_heavy_verbs_succeed():
    assert qva("jacobi", "--radius", "2").returncode == 0
    assert qva("assoc", "--radius", "2").returncode == 0
