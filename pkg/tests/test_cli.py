from __future__ import annotations

import io
import json

import jsonschema
import pytest

from ceremony_check.cli import main
from ceremony_check.reporting import SCHEMA

from conftest import corpus_path, corpus_text


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_verify_baseline():
    code, out, _ = run("verify", corpus_path("cutting"), "--mutations", "none")
    assert code == 0
    assert out.splitlines()[0] == "clip_before_cutting: HOLDS (1 trace)"


def test_bundled_name_resolves():
    assert run("verify", "cutting.cer", "--mutations", "none")[0] == 0


def test_verify_default_finds_cut_without_apply():
    code, out, _ = run("verify", "cutting.cer")
    assert code == 1
    assert "clip_before_cutting: VIOLATED (75 traces, 1 witness)" in out
    assert "missing A.apply(clips)" in out


def test_verify_lateral_three_violations():
    code, out, _ = run("verify", "lateral.cer", "--budget", "2")
    assert code == 1
    assert sum(line.endswith("witness)") and "VIOLATED" in line for line in out.splitlines()) == 3


def test_verify_all_violations():
    code, out, _ = run("verify", "cutting.cer", "--all-violations")
    assert code == 1
    assert "VIOLATED (75 traces, 30 witnesses)" in out


def test_verify_json_validates():
    code, out, _ = run("verify", "cutting.cer", "--format", "json")
    assert code == 1
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert [v["holds"] for v in doc["verdicts"]] == [False, True]


def test_verify_dot():
    code, out, _ = run("verify", "cutting.cer", "--budget", "0", "--format", "dot")
    assert code == 0 and out.startswith('digraph "cutting_trace_0"')


def test_verify_oracle():
    code, _, err = run("verify", "lateral.cer", "--budget", "1", "--oracle")
    assert code == 1
    assert "oracle: 32 assignments, 32 agree, 0 mismatches" in err


def test_oracle_guard_exit_code():
    code, _, err = run("verify", "cutting.cer", "--budget", "4", "--oracle")
    assert code == 3 and "refuses" in err


def test_mutation_subset():
    code, out, _ = run("verify", "cutting.cer", "--mutations", "skip-send,replace")
    assert code == 0
    assert "HOLDS" in out.splitlines()[0]


def test_explore_json():
    code, out, _ = run("explore", "cutting.cer", "--budget", "0", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert len(doc["traces"]) == 1


def test_explore_count():
    code, out, _ = run("explore", "cutting.cer", "--budget", "1")
    assert code == 0 and out.splitlines()[0] == "cutting: 13 traces"
    assert len(out.splitlines()) == 14


def test_render_default_equals_trace_zero():
    code, default, _ = run("render", "cutting.cer")
    assert code == 0
    assert run("render", "cutting.cer", "--trace", "0", "--budget", "0")[1] == default


def test_render_lateral_arrows():
    _, out, _ = run("render", "lateral.cer")
    assert sum(line.count(">|") + line.count("|<") for line in out.splitlines()) == 10


@pytest.mark.parametrize(
    "argv",
    [
        ("explore", "missing.cer"),
        ("verify", "cutting.cer", "--bogus"),
        ("verify", "cutting.cer", "--mutations", "drop"),
        ("verify", "cutting.cer", "--budget", "-1"),
        ("render", "cutting.cer", "--trace", "99"),
        ("render", "cutting.cer", "--width", "5"),
        (),
    ],
)
def test_usage_and_io_errors(argv, capsys):
    assert run(*argv)[0] == 2


def test_spec_error_reported(tmp_path):
    bad = tmp_path / "bad.cer"
    bad.write_text(corpus_text("cutting").replace("recv S cut_done", "recv S cut_finished"))
    code, _, err = run("verify", str(bad))
    assert code == 2
    assert "unmatched receive: recv S cut_finished in role A" in err


def test_compile_error_reported(tmp_path):
    bad = tmp_path / "race.cer"
    bad.write_text("ceremony r\nagents: S, A\nrole S:\n  start\n  send A a\nrole A:\n  start\n  send S b\n")
    code, _, err = run("verify", str(bad))
    assert code == 2


def test_exit_code_matrix():
    expected = {
        ("cutting", "none"): 0,
        ("lateral", "none"): 0,
        ("cutting", "skip-action"): 1,
        ("lateral", "skip-action"): 1,
    }
    for (name, muts), code in expected.items():
        assert run("verify", f"{name}.cer", "--mutations", muts)[0] == code
