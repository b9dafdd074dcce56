from __future__ import annotations

from dataclasses import replace

import pytest

from ceremony_check.compiler import CompiledCeremony
from ceremony_check.explorer import ExploreConfig, TraceSet, enumerate_traces
from ceremony_check.oracle import GuardExceeded, OracleReport, brute_force_enumerate, diff_trace_sets


def test_budget_zero_singleton(cutting):
    assert len(brute_force_enumerate(cutting, ExploreConfig(budget=0))) == 1


@pytest.mark.parametrize("name, count", [("cutting", 13), ("lateral", 32)])
def test_budget_one_matches_explorer(compiled_corpus, name, count):
    c = compiled_corpus[name]
    cfg = ExploreConfig(budget=1)
    report = OracleReport(0, 0)
    oracle = brute_force_enumerate(c, cfg, report)
    assert len(oracle) == count
    assert report.assignments_examined == report.executable == count
    assert diff_trace_sets(enumerate_traces(c, cfg), oracle).equivalent


def test_budget_two_cutting_equivalence(cutting):
    cfg = ExploreConfig(budget=2)
    report = diff_trace_sets(enumerate_traces(cutting, cfg), brute_force_enumerate(cutting, cfg))
    assert report.mismatches == []
    assert report.assignments_examined == report.executable == 75


def test_reflexive(cutting):
    ts = enumerate_traces(cutting, ExploreConfig(budget=1))
    report = diff_trace_sets(ts, ts)
    assert report.mismatches == [] and report.executable == len(ts)


def test_missing_trace_is_named(cutting):
    ts = enumerate_traces(cutting, ExploreConfig(budget=1))
    short = replace(ts, traces=ts.traces[:-1])
    report = diff_trace_sets(ts, short)
    assert len(report.mismatches) == 1
    key, left, right = report.mismatches[0]
    assert '"replace_send"' in key and '"rule": 0' in key
    assert left == ts.traces[-1].canonical() and right is None


def test_config_mismatch_is_an_error(cutting):
    a = enumerate_traces(cutting, ExploreConfig(budget=1))
    b = enumerate_traces(cutting, ExploreConfig(budget=2))
    with pytest.raises(ValueError):
        diff_trace_sets(a, b)
    with pytest.raises(ValueError):
        diff_trace_sets(a, replace(a, ceremony="other"))


def test_guard(cutting):
    with pytest.raises(GuardExceeded, match="budget 4"):
        brute_force_enumerate(cutting, ExploreConfig(budget=4))
    with pytest.raises(GuardExceeded, match="unbounded"):
        brute_force_enumerate(cutting, ExploreConfig(budget=None))
    big = CompiledCeremony(cutting.spec, cutting.rules * 3, cutting.dependency_graph)
    with pytest.raises(GuardExceeded, match="15 rules"):
        brute_force_enumerate(big, ExploreConfig(budget=1))


def test_budget_three_is_allowed(cutting):
    cfg = ExploreConfig(budget=3)
    assert diff_trace_sets(enumerate_traces(cutting, cfg), brute_force_enumerate(cutting, cfg)).equivalent
