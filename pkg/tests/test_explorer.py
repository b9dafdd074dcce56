from __future__ import annotations

import pytest

from ceremony_check.explorer import ExploreConfig, enumerate_traces, replay_assignment
from ceremony_check.model import Deadlock
from ceremony_check.mutation import (
    ALL_KINDS,
    SKIP_ACTION,
    SKIP_SEND,
    MutationAssignment,
    RuleVariant,
)

# frozen from the brute-force oracle (see test_oracle.py for the equivalence run)
CUTTING_B1 = 13
CUTTING_B2 = 75
LATERAL_B1 = 32
LATERAL_B2 = 487


def steps(trace):
    return [str(s.event) for s in trace.steps]


def test_config_validation():
    with pytest.raises(ValueError):
        ExploreConfig(budget=-1)
    with pytest.raises(ValueError):
        ExploreConfig(kinds={"drop"})
    with pytest.raises(ValueError):
        ExploreConfig(collect="some")


def test_budget_zero_is_the_unmutated_run(cutting):
    ts = enumerate_traces(cutting, ExploreConfig(budget=0))
    assert len(ts) == 1
    (trace,) = ts.traces
    assert [s.number for s in trace.states] == [0, 1, 2, 3, 4, 5]
    assert sorted({s.rule_index for s in trace.steps}) == [0, 1, 2, 3, 4]
    assert not any(s.mutated for s in trace.steps)


def test_empty_kinds_yield_singleton(cutting):
    assert len(enumerate_traces(cutting, ExploreConfig(kinds=set(), budget=None))) == 1


def test_cut_without_clips_is_reachable(cutting):
    ts = enumerate_traces(cutting, ExploreConfig(kinds={SKIP_ACTION}, budget=1))
    assert any(
        "s_action(S, cut, ureter)" in steps(t) and "s_action(A, apply, clips)" not in steps(t)
        for t in ts
    )


@pytest.mark.parametrize(
    "name, budget, count",
    [("cutting", 1, CUTTING_B1), ("cutting", 2, CUTTING_B2), ("lateral", 1, LATERAL_B1), ("lateral", 2, LATERAL_B2)],
)
def test_pinned_counts(compiled_corpus, name, budget, count):
    assert len(enumerate_traces(compiled_corpus[name], ExploreConfig(budget=budget))) == count


def test_single_mistake_count_by_hand(cutting, lateral):
    # one original plus one trace per action skip and two per send
    for c in (cutting, lateral):
        actions = sum(len(r.actions) for r in c.rules)
        sends = sum(r.send is not None for r in c.rules)
        assert len(enumerate_traces(c, ExploreConfig(budget=1))) == 1 + actions + 2 * sends


def test_original_first_and_assignments_unique(lateral):
    ts = enumerate_traces(lateral, ExploreConfig(budget=2))
    assert ts.traces[0].assignment == MutationAssignment.original(lateral)
    keys = [t.assignment.key for t in ts]
    assert len(keys) == len(set(keys))
    assert all(t.final_state.number == lateral.final_state for t in ts)
    assert all(t.assignment.primary_count <= 2 for t in ts)


def test_depth_first_order(cutting):
    ts = enumerate_traces(cutting, ExploreConfig(budget=1))
    # the last rule with a mutation varies fastest
    assert [t.assignment.choices[0].kind for t in ts][-3:] == ["skip_action(0)", "skip_send", "replace_send"]


def test_unbounded_budget(cutting):
    ts = enumerate_traces(cutting, ExploreConfig(budget=None))
    assert len(ts) == len(enumerate_traces(cutting, ExploreConfig(budget=8)))


def test_replay_without_closure_deadlocks(cutting):
    a = MutationAssignment.from_partial(cutting, {2: RuleVariant(cutting.rules[2], send_mutation=SKIP_SEND)})
    with pytest.raises(Deadlock) as info:
        replay_assignment(cutting, a, enforce_closure=False)
    assert info.value.rule_index == 3
    trace = replay_assignment(cutting, a)
    assert "s_action(S, cut, ureter)" in steps(trace)
    assert "Rcv(A, S, clips_applied)" not in steps(trace)


def test_original_replay_mirrors_chart(cutting):
    trace = replay_assignment(cutting, MutationAssignment.original(cutting))
    assert steps(trace) == [
        "Start(S)",
        "s_action(S, request, clips)",
        "Snd(S, N, clips_requested)",
        "Rcv(S, N, clips_requested)",
        "s_action(N, provide, clips)",
        "Snd(N, A, clips_provided)",
        "Rcv(N, A, clips_provided)",
        "s_action(A, apply, clips)",
        "Snd(A, S, clips_applied)",
        "Rcv(A, S, clips_applied)",
        "s_action(S, cut, ureter)",
        "Snd(S, A, cut_done)",
        "Rcv(S, A, cut_done)",
    ]


def test_threads_do_not_change_output(lateral, monkeypatch):
    cfg = ExploreConfig(budget=2)
    serial = [t.canonical() for t in enumerate_traces(lateral, cfg)]
    monkeypatch.setenv("CEREMONY_CHECK_THREADS", "4")
    assert [t.canonical() for t in enumerate_traces(lateral, cfg)] == serial


def test_bad_thread_hint_is_ignored(cutting, monkeypatch):
    monkeypatch.setenv("CEREMONY_CHECK_THREADS", "lots")
    assert len(enumerate_traces(cutting, ExploreConfig(budget=1))) == CUTTING_B1


def test_kind_subsets_are_nested(cutting):
    full = {t.canonical() for t in enumerate_traces(cutting, ExploreConfig(kinds=ALL_KINDS))}
    part = {t.canonical() for t in enumerate_traces(cutting, ExploreConfig(kinds={SKIP_SEND}))}
    assert part < full
