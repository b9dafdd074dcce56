from __future__ import annotations

import itertools

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ceremony_check.compiler import compile_ceremony
from ceremony_check.explorer import ExploreConfig, enumerate_traces, replay_assignment
from ceremony_check.language import format_ceremony, parse_ceremony
from ceremony_check.model import MessageAtom, negate
from ceremony_check.mutation import (
    ALL_KINDS,
    MutationAssignment,
    RuleVariant,
    generate_variants,
    matching_closure,
)
from ceremony_check.oracle import brute_force_enumerate, diff_trace_sets
from ceremony_check.reporting import RenderOptions, export_trace

SLOW = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])

names = st.from_regex(r"[a-z][a-z0-9_]{0,12}", fullmatch=True).filter(lambda s: not s.startswith("not_"))
kind_sets = st.sets(st.sampled_from(sorted(ALL_KINDS)))


@given(names, st.booleans())
def test_negation_is_an_involution(name, neg):
    a = MessageAtom(name, neg)
    assert negate(negate(a)) == a
    assert negate(a).name == a.name and negate(a) != a
    assert MessageAtom.parse(str(a)) == a
    assert MessageAtom.parse("not_not_" + str(a)) == a


def test_knowledge_monotone_and_states_gapless(compiled_corpus):
    for c in compiled_corpus.values():
        for t in enumerate_traces(c, ExploreConfig(budget=2)):
            assert [s.number for s in t.states] == list(range(c.final_state + 1))
            for before, after in zip(t.states, t.states[1:]):
                for k0, k1 in zip(before.knowledge, after.knowledge):
                    assert k0.atoms <= k1.atoms
            assert [s.step for s in t.steps] == list(range(len(t.steps)))
            # every message that was sent has been consumed
            assert t.final_state.in_flight == ()


def test_replay_reproduces_every_trace(compiled_corpus):
    for c in compiled_corpus.values():
        for t in enumerate_traces(c, ExploreConfig(budget=2)):
            again = replay_assignment(c, t.assignment)
            assert again.canonical() == t.canonical()
            assert again.final_state == t.final_state


@SLOW
@given(st.sampled_from(["cutting", "lateral"]), st.integers(0, 1))
def test_budget_monotone(compiled_corpus, name, b):
    c = compiled_corpus[name]
    small = {t.canonical() for t in enumerate_traces(c, ExploreConfig(budget=b))}
    large = {t.canonical() for t in enumerate_traces(c, ExploreConfig(budget=b + 1))}
    assert small <= large


@SLOW
@given(st.sampled_from(["cutting", "lateral"]), kind_sets, kind_sets)
def test_kinds_monotone(compiled_corpus, name, k1, k2):
    c = compiled_corpus[name]
    small = {t.canonical() for t in enumerate_traces(c, ExploreConfig(kinds=k1, budget=2))}
    large = {t.canonical() for t in enumerate_traces(c, ExploreConfig(kinds=k1 | k2, budget=2))}
    assert small <= large


def test_determinism(compiled_corpus):
    for c in compiled_corpus.values():
        cfg = ExploreConfig(budget=2)
        runs = [export_trace(enumerate_traces(c, cfg), RenderOptions(format="json")) for _ in range(2)]
        assert runs[0] == runs[1]


@st.composite
def assignments(draw, compiled):
    choices = []
    for rule in compiled.rules:
        variants = generate_variants(rule)
        choices.append(variants[draw(st.integers(0, len(variants) - 1))] if draw(st.booleans()) else variants[0])
    return MutationAssignment(tuple(choices))


@SLOW
@given(st.data())
def test_closure_sound_idempotent_minimal(compiled_corpus, data):
    c = compiled_corpus[data.draw(st.sampled_from(["cutting", "lateral"]))]
    raw = data.draw(assignments(c))
    closed = matching_closure(raw, c)
    assert matching_closure(closed, c) == closed
    assert closed.primary_count == raw.primary_count
    trace = replay_assignment(c, closed, enforce_closure=False)
    assert trace.final_state.number == c.final_state

    # dropping any matched receive fix breaks the replay
    for i, v in enumerate(closed.choices):
        if v.receive_mutation:
            broken = list(closed.choices)
            broken[i] = RuleVariant(v.rule, v.skipped_actions, v.send_mutation, v.blocked_actions)
            try:
                replay_assignment(c, MutationAssignment(tuple(broken)), enforce_closure=False)
            except Exception:
                pass
            else:
                raise AssertionError(f"matched receive at rule {i} was not needed")


@SLOW
@given(st.data())
def test_blocked_actions_have_a_skipped_prerequisite(compiled_corpus, data):
    c = compiled_corpus[data.draw(st.sampled_from(["cutting", "lateral"]))]
    closed = matching_closure(data.draw(assignments(c)), c)
    performed = set()
    for v in closed.choices:
        for pos, act in enumerate(v.rule.actions):
            key = (act.agent, act.verb, act.object)
            prereqs = [
                (p.agent, p.verb, p.object)
                for d, ps in c.dependency_graph.items() if (d.agent, d.verb, d.object) == key
                for p in ps
            ]
            if pos in v.blocked_actions:
                assert any(p not in performed for p in prereqs)
            elif pos not in v.skipped_actions:
                assert all(p in performed for p in prereqs)
                performed.add(key)


@st.composite
def relay_ceremonies(draw):
    """A message relay over 2-4 agents; every hop may carry one action."""
    n_agents = draw(st.integers(2, 4))
    agents = [f"P{i}" for i in range(n_agents)]
    hops = draw(st.integers(1, 5))
    path = [draw(st.sampled_from(agents))]
    for _ in range(hops):
        path.append(draw(st.sampled_from([a for a in agents if a != path[-1]])))
    scripts = {a: ["start"] for a in dict.fromkeys(path)}
    for i, (src, dst) in enumerate(zip(path, path[1:])):
        if draw(st.booleans()):
            scripts[src].append(f"action act{i}(thing)")
        scripts[src].append(f"send {dst} m{i}")
        scripts[dst].append(f"recv {src} m{i}")
    lines = ["ceremony relay", "agents: " + ", ".join(scripts)]
    for a, evs in scripts.items():
        lines.append(f"role {a}:")
        lines += ["  " + e for e in evs]
    return "\n".join(lines) + "\n", hops


@SLOW
@given(relay_ceremonies())
def test_generated_ceremonies(case):
    text, hops = case
    spec = parse_ceremony(text)
    assert parse_ceremony(format_ceremony(spec)) == spec
    c = compile_ceremony(spec)
    assert sum(r.send is not None for r in c.rules) == hops
    for budget in (0, 1, 2):
        cfg = ExploreConfig(budget=budget)
        assert diff_trace_sets(enumerate_traces(c, cfg), brute_force_enumerate(c, cfg)).equivalent


def test_every_kind_subset_enumerates(cutting):
    for r in range(4):
        for kinds in itertools.combinations(sorted(ALL_KINDS), r):
            ts = enumerate_traces(cutting, ExploreConfig(kinds=kinds, budget=1))
            assert all(t.assignment.primary_kinds() <= set(kinds) for t in ts)
