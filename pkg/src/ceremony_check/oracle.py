"""Brute-force reference enumeration, used to cross-check the explorer.

Nothing here calls ``generate_variants`` or ``matching_closure``.  Primary
mutations are drawn as raw combinations of single mutation elements, and
the matched mutations are found by simulate-and-repair: run the assignment,
look at how it breaks, patch the one rule that broke, run again.  Execution
itself goes through :func:`ceremony_check.model.apply_rule` so the oracle has
no private semantics.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

from .compiler import CompiledCeremony
from .explorer import ExploreConfig, TraceSet
from .language import ActionPattern
from .model import CheckFailure, Deadlock, Trace, apply_rule
from .mutation import (
    MATCHED_REPLACE_RECEIVE,
    MATCHED_SKIP_RECEIVE,
    REPLACE_SEND,
    SKIP_ACTION,
    SKIP_SEND,
    MutationAssignment,
    RuleVariant,
)

MAX_RULES = 12
MAX_BUDGET = 3


class GuardExceeded(Exception):
    pass


@dataclass
class OracleReport:
    assignments_examined: int
    executable: int
    mismatches: list[tuple[str, str | None, str | None]] = field(default_factory=list)

    @property
    def equivalent(self) -> bool:
        return not self.mismatches


def _elements(compiled: CompiledCeremony, kinds) -> list[tuple]:
    out = []
    for rule in compiled.rules:
        i = rule.premise_index
        if SKIP_ACTION in kinds:
            out += [(i, SKIP_ACTION, p) for p in range(len(rule.actions))]
        if rule.send is not None:
            out += [(i, k, None) for k in (SKIP_SEND, REPLACE_SEND) if k in kinds]
    return out


def _guard(compiled: CompiledCeremony, config: ExploreConfig) -> list[tuple]:
    elements = _elements(compiled, config.kinds)
    budget = config.budget
    if len(compiled.rules) > MAX_RULES or budget is None or budget > MAX_BUDGET:
        size = "unbounded" if budget is None else sum(
            comb(len(elements), k) for k in range(budget + 1)
        )
        raise GuardExceeded(
            f"oracle refuses {compiled.name}: {len(compiled.rules)} rules (max {MAX_RULES}), "
            f"budget {budget} (max {MAX_BUDGET}), {len(elements)} primary elements, "
            f"{size} raw combinations"
        )
    return elements


def _simulate(compiled: CompiledCeremony, primaries: dict[int, dict]) -> Trace | None:
    """Repair loop; None when the assignment cannot be made to run."""
    receive_fix: dict[int, str] = {}
    prereqs: dict[ActionPattern, list[ActionPattern]] = {}
    for dep, pre in compiled.spec.dependencies:
        prereqs.setdefault(dep, []).append(pre)

    while True:
        state = compiled.initial_state()
        states = [state]
        steps = []
        variants = []
        done: set[ActionPattern] = set()
        failure = None
        for rule in compiled.rules:
            i = rule.premise_index
            mine = primaries.get(i, {})
            skipped = mine.get("skipped", ())
            blocked = []
            for pos, act in enumerate(rule.actions):
                pat = ActionPattern(act.agent, act.verb, act.object)
                if pos in skipped:
                    continue
                if any(p not in done for p in prereqs.get(pat, ())):
                    blocked.append(pos)
                else:
                    done.add(pat)
            variant = RuleVariant(
                rule,
                skipped_actions=tuple(sorted(skipped)),
                send_mutation=mine.get("send"),
                blocked_actions=tuple(blocked),
                receive_mutation=receive_fix.get(i),
            )
            try:
                state, new = apply_rule(state, variant, first_step=len(steps))
            except Deadlock:
                failure = (i, MATCHED_SKIP_RECEIVE)
                break
            except CheckFailure:
                failure = (i, MATCHED_REPLACE_RECEIVE)
                break
            variants.append(variant)
            steps.extend(new)
            states.append(state)
        if failure is None:
            return Trace(
                tuple(steps), MutationAssignment(tuple(variants)), state, tuple(states), compiled.agents
            )
        i, fix = failure
        if i in receive_fix:
            return None
        receive_fix[i] = fix


def brute_force_enumerate(
    compiled: CompiledCeremony, config: ExploreConfig, report: OracleReport | None = None
) -> TraceSet:
    """Every executable repaired assignment with at most ``budget`` primary mutations.

    Raises :class:`GuardExceeded` for more than 12 rules or a budget above 3.
    """
    elements = _guard(compiled, config)
    traces = []
    examined = 0
    for k in range(config.budget + 1):
        for combo in combinations(elements, k):
            primaries: dict[int, dict] = {}
            clash = False
            for i, kind, pos in combo:
                mine = primaries.setdefault(i, {"skipped": set()})
                if kind == SKIP_ACTION:
                    mine["skipped"].add(pos)
                elif "send" in mine:
                    clash = True
                else:
                    mine["send"] = kind
            if clash:
                continue
            examined += 1
            trace = _simulate(compiled, primaries)
            if trace is not None:
                traces.append(trace)
    traces.sort(key=Trace.canonical)
    if report is not None:
        report.assignments_examined += examined
        report.executable += len(traces)
    return TraceSet(compiled.name, config, tuple(traces), compiled.agents)


def _assignment_key(trace: Trace) -> str:
    return json.dumps(trace.assignment.to_records(), sort_keys=True)


def diff_trace_sets(a: TraceSet, b: TraceSet) -> OracleReport:
    """Symmetric difference of two trace sets, keyed by assignment.

    ``assignments_examined`` counts the union of assignments, ``executable``
    those present in both sets with identical steps.
    """
    if a.ceremony != b.ceremony:
        raise ValueError(f"different ceremonies: {a.ceremony} vs {b.ceremony}")
    if (a.config.kinds, a.config.budget) != (b.config.kinds, b.config.budget):
        raise ValueError("trace sets were enumerated under different configurations")
    left = {_assignment_key(t): t.canonical() for t in a.traces}
    right = {_assignment_key(t): t.canonical() for t in b.traces}
    mismatches = []
    agree = 0
    for key in sorted(left.keys() | right.keys()):
        x, y = left.get(key), right.get(key)
        if x == y:
            agree += 1
        else:
            mismatches.append((key, x, y))
    return OracleReport(len(left.keys() | right.keys()), agree, mismatches)
