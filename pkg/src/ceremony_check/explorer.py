"""Replay of mutation assignments and exhaustive enumeration of executable traces."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator

from .compiler import CompiledCeremony
from .model import Trace, apply_rule
from .mutation import ALL_KINDS, MutationAssignment, RuleVariant, generate_variants, matching_closure

FIRST_VIOLATION = "first_violation"
ALL_TRACES = "all_traces"
DEFAULT_BUDGET = 2
THREADS_ENV = "CEREMONY_CHECK_THREADS"


@dataclass(frozen=True)
class ExploreConfig:
    kinds: frozenset[str] = ALL_KINDS
    budget: int | None = DEFAULT_BUDGET
    collect: str = FIRST_VIOLATION

    def __post_init__(self):
        object.__setattr__(self, "kinds", frozenset(self.kinds))
        if self.kinds - ALL_KINDS:
            raise ValueError(f"unknown mutation kinds: {sorted(self.kinds - ALL_KINDS)}")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.collect not in (FIRST_VIOLATION, ALL_TRACES):
            raise ValueError(f"unknown collect mode {self.collect!r}")


@dataclass(frozen=True)
class TraceSet:
    ceremony: str
    config: ExploreConfig
    traces: tuple[Trace, ...]
    agents: tuple[str, ...] = field(default=(), compare=False)

    def __len__(self):
        return len(self.traces)

    def __iter__(self):
        return iter(self.traces)


def replay_assignment(
    compiled: CompiledCeremony, assignment: MutationAssignment, enforce_closure: bool = True
) -> Trace:
    """Run every rule in state order under ``assignment``.

    With ``enforce_closure`` the matched mutations are filled in first.
    Without it the assignment is run as given and a missing or wrong message
    surfaces as :class:`~ceremony_check.model.Deadlock` or
    :class:`~ceremony_check.model.CheckFailure`.
    """
    if enforce_closure:
        assignment = matching_closure(assignment, compiled)
    state = compiled.initial_state()
    states = [state]
    steps = []
    for variant in assignment.choices:
        state, new = apply_rule(state, variant, first_step=len(steps))
        steps.extend(new)
        states.append(state)
    return Trace(tuple(steps), assignment, state, tuple(states), compiled.agents)


def primary_assignments(
    compiled: CompiledCeremony, config: ExploreConfig
) -> Iterator[tuple[RuleVariant, ...]]:
    """Depth-first over rule indices, variants in generation order, within budget."""
    per_rule = [generate_variants(r, config.kinds) for r in compiled.rules]

    def walk(i: int, remaining: int | None):
        if i == len(per_rule):
            yield ()
            return
        for v in per_rule[i]:
            cost = v.primary_count
            if remaining is not None and cost > remaining:
                continue
            for rest in walk(i + 1, None if remaining is None else remaining - cost):
                yield (v,) + rest

    yield from walk(0, config.budget)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def enumerate_traces(compiled: CompiledCeremony, config: ExploreConfig = ExploreConfig()) -> TraceSet:
    """One trace per closed assignment whose primary mutations fit ``config``."""

    def run(choices):
        return replay_assignment(compiled, MutationAssignment(choices))

    workers = _workers()
    candidates = primary_assignments(compiled, config)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            traces = tuple(pool.map(run, candidates))
    else:
        traces = tuple(map(run, candidates))
    return TraceSet(compiled.name, config, traces, compiled.agents)
