"""Precedence and executability properties over trace sets."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .explorer import ALL_TRACES, TraceSet
from .language import EXISTS, FORALL, ActionPattern, PropertySpec
from .model import Trace

FOUND = "found"
MISSING = "missing"
MISORDERED = "misordered"


@dataclass(frozen=True)
class PrerequisiteStatus:
    pattern: ActionPattern
    status: str
    # step of the greedy match, or for a misordered one the step where it does occur
    position: int | None = None

    def to_record(self) -> dict:
        return {"pattern": str(self.pattern), "status": self.status, "position": self.position}


@dataclass(frozen=True)
class Witness:
    trace_index: int | None
    trace: Trace
    antecedent_position: int
    prerequisite_status: tuple[PrerequisiteStatus, ...] = ()

    @property
    def failing(self) -> list[PrerequisiteStatus]:
        return [p for p in self.prerequisite_status if p.status != FOUND]

    def to_record(self) -> dict:
        return {
            "trace": self.trace_index,
            "antecedent_position": self.antecedent_position,
            "prerequisites": [p.to_record() for p in self.prerequisite_status],
        }


@dataclass(frozen=True)
class Verdict:
    property: PropertySpec
    holds: bool
    witnesses: tuple[Witness, ...] = ()
    traces_checked: int = 0

    def __post_init__(self):
        if self.property.mode == FORALL and self.holds == bool(self.witnesses):
            raise ValueError("a forall verdict holds iff it has no witnesses")
        if self.property.mode == EXISTS and self.holds != bool(self.witnesses):
            raise ValueError("an exists verdict holds iff it has a witness")

    def to_record(self) -> dict:
        return {
            "property": self.property.name,
            "mode": self.property.mode,
            "holds": self.holds,
            "traces_checked": self.traces_checked,
            "witnesses": [w.to_record() for w in self.witnesses],
        }


@dataclass(frozen=True)
class PrecedenceResult:
    holds: bool
    witness: Witness | None = None


def _check_agents(prop: PropertySpec, agents: Iterable[str]):
    known = set(agents)
    if not known:
        return
    for pat in (prop.antecedent,) + prop.prerequisites:
        if pat.agent not in known:
            raise ValueError(f"property {prop.name} references unknown agent {pat.agent!r}")


def _scan(trace: Trace, prop: PropertySpec, l: int) -> tuple[bool, tuple[PrerequisiteStatus, ...]]:
    """Greedy earliest match of the prerequisites strictly before step ``l``."""
    events = [s.event for s in trace.steps]
    cursor = 0
    ok = True
    out = []
    for pat in prop.prerequisites:
        hit = next((i for i in range(cursor, l) if pat.matches(events[i])), None)
        if hit is not None:
            out.append(PrerequisiteStatus(pat, FOUND, hit))
            cursor = hit + 1
            continue
        ok = False
        anywhere = next((i for i, e in enumerate(events) if pat.matches(e)), None)
        out.append(PrerequisiteStatus(pat, MISSING if anywhere is None else MISORDERED, anywhere))
    return ok, tuple(out)


def check_precedence(
    trace: Trace, prop: PropertySpec, agents: Iterable[str] | None = None, trace_index: int | None = None
) -> PrecedenceResult:
    """Every antecedent occurrence needs its prerequisites in order before it.

    The witness describes the first occurrence that fails.
    """
    if prop.mode != FORALL:
        raise ValueError(f"{prop.name} is not a precedence property")
    _check_agents(prop, trace.agents if agents is None else agents)
    for l, step in enumerate(trace.steps):
        if not prop.antecedent.matches(step.event):
            continue
        ok, status = _scan(trace, prop, l)
        if not ok:
            return PrecedenceResult(False, Witness(trace_index, trace, l, status))
    return PrecedenceResult(True)


def check_executability(traceset: TraceSet, prop: PropertySpec) -> Verdict:
    if prop.mode != EXISTS:
        raise ValueError(f"{prop.name} is not an executability property")
    _check_agents(prop, traceset.agents)
    for idx, trace in enumerate(traceset.traces):
        for l, step in enumerate(trace.steps):
            if prop.antecedent.matches(step.event):
                return Verdict(prop, True, (Witness(idx, trace, l),), idx + 1)
    return Verdict(prop, False, (), len(traceset.traces))


def _check_forall(traceset: TraceSet, prop: PropertySpec, collect: str) -> Verdict:
    _check_agents(prop, traceset.agents)
    witnesses = []
    checked = 0
    for idx, trace in enumerate(traceset.traces):
        checked += 1
        res = check_precedence(trace, prop, agents=(), trace_index=idx)
        if not res.holds:
            witnesses.append(res.witness)
            if collect != ALL_TRACES:
                break
    return Verdict(prop, not witnesses, tuple(witnesses), checked)


def check_all(
    traceset: TraceSet, props: Iterable[PropertySpec], collect: str | None = None
) -> list[Verdict]:
    """One verdict per property, in the given order."""
    collect = collect or traceset.config.collect
    out = []
    for prop in props:
        if prop.mode == EXISTS:
            out.append(check_executability(traceset, prop))
        else:
            out.append(_check_forall(traceset, prop, collect))
    return out
