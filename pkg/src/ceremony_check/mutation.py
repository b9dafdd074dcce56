"""Mutated transition rules and the matching-mutation closure.

A :class:`RuleVariant` is a transition rule with some of its elements
altered.  Primary alterations model a mistake made voluntarily by the rule's
agent (skip an action, skip the send, send the negated message); matched
alterations are the forced downstream consequences that keep the execution
going (skip the receive, accept the negated message, skip an action whose
physical prerequisite never happened).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .compiler import CompiledCeremony, TransitionRule
from .language import ActionPattern
from .model import Receive, ScriptEvent, Send, SurgicalAction, negate

SKIP_ACTION = "skip_action"
SKIP_SEND = "skip_send"
REPLACE_SEND = "replace_send"
ALL_KINDS = frozenset({SKIP_ACTION, SKIP_SEND, REPLACE_SEND})

MATCHED_SKIP_RECEIVE = "matched_skip_receive"
MATCHED_REPLACE_RECEIVE = "matched_replace_receive"
MATCHED_SKIP_ACTION = "matched_skip_action"

_SEND_RANK = {None: 0, SKIP_SEND: 1, REPLACE_SEND: 2}


class Conflict(Exception):
    """A pinned matched mutation disagrees with what the primaries force."""


@dataclass(frozen=True)
class RuleVariant:
    rule: TransitionRule
    skipped_actions: tuple[int, ...] = ()
    send_mutation: str | None = None
    blocked_actions: tuple[int, ...] = ()
    receive_mutation: str | None = None

    def __post_init__(self):
        n = len(self.rule.actions)
        for pos in self.skipped_actions + self.blocked_actions:
            if not 0 <= pos < n:
                raise ValueError(f"action position {pos} out of range for {self.rule}")
        if set(self.skipped_actions) & set(self.blocked_actions):
            raise ValueError("an action is either skipped or blocked, not both")
        if self.send_mutation not in (None, SKIP_SEND, REPLACE_SEND):
            raise ValueError(f"unknown send mutation {self.send_mutation!r}")
        if self.send_mutation and self.rule.send is None:
            raise ValueError("send mutation on a rule without a send")
        if self.receive_mutation not in (None, MATCHED_SKIP_RECEIVE, MATCHED_REPLACE_RECEIVE):
            raise ValueError(f"unknown receive mutation {self.receive_mutation!r}")
        if self.receive_mutation and self.rule.receive is None:
            raise ValueError("receive mutation on a rule without a receive")

    @property
    def primary_count(self) -> int:
        return len(self.skipped_actions) + (self.send_mutation is not None)

    @property
    def is_primary(self) -> bool:
        return self.primary_count > 0

    @property
    def is_original(self) -> bool:
        return not self.mutations()

    @property
    def key(self) -> tuple:
        return (self.skipped_actions, self.send_mutation, self.blocked_actions, self.receive_mutation)

    def mutations(self) -> list[tuple[str, int | None, bool]]:
        """``(kind, action position or None, is_primary)`` for every altered element."""
        out: list[tuple[str, int | None, bool]] = []
        if self.receive_mutation:
            out.append((self.receive_mutation, None, False))
        for pos in range(len(self.rule.actions)):
            if pos in self.skipped_actions:
                out.append((SKIP_ACTION, pos, True))
            elif pos in self.blocked_actions:
                out.append((MATCHED_SKIP_ACTION, pos, False))
        if self.send_mutation:
            out.append((self.send_mutation, None, True))
        return out

    @property
    def kind(self) -> str:
        parts = [k if pos is None else f"{k}({pos})" for k, pos, _ in self.mutations()]
        return "+".join(parts) or "original"

    def elements(self) -> Iterator[tuple[ScriptEvent, bool, str | None]]:
        """Each event of the base rule as ``(event as executed, kept, mutation label)``."""
        rule = self.rule
        pos = -1
        for ev in rule.events:
            if isinstance(ev, Receive):
                if self.receive_mutation == MATCHED_SKIP_RECEIVE:
                    yield ev, False, MATCHED_SKIP_RECEIVE
                elif self.receive_mutation == MATCHED_REPLACE_RECEIVE:
                    yield Receive(ev.sender, ev.receiver, negate(ev.expected)), True, MATCHED_REPLACE_RECEIVE
                else:
                    yield ev, True, None
            elif isinstance(ev, Send):
                if self.send_mutation == SKIP_SEND:
                    yield ev, False, SKIP_SEND
                elif self.send_mutation == REPLACE_SEND:
                    yield Send(ev.sender, ev.receiver, negate(ev.message)), True, REPLACE_SEND
                else:
                    yield ev, True, None
            elif isinstance(ev, SurgicalAction):
                pos += 1
                if pos in self.skipped_actions:
                    yield ev, False, SKIP_ACTION
                elif pos in self.blocked_actions:
                    yield ev, False, MATCHED_SKIP_ACTION
                else:
                    yield ev, True, None
            else:
                yield ev, True, None


def generate_variants(rule: TransitionRule, kinds: Iterable[str] = ALL_KINDS) -> list[RuleVariant]:
    """All primary variants of ``rule`` using the enabled ``kinds``.

    Order: original, single action skips by position, skip_send, replace_send,
    then the combinations (action subset, send mutation) in lexicographic order.
    """
    kinds = frozenset(kinds)
    unknown = kinds - ALL_KINDS
    if unknown:
        raise ValueError(f"unknown mutation kinds: {sorted(unknown)}")
    positions = range(len(rule.actions)) if SKIP_ACTION in kinds else range(0)
    sends: list[str | None] = [None]
    if rule.send is not None:
        sends += [k for k in (SKIP_SEND, REPLACE_SEND) if k in kinds]

    subsets = [c for r in range(len(positions) + 1) for c in combinations(positions, r)]
    singles = [(s, None) for s in subsets if len(s) == 1] + [((), m) for m in sends if m]
    combos = sorted(
        ((s, m) for s in subsets for m in sends if len(s) + (m is not None) >= 2),
        key=lambda sm: (sm[0], _SEND_RANK[sm[1]]),
    )
    return [RuleVariant(rule)] + [
        RuleVariant(rule, skipped_actions=s, send_mutation=m) for s, m in singles + combos
    ]


@dataclass(frozen=True)
class MutationAssignment:
    """One variant per rule, indexed by premise index."""

    choices: tuple[RuleVariant, ...]

    @classmethod
    def original(cls, compiled: CompiledCeremony) -> MutationAssignment:
        return cls(tuple(RuleVariant(r) for r in compiled.rules))

    @classmethod
    def from_partial(
        cls, compiled: CompiledCeremony, partial: Mapping[int, RuleVariant]
    ) -> MutationAssignment:
        """Fill unspecified rule indices with the original rule."""
        for idx, v in partial.items():
            if not 0 <= idx < len(compiled.rules) or v.rule != compiled.rules[idx]:
                raise ValueError(f"variant for rule {idx} does not belong to that rule")
        return cls(tuple(partial.get(i, RuleVariant(r)) for i, r in enumerate(compiled.rules)))

    @property
    def primary_count(self) -> int:
        return sum(v.primary_count for v in self.choices)

    @property
    def key(self) -> tuple:
        return tuple(v.key for v in self.choices)

    def primary_kinds(self) -> set[str]:
        return {k for v in self.choices for k, _, primary in v.mutations() if primary}

    def to_records(self) -> list[dict]:
        out = []
        for i, v in enumerate(self.choices):
            for kind, pos, primary in v.mutations():
                rec = {"rule": i, "kind": kind, "primary": primary}
                if pos is not None:
                    rec["position"] = pos
                out.append(rec)
        return out

    @classmethod
    def from_records(cls, compiled: CompiledCeremony, records: Iterable[dict]) -> MutationAssignment:
        fields: dict[int, dict] = {}
        for rec in records:
            f = fields.setdefault(rec["rule"], {"skipped_actions": [], "blocked_actions": []})
            kind = rec["kind"]
            if kind == SKIP_ACTION:
                f["skipped_actions"].append(rec["position"])
            elif kind == MATCHED_SKIP_ACTION:
                f["blocked_actions"].append(rec["position"])
            elif kind in (SKIP_SEND, REPLACE_SEND):
                f["send_mutation"] = kind
            elif kind in (MATCHED_SKIP_RECEIVE, MATCHED_REPLACE_RECEIVE):
                f["receive_mutation"] = kind
            else:
                raise ValueError(f"unknown mutation kind {kind!r}")
        partial = {}
        for i, f in fields.items():
            f["skipped_actions"] = tuple(sorted(f["skipped_actions"]))
            f["blocked_actions"] = tuple(sorted(f["blocked_actions"]))
            partial[i] = RuleVariant(compiled.rules[i], **f)
        return cls.from_partial(compiled, partial)


def _receiving_rule(compiled: CompiledCeremony, send: Send) -> int | None:
    for rule in compiled.rules:
        r = rule.receive
        if r and (r.sender, r.receiver, r.expected) == (send.sender, send.receiver, send.message):
            return rule.premise_index
    return None


def matching_closure(
    assignment: MutationAssignment | Mapping[int, RuleVariant], compiled: CompiledCeremony
) -> MutationAssignment:
    """Add the matched mutations that the primary ones force.

    * a skipped send makes its receiver skip the receive;
    * a replaced send makes its receiver expect the negated atom;
    * an action whose prerequisite was never performed (every earlier
      occurrence skipped) is skipped too, transitively.

    Raises :class:`Conflict` when ``assignment`` already pins matched
    mutations that differ from the forced ones.
    """
    if not isinstance(assignment, MutationAssignment):
        assignment = MutationAssignment.from_partial(compiled, assignment)
    if len(assignment.choices) != len(compiled.rules):
        raise ValueError("assignment does not cover the compiled rules")

    receive_fix: dict[int, str] = {}
    for v in assignment.choices:
        if v.send_mutation:
            target = _receiving_rule(compiled, v.rule.send)
            if target is not None:
                receive_fix[target] = (
                    MATCHED_SKIP_RECEIVE if v.send_mutation == SKIP_SEND else MATCHED_REPLACE_RECEIVE
                )

    performed: dict[ActionPattern, list[bool]] = {}
    out = []
    for i, v in enumerate(assignment.choices):
        if v.rule != compiled.rules[i]:
            raise ValueError(f"variant at index {i} belongs to another rule")
        blocked = []
        for pos, act in enumerate(v.rule.actions):
            pat = ActionPattern(act.agent, act.verb, act.object)
            done = pos not in v.skipped_actions
            if done:
                for pre in compiled.dependency_graph.get(pat, ()):
                    history = performed.get(pre)
                    if history and not any(history):
                        done = False
                        blocked.append(pos)
                        break
            performed.setdefault(pat, []).append(done)
        want = (tuple(blocked), receive_fix.get(i))
        pinned = (v.blocked_actions, v.receive_mutation)
        if pinned != ((), None) and pinned != want:
            raise Conflict(
                f"rule {i}: pinned {v.kind} but the primary mutations force "
                f"blocked={list(want[0])} receive={want[1]}"
            )
        out.append(replace(v, blocked_actions=want[0], receive_mutation=want[1]))
    return MutationAssignment(tuple(out))
