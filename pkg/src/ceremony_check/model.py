"""Ceremony object model: messages, role-script events, knowledge, states and traces.

Everything here is an immutable value.  ``apply_rule`` is the single execution
step: it takes the current global state and one (possibly mutated) transition
rule and either returns the successor state plus the trace steps it recorded,
or raises :class:`Deadlock` / :class:`CheckFailure`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Union

if TYPE_CHECKING:
    from .mutation import MutationAssignment, RuleVariant

NEGATION_PREFIX = "not_"


@dataclass(frozen=True, order=True)
class MessageAtom:
    """A constant message, possibly negated."""

    name: str
    negated: bool = False

    def __post_init__(self):
        if not self.name:
            raise ValueError("message name must be non-empty")
        if self.name.startswith(NEGATION_PREFIX):
            raise ValueError(
                f"message name {self.name!r} carries the negation marker; "
                "use negated=True instead"
            )

    @classmethod
    def parse(cls, text: str) -> MessageAtom:
        """Read ``m`` or ``not_m`` (``not_not_m`` collapses to ``m``)."""
        negated = False
        while text.startswith(NEGATION_PREFIX):
            text = text[len(NEGATION_PREFIX):]
            negated = not negated
        return cls(text, negated)

    def __str__(self):
        return NEGATION_PREFIX + self.name if self.negated else self.name


def negate(m: MessageAtom) -> MessageAtom:
    return MessageAtom(m.name, not m.negated)


@dataclass(frozen=True)
class Start:
    agent: str

    def __str__(self):
        return f"Start({self.agent})"


@dataclass(frozen=True)
class Send:
    sender: str
    receiver: str
    message: MessageAtom

    def __str__(self):
        return f"Snd({self.sender}, {self.receiver}, {self.message})"


@dataclass(frozen=True)
class Receive:
    # the expected atom fuses the ?X binding with its equality check
    sender: str
    receiver: str
    expected: MessageAtom

    def __str__(self):
        return f"Rcv({self.sender}, {self.receiver}, {self.expected})"


@dataclass(frozen=True)
class SurgicalAction:
    agent: str
    verb: str
    object: str

    @property
    def label(self) -> str:
        return f"{self.verb}({self.object})"

    def __str__(self):
        return f"s_action({self.agent}, {self.verb}, {self.object})"


ScriptEvent = Union[Start, Send, Receive, SurgicalAction]


def event_agent(event: ScriptEvent) -> str:
    """The agent whose role-script contains ``event``."""
    if isinstance(event, Send):
        return event.sender
    if isinstance(event, Receive):
        return event.receiver
    return event.agent


@dataclass(frozen=True)
class RoleScript:
    agent: str
    events: tuple[ScriptEvent, ...]


@dataclass(frozen=True)
class Knowledge:
    agent: str
    atoms: frozenset[MessageAtom] = frozenset()


def extend_knowledge(k: Knowledge, m: MessageAtom) -> Knowledge:
    if m in k.atoms:
        return k
    return Knowledge(k.agent, k.atoms | {m})


Channel = tuple[str, str, MessageAtom]


@dataclass(frozen=True)
class CeremonyState:
    """Global state ``{i; K_Ag^i}`` plus the pool of sent-but-unreceived messages.

    ``in_flight`` is ordered; lookups are FIFO per (sender, receiver) pair.
    """

    number: int
    knowledge: tuple[Knowledge, ...]
    in_flight: tuple[Channel, ...] = ()

    def knowledge_of(self, agent: str) -> Knowledge:
        for k in self.knowledge:
            if k.agent == agent:
                return k
        raise KeyError(agent)


@dataclass(frozen=True)
class TraceStep:
    step: int
    rule_index: int
    event: ScriptEvent
    mutated: bool = False
    mutation_kind: str | None = None

    def __post_init__(self):
        if self.mutated != (self.mutation_kind is not None):
            raise ValueError("mutation_kind must be present iff the step is mutated")

    def to_record(self) -> dict:
        """Flat dict in the exported JSON step layout."""
        ev = self.event
        rec: dict = {"step": self.step, "rule": self.rule_index}
        if isinstance(ev, Start):
            rec.update(kind="start", agent=ev.agent)
        elif isinstance(ev, SurgicalAction):
            rec.update(kind="action", agent=ev.agent, verb=ev.verb, object=ev.object)
        else:
            msg = ev.message if isinstance(ev, Send) else ev.expected
            rec.update(
                kind="snd" if isinstance(ev, Send) else "rcv",
                agent=event_agent(ev),
                sender=ev.sender,
                receiver=ev.receiver,
                message=msg.name,
                negated=msg.negated,
            )
        rec["mutated"] = self.mutated
        if self.mutated:
            rec["mutation"] = self.mutation_kind
        return rec


@dataclass(frozen=True)
class Trace:
    steps: tuple[TraceStep, ...]
    assignment: MutationAssignment
    final_state: CeremonyState
    states: tuple[CeremonyState, ...] = field(default=(), compare=False)
    agents: tuple[str, ...] = field(default=(), compare=False)

    def canonical(self) -> str:
        """Stable serialization of assignment and steps (used for set comparisons)."""
        return json.dumps(
            {
                "assignment": self.assignment.to_records(),
                "steps": [s.to_record() for s in self.steps],
            },
            sort_keys=True,
            separators=(",", ":"),
        )


class ReplayFailure(Exception):
    """A retained Receive could not be satisfied."""

    def __init__(self, rule_index: int, event: Receive, detail: str):
        super().__init__(f"rule {rule_index}: {detail} at {event}")
        self.rule_index = rule_index
        self.event = event


class Deadlock(ReplayFailure):
    pass


class CheckFailure(ReplayFailure):
    def __init__(self, rule_index: int, event: Receive, received: MessageAtom):
        super().__init__(
            rule_index, event, f"check failed, received {received} but expected {event.expected}"
        )
        self.received = received


def initial_state(send_sets: dict[str, Iterable[MessageAtom]], agents: Iterable[str]) -> CeremonyState:
    """State 0: each agent initially knows the messages it is going to send."""
    return CeremonyState(
        0, tuple(Knowledge(a, frozenset(send_sets.get(a, ()))) for a in agents)
    )


def apply_rule(
    state: CeremonyState, variant: RuleVariant, first_step: int = 0
) -> tuple[CeremonyState, tuple[TraceStep, ...]]:
    """Apply one transition rule (in the form chosen by ``variant``) to ``state``.

    Retained events are recorded as trace steps numbered from ``first_step``.
    Raises :class:`Deadlock` when a retained Receive finds nothing in flight
    on its channel, :class:`CheckFailure` when the head of the channel holds
    a different atom than expected.
    """
    rule = variant.rule
    if state.number != rule.premise_index:
        raise ValueError(
            f"rule {rule.premise_index} is not applicable in state {state.number}"
        )
    knowledge = list(state.knowledge)
    in_flight = list(state.in_flight)
    steps = []
    for event, kept, label in variant.elements():
        if not kept:
            continue
        if isinstance(event, Receive):
            pos = next(
                (i for i, (s, r, _) in enumerate(in_flight)
                 if (s, r) == (event.sender, event.receiver)),
                None,
            )
            if pos is None:
                raise Deadlock(rule.premise_index, event, "nothing in flight")
            received = in_flight[pos][2]
            if received != event.expected:
                raise CheckFailure(rule.premise_index, event, received)
            del in_flight[pos]
            knowledge = [
                extend_knowledge(k, received) if k.agent == event.receiver else k
                for k in knowledge
            ]
        elif isinstance(event, Send):
            in_flight.append((event.sender, event.receiver, event.message))
        steps.append(
            TraceStep(first_step + len(steps), rule.premise_index, event, label is not None, label)
        )
    return CeremonyState(state.number + 1, tuple(knowledge), tuple(in_flight)), tuple(steps)
