"""Role-scripts to numbered transition rules.

Each script is cut into blocks of the shape ``(Start | Receive) ; action* ; Send?``
and the blocks of all agents are arranged into the single causal order the
ceremony admits.  Block ``k`` of that order becomes the rule taking state
``k`` to state ``k + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .language import ActionPattern, CeremonySpec, SpecError, errors_only, validate_spec
from .model import (
    CeremonyState,
    Receive,
    ScriptEvent,
    Send,
    Start,
    SurgicalAction,
    initial_state,
)


class CompileError(Exception):
    pass


class MalformedScript(CompileError):
    pass


class AmbiguousOrder(CompileError):
    def __init__(self, first: tuple[str, int], second: tuple[str, int]):
        super().__init__(
            f"blocks {first[0]}#{first[1]} and {second[0]}#{second[1]} are not causally "
            "ordered; the ceremony admits more than one interleaving"
        )
        self.pair = (first, second)


class CausalCycle(CompileError):
    pass


@dataclass(frozen=True)
class TransitionRule:
    premise_index: int
    agent: str
    receive: Receive | None = None
    actions: tuple[SurgicalAction, ...] = ()
    send: Send | None = None
    start: bool = False

    def __post_init__(self):
        if self.start and self.receive is not None:
            raise ValueError("a rule opens with Start or with a Receive, not both")
        if not (self.start or self.receive or self.actions or self.send):
            raise ValueError("empty transition rule")

    @property
    def conclusion_index(self) -> int:
        return self.premise_index + 1

    @property
    def events(self) -> tuple[ScriptEvent, ...]:
        head: tuple = (Start(self.agent),) if self.start else ()
        if self.receive:
            head += (self.receive,)
        return head + self.actions + ((self.send,) if self.send else ())

    def __str__(self):
        body = " ; ".join(str(e) for e in self.events)
        return f"{self.premise_index} --[{body}]--> {self.conclusion_index}"


@dataclass(frozen=True)
class CompiledCeremony:
    spec: CeremonySpec
    rules: tuple[TransitionRule, ...]
    dependency_graph: dict[ActionPattern, frozenset[ActionPattern]] = field(default_factory=dict)

    @property
    def final_state(self) -> int:
        return len(self.rules)

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def agents(self) -> tuple[str, ...]:
        return self.spec.agents

    def initial_state(self) -> CeremonyState:
        return initial_state(self.spec.send_sets, self.spec.agents)


Block = tuple[ScriptEvent, ...]


def segment_script(events: tuple[ScriptEvent, ...], agent: str = "?") -> list[Block]:
    """Cut one role-script into rule blocks.

    A Start directly followed by a Receive opens no block of its own: the
    agent simply waits for its first message.
    """
    blocks: list[list[ScriptEvent]] = []
    current: list[ScriptEvent] | None = None
    closed = True
    for i, ev in enumerate(events):
        if isinstance(ev, Start):
            if i + 1 < len(events) and isinstance(events[i + 1], Receive):
                continue
            current = [ev]
            blocks.append(current)
            closed = False
        elif isinstance(ev, Receive):
            current = [ev]
            blocks.append(current)
            closed = False
        elif current is None or closed:
            what = "two sends" if isinstance(ev, Send) else f"{ev} after a send"
            raise MalformedScript(
                f"role {agent}: {what} with no intervening receive (event {i})"
            )
        else:
            current.append(ev)
            if isinstance(ev, Send):
                closed = True
    return [tuple(b) for b in blocks]


def segment_scripts(spec: CeremonySpec) -> dict[str, list[Block]]:
    return {a: segment_script(spec.scripts[a].events, a) for a in spec.agents}


def _block_rule(index: int, agent: str, block: Block) -> TransitionRule:
    return TransitionRule(
        premise_index=index,
        agent=agent,
        receive=next((e for e in block if isinstance(e, Receive)), None),
        actions=tuple(e for e in block if isinstance(e, SurgicalAction)),
        send=next((e for e in block if isinstance(e, Send)), None),
        start=any(isinstance(e, Start) for e in block),
    )


def linearize(spec: CeremonySpec, blocks: dict[str, list[Block]]) -> CompiledCeremony:
    """Arrange all blocks into the unique order compatible with causality."""
    producer: dict[tuple, tuple[str, int]] = {}
    for agent, bs in blocks.items():
        for j, b in enumerate(bs):
            for e in b:
                if isinstance(e, Send):
                    producer[(e.sender, e.receiver, e.message)] = (agent, j)

    placed: set[tuple[str, int]] = set()
    cursor = {a: 0 for a in spec.agents}
    rules: list[TransitionRule] = []
    total = sum(len(bs) for bs in blocks.values())
    while len(rules) < total:
        ready = []
        for agent in spec.agents:
            j = cursor[agent]
            if j >= len(blocks[agent]):
                continue
            rcv = next((e for e in blocks[agent][j] if isinstance(e, Receive)), None)
            if rcv is None or producer.get((rcv.sender, rcv.receiver, rcv.expected)) in placed:
                ready.append((agent, j))
        if not ready:
            waiting = [f"{a}#{cursor[a]}" for a in spec.agents if cursor[a] < len(blocks[a])]
            raise CausalCycle("no block can run next; waiting: " + ", ".join(waiting))
        if len(ready) > 1:
            raise AmbiguousOrder(ready[0], ready[1])
        agent, j = ready[0]
        rules.append(_block_rule(len(rules), agent, blocks[agent][j]))
        placed.add((agent, j))
        cursor[agent] += 1

    graph: dict[ActionPattern, set[ActionPattern]] = {}
    for dependent, prereq in spec.dependencies:
        graph.setdefault(dependent, set()).add(prereq)
    return CompiledCeremony(spec, tuple(rules), {k: frozenset(v) for k, v in graph.items()})


def _check_dependency_order(compiled: CompiledCeremony):
    seen: set[ActionPattern] = set()
    for rule in compiled.rules:
        for act in rule.actions:
            pat = ActionPattern(act.agent, act.verb, act.object)
            missing = [p for p in compiled.dependency_graph.get(pat, ()) if p not in seen]
            if missing:
                raise CompileError(
                    f"prerequisite {missing[0]} does not precede dependent action {pat} "
                    f"(rule {rule.premise_index})"
                )
            seen.add(pat)


def compile_ceremony(spec: CeremonySpec) -> CompiledCeremony:
    """Validate, segment and linearize ``spec``; checks the unmutated replay succeeds."""
    errors = errors_only(validate_spec(spec))
    if errors:
        raise SpecError(errors)
    compiled = linearize(spec, segment_scripts(spec))
    _check_dependency_order(compiled)

    from .mutation import MutationAssignment
    from .explorer import replay_assignment
    from .model import ReplayFailure

    try:
        replay_assignment(compiled, MutationAssignment.original(compiled), enforce_closure=False)
    except ReplayFailure as exc:
        raise CompileError(f"the unmutated ceremony does not run: {exc}") from exc
    return compiled
