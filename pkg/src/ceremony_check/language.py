"""The ``.cer`` ceremony description language.

A file declares one ceremony: its agents, one role-script per agent, the
physical dependencies between surgical actions, and the properties to check::

    ceremony cutting
    agents: S, A, N

    role S:
      start
      action request(clips)
      send N clips_requested
      recv A clips_applied
      action cut(ureter)
      send A cut_done

    role A:
      start
      recv N clips_provided
      action apply(clips) requires provide(clips)
      ...

    property clip_before_cutting: on S.cut requires-before S.request(clips) < N.provide(clips) < A.apply(clips)

``send X m`` names the receiver, ``recv X m`` the sender.  A property without
``requires-before`` asks that *some* trace contains the event.  A role may
pin its message sets with ``messages: send a, b; recv c``; otherwise they are
derived from the script.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .model import (
    NEGATION_PREFIX,
    MessageAtom,
    Receive,
    RoleScript,
    ScriptEvent,
    Send,
    Start,
    SurgicalAction,
)

FORALL = "forall_traces"
EXISTS = "exists_trace"


@dataclass(frozen=True)
class ActionPattern:
    """``agent.verb(object)``; an omitted object matches any object."""

    agent: str | None
    verb: str
    object: str | None = None

    def matches(self, event) -> bool:
        return (
            isinstance(event, SurgicalAction)
            and event.agent == self.agent
            and event.verb == self.verb
            and (self.object is None or event.object == self.object)
        )

    def __str__(self):
        head = f"{self.agent}.{self.verb}" if self.agent else self.verb
        return head if self.object is None else f"{head}({self.object})"


@dataclass(frozen=True)
class PropertySpec:
    name: str
    mode: str
    antecedent: ActionPattern
    prerequisites: tuple[ActionPattern, ...] = ()

    def __post_init__(self):
        if self.mode not in (FORALL, EXISTS):
            raise ValueError(f"unknown property mode {self.mode!r}")
        if (self.mode == FORALL) != bool(self.prerequisites):
            raise ValueError("forall properties need prerequisites, exists properties take none")


@dataclass(frozen=True, order=True)
class Diagnostic:
    line: int
    column: int
    severity: str
    message: str

    @property
    def location(self) -> tuple[int, int]:
        return (self.line, self.column)

    def __str__(self):
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


class SpecError(Exception):
    """Raised when a ceremony file cannot be turned into a usable ceremony description."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = sorted(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class CeremonySpec:
    name: str
    agents: tuple[str, ...]
    send_sets: dict[str, frozenset[MessageAtom]]
    recv_sets: dict[str, frozenset[MessageAtom]]
    scripts: dict[str, RoleScript]
    dependencies: frozenset[tuple[ActionPattern, ActionPattern]] = frozenset()
    properties: tuple[PropertySpec, ...] = ()
    explicit_messages: frozenset[str] = frozenset()
    # (agent, event index) -> (line, column); ("property", name) -> (line, column)
    locations: dict = field(default_factory=dict, compare=False, repr=False)

    def location_of(self, agent: str, index: int) -> tuple[int, int]:
        return self.locations.get((agent, index), (0, 0))

    def prerequisites_of(self, pattern: ActionPattern) -> list[ActionPattern]:
        return sorted((p for d, p in self.dependencies if d == pattern), key=str)

    @property
    def message_atoms(self) -> frozenset[MessageAtom]:
        out: frozenset[MessageAtom] = frozenset()
        for s in list(self.send_sets.values()) + list(self.recv_sets.values()):
            out |= s
        return out


# ---------------------------------------------------------------------------
# parsing

_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_CALL = rf"(?:(?P<{{p}}ag>{_IDENT})\.)?(?P<{{p}}verb>{_IDENT})\(\s*(?P<{{p}}obj>{_IDENT})\s*\)"

_RE_CEREMONY = re.compile(rf"ceremony\s+(?P<name>{_IDENT})$")
_RE_AGENTS = re.compile(r"agents\s*:(?P<rest>.*)$")
_RE_ROLE = re.compile(rf"role\s+(?P<name>{_IDENT})\s*:$")
_RE_START = re.compile(r"start$")
_RE_ACTION = re.compile(
    rf"action\s+(?P<verb>{_IDENT})\s*\(\s*(?P<obj>{_IDENT})\s*\)(?P<rest>.*)$"
)
_RE_REQUIRES = re.compile(r"\s*requires\s+" + _CALL.format(p="r"))
_RE_SEND = re.compile(rf"send\s+(?P<peer>{_IDENT})\s+(?P<msg>{_IDENT})$")
_RE_RECV = re.compile(rf"recv\s+(?P<peer>{_IDENT})\s+(?P<msg>{_IDENT})$")
_RE_MESSAGES = re.compile(r"messages\s*:(?P<rest>.*)$")
_RE_PROPERTY = re.compile(rf"property\s+(?P<name>{_IDENT})\s*:\s*on\s+(?P<rest>.*)$")
_RE_PATTERN = re.compile(
    rf"\s*(?P<ag>{_IDENT})\.(?P<verb>{_IDENT})(?:\s*\(\s*(?P<obj>{_IDENT})\s*\))?\s*"
)
_RE_IDENT_LIST = re.compile(rf"\s*{_IDENT}(\s*,\s*{_IDENT})*\s*$")


class _Parser:
    def __init__(self, source: str):
        self.source = source
        self.diags: list[Diagnostic] = []
        self.name: str | None = None
        self.agents: list[str] = []
        self.scripts: dict[str, list[ScriptEvent]] = {}
        self.explicit: dict[str, tuple[set, set]] = {}
        self.deps: list[tuple[ActionPattern, str | None, str, str, tuple[int, int]]] = []
        self.properties: list[PropertySpec] = []
        self.locations: dict = {}
        self.role: str | None = None

    def error(self, line: int, col: int, msg: str):
        self.diags.append(Diagnostic(line, col, "error", msg))

    def run(self) -> CeremonySpec:
        for lineno, raw in enumerate(self.source.splitlines(), start=1):
            text = raw.split("#", 1)[0].rstrip()
            stripped = text.lstrip()
            if not stripped:
                continue
            self.line(lineno, len(text) - len(stripped) + 1, stripped)
        if self.name is None and not any(d.severity == "error" for d in self.diags):
            self.error(1, 1, "no ceremony declared")
        if any(d.severity == "error" for d in self.diags):
            raise SpecError(self.diags)
        return self.build()

    def line(self, ln: int, col: int, text: str):
        if self.name is None:
            m = _RE_CEREMONY.match(text)
            if not m:
                self.error(ln, col, "syntax error: expected 'ceremony NAME'")
                # keep going so later lines still report, but pretend a name exists
                self.name = ""
                return
            self.name = m["name"]
            return
        if _RE_CEREMONY.match(text):
            self.error(ln, col, "syntax error: only one ceremony per file")
            return
        if m := _RE_AGENTS.match(text):
            self.parse_agents(ln, col, m)
        elif m := _RE_ROLE.match(text):
            self.role = m["name"]
            if self.role not in self.agents:
                self.error(ln, col, f"role for undeclared agent '{self.role}'")
            if self.role in self.scripts:
                self.error(ln, col, f"duplicate role '{self.role}'")
            self.scripts[self.role] = []
        elif m := _RE_PROPERTY.match(text):
            self.role = None
            self.parse_property(ln, col, m)
        elif self.role is not None:
            self.parse_event(ln, col, text)
        else:
            self.error(ln, col, "syntax error: unexpected line outside a role block")

    def parse_agents(self, ln, col, m):
        if self.agents:
            self.error(ln, col, "syntax error: agents declared twice")
            return
        rest = m["rest"]
        if not _RE_IDENT_LIST.match(rest):
            self.error(ln, col + m.start("rest"), "syntax error: expected agent names separated by ','")
            return
        for name in (a.strip() for a in rest.split(",")):
            if name in self.agents:
                self.error(ln, col, f"duplicate agent '{name}'")
            else:
                self.agents.append(name)

    def atom(self, ln, col, name) -> MessageAtom | None:
        if name.startswith(NEGATION_PREFIX):
            self.error(ln, col, f"negated message '{name}' may not be written in a ceremony file")
            return None
        return MessageAtom(name)

    def parse_event(self, ln, col, text):
        agent = self.role
        events = self.scripts[agent]
        event: ScriptEvent | None = None
        if _RE_START.match(text):
            event = Start(agent)
        elif m := _RE_ACTION.match(text):
            event = SurgicalAction(agent, m["verb"], m["obj"])
            rest = m["rest"]
            offset = m.start("rest")
            while rest.strip():
                r = _RE_REQUIRES.match(rest)
                if not r:
                    self.error(ln, col + offset, "syntax error: expected 'requires VERB(OBJECT)'")
                    break
                self.deps.append(
                    (ActionPattern(agent, event.verb, event.object), r["rag"], r["rverb"], r["robj"],
                     (ln, col + offset))
                )
                offset += r.end()
                rest = rest[r.end():]
        elif m := _RE_SEND.match(text):
            atom = self.atom(ln, col + m.start("msg"), m["msg"])
            if atom:
                event = Send(agent, m["peer"], atom)
        elif m := _RE_RECV.match(text):
            atom = self.atom(ln, col + m.start("msg"), m["msg"])
            if atom:
                event = Receive(m["peer"], agent, atom)
        elif m := _RE_MESSAGES.match(text):
            self.parse_messages(ln, col, m)
            return
        else:
            self.error(ln, col, "syntax error: expected start, action, send, recv or messages")
            return
        if event is not None:
            self.locations[(agent, len(events))] = (ln, col)
            events.append(event)

    def parse_messages(self, ln, col, m):
        agent = self.role
        if agent in self.explicit:
            self.error(ln, col, f"duplicate messages line for role '{agent}'")
            return
        sends: set[MessageAtom] = set()
        recvs: set[MessageAtom] = set()
        for part in m["rest"].split(";"):
            part = part.strip()
            if not part:
                continue
            kind, _, names = part.partition(" ")
            if kind not in ("send", "recv") or not _RE_IDENT_LIST.match(names):
                self.error(ln, col, "syntax error: expected 'messages: send a, b; recv c'")
                return
            target = sends if kind == "send" else recvs
            for n in names.split(","):
                atom = self.atom(ln, col, n.strip())
                if atom:
                    target.add(atom)
        self.explicit[agent] = (sends, recvs)

    def parse_property(self, ln, col, m):
        name = m["name"]
        rest = m["rest"]
        base = col + m.start("rest")
        head, sep, tail = rest.partition("requires-before")
        ante = _RE_PATTERN.fullmatch(head)
        if not ante:
            self.error(ln, base, "syntax error: expected AGENT.VERB[(OBJECT)] after 'on'")
            return
        prereqs = []
        if sep:
            for piece in tail.split("<"):
                p = _RE_PATTERN.fullmatch(piece)
                if not p:
                    self.error(ln, base, "syntax error: malformed pattern after 'requires-before'")
                    return
                prereqs.append(ActionPattern(p["ag"], p["verb"], p["obj"]))
        if any(p.name == name for p in self.properties):
            self.error(ln, col, f"duplicate property '{name}'")
            return
        self.locations[("property", name)] = (ln, col)
        self.properties.append(
            PropertySpec(
                name,
                FORALL if prereqs else EXISTS,
                ActionPattern(ante["ag"], ante["verb"], ante["obj"]),
                tuple(prereqs),
            )
        )

    def build(self) -> CeremonySpec:
        scripts = {a: RoleScript(a, tuple(evs)) for a, evs in self.scripts.items()}
        send_sets, recv_sets = {}, {}
        for a in self.agents:
            if a in self.explicit:
                s, r = self.explicit[a]
            else:
                evs = self.scripts.get(a, [])
                s = {e.message for e in evs if isinstance(e, Send)}
                r = {e.expected for e in evs if isinstance(e, Receive)}
            send_sets[a] = frozenset(s)
            recv_sets[a] = frozenset(r)

        performers: dict[tuple[str, str], list[str]] = {}
        for a, evs in self.scripts.items():
            for e in evs:
                if isinstance(e, SurgicalAction):
                    who = performers.setdefault((e.verb, e.object), [])
                    if a not in who:
                        who.append(a)
        deps = set()
        for dependent, agent, verb, obj, loc in self.deps:
            if agent is None:
                who = performers.get((verb, obj), [])
                if len(who) > 1:
                    raise SpecError([Diagnostic(*loc, "error",
                        f"ambiguous prerequisite '{verb}({obj})': performed by {', '.join(who)}")])
                agent = who[0] if who else None
            prereq = ActionPattern(agent, verb, obj)
            deps.add((dependent, prereq))
            self.locations.setdefault(("dependency", dependent, prereq), loc)

        return CeremonySpec(
            name=self.name,
            agents=tuple(self.agents),
            send_sets=send_sets,
            recv_sets=recv_sets,
            scripts=scripts,
            dependencies=frozenset(deps),
            properties=tuple(self.properties),
            explicit_messages=frozenset(self.explicit),
            locations=self.locations,
        )


def parse_ceremony(source: str) -> CeremonySpec:
    """Parse ``.cer`` text.  Raises :class:`SpecError` carrying located diagnostics."""
    return _Parser(source).run()


# ---------------------------------------------------------------------------
# printing


def _format_event(event: ScriptEvent) -> str:
    if isinstance(event, Start):
        return "start"
    if isinstance(event, SurgicalAction):
        return f"action {event.verb}({event.object})"
    if isinstance(event, Send):
        return f"send {event.receiver} {event.message}"
    return f"recv {event.sender} {event.expected}"


def format_ceremony(spec: CeremonySpec) -> str:
    """Pretty-print ``spec`` back to canonical ``.cer`` text."""
    performers: dict[tuple[str, str], set[str]] = {}
    for script in spec.scripts.values():
        for e in script.events:
            if isinstance(e, SurgicalAction):
                performers.setdefault((e.verb, e.object), set()).add(e.agent)

    lines = [f"ceremony {spec.name}", "agents: " + ", ".join(spec.agents)]
    printed_deps = set()
    for agent in list(spec.agents) + [a for a in spec.scripts if a not in spec.agents]:
        script = spec.scripts.get(agent)
        if script is None:
            continue
        lines += ["", f"role {agent}:"]
        if agent in spec.explicit_messages:
            parts = []
            for kind, atoms in (("send", spec.send_sets[agent]), ("recv", spec.recv_sets[agent])):
                if atoms:
                    parts.append(kind + " " + ", ".join(sorted(a.name for a in atoms)))
            lines.append("  messages: " + "; ".join(parts))
        for e in script.events:
            text = "  " + _format_event(e)
            if isinstance(e, SurgicalAction):
                pat = ActionPattern(agent, e.verb, e.object)
                if pat not in printed_deps:
                    printed_deps.add(pat)
                    for pre in spec.prerequisites_of(pat):
                        call = f"{pre.verb}({pre.object})"
                        if pre.agent and len(performers.get((pre.verb, pre.object), ())) > 1:
                            call = f"{pre.agent}.{call}"
                        text += f" requires {call}"
            lines.append(text)
    if spec.properties:
        lines.append("")
    for p in spec.properties:
        text = f"property {p.name}: on {p.antecedent}"
        if p.prerequisites:
            text += " requires-before " + " < ".join(str(q) for q in p.prerequisites)
        lines.append(text)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# validation


def validate_spec(spec: CeremonySpec) -> list[Diagnostic]:
    """Check the well-formedness rules; returns diagnostics sorted by location."""
    out: list[Diagnostic] = []

    def add(loc, msg, severity="error"):
        out.append(Diagnostic(loc[0], loc[1], severity, msg))

    for agent in spec.agents:
        if agent not in spec.scripts:
            add((1, 1), f"agent has no role script: {agent}")

    sends: list[tuple[Send, tuple[int, int]]] = []
    recvs: list[tuple[Receive, tuple[int, int]]] = []
    for agent, script in spec.scripts.items():
        evs = script.events
        starts = [i for i, e in enumerate(evs) if isinstance(e, Start)]
        if not evs or not isinstance(evs[0], Start):
            loc = spec.location_of(agent, 0) if evs else (1, 1)
            add(loc, f"role script must begin with start: role {agent}")
        for i in starts[1:]:
            add(spec.location_of(agent, i), f"start occurs more than once: role {agent}")
        for i, e in enumerate(evs):
            loc = spec.location_of(agent, i)
            if isinstance(e, Send):
                sends.append((e, loc))
                if e.receiver not in spec.agents:
                    add(loc, f"unknown agent: {_format_event(e)} in role {agent}")
                elif e.receiver == agent:
                    add(loc, f"agent sends to itself: {_format_event(e)} in role {agent}")
                if e.message not in spec.send_sets.get(agent, ()):
                    add(loc, f"message not in sender's send set: {_format_event(e)} in role {agent}")
            elif isinstance(e, Receive):
                recvs.append((e, loc))
                if e.sender not in spec.agents:
                    add(loc, f"unknown agent: {_format_event(e)} in role {agent}")
                if e.expected not in spec.recv_sets.get(agent, ()):
                    add(loc, f"message not in receiver's receive set: {_format_event(e)} in role {agent}")

    for r, loc in recvs:
        producers = [s for s, _ in sends
                     if (s.sender, s.receiver, s.message) == (r.sender, r.receiver, r.expected)]
        if not producers:
            add(loc, f"unmatched receive: {_format_event(r)} in role {r.receiver}")
        elif len(producers) > 1:
            add(loc, f"ambiguous receive: {len(producers)} matching sends for "
                     f"{_format_event(r)} in role {r.receiver}")
    for s, loc in sends:
        if not any((r.sender, r.receiver, r.expected) == (s.sender, s.receiver, s.message)
                   for r, _ in recvs):
            add(loc, f"unreceived send: {_format_event(s)} in role {s.sender}", "warning")

    performed = {
        ActionPattern(e.agent, e.verb, e.object)
        for script in spec.scripts.values() for e in script.events
        if isinstance(e, SurgicalAction)
    }
    for dependent, prereq in sorted(spec.dependencies, key=lambda d: (str(d[0]), str(d[1]))):
        if prereq not in performed:
            loc = spec.locations.get(("dependency", dependent, prereq), (1, 1))
            add(loc, f"unknown prerequisite action: {dependent} requires "
                     f"{prereq.verb}({prereq.object})")

    for p in spec.properties:
        loc = spec.locations.get(("property", p.name), (1, 1))
        for pat in (p.antecedent, *p.prerequisites):
            if pat.agent not in spec.agents:
                add(loc, f"property references unknown agent: {pat} in property {p.name}")
    return sorted(out)


def errors_only(diags: list[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diags if d.severity == "error"]
