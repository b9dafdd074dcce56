"""Text message sequence charts, JSON/DOT export and violation summaries."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

import jsonschema

from .compiler import CompiledCeremony
from .explorer import ExploreConfig, TraceSet, replay_assignment
from .language import EXISTS, FORALL
from .model import Receive, Send, Start, SurgicalAction, Trace, TraceStep
from .mutation import MutationAssignment
from .properties import FOUND, MISSING, Verdict

MSC_TEXT = "msc_text"
JSON = "json"
DOT = "dot"
FORMATS = (MSC_TEXT, JSON, DOT)
MIN_WIDTH = 12


@dataclass(frozen=True)
class RenderOptions:
    format: str = MSC_TEXT
    show_mutations: bool = False
    width: int = 24

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ValueError(f"unknown format {self.format!r}")
        if self.width < MIN_WIDTH:
            raise ValueError(f"column width must be at least {MIN_WIDTH}")


# ---- MSC --------------------------------------------------------------------


def _action_text(ev: SurgicalAction) -> str:
    return f"{ev.agent}.{ev.verb}({ev.object})"


class _Canvas:
    def __init__(self, agents: tuple[str, ...], width: int):
        self.agents = agents
        self.width = width
        self.lines: list[str] = []

    def centre(self, agent: str) -> int:
        return self.agents.index(agent) * self.width + self.width // 2

    def blank(self) -> list[str]:
        row = [" "] * (len(self.agents) * self.width)
        for a in self.agents:
            row[self.centre(a)] = "|"
        return row

    def emit(self, row: list[str], suffix: str = ""):
        self.lines.append(("".join(row).rstrip() + suffix).rstrip())

    def header(self):
        self.lines.append("".join(a.center(self.width) for a in self.agents).rstrip())

    def box(self, agent: str, text: str):
        row = self.blank()
        start = max(0, self.centre(agent) - len(text) // 2)
        if start + len(text) > len(row):
            row.extend(" " * (start + len(text) - len(row)))
        row[start:start + len(text)] = text
        self.emit(row)

    def arrow(self, sender: str, receiver: str, label: str, note: str = ""):
        row = self.blank()
        a, b = self.centre(sender), self.centre(receiver)
        lo, hi = min(a, b), max(a, b)
        span = hi - lo - 1
        body = ["-"] * span
        if a < b:
            body[-1] = ">"
        else:
            body[0] = "<"
        suffix = ""
        text = f" {label} "
        if len(text) + 2 <= span:
            at = (span - len(text)) // 2
            body[at:at + len(text)] = text
        else:
            suffix = f"  {label}"
        row[lo + 1:hi] = body
        self.emit(row, suffix + (f"  ({note})" if note else ""))


def _render_rows(trace: Trace, opts: RenderOptions):
    """(event, kept, mutation label) in execution order, skipped ones included."""
    choices = trace.assignment.choices if trace.assignment is not None else ()
    rows = [el for v in choices for el in v.elements()]
    if sum(1 for _, kept, _ in rows if kept) != len(trace.steps):
        rows = [(s.event, True, s.mutation_kind) for s in trace.steps]
    return rows


def render_msc(trace: Trace, opts: RenderOptions = RenderOptions()) -> str:
    """One column per agent, actions boxed, messages drawn as arrows at their send."""
    if opts.format != MSC_TEXT:
        raise ValueError("render_msc needs format msc_text")
    agents = trace.agents or tuple(dict.fromkeys(
        getattr(s.event, "agent", None) or s.event.sender for s in trace.steps
    ))
    canvas = _Canvas(agents, opts.width)
    canvas.header()
    if not trace.steps:
        return canvas.lines[0] + "\n"
    for event, kept, label in _render_rows(trace, opts):
        if isinstance(event, Start):
            continue
        if not kept:
            if not opts.show_mutations:
                continue
            if isinstance(event, SurgicalAction):
                canvas.box(event.agent, f"[skipped: {event.label}]")
            elif isinstance(event, Send):
                canvas.box(event.sender, f"[skipped: send {event.message}]")
            else:
                canvas.box(event.receiver, f"[skipped: recv {event.expected}]")
            continue
        note = label if (opts.show_mutations and label) else ""
        if isinstance(event, SurgicalAction):
            canvas.box(event.agent, f"[{event.label}]")
        elif isinstance(event, Send):
            canvas.arrow(event.sender, event.receiver, str(event.message), note)
        elif isinstance(event, Receive) and note:
            canvas.box(event.receiver, f"[accepts {event.expected}]")
    return "\n".join(canvas.lines) + "\n"


# ---- JSON -------------------------------------------------------------------

_STEP = {
    "type": "object",
    "required": ["step", "rule", "kind", "agent", "mutated"],
    "properties": {
        "step": {"type": "integer", "minimum": 0},
        "rule": {"type": "integer", "minimum": 0},
        "kind": {"enum": ["start", "snd", "rcv", "action"]},
        "agent": {"type": "string"},
        "verb": {"type": "string"},
        "object": {"type": "string"},
        "sender": {"type": "string"},
        "receiver": {"type": "string"},
        "message": {"type": "string"},
        "negated": {"type": "boolean"},
        "mutated": {"type": "boolean"},
        "mutation": {"type": "string"},
    },
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["ceremony", "config", "traces", "verdicts"],
    "properties": {
        "ceremony": {"type": "string"},
        "config": {
            "type": "object",
            "required": ["kinds", "budget"],
            "properties": {
                "kinds": {"type": "array", "items": {"type": "string"}},
                "budget": {"type": ["integer", "null"], "minimum": 0},
                "collect": {"type": "string"},
            },
        },
        "traces": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "assignment", "steps"],
                "properties": {
                    "index": {"type": "integer", "minimum": 0},
                    "assignment": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["rule", "kind", "primary"],
                            "properties": {
                                "rule": {"type": "integer", "minimum": 0},
                                "kind": {"type": "string"},
                                "primary": {"type": "boolean"},
                                "position": {"type": "integer", "minimum": 0},
                            },
                            "additionalProperties": False,
                        },
                    },
                    "steps": {"type": "array", "items": _STEP},
                },
            },
        },
        "verdicts": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["property", "mode", "holds", "witnesses"],
                "properties": {
                    "property": {"type": "string"},
                    "mode": {"enum": [FORALL, EXISTS]},
                    "holds": {"type": "boolean"},
                    "traces_checked": {"type": "integer"},
                    "witnesses": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["trace", "antecedent_position", "prerequisites"],
                        },
                    },
                },
            },
        },
    },
}


def _document(traceset: TraceSet, verdicts: Iterable[Verdict]) -> dict:
    return {
        "ceremony": traceset.ceremony,
        "config": {
            "kinds": sorted(traceset.config.kinds),
            "budget": traceset.config.budget,
            "collect": traceset.config.collect,
        },
        "traces": [
            {
                "index": i,
                "assignment": t.assignment.to_records(),
                "steps": [s.to_record() for s in t.steps],
            }
            for i, t in enumerate(traceset.traces)
        ],
        "verdicts": [v.to_record() for v in verdicts],
    }


# ---- DOT --------------------------------------------------------------------


def _dot_label(step: TraceStep) -> str:
    text = str(step.event)
    if step.mutated:
        text += f"\\n[{step.mutation_kind}]"
    return text.replace('"', '\\"')


def _dot(traceset: TraceSet) -> str:
    out = []
    for i, trace in enumerate(traceset.traces):
        out.append(f'digraph "{traceset.ceremony}_trace_{i}" {{')
        out.append("  rankdir=TB;")
        out.append("  node [shape=box];")
        for s in trace.steps:
            out.append(f'  s{s.step} [label="{_dot_label(s)}"];')
        for a, b in zip(trace.steps, trace.steps[1:]):
            out.append(f"  s{a.step} -> s{b.step};")
        pending: dict[tuple[str, str], list[int]] = {}
        for s in trace.steps:
            ev = s.event
            if isinstance(ev, Send):
                pending.setdefault((ev.sender, ev.receiver), []).append(s.step)
            elif isinstance(ev, Receive) and pending.get((ev.sender, ev.receiver)):
                src = pending[(ev.sender, ev.receiver)].pop(0)
                out.append(f"  s{src} -> s{s.step} [style=dashed, constraint=false];")
        out.append("}")
    return "\n".join(out) + "\n"


def export_trace(
    traceset: TraceSet, opts: RenderOptions = RenderOptions(format=JSON), verdicts: Iterable[Verdict] = ()
) -> bytes:
    """Serialize a trace set (and optionally verdicts) as JSON or DOT."""
    if opts.format == JSON:
        doc = _document(traceset, verdicts)
        jsonschema.validate(doc, SCHEMA)
        return (json.dumps(doc, indent=2, sort_keys=True) + "\n").encode()
    if opts.format == DOT:
        return _dot(traceset).encode()
    raise ValueError("export_trace needs format json or dot")


def load_traces(data: bytes | str, compiled: CompiledCeremony) -> TraceSet:
    """Read a JSON export back, re-running each assignment against ``compiled``.

    Raises ``ValueError`` if a recorded step sequence differs from the replay.
    """
    doc = json.loads(data)
    jsonschema.validate(doc, SCHEMA)
    if doc["ceremony"] != compiled.name:
        raise ValueError(f"export is for {doc['ceremony']}, not {compiled.name}")
    cfg = doc["config"]
    config = ExploreConfig(frozenset(cfg["kinds"]), cfg["budget"], cfg.get("collect", "first_violation"))
    traces = []
    for rec in doc["traces"]:
        assignment = MutationAssignment.from_records(compiled, rec["assignment"])
        trace = replay_assignment(compiled, assignment)
        if [s.to_record() for s in trace.steps] != rec["steps"]:
            raise ValueError(f"trace {rec['index']} does not match its replay")
        traces.append(trace)
    return TraceSet(doc["ceremony"], config, tuple(traces), compiled.agents)


# ---- violations -------------------------------------------------------------


def describe_primary_mutations(assignment: MutationAssignment) -> list[str]:
    out = []
    for i, v in enumerate(assignment.choices):
        for kind, pos, primary in v.mutations():
            if not primary:
                continue
            if pos is not None:
                what = v.rule.actions[pos].label
            else:
                what = str(v.rule.send.message)
            out.append(f"{kind} {what} at rule {i} ({v.rule.agent})")
    return out


def format_violation(verdict: Verdict) -> str:
    """One paragraph per witness of a violated forall or satisfied exists property."""
    prop = verdict.property
    if prop.mode == FORALL and verdict.holds:
        raise ValueError(f"{prop.name} holds; there is no violation to format")
    if prop.mode == EXISTS and not verdict.holds:
        raise ValueError(f"{prop.name} has no witness trace")
    paras = []
    for w in verdict.witnesses:
        ev = w.trace.steps[w.antecedent_position].event
        where = f"trace {w.trace_index}" if w.trace_index is not None else "trace"
        if prop.mode == EXISTS:
            lines = [f"{prop.name}: {_action_text(ev)} occurs at step {w.antecedent_position} of {where}"]
        else:
            lines = [f"{prop.name}: {_action_text(ev)} at step {w.antecedent_position} of {where}"]
            for p in w.prerequisite_status:
                if p.status == FOUND:
                    lines.append(f"  found {p.pattern} at step {p.position}")
                elif p.status == MISSING:
                    lines.append(f"  missing {p.pattern}")
                else:
                    lines.append(f"  misordered {p.pattern} (occurs at step {p.position})")
        muts = describe_primary_mutations(w.trace.assignment)
        lines.append("  primary mutations: " + ("; ".join(muts) if muts else "none"))
        paras.append("\n".join(lines))
    return "\n\n".join(paras) + "\n"
