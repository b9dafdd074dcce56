"""Mutation-based exploration of security ceremonies.

Parse a ``.cer`` description, compile it to transition rules, enumerate every
executable trace under a budget of human mistakes, and check precedence
properties over the result.
"""

from .compiler import CompileError, CompiledCeremony, TransitionRule, compile_ceremony
from .explorer import ExploreConfig, TraceSet, enumerate_traces, replay_assignment
from .language import (
    ActionPattern,
    CeremonySpec,
    Diagnostic,
    PropertySpec,
    SpecError,
    format_ceremony,
    parse_ceremony,
    validate_spec,
)
from .model import (
    CeremonyState,
    CheckFailure,
    Deadlock,
    MessageAtom,
    Receive,
    Send,
    Start,
    SurgicalAction,
    Trace,
    TraceStep,
    apply_rule,
    negate,
)
from .mutation import MutationAssignment, RuleVariant, generate_variants, matching_closure
from .oracle import GuardExceeded, OracleReport, brute_force_enumerate, diff_trace_sets
from .properties import Verdict, Witness, check_all, check_executability, check_precedence
from .reporting import RenderOptions, export_trace, format_violation, load_traces, render_msc

__all__ = [
    "ActionPattern", "CeremonySpec", "CeremonyState", "CheckFailure", "CompileError",
    "CompiledCeremony", "Deadlock", "Diagnostic", "ExploreConfig", "GuardExceeded",
    "MessageAtom", "MutationAssignment", "OracleReport", "PropertySpec", "Receive",
    "RenderOptions", "RuleVariant", "Send", "SpecError", "Start", "SurgicalAction",
    "Trace", "TraceSet", "TraceStep", "TransitionRule", "Verdict", "Witness",
    "apply_rule", "brute_force_enumerate", "check_all", "check_executability",
    "check_precedence", "compile_ceremony", "diff_trace_sets", "enumerate_traces",
    "export_trace", "format_ceremony", "format_violation", "generate_variants",
    "load_traces", "matching_closure", "negate", "parse_ceremony", "render_msc",
    "replay_assignment", "validate_spec",
]
