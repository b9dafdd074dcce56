"""``ceremony-check`` command line: verify, explore and render ceremony files."""

from __future__ import annotations

import argparse
import sys
import traceback
from importlib import resources
from pathlib import Path

from .compiler import CompileError, CompiledCeremony, compile_ceremony
from .explorer import ALL_TRACES, DEFAULT_BUDGET, FIRST_VIOLATION, ExploreConfig, enumerate_traces
from .language import EXISTS, SpecError, parse_ceremony
from .mutation import REPLACE_SEND, SKIP_ACTION, SKIP_SEND
from .oracle import GuardExceeded, brute_force_enumerate, diff_trace_sets
from .properties import check_all
from .reporting import DOT, JSON, MSC_TEXT, RenderOptions, export_trace, format_violation, render_msc

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_SPEC = 2
EXIT_INTERNAL = 3

MUTATION_NAMES = {"skip-action": SKIP_ACTION, "skip-send": SKIP_SEND, "replace": REPLACE_SEND}


def parse_mutations(text: str) -> frozenset[str]:
    if text.strip() == "none":
        return frozenset()
    kinds = set()
    for part in text.split(","):
        part = part.strip()
        if part not in MUTATION_NAMES:
            raise argparse.ArgumentTypeError(
                f"unknown mutation {part!r} (choose from {', '.join(MUTATION_NAMES)} or none)"
            )
        kinds.add(MUTATION_NAMES[part])
    return frozenset(kinds)


def parse_budget(text: str) -> int | None:
    if text == "unbounded":
        return None
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("budget must be a non-negative integer or 'unbounded'")
    if value < 0:
        raise argparse.ArgumentTypeError("budget must be non-negative")
    return value


def load_ceremony(path: str) -> CompiledCeremony:
    """Read and compile ``path``; a bare corpus name such as ``cutting.cer`` also works."""
    p = Path(path)
    if p.exists():
        source = p.read_text()
    else:
        bundled = resources.files("ceremony_check") / "corpus" / p.name
        if p.name != path or not bundled.is_file():
            raise FileNotFoundError(f"no such ceremony file: {path}")
        source = bundled.read_text()
    return compile_ceremony(parse_ceremony(source))


def _config(args, collect=FIRST_VIOLATION) -> ExploreConfig:
    return ExploreConfig(kinds=args.mutations, budget=args.budget, collect=collect)


def _plural(n: int, word: str, many: str | None = None) -> str:
    return f"{n} {word}" if n == 1 else f"{n} {many or word + 's'}"


def run_verify(args, out, err) -> int:
    compiled = load_ceremony(args.spec)
    config = _config(args, ALL_TRACES if args.all_violations else FIRST_VIOLATION)
    traces = enumerate_traces(compiled, config)
    verdicts = check_all(traces, compiled.spec.properties)
    status = EXIT_OK if all(v.holds for v in verdicts) else EXIT_VIOLATED

    if args.format == "text":
        for v in verdicts:
            if v.holds:
                word = "HOLDS"
            else:
                word = "UNSATISFIED" if v.property.mode == EXISTS else "VIOLATED"
            detail = _plural(len(traces), "trace")
            if v.property.mode != EXISTS and not v.holds:
                detail += ", " + _plural(len(v.witnesses), "witness", "witnesses")
            out.write(f"{v.property.name}: {word} ({detail})\n")
        for v in verdicts:
            if v.property.mode != EXISTS and not v.holds:
                out.write("\n" + format_violation(v))
    else:
        out.write(export_trace(traces, RenderOptions(format=args.format), verdicts).decode())

    if args.oracle:
        report = diff_trace_sets(traces, brute_force_enumerate(compiled, config))
        err.write(
            f"oracle: {report.assignments_examined} assignments, "
            f"{report.executable} agree, {len(report.mismatches)} mismatches\n"
        )
        for key, ours, theirs in report.mismatches:
            side = "explorer only" if theirs is None else "oracle only" if ours is None else "steps differ"
            err.write(f"  {side}: {key}\n")
        if report.mismatches:
            return EXIT_INTERNAL
    return status


def run_explore(args, out, err) -> int:
    compiled = load_ceremony(args.spec)
    traces = enumerate_traces(compiled, _config(args))
    if args.format == "text":
        out.write(f"{compiled.name}: {_plural(len(traces), 'trace')}\n")
        for i, t in enumerate(traces.traces):
            kinds = [v.kind for v in t.assignment.choices]
            muts = [f"{r}:{k}" for r, k in enumerate(kinds) if k != "original"]
            out.write(f"{i:5d}  {' '.join(muts) if muts else 'original'}\n")
    else:
        out.write(export_trace(traces, RenderOptions(format=args.format)).decode())
    return EXIT_OK


def run_render(args, out, err) -> int:
    if args.width < 12:
        err.write("--width must be at least 12\n")
        return EXIT_SPEC
    compiled = load_ceremony(args.spec)
    traces = enumerate_traces(compiled, _config(args))
    if not 0 <= args.trace < len(traces):
        err.write(f"trace index {args.trace} out of range (0..{len(traces) - 1})\n")
        return EXIT_SPEC
    opts = RenderOptions(MSC_TEXT, show_mutations=args.show_mutations, width=args.width)
    out.write(render_msc(traces.traces[args.trace], opts))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ceremony-check",
        description="Explore human mistakes in security ceremonies and check precedence properties.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats):
        p.add_argument("spec", help="ceremony file (.cer); bundled corpus names also accepted")
        p.add_argument(
            "--mutations", type=parse_mutations, default=frozenset(MUTATION_NAMES.values()),
            help="comma-separated subset of skip-action,skip-send,replace, or none (default: all)",
        )
        p.add_argument(
            "--budget", type=parse_budget, default=DEFAULT_BUDGET,
            help=f"max primary mutations per trace, or 'unbounded' (default: {DEFAULT_BUDGET})",
        )
        if formats:
            p.add_argument("--format", choices=formats, default="text")

    p = sub.add_parser("verify", help="check every property of the ceremony")
    common(p, ["text", JSON, DOT])
    p.add_argument("--all-violations", action="store_true", help="report every violating trace")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute-force enumeration")
    p.set_defaults(func=run_verify)

    p = sub.add_parser("explore", help="list every executable trace")
    common(p, ["text", JSON, DOT])
    p.set_defaults(func=run_explore)

    p = sub.add_parser("render", help="draw one trace as a message sequence chart")
    common(p, [])
    p.add_argument("--trace", type=int, default=0, help="trace index (default: 0, the unmutated trace)")
    p.add_argument("--show-mutations", action="store_true")
    p.add_argument("--width", type=int, default=24, help="column width, at least 12")
    p.set_defaults(func=run_render)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        return args.func(args, out, err)
    except SpecError as exc:
        for d in exc.diagnostics:
            err.write(f"{args.spec}:{d}\n")
        return EXIT_SPEC
    except (CompileError, OSError) as exc:
        err.write(f"{args.spec}: {exc}\n")
        return EXIT_SPEC
    except GuardExceeded as exc:
        err.write(f"{exc}\n")
        return EXIT_INTERNAL
    except Exception:
        traceback.print_exc(file=err)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
