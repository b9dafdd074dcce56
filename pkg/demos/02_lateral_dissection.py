"""
Lateral dissection: three ordering rules, three ways to break them
==================================================================

The lateral dissection stage alternates between surgeon and assistant over
ten messages.  Each of the three precedence properties can be broken by at
most two slips; this script finds, for each one, the witness in which both
named prerequisites are absent.
"""

from importlib import resources

from ceremony_check import (
    ExploreConfig,
    check_all,
    compile_ceremony,
    enumerate_traces,
    parse_ceremony,
    render_msc,
)
from ceremony_check.reporting import describe_primary_mutations

spec = parse_ceremony((resources.files("ceremony_check") / "corpus" / "lateral.cer").read_text())
compiled = compile_ceremony(spec)
print(f"{len(compiled.rules)} rules, final state {compiled.final_state}")

baseline = enumerate_traces(compiled, ExploreConfig(budget=0))
print(render_msc(baseline.traces[0]))

traces = enumerate_traces(compiled, ExploreConfig(budget=2, collect="all_traces"))
print(f"{len(traces)} traces with at most two mistakes\n")

for verdict in check_all(traces, spec.properties):
    if verdict.holds:
        print(f"{verdict.property.name}: holds")
        continue
    # prefer the witness that misses the most prerequisites
    worst = max(verdict.witnesses, key=lambda w: (len(w.failing), -w.trace_index))
    print(f"{verdict.property.name}: {len(verdict.witnesses)} violating traces")
    print("  e.g. trace", worst.trace_index, "misses", ", ".join(str(p.pattern) for p in worst.failing))
    print("  caused by:", "; ".join(describe_primary_mutations(worst.trace.assignment)))
    print()
