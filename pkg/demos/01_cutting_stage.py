"""
Cutting stage: from role scripts to a missing-clip counterexample
=================================================================

Three people take part in cutting the ureter: the surgeon S asks for clips,
the nurse N hands them to the assistant A, A applies them, and only then does
S cut.  This walk-through loads that ceremony, checks it with and without
human mistakes, and draws the trace that breaks the clip-before-cut rule.
"""

from importlib import resources

from ceremony_check import (
    ExploreConfig,
    RenderOptions,
    check_all,
    compile_ceremony,
    enumerate_traces,
    format_violation,
    parse_ceremony,
    render_msc,
)

source = (resources.files("ceremony_check") / "corpus" / "cutting.cer").read_text()
spec = parse_ceremony(source)
compiled = compile_ceremony(spec)

# the scripts compile into five numbered rules, one per block of work
for rule in compiled.rules:
    print(rule)
print()

# %%
# With mistakes switched off there is exactly one way to run the stage
# and both properties hold.
baseline = enumerate_traces(compiled, ExploreConfig(budget=0))
print(render_msc(baseline.traces[0]))
for v in check_all(baseline, spec.properties):
    print(f"{v.property.name}: {'holds' if v.holds else 'VIOLATED'}")
print()

# %%
# Allow up to two mistakes per run.  Every mistake drags its forced
# consequences along (a skipped confirmation means the surgeon never waits
# for it), so all 75 runs still reach the end.
mutated = enumerate_traces(compiled, ExploreConfig(budget=2))
print(f"{len(mutated)} executable traces with at most two mistakes")
clip_rule, _ = check_all(mutated, spec.properties)
print(format_violation(clip_rule))

# %%
# The counterexample: A skips the clips but still reports them applied.
witness = clip_rule.witnesses[0].trace
print(render_msc(witness, RenderOptions(show_mutations=True)))
