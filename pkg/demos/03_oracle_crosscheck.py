"""
Cross-checking the explorer against brute force
===============================================

The explorer builds each trace by walking rule variants and completing the
forced consequences in one pass.  The oracle instead throws every raw
combination of mistakes at the ceremony, watches where the run jams, and
patches it until it goes through.  Both should land on the same set.
"""

import itertools
import time
from importlib import resources

from ceremony_check import (
    ExploreConfig,
    brute_force_enumerate,
    compile_ceremony,
    diff_trace_sets,
    enumerate_traces,
    parse_ceremony,
)
from ceremony_check.mutation import ALL_KINDS

for name in ("cutting", "lateral"):
    text = (resources.files("ceremony_check") / "corpus" / f"{name}.cer").read_text()
    compiled = compile_ceremony(parse_ceremony(text))
    t0 = time.perf_counter()
    print(f"{name}")
    for r in range(len(ALL_KINDS) + 1):
        for kinds in itertools.combinations(sorted(ALL_KINDS), r):
            counts = []
            for budget in (0, 1, 2):
                cfg = ExploreConfig(kinds=kinds, budget=budget)
                report = diff_trace_sets(enumerate_traces(compiled, cfg), brute_force_enumerate(compiled, cfg))
                assert report.equivalent, report.mismatches[:1]
                counts.append(report.executable)
            label = ",".join(kinds) or "none"
            print(f"  {label:<36} traces at budget 0/1/2: {counts}")
    print(f"  all equal ({time.perf_counter() - t0:.2f}s)\n")
