"""Compile a two-counter machine under each encoding and validate it.

Run:  python3 examples_demo/counter_machines.py
"""

from pathlib import Path

from ptasynth.gadgets import compile, parse_machine, run_machine, validate_encoding
from ptasynth.symbolic import explore

cm = parse_machine((Path(__file__).parent / "two_increments.2cm").read_text())
run = run_machine(cm)
print("run:", " -> ".join(f"{s}({a},{b})" for s, a, b in run.configs))

for kind in ("basic", "wrapper", "robust", "bounded"):
    m = compile(cm, kind)
    rep = validate_encoding(cm, kind, run.length, run.max_counter, symbolic=False)
    val = ", ".join(f"{k}={v}" for k, v in rep.valuation.items())
    print(f"{kind:8} {len(m.locations):3} locations {len(m.edges):3} edges  at {val}: ok={rep.ok}")

# the parametric zone graph of the basic encoding splits on p at the halting state
g = explore(compile(cm, "basic"))
halts = sorted({s.projection().to_text() for s in g.states if s.location == cm.halt})
print(f"basic zone graph: {len(g)} states, complete={g.complete}")
print("halting projections:", halts)
