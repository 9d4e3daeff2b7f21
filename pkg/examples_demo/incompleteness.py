"""Synthesis on a nondeterministic model is sound but can miss valuations.

Every valuation of ``nondet_incomplete`` has the same trace set, yet the
synthesized constraint from p = 0 only covers part of the axis.

Run:  python3 examples_demo/incompleteness.py
"""

from ptasynth import load_corpus
from ptasynth.concrete import build_trace_automaton, trace_sets_equal
from ptasynth.model import classify, valuate
from ptasynth.synthesis import preserve_1c, tps

m = load_corpus("nondet_incomplete")
print("deterministic:", classify(m).deterministic)
res = tps(m, {"p": 0})
print("K from p=0:", res.result.to_text())

base = build_trace_automaton(valuate(m, {"p": 0}))
for p in (0, 1, 2, 5):
    same = trace_sets_equal(base, build_trace_automaton(valuate(m, {"p": p}))).holds
    print(f"  p={p}: same traces={same}, in K={res.result.satisfied_by({'p': p})}")

verdict = preserve_1c(m, {"p": 0})
print("preserve:", verdict.answer, verdict.notes)
