"""Synthesize the valuations of the coffee machine that keep its traces.

Run:  python3 examples_demo/coffee_synthesis.py
"""

from fractions import Fraction

from ptasynth import load_corpus
from ptasynth.concrete import build_trace_automaton, trace_sets_equal
from ptasynth.model import valuate
from ptasynth.synthesis import tps

m = load_corpus("coffee")
ref = {"p1": 1, "p2": 2, "p3": 3}
res = tps(m, ref)
print("reference:", ref)
print("K  =", res.result.to_text())
print("k_good =", res.k_good.to_text())
print("k_bad  =", res.k_bad.to_text())
print(f"{res.states_explored} symbolic states, terminated={res.terminated}")

# spot check a few valuations against the concrete trace sets
base = build_trace_automaton(valuate(m, ref))
for v in ({"p1": 2, "p2": 5, "p3": 6}, {"p1": 1, "p2": 3, "p3": 3}, {"p1": Fraction(3, 2), "p2": 2, "p3": 2}):
    same = trace_sets_equal(base, build_trace_automaton(valuate(m, v))).holds
    print(f"  {v}: in K={res.result.satisfied_by(v)}, same traces={same}")
