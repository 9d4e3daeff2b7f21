"""Reference oracles that share no code with the algorithms under test."""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.optimize import linprog


def row_value(coeffs, const, point):
    return sum(Fraction(c) * v for c, v in zip(coeffs, point)) + const


def row_holds(row, point) -> bool:
    coeffs, const, rel = row
    s = row_value(coeffs, const, point)
    return s < 0 if rel == 0 else (s <= 0 if rel == 1 else s == 0)


def interval_feasible(rows, x_index: int, rest: dict) -> bool:
    """Is there x >= 0 satisfying every row once the other variables are
    fixed by ``rest``?  Rows are (coeffs, const, rel) with rel 0:<, 1:<=, 2:=."""
    lo, lo_strict = Fraction(0), False
    hi, hi_strict = None, False
    for coeffs, const, rel in rows:
        a = Fraction(coeffs[x_index])
        b = const + sum(Fraction(c) * rest[i] for i, c in enumerate(coeffs) if i != x_index)
        if a == 0:
            if not row_holds(((), b, rel), ()):
                return False
            continue
        bound = -b / a
        kinds = ["up", "down"] if rel == 2 else (["up"] if a > 0 else ["down"])
        strict = rel == 0
        for kind in kinds:
            if kind == "up":
                if hi is None or bound < hi or (bound == hi and strict):
                    hi, hi_strict = bound, strict
            else:
                if bound > lo or (bound == lo and strict):
                    lo, lo_strict = bound, strict
    if hi is None:
        return True
    return lo < hi or (lo == hi and not lo_strict and not hi_strict)


def lp_feasible(rows, free: list, rest: dict, margin: float = 1e-7) -> bool:
    """Floating LP test for two or more free variables (nonnegative).

    Strict rows are handled by maximising a common slack ``s``; the answer
    is feasible when the optimum slack exceeds ``margin``.
    """
    n = len(free)
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coeffs, const, rel in rows:
        fixed = float(const + sum(Fraction(c) * rest[i] for i, c in enumerate(coeffs) if i not in free))
        row = [float(coeffs[i]) for i in free]
        if rel == 2:
            a_eq.append(row + [0.0])
            b_eq.append(-fixed)
        else:
            a_ub.append(row + [1.0 if rel == 0 else 0.0])
            b_ub.append(-fixed)
    bounds = [(0, None)] * n + [(None, 1.0)]
    res = linprog(
        c=[0.0] * n + [-1.0],
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=b_ub or None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=b_eq or None,
        bounds=bounds,
        method="highs",
    )
    if res.status != 0:
        return False
    return -res.fun > margin or not any(r[2] == 0 for r in rows)


# ---------------------------------------------------------------------------
# explicit one-clock semantics on a fine grid


def _atom_ok(atom, env) -> bool:
    s = atom.const + sum(q * env[n] for n, q in atom.coeffs)
    return {"<": s < 0, "<=": s <= 0, "=": s == 0}[atom.rel]


def explicit_trace_prefixes(ta, depth: int) -> set:
    """Label sequences (action, target) of length <= depth, by explicit
    simulation of a parameter-free one-clock automaton with delays on a grid
    fine enough to hit every region."""
    assert len(ta.clocks) == 1
    (x,) = ta.clocks
    consts = [a.const / dict(a.coeffs)[x] for a in ta.all_atoms() if a.coeffs]
    den = lcm(*[Fraction(c).denominator for c in consts] or [1])
    step = Fraction(1, 2 * den)
    top = max([abs(c) for c in consts] or [Fraction(0)]) + step

    def inv(loc, v):
        return all(_atom_ok(a, {x: v}) for a in ta.location(loc).invariant)

    out = {()}
    start = (ta.initial, Fraction(0))
    frontier = {((), start)}
    for _ in range(depth):
        nxt = set()
        for trace, (loc, v) in frontier:
            d = Fraction(0)
            while True:
                w = min(v + d, top)
                if not inv(loc, w):
                    break
                for e in ta.outgoing(loc):
                    if all(_atom_ok(a, {x: w}) for a in e.guard):
                        w2 = Fraction(0) if e.resets else w
                        if inv(e.target, w2):
                            t2 = trace + ((e.action, e.target),)
                            out.add(t2)
                            nxt.add((t2, (e.target, w2)))
                if v + d >= top:
                    break
                d += step
        frontier = nxt
    return out


def automaton_trace_prefixes(t, depth: int) -> set:
    out = {()}
    queue = deque([((), t.initial)])
    while queue:
        trace, i = queue.popleft()
        if len(trace) == depth:
            continue
        for a, loc, k in t.transitions[i]:
            t2 = trace + ((a, loc),)
            out.add(t2)
            queue.append((t2, k))
    return out
