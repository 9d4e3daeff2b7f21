"""Parametric zone graphs.

A symbolic state pairs a location with a constraint over clocks and
parameters.  :func:`succ` composes guard, reset, time elapsing and the target
invariant; :func:`explore` runs a breadth-first search that deduplicates
states on their canonical form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .constraints import (
    Context,
    Polyhedron,
    includes,
    intersect,
    project_params,
    reset,
    time_elapse,
)
from .model import ModelError, PtaModel

__all__ = [
    "SymbolicState",
    "ParametricZoneGraph",
    "MonotonicityError",
    "initial_state",
    "succ",
    "explore",
    "linear_terms",
    "in_one_clock_shape",
    "one_clock_state_bound",
]

DEFAULT_DEPTH = 256
DEFAULT_STATES = 100_000


class MonotonicityError(AssertionError):
    """A successor allowed parameter valuations its predecessor did not."""


@dataclass(frozen=True)
class SymbolicState:
    location: str
    constraint: Polyhedron
    _proj: list = field(default_factory=list, compare=False, hash=False, repr=False)

    @property
    def key(self):
        return (self.location, self.constraint.rows)

    def projection(self) -> Polyhedron:
        """The constraint projected onto the parameters (cached)."""
        if not self._proj:
            self._proj.append(project_params(self.constraint))
        return self._proj[0]

    def compatible(self, val) -> bool:
        from .constraints import satisfies

        return satisfies(val, self.projection())

    def __str__(self):
        return f"({self.location}, {self.constraint.to_text()})"


def _all_clocks_zero(ctx: Context) -> Polyhedron:
    n = ctx.size
    rows = [(tuple(1 if j == i else 0 for j in range(n)), 0, 2) for i in ctx.clock_indices()]
    return Polyhedron(ctx, rows)


def initial_state(m: PtaModel) -> SymbolicState:
    c = intersect(time_elapse(_all_clocks_zero(m.context)), m.invariant(m.initial))
    if c.is_empty():
        raise ModelError("the initial symbolic state is empty")
    return SymbolicState(m.initial, c)


def succ(s: SymbolicState, e, m: PtaModel, check_monotone: bool = False) -> Optional[SymbolicState]:
    """Successor of ``s`` through edge ``e``, or None when empty."""
    if e.source != s.location:
        raise ValueError(f"edge {e.id} does not leave {s.location!r}")
    c = intersect(s.constraint, m.guard(e))
    if c.is_empty():
        return None
    c = intersect(time_elapse(reset(c, e.resets)), m.invariant(e.target))
    if c.is_empty():
        return None
    nxt = SymbolicState(e.target, c)
    if check_monotone and not includes(s.projection(), nxt.projection()):
        raise MonotonicityError(f"edge {e.id}: {nxt.projection()} not within {s.projection()}")
    return nxt


@dataclass
class ParametricZoneGraph:
    model: PtaModel
    states: list
    edges: list  # (source index, model edge id, target index)
    complete: bool
    depth: int
    reason: str = ""
    initial: int = 0

    def __len__(self):
        return len(self.states)

    def locations(self) -> set:
        return {s.location for s in self.states}

    def states_at(self, loc: str) -> list:
        return [s for s in self.states if s.location == loc]

    def to_json(self) -> dict:
        return {
            "model": self.model.name,
            "complete": self.complete,
            "depth": self.depth,
            "reason": self.reason,
            "initial": self.initial,
            "states": [
                {
                    "id": i,
                    "location": s.location,
                    "constraint": s.constraint.to_text(),
                    "projection": s.projection().to_text(),
                }
                for i, s in enumerate(self.states)
            ],
            "edges": [
                {"source": a, "edge": e, "action": self.model.edges[e].action, "target": b}
                for a, e, b in self.edges
            ],
        }

    def to_dot(self) -> str:
        lines = [f'digraph "{self.model.name}" {{', "  node [shape=box];"]
        for i, s in enumerate(self.states):
            label = f"{s.location}\\n{s.constraint.to_text()}".replace('"', '\\"')
            lines.append(f'  s{i} [label="{label}"];')
        for a, e, b in self.edges:
            lines.append(f'  s{a} -> s{b} [label="{self.model.edges[e].action}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def explore(m: PtaModel, depth: Optional[int] = DEFAULT_DEPTH, state_cap: Optional[int] = DEFAULT_STATES,
            check_monotone: bool = True) -> ParametricZoneGraph:
    """Breadth-first parametric zone graph, in declaration order.

    ``complete`` is True iff a fixpoint was reached within the caps.
    """
    init = initial_state(m)
    states = [init]
    index = {init.key: 0}
    edges = []
    frontier = [0]
    layer = 0
    reason = ""
    while frontier:
        if depth is not None and layer >= depth:
            reason = f"depth cap {depth} reached"
            break
        nxt = []
        for i in frontier:
            s = states[i]
            for e in m.outgoing(s.location):
                t = succ(s, e, m, check_monotone)
                if t is None:
                    continue
                k = index.get(t.key)
                if k is None:
                    if state_cap is not None and len(states) >= state_cap:
                        reason = f"state cap {state_cap} reached"
                        break
                    k = len(states)
                    index[t.key] = k
                    states.append(t)
                    nxt.append(k)
                edges.append((i, e.id, k))
            if reason:
                break
        if reason:
            break
        frontier = nxt
        layer += 1
    return ParametricZoneGraph(m, states, edges, complete=not reason, depth=layer, reason=reason)


# ---------------------------------------------------------------------------
# 1-clock shape


def _term_vector(ctx: Context, coeffs: dict, const: Fraction) -> tuple:
    vec = [Fraction(0)] * ctx.size
    for name, c in coeffs.items():
        vec[ctx.index(name)] = Fraction(c)
    return tuple(vec) + (Fraction(const),)


def linear_terms(m: PtaModel) -> set:
    """Parametric linear terms compared with the clock in ``m`` (as vectors)."""
    ctx = m.context
    clocks = set(m.clocks)
    terms = set()
    for a in m.all_atoms():
        coeffs = dict(a.coeffs)
        cks = [k for k in coeffs if k in clocks]
        if len(cks) == 1:
            k = coeffs.pop(cks[0])
            # k*x + rest + const ~ 0  gives  x ~ -(rest + const)/k
            terms.add(_term_vector(ctx, {n: -c / k for n, c in coeffs.items()}, -a.const / k))
        elif not cks:
            pos = {n: c for n, c in coeffs.items() if c > 0}
            neg = {n: -c for n, c in coeffs.items() if c < 0}
            const = a.const
            terms.add(_term_vector(ctx, pos, const if const > 0 else 0))
            terms.add(_term_vector(ctx, neg, -const if const < 0 else 0))
    zero = _term_vector(ctx, {}, 0)
    terms.discard(zero)
    return terms


def _proportional(row_vec: tuple, target: tuple) -> bool:
    ratio = None
    for a, b in zip(row_vec, target):
        if (a == 0) != (b == 0):
            return False
        if a:
            r = Fraction(a) / b
            if r <= 0 or (ratio is not None and r != ratio):
                return False
            ratio = r
    return True


def in_one_clock_shape(m: PtaModel, c: Polyhedron) -> bool:
    """Is ``c`` a conjunction of ``lt ~ x`` and ``lt1 ~ lt2`` atoms over the
    model's terms (or 0)?"""
    if len(m.clocks) != 1 or c.rows is None:
        return c.rows is None
    ctx = m.context
    terms = list(linear_terms(m)) + [_term_vector(ctx, {}, 0)]
    for coeffs, const, rel in c.rows:
        row = tuple(Fraction(x) for x in coeffs) + (Fraction(const),)
        if coeffs[0]:
            # row ~ a*(x - lt); rows are x-coefficient-scaled, lt = -(rest)/a
            a = Fraction(coeffs[0])
            lt = tuple(-x / a for x in row)
            lt = (Fraction(0),) + lt[1:]
            ok = any(t == lt for t in terms)
        else:
            ok = False
            for t1 in terms:
                for t2 in terms:
                    if t1 != t2:
                        diff = tuple(x - y for x, y in zip(t1, t2))
                        if _proportional(row, diff):
                            ok = True
                            break
                if ok:
                    break
        if not ok:
            return False
    return True


def one_clock_state_bound(m: PtaModel) -> int:
    lt = len(linear_terms(m))
    return len(m.locations) * 2 ** (lt * (lt + 1))
