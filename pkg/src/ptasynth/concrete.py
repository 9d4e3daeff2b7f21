"""Zone graphs of timed automata and the trace and language checks built on them.

A timed automaton here is a parameter-free :class:`~ptasynth.model.PtaModel`.
Its zone graph is computed with difference-bound matrices over integer
constants (rational constants are rescaled by the lcm of their
denominators) and classic max-constant extrapolation.

Each state of a :class:`TraceAutomaton` is a location together with the zone
of clock valuations *on arrival*, before any delay.  This keeps deadlock
detection exact for maximal runs: a state is deadlocked when some arrival
valuation has no future delay-and-transition step.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import factorial, gcd
from typing import Optional

from .constraints import Context, Polyhedron, format_rational
from .model import PtaModel, classify

__all__ = [
    "TraceAutomaton",
    "TruncatedError",
    "CheckResult",
    "build_trace_automaton",
    "trace_sets_equal",
    "untimed_language_included",
    "untimed_languages_equal",
]

# Bounds are encoded as 2*c + 1 for "<= c" and 2*c for "< c".
INF = None
LE_ZERO = 1


def _bound(c: int, strict: bool) -> int:
    return 2 * c + (0 if strict else 1)


def _add(a, b):
    if a is INF or b is INF:
        return INF
    return 2 * ((a >> 1) + (b >> 1)) + (a & b & 1)


def _lt(a, b) -> bool:
    if a is INF:
        return False
    return b is INF or a < b


def _bound_text(b, scale: int) -> str:
    c = Fraction(b >> 1, scale)
    return ("<= " if b & 1 else "< ") + format_rational(c)


class TruncatedError(RuntimeError):
    """A check was asked to decide on a truncated zone graph."""


class _Zones:
    """DBM operations for a fixed number of clocks (index 0 is the zero clock)."""

    def __init__(self, nclocks: int):
        self.n = nclocks + 1

    def zero(self):
        n = self.n
        return [[LE_ZERO] * n for _ in range(n)]

    def universe(self):
        n = self.n
        return [[LE_ZERO if (i == j or i == 0) else INF for j in range(n)] for i in range(n)]

    def close(self, d) -> bool:
        n = self.n
        for k in range(n):
            dk = d[k]
            for i in range(n):
                dik = d[i][k]
                if dik is INF:
                    continue
                di = d[i]
                for j in range(n):
                    s = _add(dik, dk[j])
                    if _lt(s, di[j]):
                        di[j] = s
        return all(not _lt(d[i][i], LE_ZERO) for i in range(n))

    def constrain(self, d, cons) -> bool:
        for i, j, b in cons:
            if i == j:
                if _lt(b, LE_ZERO):
                    return False
                continue
            if _lt(b, d[i][j]):
                d[i][j] = b
        return self.close(d)

    def up(self, d):
        for i in range(1, self.n):
            d[i][0] = INF

    def down(self, d):
        for i in range(1, self.n):
            best = LE_ZERO
            for j in range(1, self.n):
                if _lt(d[j][i], best):
                    best = d[j][i]
            d[0][i] = best

    def reset(self, d, clocks):
        for x in clocks:
            for j in range(self.n):
                d[x][j] = d[0][j]
                d[j][x] = d[j][0]
            d[x][x] = LE_ZERO
        self.close(d)

    def extrapolate(self, d, m: int):
        hi = _bound(m, False)
        lo = _bound(-m, True)
        for i in range(self.n):
            for j in range(self.n):
                if i == j or d[i][j] is INF:
                    continue
                if d[i][j] > hi:
                    d[i][j] = INF
                elif d[i][j] < lo:
                    d[i][j] = lo
        self.close(d)

    @staticmethod
    def freeze(d) -> tuple:
        return tuple(tuple(r) for r in d)

    @staticmethod
    def thaw(z) -> list:
        return [list(r) for r in z]

    def subtract(self, z, d) -> list:
        """Z minus D as a list of (possibly overlapping) zones."""
        meet = self.thaw(z)
        if not self.constrain(meet, [(i, j, d[i][j]) for i in range(self.n) for j in range(self.n)
                                     if i != j and d[i][j] is not INF]):
            return [z]
        out = []
        for i in range(self.n):
            for j in range(self.n):
                b = d[i][j]
                if i == j or b is INF or not _lt(b, z[i][j]):
                    continue
                piece = self.thaw(z)
                if self.constrain(piece, [(j, i, 1 - b)]):
                    out.append(self.freeze(piece))
        return out


def _guard_constraints(atoms, clocks: tuple):
    """Atoms of a parameter-free model as (i, j, Fraction c, strict): x_i - x_j <= c."""
    index = {c: k + 1 for k, c in enumerate(clocks)}
    out = []
    for a in atoms:
        coeffs = dict(a.coeffs)
        for name in coeffs:
            if name not in index:
                raise ValueError(f"{name!r} is not a clock; valuate the model first")
        strict = a.rel == "<"
        if not coeffs:
            ok = {"<": a.const < 0, "<=": a.const <= 0, "=": a.const == 0}[a.rel]
            if not ok:
                out.append((0, 0, Fraction(-1), False))
            continue
        names = sorted(coeffs, key=lambda n: index[n])
        if len(names) == 1:
            x = names[0]
            k = coeffs[x]
            pos, neg = (index[x], 0) if k > 0 else (0, index[x])
            scale = abs(k)
        elif len(names) == 2 and coeffs[names[0]] == -coeffs[names[1]]:
            k = coeffs[names[0]]
            pos, neg = (index[names[0]], index[names[1]])
            if k < 0:
                pos, neg = neg, pos
            scale = abs(k)
        else:
            raise ValueError("only x ~ c and x - y ~ c constraints are supported in timed automata")
        c = -a.const / scale
        out.append((pos, neg, c, strict))
        if a.rel == "=":
            out.append((neg, pos, -c, False))
    return out


@dataclass
class TraceAutomaton:
    """Reachable zone graph of a timed automaton, labelled by (action, target)."""

    name: str
    clocks: tuple
    scale: int
    states: list  # (location, frozen DBM)
    transitions: list  # per state: list of (action, target location, state index)
    deadlock: list  # per state: some arrival valuation has no future step
    truncated: bool
    deterministic: bool
    max_constant: int = 0
    initial: int = 0

    def __len__(self):
        return len(self.states)

    def labels(self, i: int) -> set:
        return {(a, l) for a, l, _ in self.transitions[i]}

    def successors(self, i: int, label) -> list:
        return [k for a, l, k in self.transitions[i] if (a, l) == label]

    def location(self, i: int) -> str:
        return self.states[i][0]

    def zone_text(self, i: int) -> str:
        z = self.states[i][1]
        names = ("0",) + self.clocks
        parts = []
        for x in range(1, len(names)):
            lo, hi = z[0][x], z[x][0]
            lo_c = Fraction(-(lo >> 1), self.scale)
            if hi is not INF and (hi >> 1) == -(lo >> 1) and hi & 1 and lo & 1:
                parts.append(f"{names[x]} = {format_rational(lo_c)}")
                continue
            if lo != LE_ZERO:
                parts.append(f"{names[x]} {'>=' if lo & 1 else '>'} {format_rational(lo_c)}")
            if hi is not INF:
                parts.append(f"{names[x]} {_bound_text(hi, self.scale)}")
        for x in range(1, len(names)):
            for y in range(1, len(names)):
                if x != y and z[x][y] is not INF:
                    implied = _add(z[x][0], z[0][y])
                    if _lt(z[x][y], implied):
                        parts.append(f"{names[x]} - {names[y]} {_bound_text(z[x][y], self.scale)}")
        return " & ".join(parts) or "true"

    def zone_polyhedron(self, i: int) -> Polyhedron:
        ctx = Context(self.clocks, ())
        text = self.zone_text(i)
        return Polyhedron.parse(ctx, text)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "truncated": self.truncated,
            "deterministic": self.deterministic,
            "initial": self.initial,
            "states": [
                {"id": i, "location": loc, "zone": self.zone_text(i), "deadlock": self.deadlock[i]}
                for i, (loc, _) in enumerate(self.states)
            ],
            "transitions": [
                {"source": i, "action": a, "target_location": l, "target": k}
                for i, ts in enumerate(self.transitions)
                for a, l, k in ts
            ],
        }

    def to_dot(self) -> str:
        lines = [f'digraph "{self.name}" {{', "  node [shape=record];"]
        for i, (loc, _) in enumerate(self.states):
            label = f"{loc} | {self.zone_text(i)}".replace('"', '\\"').replace("<", "\\<").replace(">", "\\>")
            style = ", peripheries=2" if self.deadlock[i] else ""
            lines.append(f'  s{i} [label="{label}"{style}];')
        for i, ts in enumerate(self.transitions):
            for a, _, k in ts:
                lines.append(f'  s{i} -> s{k} [label="{a}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _region_bound(nclocks: int, nlocs: int, m: int) -> int:
    return nlocs * factorial(nclocks) * 2 ** nclocks * (2 * m + 2) ** nclocks


def build_trace_automaton(ta: PtaModel, depth: Optional[int] = None, max_states: int = 100_000) -> TraceAutomaton:
    """Breadth-first zone graph of ``ta`` with max-constant extrapolation.

    Exploration stops, and the result is marked ``truncated``, when
    ``depth`` or ``max_states`` is exceeded before a fixpoint.  Models with
    diagonal constraints are explored without extrapolation.
    """
    if ta.parameters:
        raise ValueError("build_trace_automaton needs a parameter-free model (use valuate)")
    clocks = ta.clocks
    raw_inv = {l.name: _guard_constraints(l.invariant, clocks) for l in ta.locations}
    raw_guard = {e.id: _guard_constraints(e.guard, clocks) for e in ta.edges}
    consts = [c for cs in list(raw_inv.values()) + list(raw_guard.values()) for _, _, c, _ in cs]
    scale = 1
    for c in consts:
        scale = scale * c.denominator // gcd(scale, c.denominator)

    def scaled(cs):
        return [(i, j, _bound(int(c * scale), strict)) for i, j, c, strict in cs]

    inv = {k: scaled(v) for k, v in raw_inv.items()}
    guard = {k: scaled(v) for k, v in raw_guard.items()}
    m = max([abs(int(c * scale)) for c in consts] + [0])
    diagonal = any(i and j for cs in list(inv.values()) + list(guard.values()) for i, j, _ in cs)
    zones = _Zones(len(clocks))
    cindex = {c: k + 1 for k, c in enumerate(clocks)}
    ceiling = _region_bound(len(clocks), len(ta.locations), m) if not diagonal else None

    def finish(d):
        if not diagonal:
            zones.extrapolate(d, m)
        return zones.freeze(d)

    def pre_reset(cons, resets):
        out = []
        for i, j, b in cons:
            i2 = 0 if i in resets else i
            j2 = 0 if j in resets else j
            out.append((i2, j2, b))
        return out

    live_sets = {}
    for l in ta.locations:
        sets = []
        for e in ta.outgoing(l.name):
            rs = {cindex[x] for x in e.resets}
            d = zones.universe()
            if zones.constrain(d, inv[l.name] + guard[e.id] + pre_reset(inv[e.target], rs)):
                zones.down(d)
                if zones.close(d):
                    sets.append(zones.freeze(d))
        live_sets[l.name] = sets

    def deadlocked(loc, z) -> bool:
        rest = [z]
        for d in live_sets[loc]:
            rest = [piece for r in rest for piece in zones.subtract(r, d)]
            if not rest:
                return False
        return True

    init = zones.zero()
    if not zones.constrain(init, inv[ta.initial]):
        raise ValueError("the initial valuation violates the initial invariant")
    start = (ta.initial, finish(init))
    index = {start: 0}
    states = [start]
    transitions = [[]]
    dead = [deadlocked(*start)]
    truncated = False
    queue = deque([(0, 0)])
    while queue:
        i, dist = queue.popleft()
        if depth is not None and dist >= depth:
            if ta.outgoing(states[i][0]):
                truncated = True
            continue
        loc, z = states[i]
        for e in ta.outgoing(loc):
            d = zones.thaw(z)
            zones.up(d)
            if not zones.constrain(d, inv[loc] + guard[e.id]):
                continue
            zones.reset(d, [cindex[x] for x in e.resets])
            if not zones.constrain(d, inv[e.target]):
                continue
            key = (e.target, finish(d))
            k = index.get(key)
            if k is None:
                if len(states) >= max_states:
                    truncated = True
                    continue
                k = len(states)
                index[key] = k
                states.append(key)
                transitions.append([])
                dead.append(deadlocked(*key))
                queue.append((k, dist + 1))
            transitions[i].append((e.action, e.target, k))
    if ceiling is not None and len(states) > ceiling:
        raise AssertionError("zone graph exceeds the region bound")
    return TraceAutomaton(
        name=ta.name,
        clocks=clocks,
        scale=scale,
        states=states,
        transitions=transitions,
        deadlock=dead,
        truncated=truncated,
        deterministic=classify(ta).deterministic,
        max_constant=m,
    )


@dataclass
class CheckResult:
    """Outcome of a pairwise check; ``witness`` is a shortest distinguishing run."""

    holds: bool
    witness: Optional[list] = None  # list of (action, location) labels
    reason: str = ""
    exact: bool = True
    explored: int = 0

    def __bool__(self):
        return self.holds

    @property
    def word(self) -> Optional[list]:
        return None if self.witness is None else [a for a, _ in self.witness]

    def to_json(self) -> dict:
        return {
            "holds": self.holds,
            "witness": self.witness,
            "word": self.word,
            "reason": self.reason,
            "exact": self.exact,
        }


def _refuse_truncated(*automata):
    for t in automata:
        if t.truncated:
            raise TruncatedError(f"zone graph of {t.name!r} is truncated")


def _step(t: TraceAutomaton, group: frozenset, pred) -> frozenset:
    return frozenset(k for i in group for a, l, k in t.transitions[i] if pred((a, l)))


def trace_sets_equal(a: TraceAutomaton, b: TraceAutomaton) -> CheckResult:
    """Compare untimed trace sets (location/action sequences of maximal runs).

    Both sides are explored as sets of zone states reached by the same trace
    prefix, so nondeterministic automata are handled too.
    """
    _refuse_truncated(a, b)
    start = (frozenset([a.initial]), frozenset([b.initial]))
    if a.location(a.initial) != b.location(b.initial):
        return CheckResult(False, [], "initial locations differ")
    parent = {start: None}
    queue = deque([start])
    while queue:
        ga, gb = node = queue.popleft()
        la = set().union(*(a.labels(i) for i in ga))
        lb = set().union(*(b.labels(i) for i in gb))
        da = any(a.deadlock[i] for i in ga)
        db = any(b.deadlock[i] for i in gb)
        if la != lb:
            label = min(la ^ lb)
            side = "first" if label in la else "second"
            return CheckResult(False, _path(parent, node) + [label], f"{label} only possible in the {side}", explored=len(parent))
        if da != db:
            side = "first" if da else "second"
            return CheckResult(False, _path(parent, node), f"finite maximal trace only in the {side}", explored=len(parent))
        for label in sorted(la):
            nxt = (_step(a, ga, label.__eq__), _step(b, gb, label.__eq__))
            if nxt not in parent:
                parent[nxt] = (node, label)
                queue.append(nxt)
    return CheckResult(True, explored=len(parent))


def _path(parent, node) -> list:
    out = []
    while parent[node] is not None:
        node, label = parent[node]
        out.append(label)
    return out[::-1]


def untimed_language_included(a: TraceAutomaton | PtaModel, b: TraceAutomaton | PtaModel,
                              prefix_closed: bool = False) -> CheckResult:
    """Is every untimed word of ``a`` a word of ``b``?

    Words come from maximal runs unless ``prefix_closed`` is set, in which
    case every finite run contributes its word.  The witness is a shortest
    word of ``a`` outside ``b`` (as (action, location-in-a) labels).
    """
    if isinstance(a, PtaModel):
        a = build_trace_automaton(a)
    if isinstance(b, PtaModel):
        b = build_trace_automaton(b)
    _refuse_truncated(a, b)
    start = (a.initial, frozenset([b.initial]))
    parent = {start: None}
    queue = deque([start])
    while queue:
        ia, gb = node = queue.popleft()
        if not prefix_closed and a.deadlock[ia] and not any(b.deadlock[i] for i in gb):
            return CheckResult(False, _path(parent, node), "finite maximal word missing from the second",
                               explored=len(parent))
        for act, loc, k in sorted(a.transitions[ia]):
            gb2 = frozenset(j for i in gb for x, _, j in b.transitions[i] if x == act)
            if not gb2:
                return CheckResult(False, _path(parent, node) + [(act, loc)],
                                   "word prefix impossible in the second", explored=len(parent))
            nxt = (k, gb2)
            if nxt not in parent:
                parent[nxt] = (node, (act, loc))
                queue.append(nxt)
    return CheckResult(True, explored=len(parent))


def untimed_languages_equal(a, b, prefix_closed: bool = False) -> CheckResult:
    first = untimed_language_included(a, b, prefix_closed)
    if not first:
        return first
    return untimed_language_included(b, a, prefix_closed)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
