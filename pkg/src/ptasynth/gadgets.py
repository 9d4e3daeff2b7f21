"""Two-counter machines and their PTA encodings.

A machine program is a list of ``;``-terminated statements::

    state s0 ; inc c1 goto s1 ;
    state s1 ; tdec c2 zero s2 else s0 ;
    halt s2 ;

``state NAME`` opens a state whose single instruction follows; ``halt NAME``
declares the halting state.  The first declared state is initial.

:func:`compile` turns a machine into one of four PTA encodings and
:func:`validate_encoding` checks a compiled model against a direct run of the
machine.  :func:`one_location_transform` collapses a PTA without long
zero-delay sequences into a single location using diagonal guards.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

from .concrete import build_trace_automaton
from .constraints import Atom, Context, Polyhedron, equivalent, format_rational, intersect, satisfies
from .model import Edge, Location, PtaModel, canonical_atom, parse, parse_valuation, valuate
from .symbolic import explore

__all__ = [
    "CounterMachine",
    "Instruction",
    "MachineRun",
    "EncodingReport",
    "GadgetError",
    "ENCODINGS",
    "parse_machine",
    "run_machine",
    "compile",
    "validate_encoding",
    "halt_reachable",
    "one_location_transform",
    "accepts_timed_word",
    "timed_words",
    "validation_valuation",
]

ENCODINGS = ("basic", "wrapper", "robust", "bounded")
_ALIASES = {"language_wrapper": "wrapper", "bounded_time": "bounded"}
COUNTERS = ("c1", "c2")


class GadgetError(ValueError):
    """Malformed machine, unsupported encoding or bad transform argument."""


@dataclass(frozen=True)
class Instruction:
    op: str  # "inc" or "tdec"
    counter: int  # 0 or 1
    target: str  # inc: next state; tdec: state when the counter is zero
    other: Optional[str] = None  # tdec: state after decrementing


@dataclass(frozen=True)
class CounterMachine:
    states: tuple
    program: Mapping[str, Instruction]
    halt: str

    @property
    def initial(self) -> str:
        return self.states[0]

    def to_text(self) -> str:
        lines = []
        for s in self.states:
            if s == self.halt:
                lines.append(f"halt {s} ;")
                continue
            ins = self.program[s]
            c = COUNTERS[ins.counter]
            if ins.op == "inc":
                lines.append(f"state {s} ; inc {c} goto {ins.target} ;")
            else:
                lines.append(f"state {s} ; tdec {c} zero {ins.target} else {ins.other} ;")
        return "\n".join(lines) + "\n"


_STMT = [
    ("state", re.compile(r"state\s+(\w+)$")),
    ("halt", re.compile(r"halt\s+(\w+)$")),
    ("inc", re.compile(r"inc\s+(c[12])\s+goto\s+(\w+)$")),
    ("tdec", re.compile(r"tdec\s+(c[12])\s+zero\s+(\w+)\s+else\s+(\w+)$")),
]


def parse_machine(text: str) -> CounterMachine:
    body = "\n".join(re.sub(r"(#|//).*", "", line) for line in text.splitlines())
    states: list = []
    program: dict = {}
    halt = None
    current = None
    for raw in body.split(";"):
        stmt = " ".join(raw.split())
        if not stmt:
            continue
        for kind, rx in _STMT:
            m = rx.match(stmt)
            if m:
                break
        else:
            raise GadgetError(f"cannot parse machine statement {stmt!r}")
        if kind in ("state", "halt"):
            name = m.group(1)
            if name in states:
                raise GadgetError(f"state {name!r} declared twice")
            states.append(name)
            if kind == "halt":
                if halt is not None:
                    raise GadgetError("more than one halting state")
                halt, current = name, None
            else:
                current = name
            continue
        if current is None:
            raise GadgetError(f"instruction {stmt!r} outside a state")
        if current in program:
            raise GadgetError(f"state {current!r} has more than one instruction (machines are deterministic)")
        k = COUNTERS.index(m.group(1))
        if kind == "inc":
            program[current] = Instruction("inc", k, m.group(2))
        else:
            program[current] = Instruction("tdec", k, m.group(2), m.group(3))
    if halt is None:
        raise GadgetError("no halting state")
    for s in states:
        if s != halt and s not in program:
            raise GadgetError(f"state {s!r} has no instruction")
    for s, ins in program.items():
        for t in (ins.target, ins.other):
            if t is not None and t not in states:
                raise GadgetError(f"state {s!r} jumps to undeclared state {t!r}")
    return CounterMachine(tuple(states), dict(program), halt)


@dataclass
class MachineRun:
    configs: list  # (state, c1, c2)
    halted: bool

    @property
    def length(self) -> int:
        return len(self.configs)

    @property
    def max_counter(self) -> int:
        return max(max(c1, c2) for _, c1, c2 in self.configs)


def run_machine(cm: CounterMachine, max_steps: int = 10_000) -> MachineRun:
    """Direct interpreter; ground truth for the encodings."""
    s, c = cm.initial, [0, 0]
    configs = [(s, 0, 0)]
    while s != cm.halt and len(configs) <= max_steps:
        ins = cm.program[s]
        if ins.op == "inc":
            c[ins.counter] += 1
            s = ins.target
        elif c[ins.counter] == 0:
            s = ins.target
        else:
            c[ins.counter] -= 1
            s = ins.other
        configs.append((s, c[0], c[1]))
    return MachineRun(configs, s == cm.halt)


# ---------------------------------------------------------------------------
# encodings


class _Text:
    def __init__(self, name: str, clocks, params):
        self.lines = [f"pta {name} ;", f"clocks {', '.join(clocks)} ;", f"parameters {', '.join(params)} ;",
                      "actions a ;", ""]
        self.names: set = set()

    def loc(self, name: str, invariant: str = "", initial: bool = False):
        if name in self.names:
            raise GadgetError(f"location name clash on {name!r}")
        self.names.add(name)
        body = ("initial ; " if initial else "") + (f"invariant {invariant} ; " if invariant else "")
        self.lines.append(f"location {name} {{ {body}}}")

    def edge(self, src: str, dst: str, guard: str = "", reset: Iterable[str] = ()):
        body = "sync a ; " + (f"guard {guard} ; " if guard else "")
        reset = list(reset)
        if reset:
            body += f"reset {', '.join(reset)} ; "
        self.lines.append(f"edge {src} -> {dst} {{ {body}}}")

    def model(self) -> PtaModel:
        return parse("\n".join(self.lines) + "\n")


def _bar(s):
    return f"{s}_bar"


def _one(s):
    return f"{s}_one"


def _basic(cm: CounterMachine, out: _Text, initial: bool):
    clocks = ("t", "x1", "x2", "z")
    inv = " & ".join(f"{c} <= p" for c in clocks)
    for s in cm.states:
        out.loc(s, inv, initial=initial and s == cm.initial)
        out.loc(_bar(s), inv)
        out.loc(_one(s), inv)
    for s in cm.states:
        for c in ("x1", "x2", "t"):
            out.edge(_bar(s), _bar(s), f"{c} = p", [c])
        for c in ("x1", "x2", "z"):
            out.edge(_one(s), _one(s), f"{c} = p", [c])
        out.edge(_one(s), s, "x1 < p & x2 < p & t = p & z < p", ["t"])
        if s == cm.halt:
            continue
        ins = cm.program[s]
        x = f"x{ins.counter + 1}"
        out.edge(s, _bar(s), "z = p - 1", ["z"])
        if ins.op == "inc":
            out.edge(_bar(s), _one(ins.target), f"{x} = p - 1", [x])
        else:
            out.edge(_bar(s), _one(ins.target), f"t = 0 & {x} = 0")
            out.edge(_bar(s), _one(ins.other), f"t != 1 & {x} = 1", [x])


def _two_branch(out: _Text, s: str, tag: str, first: tuple, second: tuple, close: str, dst: str,
                inv: str = ""):
    """Reset ``first`` and ``second`` in either order, then leave on ``close``."""
    up, low, mid = f"{s}_{tag}up", f"{s}_{tag}low", f"{s}_{tag}mid"
    for name in (up, low, mid):
        out.loc(name, inv)
    (c1, g1), (c2, g2) = first, second
    out.edge(s, up, g1, [c1])
    out.edge(up, mid, g2, [c2])
    out.edge(s, low, g2, [c2])
    out.edge(low, mid, g1, [c1])
    out.edge(mid, dst, close, ["t"])


def _robust(cm: CounterMachine, out: _Text):
    out.loc("r_init", initial=True)
    out.loc("r_start", "t <= 1")
    out.edge("r_init", "r_start", "t = 0 & t < p")
    out.edge("r_start", cm.initial, "t = 1 & t > p", ["t"])
    for s in cm.states:
        out.loc(s, "t <= 1")
    for s in cm.states:
        if s == cm.halt:
            continue
        ins = cm.program[s]
        x, y = f"x{ins.counter + 1}", f"x{2 - ins.counter}"
        if ins.op == "inc":
            _two_branch(out, s, "", (x, f"{x} = 1 + p & t <= 1"), (y, f"{y} = 1"), "t = 1", ins.target, "t <= 1")
        else:
            out.edge(s, ins.target, f"t = 0 & {x} = 1")
            _two_branch(out, s, "", (x, f"{x} = 1 - p & t <= 1"), (y, f"{y} = 1"), "t = 1", ins.other, "t <= 1")


def _bounded(cm: CounterMachine, out: _Text):
    out.loc("b_init", initial=True)
    out.loc("b_start")
    out.edge("b_init", "b_start", "t = 0 & t < p1")
    out.edge("b_start", cm.initial, "t = p1", ["t"])
    for s in cm.states:
        out.loc(s)
    for s in cm.states:
        if s == cm.halt:
            continue
        ins = cm.program[s]
        x, y = f"x{ins.counter + 1}", f"x{2 - ins.counter}"
        if ins.op == "inc":
            _two_branch(out, s, "", (x, f"{x} = p1 + p2"), (y, f"{y} = p1"), "t = p1", ins.target)
        else:
            _two_branch(out, s, "z", (x, f"{x} = p1"), (y, f"{y} = p1"), f"t = p1 & {x} = p1", ins.target)
            _two_branch(out, s, "d", (x, f"{x} = p1 & t > 0"), (y, f"{y} = p1 + p2"), "t = p1 + p2", ins.other)


def compile(cm: CounterMachine, kind: str = "basic", name: Optional[str] = None) -> PtaModel:
    """PTA encoding of ``cm``; ``kind`` is one of :data:`ENCODINGS`."""
    kind = _ALIASES.get(kind, kind)
    name = name or f"cm_{kind}"
    if kind in ("basic", "wrapper"):
        out = _Text(name, ("t", "x1", "x2", "z"), ("p",))
        _basic(cm, out, initial=kind == "basic")
        if kind == "wrapper":
            out.loc("s_init", initial=True)
            out.loc("s_inf")
            out.edge("s_init", "s_inf", "t = 0 & t = p")
            out.edge("s_init", cm.initial, "t = 0 & t < p")
            out.edge(cm.halt, "s_inf")
            out.edge("s_inf", "s_inf")
    elif kind == "robust":
        out = _Text(name, ("t", "x1", "x2"), ("p",))
        _robust(cm, out)
    elif kind == "bounded":
        out = _Text(name, ("t", "x1", "x2"), ("p1", "p2"))
        _bounded(cm, out)
    else:
        raise GadgetError(f"unknown encoding {kind!r}; expected one of {', '.join(ENCODINGS)}")
    return out.model()


# ---------------------------------------------------------------------------
# validation


@dataclass
class EncodingReport:
    kind: str
    valuation: dict
    reached: bool = False
    correspondence: Optional[bool] = None
    symbolic: Optional[bool] = None
    states: int = 0
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.reached and self.correspondence is not False and self.symbolic is not False and not self.errors

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "valuation": {k: format_rational(v) for k, v in self.valuation.items()},
            "reached": self.reached,
            "correspondence": self.correspondence,
            "symbolic": self.symbolic,
            "states": self.states,
            "errors": list(self.errors),
            "ok": self.ok,
        }


def _with_observer(m: PtaModel, bound: Fraction) -> PtaModel:
    """Add a never-reset clock bounded by ``bound`` in every location."""
    g = "g_obs"
    while g in m.clocks or g in m.parameters:
        g += "_"
    cap = canonical_atom(Atom(((g, Fraction(1)),), -Fraction(bound), "<=", 0))
    locs = tuple(Location(l.name, l.invariant + (cap,), l.initial) for l in m.locations)
    return PtaModel(m.name, m.actions, m.clocks + (g,), m.parameters, locs, m.edges, m.allow_diagonals)


def halt_reachable(m: PtaModel, valuation, target: str, max_states: int = 200_000):
    """Concrete reachability of ``target``; returns (reached, trace automaton)."""
    ta = build_trace_automaton(valuate(m, valuation), max_states=max_states)
    return any(ta.location(i) == target for i in range(len(ta))), ta


def _main_points(ta, states: Iterable[str]) -> Optional[list]:
    """(location, clock point) for arrival zones at main locations with t = 0."""
    main = set(states)
    ctx = Context(ta.clocks, ())
    at_zero = Polyhedron.parse(ctx, "t = 0")
    out = []
    for i in range(len(ta)):
        if ta.location(i) not in main:
            continue
        z = intersect(ta.zone_polyhedron(i), at_zero)
        pt = z.sample()
        if pt is None:
            continue
        if not _is_point(z, pt):
            return None
        out.append((ta.location(i), pt))
    return out


def _is_point(p: Polyhedron, pt: dict) -> bool:
    return equivalent(p, Polyhedron.from_point(p.context, pt, p.context.clocks))


def _expected(kind: str, val: dict, c1: int, c2: int) -> dict:
    if kind in ("basic", "wrapper"):
        return {"x1": Fraction(c1), "x2": Fraction(c2)}
    if kind == "robust":
        p = val["p"]
        return {"x1": 1 - p * c1, "x2": 1 - p * c2}
    return {"x1": val["p1"] - val["p2"] * c1, "x2": val["p1"] - val["p2"] * c2}


def validation_valuation(kind: str, n: int, c: int) -> dict:
    """Parameter valuation under which a halting run of length ``n`` with
    counters bounded by ``c`` is simulated."""
    kind = _ALIASES.get(kind, kind)
    if kind in ("basic", "wrapper"):
        return {"p": Fraction(n + 1)}
    if kind == "robust":
        return {"p": Fraction(1, c + 1) if c > 0 else Fraction(1, 2)}
    if kind == "bounded":
        if c > 0:
            return {"p1": Fraction(c, (c + 1) * n), "p2": Fraction(1, (c + 1) * n)}
        return {"p1": Fraction(1, n), "p2": Fraction(1, n)}
    raise GadgetError(f"unknown encoding {kind!r}")


def validate_encoding(cm: CounterMachine, kind: str, n: int, c: int, symbolic: bool = True,
                      symbolic_depth: int = 200, symbolic_states: int = 50_000) -> EncodingReport:
    """Check the encoding of ``cm`` against its run of length ``n`` (number of
    configurations, halting one included) with counters at most ``c``.

    The bounded-time encoding is checked with an extra observer clock so
    that ``s_halt`` must be reached within one time unit.
    """
    kind = _ALIASES.get(kind, kind)
    val = validation_valuation(kind, n, c)
    report = EncodingReport(kind, val)
    run = run_machine(cm, max_steps=max(n, 1) * 4 + 10)
    if not run.halted or run.length > n or run.max_counter > c:
        report.errors.append(
            f"ground truth mismatch: machine {'halts' if run.halted else 'does not halt'} "
            f"after {run.length} configurations with max counter {run.max_counter}"
        )
        return report
    m = compile(cm, kind)
    checked = _with_observer(m, Fraction(1)) if kind == "bounded" else m
    reached, ta = halt_reachable(checked, val, cm.halt)
    report.reached = reached
    report.states = len(ta)
    if ta.truncated:
        report.errors.append("zone graph truncated")
    points = _main_points(ta, cm.states)
    if points is None:
        report.correspondence = False
        report.errors.append("a main-location arrival zone at t = 0 is not a single point")
    else:
        allowed = {}
        for s, c1, c2 in run.configs:
            allowed.setdefault(s, []).append(_expected(kind, val, c1, c2))
        ok = True
        for loc, pt in points:
            got = {"x1": pt["x1"], "x2": pt["x2"]}
            if got not in allowed.get(loc, []):
                ok = False
                report.errors.append(f"at {loc}: clocks {got} match no machine configuration")
        report.correspondence = ok
    if symbolic and kind in ("basic", "wrapper"):
        g = explore(m, depth=symbolic_depth, state_cap=symbolic_states)
        report.symbolic = any(satisfies(val, s.projection()) for s in g.states_at(cm.halt))
        if not report.symbolic:
            report.errors.append("no symbolic s_halt state admits the validation valuation")
    return report


# ---------------------------------------------------------------------------
# one-location transform


def _fresh(base: str, taken: set) -> str:
    name = base
    while name in taken:
        name += "_"
    taken.add(name)
    return name


def _atom(terms: dict, const, rel: str) -> Atom:
    coeffs = tuple((k, Fraction(v)) for k, v in terms.items() if v)
    return canonical_atom(Atom(coeffs, Fraction(const), rel, 0))


def _zero_reset(atoms, resets) -> Optional[list]:
    """Atoms with the reset clocks replaced by 0; None when one is false."""
    out = []
    for a in atoms:
        coeffs = tuple((k, q) for k, q in a.coeffs if k not in resets)
        b = canonical_atom(Atom(coeffs, a.const, a.rel, 0))
        if not b.coeffs:
            holds = {"<": b.const < 0, "<=": b.const <= 0, "=": b.const == 0}[b.rel]
            if not holds:
                return None
            continue
        out.append(b)
    return out


def one_location_transform(m: PtaModel, k: int) -> PtaModel:
    """Single-location PTA with the same timed words as ``m``.

    Assumes every run starts with a positive delay and at most ``k``
    transitions happen at any one instant (not checked).  Adds ``k`` copies
    of a marker clock per location plus two bookkeeping clocks.  Location
    invariants are folded into the guards of the edges that leave and enter
    the location.
    """
    if k < 1:
        raise GadgetError("k must be at least 1")
    taken = set(m.clocks) | set(m.parameters)
    x0 = _fresh("ol_x0", taken)
    x1 = _fresh("ol_x1", taken)
    marks = {l.name: [_fresh(f"ol_{l.name}_{i}", taken) for i in range(k)] for l in m.locations}
    clocks = m.clocks + (x0, x1) + tuple(c for l in m.locations for c in marks[l.name])
    edges = []

    def add(e: Edge, extra: list, resets: Iterable[str], base: list):
        rs = set(e.resets) | set(resets)
        edges.append(Edge(len(edges), "main", "main", e.action, tuple(base + extra),
                          tuple(c for c in clocks if c in rs)))

    for e in m.edges:
        tgt_inv = _zero_reset(m.location(e.target).invariant, set(e.resets))
        if tgt_inv is None:
            continue
        base = list(e.guard) + list(m.location(e.source).invariant) + tgt_inv
        here = marks[e.source]
        entered = marks[e.target]
        # after a positive delay, the chain that reached the source had length i
        for i in range(k):
            extra = [_atom({x0: -1}, 0, "<"), _atom({x0: 1, x1: -1}, 0, "<"), _atom({here[i]: 1, x0: -1}, 0, "=")]
            if i + 1 < k:
                extra += [_atom({marks[l][i + 1]: -1, x0: 1}, 0, "<") for l in marks]
            add(e, extra, (x0, entered[0]), base)
        if e.source == m.initial:
            add(e, [_atom({x0: -1}, 0, "<"), _atom({x0: 1, x1: -1}, 0, "=")], (x0, entered[0]), base)
        # i-th transition of a zero-delay chain
        for i in range(1, k):
            extra = [_atom({x0: 1}, 0, "="), _atom({here[i - 1]: 1}, 0, "=")]
            extra += [_atom({marks[l][i]: -1}, 0, "<") for l in marks]
            add(e, extra, (entered[i],), base)
    loc = Location("main", (), True)
    return PtaModel(f"{m.name}_1loc", m.actions, clocks, m.parameters, (loc,), tuple(edges), True)


# ---------------------------------------------------------------------------
# timed-word oracle


def _holds(atoms, env: Mapping[str, Fraction]) -> bool:
    for a in atoms:
        s = a.const + sum(q * env[n] for n, q in a.coeffs)
        if not {"<": s < 0, "<=": s <= 0, "=": s == 0, ">": s > 0, ">=": s >= 0}[a.rel]:
            return False
    return True


def accepts_timed_word(m: PtaModel, word, valuation=None) -> bool:
    """Does some run of ``m`` read the timed word ``[(delay, action), ...]``?

    Explicit-state simulation over exact rationals; invariants are convex so
    they are checked at both ends of each delay.
    """
    val = parse_valuation(valuation) if valuation is not None else {}
    missing = [p for p in m.parameters if p not in val]
    if missing:
        raise ValueError(f"valuation misses {', '.join(missing)}")
    env0 = {c: Fraction(0) for c in m.clocks}
    env0.update({p: val[p] for p in m.parameters})
    if not _holds(m.location(m.initial).invariant, env0):
        return False
    confs = {(m.initial, tuple(env0[c] for c in m.clocks))}
    for delay, action in word:
        d = Fraction(delay)
        nxt = set()
        for loc, clk in confs:
            env = dict(zip(m.clocks, (v + d for v in clk)))
            env.update({p: val[p] for p in m.parameters})
            if not _holds(m.location(loc).invariant, env):
                continue
            for e in m.outgoing(loc):
                if e.action != action or not _holds(e.guard, env):
                    continue
                after = dict(env)
                for c in e.resets:
                    after[c] = Fraction(0)
                if _holds(m.location(e.target).invariant, after):
                    nxt.add((e.target, tuple(after[c] for c in m.clocks)))
        if not nxt:
            return False
        confs = nxt
    return True


def timed_words(actions, delays, length: int, first_positive: bool = True):
    """All timed words up to ``length`` over ``actions`` and a delay grid."""
    delays = [Fraction(d) for d in delays]
    for n in range(1, length + 1):
        for ds in itertools.product(delays, repeat=n):
            if first_positive and ds[0] <= 0:
                continue
            for acts in itertools.product(actions, repeat=n):
                yield list(zip(ds, acts))
