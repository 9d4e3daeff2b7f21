"""Trace-preserving parameter synthesis and preservation decisions.

:func:`tps` is the breadth-first synthesis loop: states whose parameter
projection admits the reference valuation tighten ``k_good``; the others are
collected in ``k_bad`` and not expanded.  The answer is
``k_good & not k_bad``.

On deterministic models the answer is exactly the set of valuations with the
same trace set as the reference; on nondeterministic ones it is only a
subset.  For one-clock models the loop always terminates.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .concrete import build_trace_automaton, trace_sets_equal
from .constraints import (
    Context,
    DisjunctiveConstraint,
    Polyhedron,
    complement,
    contains_other_point,
    format_rational,
    intersect,
    intersect_disjunctive,
    satisfies,
)
from .model import PtaModel, classify, parse_valuation, valuate
from .symbolic import DEFAULT_DEPTH, DEFAULT_STATES, initial_state, succ

__all__ = [
    "TpsResult",
    "PreservationVerdict",
    "PreconditionError",
    "tps",
    "preserve_1c",
    "preserve_robust_1c",
    "preserve_lu_1ip",
    "other_valuation",
]

SOUND_ONLY = "sound, not complete"


class PreconditionError(ValueError):
    """The model or valuation is outside the class a procedure decides."""


def _param_context(m: PtaModel) -> Context:
    return Context((), m.parameters)


def _to_params(p: Polyhedron, pctx: Context) -> Polyhedron:
    nclk = len(p.context.clocks)
    if p.rows is None:
        return Polyhedron.false(pctx)
    return Polyhedron(pctx, [(r[0][nclk:], r[1], r[2]) for r in p.rows])


def _check_valuation(m: PtaModel, v) -> dict:
    val = parse_valuation(v)
    missing = [p for p in m.parameters if p not in val]
    if missing:
        raise PreconditionError(f"valuation misses {', '.join(missing)}")
    for p in m.parameters:
        if val[p] < 0:
            raise PreconditionError(f"negative value for {p}")
    return {p: val[p] for p in m.parameters}


@dataclass
class TpsResult:
    k_good: Polyhedron
    k_bad: DisjunctiveConstraint
    result: DisjunctiveConstraint
    terminated: bool
    states_explored: int
    complete_for_model: bool
    iterations: int = 0
    time_ms: float = 0.0

    def to_json(self) -> dict:
        return {
            "k_good": self.k_good.to_text(),
            "k_bad": self.k_bad.to_text(),
            "result": self.result.to_text(),
            "constraint": self.result.to_json(),
            "terminated": self.terminated,
            "states": self.states_explored,
            "complete_for_model": self.complete_for_model,
            "iterations": self.iterations,
            "time_ms": round(self.time_ms, 3),
        }


def tps(m: PtaModel, v, depth: Optional[int] = DEFAULT_DEPTH, state_cap: Optional[int] = DEFAULT_STATES,
        check_monotone: bool = True) -> TpsResult:
    """Synthesize valuations with the same traces as ``v``.

    ``depth`` bounds the number of BFS iterations and ``state_cap`` the
    number of stored states; ``None`` disables a cap.  When a cap is hit the
    result has ``terminated=False`` and must not be used as an answer.
    """
    start = time.perf_counter()
    val = _check_valuation(m, v)
    pctx = _param_context(m)
    k_good = Polyhedron.true(m.context)
    bad = []
    seen = set()
    s_new = [initial_state(m)]
    iterations = 0
    terminated = True
    while True:
        kept = []
        for s in s_new:
            proj = s.projection()
            if satisfies(val, proj):
                k_good = intersect(k_good, proj)
                kept.append(s)
            else:
                bad.append(proj)
        fresh = [s for s in kept if s.key not in seen]
        if not fresh:
            break
        if (depth is not None and iterations >= depth) or (
            state_cap is not None and len(seen) + len(fresh) > state_cap
        ):
            terminated = False
            break
        seen.update(s.key for s in fresh)
        nxt = {}
        for s in fresh:
            for e in m.outgoing(s.location):
                t = succ(s, e, m, check_monotone)
                if t is not None and t.key not in nxt:
                    nxt[t.key] = t
        s_new = list(nxt.values())
        iterations += 1
    good = _to_params(k_good, pctx)
    k_bad = DisjunctiveConstraint(pctx, [_to_params(p, pctx) for p in bad]).pruned()
    result = intersect_disjunctive(DisjunctiveConstraint(pctx, [good]), complement(k_bad))
    return TpsResult(
        k_good=good,
        k_bad=k_bad,
        result=result,
        terminated=terminated,
        states_explored=len(seen),
        complete_for_model=classify(m).deterministic,
        iterations=iterations,
        time_ms=(time.perf_counter() - start) * 1000,
    )


@dataclass
class PreservationVerdict:
    question: str  # "trace" or "language"
    answer: str  # "yes", "no" or "unknown"
    witness: Optional[dict] = None
    constraint: Optional[DisjunctiveConstraint] = None
    states: int = 0
    time_ms: float = 0.0
    terminated: bool = True
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "question": self.question,
            "answer": self.answer,
            "witness": None if self.witness is None else {k: format_rational(q) for k, q in self.witness.items()},
            "constraint": None if self.constraint is None else self.constraint.to_json(),
            "constraint_text": None if self.constraint is None else self.constraint.to_text(),
            "stats": {"states": self.states, "time_ms": round(self.time_ms, 3), "terminated": self.terminated},
            "notes": list(self.notes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def other_valuation(d: DisjunctiveConstraint, val: dict) -> Optional[dict]:
    """Some point of ``d`` other than ``val`` (exact, via the point's complement)."""
    pctx = d.context
    point = Polyhedron.from_point(pctx, val, pctx.params)
    rest = intersect_disjunctive(d, complement(DisjunctiveConstraint(pctx, [point])))
    for p in rest.disjuncts:
        w = p.sample()
        return {k: w[k] for k in pctx.params}
    return None


def _question(q: str) -> str:
    if q not in ("trace", "language"):
        raise PreconditionError(f"question must be 'trace' or 'language', not {q!r}")
    return q


def _one_clock_tps(m: PtaModel, v, question: str):
    _question(question)
    if len(m.clocks) > 1:
        raise PreconditionError(f"model has {len(m.clocks)} clocks; one is required")
    cls = classify(m)
    if cls.has_diagonal_guards:
        raise PreconditionError("diagonal constraints are outside the one-clock class")
    val = _check_valuation(m, v)
    res = tps(m, val, depth=None, state_cap=None)
    notes = [] if cls.deterministic else [SOUND_ONLY]
    return res, val, notes, cls


def preserve_1c(m: PtaModel, v, question: str = "trace") -> PreservationVerdict:
    """Is there a valuation other than ``v`` with the same traces (language)?"""
    res, val, notes, cls = _one_clock_tps(m, v, question)
    other = other_valuation(res.result, val)
    if other is not None:
        answer = "yes"
    else:
        answer = "no" if cls.deterministic else "unknown"
    return PreservationVerdict(question, answer, other, res.result, res.states_explored, res.time_ms,
                               res.terminated, notes)


def preserve_robust_1c(m: PtaModel, v, question: str = "trace") -> PreservationVerdict:
    """Continuous variant: a whole segment from ``v`` to the witness preserves."""
    res, val, notes, cls = _one_clock_tps(m, v, question)
    other = contains_other_point(res.result, val)
    if other is not None:
        answer = "yes"
    else:
        answer = "no" if cls.deterministic else "unknown"
    return PreservationVerdict(question, answer, other, res.result, res.states_explored, res.time_ms,
                               res.terminated, notes + ["robust"])


def preserve_lu_1ip(m: PtaModel, v, question: str = "trace") -> PreservationVerdict:
    """Deterministic L- or U-PTA with one integer parameter: compare v with v+1 and v-1."""
    start = time.perf_counter()
    _question(question)
    cls = classify(m)
    if not cls.deterministic:
        raise PreconditionError("model is not deterministic")
    if len(m.parameters) != 1:
        raise PreconditionError(f"model has {len(m.parameters)} parameters; one is required")
    if not (cls.is_l or cls.is_u):
        raise PreconditionError("model is neither an L-PTA nor a U-PTA")
    val = _check_valuation(m, v)
    (p,) = m.parameters
    k = val[p]
    if k.denominator != 1:
        raise PreconditionError(f"{p} must be an integer")
    ref = build_trace_automaton(valuate(m, {p: k}))
    states = len(ref)
    candidates = [k + 1] + ([k - 1] if k >= 1 else [])
    truncated = ref.truncated
    answer, witness = "no", None
    for c in candidates:
        other = build_trace_automaton(valuate(m, {p: c}))
        states += len(other)
        if ref.truncated or other.truncated:
            truncated = True
            continue
        if trace_sets_equal(ref, other):
            answer, witness = "yes", {p: Fraction(c)}
            break
    if answer == "no" and truncated:
        answer = "unknown"
    return PreservationVerdict(question, answer, witness, None, states, (time.perf_counter() - start) * 1000,
                               not truncated, [f"lu_status={cls.lu_status}"])
