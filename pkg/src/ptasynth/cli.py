"""Command-line front end: ``ptasynth <command> ...``.

Exit codes: 0 when a question was answered, 2 when the answer is unknown or a
search hit a cap, 1 on usage, parse or precondition errors.  JSON output
carries ``"schema": 1``; timings are left out unless ``--timing`` is given so
that identical runs print identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .concrete import TruncatedError, build_trace_automaton, trace_sets_equal, untimed_language_included
from .constraints import ConstraintSyntaxError, format_rational
from .gadgets import ENCODINGS, GadgetError, compile as compile_machine, one_location_transform, parse_machine
from .gadgets import run_machine, validate_encoding
from .model import ModelError, classify, max_constant, parse_file, parse_valuation, render, valuate
from .symbolic import DEFAULT_DEPTH, DEFAULT_STATES, MonotonicityError, explore
from .synthesis import (
    SOUND_ONLY,
    PreconditionError,
    PreservationVerdict,
    other_valuation,
    preserve_1c,
    preserve_lu_1ip,
    preserve_robust_1c,
    tps,
)

SCHEMA = 1
OK, ERROR, UNKNOWN = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive(text: str) -> int:
    n = int(text)
    if n <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ptasynth", description="Parametric timed automata: synthesis and preservation checks.")
    p.add_argument("--version", action="version", version=f"ptasynth {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--json", dest="format", action="store_const", const="json", help="same as --format json")
    common.add_argument("--seed", type=int, default=0, help="seed for sampling cross-checks")
    common.add_argument("--timing", action="store_true", help="include wall-clock timings")
    caps = _Parser(add_help=False)
    caps.add_argument("--depth", type=_positive, default=DEFAULT_DEPTH)
    caps.add_argument("--states", type=_positive, default=DEFAULT_STATES)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", parents=[common], help="classify a model")
    c.add_argument("model")

    c = sub.add_parser("explore", parents=[common, caps], help="parametric zone graph")
    c.add_argument("model")
    c.add_argument("--dot", metavar="FILE")

    c = sub.add_parser("tps", parents=[common, caps], help="trace-preserving parameter synthesis")
    c.add_argument("model")
    c.add_argument("--val", required=True)
    c.add_argument("--crosscheck", type=int, default=0, metavar="N",
                   help="compare N sampled grid valuations against the concrete oracle")

    c = sub.add_parser("preserve", parents=[common, caps], help="is another valuation equivalent?")
    c.add_argument("model")
    c.add_argument("--val", required=True)
    c.add_argument("--question", choices=("trace", "language"), default="trace")
    c.add_argument("--robust", action="store_true", help="ask for a whole segment of valuations")

    c = sub.add_parser("include", parents=[common], help="untimed language inclusion L(A) in L(B)")
    c.add_argument("a")
    c.add_argument("b")
    c.add_argument("--valA", default="")
    c.add_argument("--valB", default="")
    c.add_argument("--semantics", choices=("maximal", "prefix-closed"), default="maximal")

    c = sub.add_parser("traceset", parents=[common], help="trace automaton of v(A)")
    c.add_argument("model")
    c.add_argument("--val", default="")
    c.add_argument("--dot", metavar="FILE")
    c.add_argument("--max-states", type=_positive, default=100_000)

    c = sub.add_parser("gen-2cm", parents=[common], help="compile a two-counter machine")
    c.add_argument("machine")
    c.add_argument("--encoding", choices=ENCODINGS, default="basic")
    c.add_argument("-o", "--output", metavar="FILE")
    c.add_argument("--validate", action="store_true", help="check the encoding against the machine's run")

    c = sub.add_parser("one-location", parents=[common], help="collapse a model into one location")
    c.add_argument("model")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("-o", "--output", metavar="FILE")
    return p


# ---------------------------------------------------------------------------
# output helpers


def _color(text: str, good: Optional[bool]) -> str:
    if os.environ.get("PTA_COLOR", "0") != "1" or good is None:
        return text
    return f"\033[{32 if good else 31}m{text}\033[0m"


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "time_ms"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


class _Out:
    def __init__(self, args, stdout):
        self.args = args
        self.stdout = stdout

    def emit(self, payload: dict, text_lines: list):
        if self.args.format == "json":
            body = {"schema": SCHEMA, "command": self.args.command, **payload}
            if not self.args.timing:
                body = _strip_timing(body)
            self.stdout.write(json.dumps(body, indent=2, sort_keys=True) + "\n")
        else:
            self.stdout.write("\n".join(text_lines) + "\n")


def _write(path: str, text: str):
    Path(path).write_text(text)


def _valuation(text: str, params) -> dict:
    val = parse_valuation(text)
    unknown = [k for k in val if k not in params]
    if unknown:
        raise PreconditionError(f"unknown parameter(s) in valuation: {', '.join(unknown)}")
    return val


# ---------------------------------------------------------------------------
# commands


def cmd_check(args, out: _Out) -> int:
    m = parse_file(args.model)
    cls = classify(m)
    payload = {
        "model": m.name,
        "locations": len(m.locations),
        "edges": len(m.edges),
        "clocks": list(m.clocks),
        "parameters": list(m.parameters),
        "class": cls.to_json(),
    }
    lines = [
        f"model {m.name}: {len(m.locations)} locations, {len(m.edges)} edges",
        f"clocks={len(m.clocks)} params={len(m.parameters)} deterministic={str(cls.deterministic).lower()}",
        f"lu_status={cls.lu_status} fragment={cls.fragment}",
    ]
    out.emit(payload, lines)
    return OK


def cmd_explore(args, out: _Out) -> int:
    m = parse_file(args.model)
    g = explore(m, depth=args.depth, state_cap=args.states)
    if args.dot:
        _write(args.dot, g.to_dot())
    payload = g.to_json()
    lines = [f"{len(g)} states, {len(g.edges)} edges, complete={str(g.complete).lower()}"
             + (f" ({g.reason})" if g.reason else "")]
    lines += [f"  s{i} {s.location}: {s.constraint.to_text()}" for i, s in enumerate(g.states)]
    out.emit(payload, lines)
    return OK if g.complete else UNKNOWN


def _grid(m) -> list:
    top = int(max_constant(m)) + 2 if m.parameters else 0
    return [Fraction(i, 2) for i in range(0, 2 * top + 1)]


def _crosscheck(m, val, result, n: int, seed: int) -> dict:
    rng = random.Random(seed)
    ref = build_trace_automaton(valuate(m, val))
    grid = _grid(m)
    mismatches = []
    for _ in range(n):
        v2 = {p: rng.choice(grid) for p in m.parameters}
        other = build_trace_automaton(valuate(m, v2))
        if ref.truncated or other.truncated:
            continue
        same = trace_sets_equal(ref, other).holds
        if same != result.satisfied_by(v2):
            mismatches.append({k: format_rational(q) for k, q in v2.items()})
    return {"samples": n, "seed": seed, "mismatches": mismatches}


def cmd_tps(args, out: _Out) -> int:
    m = parse_file(args.model)
    val = _valuation(args.val, m.parameters)
    res = tps(m, val, depth=args.depth, state_cap=args.states)
    payload = res.to_json()
    payload["model"] = m.name
    payload["valuation"] = {k: format_rational(q) for k, q in val.items()}
    if not res.complete_for_model:
        payload["notes"] = [SOUND_ONLY]
    lines = [
        f"result: {res.result.to_text()}",
        f"k_good: {res.k_good.to_text()}",
        f"k_bad: {res.k_bad.to_text()}",
        f"states={res.states_explored} terminated={str(res.terminated).lower()}",
    ]
    if not res.complete_for_model:
        lines.append(f"note: {SOUND_ONLY}")
    if args.crosscheck and res.terminated:
        cc = _crosscheck(m, val, res.result, args.crosscheck, args.seed)
        payload["crosscheck"] = cc
        lines.append(f"crosscheck: {len(cc['mismatches'])} mismatches in {cc['samples']} samples")
    out.emit(payload, lines)
    return OK if res.terminated else UNKNOWN


def _fallback_preserve(m, val, args) -> PreservationVerdict:
    res = tps(m, val, depth=args.depth, state_cap=args.states)
    notes = [SOUND_ONLY, "general model: answered by bounded synthesis"]
    witness = other_valuation(res.result, val) if res.terminated else None
    answer = "yes" if witness is not None else "unknown"
    return PreservationVerdict(args.question, answer, witness, res.result, res.states_explored, res.time_ms,
                               res.terminated, notes)


def cmd_preserve(args, out: _Out) -> int:
    m = parse_file(args.model)
    val = _valuation(args.val, m.parameters)
    cls = classify(m)
    one_clock = len(m.clocks) == 1 and not cls.has_diagonal_guards
    if one_clock:
        fn = preserve_robust_1c if args.robust else preserve_1c
        verdict = fn(m, val, args.question)
    elif not args.robust and cls.deterministic and len(m.parameters) == 1 and (cls.is_l or cls.is_u):
        verdict = preserve_lu_1ip(m, val, args.question)
    else:
        verdict = _fallback_preserve(m, val, args)
    payload = verdict.to_json()
    payload["model"] = m.name
    lines = [f"answer: {_color(verdict.answer, {'yes': True, 'no': False}.get(verdict.answer))}"]
    if verdict.witness:
        lines.append("witness: " + ", ".join(f"{k}={format_rational(q)}" for k, q in verdict.witness.items()))
    if verdict.constraint is not None:
        lines.append(f"constraint: {verdict.constraint.to_text()}")
    lines += [f"note: {n}" for n in verdict.notes]
    out.emit(payload, lines)
    return OK if verdict.answer in ("yes", "no") else UNKNOWN


def cmd_include(args, out: _Out) -> int:
    a = parse_file(args.a)
    b = parse_file(args.b)
    ta = build_trace_automaton(valuate(a, _valuation(args.valA, a.parameters)))
    tb = build_trace_automaton(valuate(b, _valuation(args.valB, b.parameters)))
    if ta.truncated or tb.truncated:
        out.emit({"holds": None, "reason": "zone graph truncated"}, ["unknown: zone graph truncated"])
        return UNKNOWN
    res = untimed_language_included(ta, tb, prefix_closed=args.semantics == "prefix-closed")
    payload = res.to_json()
    payload["semantics"] = args.semantics
    lines = [f"included: {_color(str(res.holds).lower(), res.holds)}"]
    if not res.holds:
        lines.append(f"witness word: {' '.join(res.word) or '(empty)'} ({res.reason})")
    out.emit(payload, lines)
    return OK


def cmd_traceset(args, out: _Out) -> int:
    m = parse_file(args.model)
    ta = build_trace_automaton(valuate(m, _valuation(args.val, m.parameters)), max_states=args.max_states)
    if args.dot:
        _write(args.dot, ta.to_dot())
    lines = [f"{len(ta)} zone states, truncated={str(ta.truncated).lower()}"]
    for i in range(len(ta)):
        mark = " [deadlock]" if ta.deadlock[i] else ""
        lines.append(f"  z{i} {ta.location(i)}: {ta.zone_text(i)}{mark}")
        for act, loc, k in ta.transitions[i]:
            lines.append(f"    --{act}--> z{k} ({loc})")
    out.emit(ta.to_json(), lines)
    return UNKNOWN if ta.truncated else OK


def cmd_gen_2cm(args, out: _Out) -> int:
    cm = parse_machine(Path(args.machine).read_text())
    m = compile_machine(cm, args.encoding, name=Path(args.machine).stem.replace("-", "_") + "_" + args.encoding)
    text = render(m)
    payload = {"encoding": args.encoding, "locations": len(m.locations), "edges": len(m.edges),
               "clocks": list(m.clocks), "parameters": list(m.parameters)}
    lines = []
    code = OK
    if args.validate:
        run = run_machine(cm)
        if not run.halted:
            payload["validation"] = None
            lines.append("validation skipped: machine does not halt within the step budget")
            code = UNKNOWN
        else:
            rep = validate_encoding(cm, args.encoding, run.length, run.max_counter, symbolic=False)
            payload["validation"] = rep.to_json()
            lines.append(f"validation: {'ok' if rep.ok else 'FAILED'} at "
                         + ", ".join(f"{k}={format_rational(q)}" for k, q in rep.valuation.items()))
            code = OK if rep.ok else ERROR
    if args.output:
        _write(args.output, text)
        lines.insert(0, f"wrote {args.output}: {len(m.locations)} locations, {len(m.edges)} edges")
    elif args.format == "text":
        lines.insert(0, text.rstrip("\n"))
    else:
        payload["model"] = text
    out.emit(payload, lines)
    return code


def cmd_one_location(args, out: _Out) -> int:
    m = parse_file(args.model)
    t = one_location_transform(m, args.k)
    text = render(t)
    extra = len(t.clocks) - len(m.clocks)
    payload = {"clocks": len(t.clocks), "extra_clocks": extra, "edges": len(t.edges)}
    lines = []
    if args.output:
        _write(args.output, text)
        lines.append(f"wrote {args.output}: {extra} extra clocks, {len(t.edges)} edges")
    elif args.format == "text":
        lines.append(text.rstrip("\n"))
    else:
        payload["model"] = text
    out.emit(payload, lines)
    return OK


COMMANDS = {
    "check": cmd_check,
    "explore": cmd_explore,
    "tps": cmd_tps,
    "preserve": cmd_preserve,
    "include": cmd_include,
    "traceset": cmd_traceset,
    "gen-2cm": cmd_gen_2cm,
    "one-location": cmd_one_location,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, _Out(args, stdout))
    except UsageError as exc:
        stderr.write(f"usage error: {exc}\n")
    except (ModelError, ConstraintSyntaxError, GadgetError, PreconditionError) as exc:
        stderr.write(f"error: {exc}\n")
    except (TruncatedError, MonotonicityError) as exc:
        stderr.write(f"error: {exc}\n")
    except (OSError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
    return ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
