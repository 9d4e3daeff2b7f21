"""Parametric timed automata: data model, text format and classifiers.

The text format is line oriented with ``#`` comments::

    pta coffee ;
    clocks x, y ;
    parameters p1, p2, p3 ;
    actions press, cup, coffee ;
    location l1 { initial ; invariant true ; }
    location l2 { invariant y <= p2 ; }
    edge l1 -> l2 { sync press ; guard true ; reset x, y ; }

Guards and invariants are ``&``-joined comparisons of affine terms.  Each
comparison mentions at most one clock unless the header declares
``allow-diagonals``.  A ``!=`` comparison in a guard is desugared into two
copies of the edge, one strictly below and one strictly above.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Mapping, Optional

from .constraints import (
    Atom,
    ConstraintSyntaxError,
    Context,
    Polyhedron,
    atom_rows,
    format_rational,
    parse_atoms,
    parse_rational,
)

__all__ = [
    "Location",
    "Edge",
    "PtaModel",
    "ModelClass",
    "ModelSyntaxError",
    "ModelError",
    "parse",
    "parse_file",
    "render",
    "classify",
    "valuate",
    "parse_valuation",
    "canonical_atom",
]


class ModelError(ValueError):
    """A structurally invalid model."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


def canonical_atom(atom: Atom) -> Atom:
    """Move everything left, use only < <= =, scale to coprime integers."""
    coeffs = dict(atom.coeffs)
    const = atom.const
    rel = atom.rel
    if rel in (">", ">="):
        coeffs = {k: -v for k, v in coeffs.items()}
        const = -const
        rel = "<" if rel == ">" else "<="
    den = 1
    for q in list(coeffs.values()) + [const]:
        den = den * q.denominator // gcd(den, q.denominator)
    ints = {k: int(v * den) for k, v in coeffs.items() if v}
    c = int(const * den)
    g = 0
    for v in list(ints.values()) + [c]:
        g = gcd(g, v)
    if g > 1:
        ints = {k: v // g for k, v in ints.items()}
        c //= g
    if rel == "=":
        lead = next(iter(sorted(ints.items())), (None, c))[1]
        if lead < 0:
            ints = {k: -v for k, v in ints.items()}
            c = -c
    items = tuple(sorted((k, Fraction(v)) for k, v in ints.items()))
    return Atom(items, Fraction(c), rel, atom.column)


def _atom_key(atom: Atom):
    return (atom.coeffs, atom.const, atom.rel)


@dataclass(frozen=True)
class Location:
    name: str
    invariant: tuple = ()  # canonical atoms
    initial: bool = False

    @property
    def id(self) -> str:
        return self.name


@dataclass(frozen=True)
class Edge:
    id: int
    source: str
    target: str
    action: str
    guard: tuple = ()  # canonical atoms
    resets: tuple = ()  # clock names, declaration order


@dataclass(frozen=True, eq=False)
class PtaModel:
    name: str
    actions: tuple
    clocks: tuple
    parameters: tuple
    locations: tuple
    edges: tuple
    allow_diagonals: bool = False

    def __post_init__(self):
        inits = [l.name for l in self.locations if l.initial]
        if len(inits) != 1:
            raise ModelError(f"expected exactly one initial location, found {len(inits)}")
        names = [l.name for l in self.locations]
        if len(set(names)) != len(names):
            raise ModelError("duplicate location name")
        known = set(self.clocks) | set(self.parameters)
        for atoms in [l.invariant for l in self.locations] + [e.guard for e in self.edges]:
            for a in atoms:
                for v in a.variables():
                    if v not in known:
                        raise ModelError(f"undeclared identifier {v!r}")
        locset = set(names)
        for e in self.edges:
            if e.source not in locset or e.target not in locset:
                raise ModelError(f"edge {e.id} has an unknown endpoint")
            if e.action not in self.actions:
                raise ModelError(f"edge {e.id} uses undeclared action {e.action!r}")
            if not set(e.resets) <= set(self.clocks):
                raise ModelError(f"edge {e.id} resets an undeclared clock")

    @property
    def initial(self) -> str:
        return next(l.name for l in self.locations if l.initial)

    @cached_property
    def context(self) -> Context:
        return Context(self.clocks, self.parameters)

    @cached_property
    def _loc_index(self) -> dict:
        return {l.name: l for l in self.locations}

    def location(self, name: str) -> Location:
        return self._loc_index[name]

    def atoms_polyhedron(self, atoms: Iterable[Atom]) -> Polyhedron:
        rows = []
        for a in atoms:
            rows.extend(atom_rows(self.context, a))
        return Polyhedron(self.context, rows)

    @cached_property
    def _inv_cache(self) -> dict:
        return {l.name: self.atoms_polyhedron(l.invariant) for l in self.locations}

    @cached_property
    def _guard_cache(self) -> dict:
        return {e.id: self.atoms_polyhedron(e.guard) for e in self.edges}

    def invariant(self, loc: str) -> Polyhedron:
        return self._inv_cache[loc]

    def guard(self, edge: Edge) -> Polyhedron:
        return self._guard_cache[edge.id]

    @cached_property
    def _out(self) -> dict:
        out = {l.name: [] for l in self.locations}
        for e in self.edges:
            out[e.source].append(e)
        return out

    def outgoing(self, loc: str) -> list:
        return self._out[loc]

    def all_atoms(self) -> list:
        atoms = [a for l in self.locations for a in l.invariant]
        atoms += [a for e in self.edges for a in e.guard]
        return atoms

    def structurally_equal(self, other: "PtaModel") -> bool:
        def sig(m):
            locs = tuple((l.name, l.initial, tuple(sorted(map(_atom_key, l.invariant)))) for l in m.locations)
            edges = tuple(
                (e.source, e.target, e.action, tuple(sorted(map(_atom_key, e.guard))), tuple(e.resets))
                for e in m.edges
            )
            return (m.name, m.actions, m.clocks, m.parameters, m.allow_diagonals, locs, edges)

        return sig(self) == sig(other)


# ---------------------------------------------------------------------------
# parser

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def where(self, pos: Optional[int] = None):
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message: str, pos: Optional[int] = None):
        line, col = self.where(pos)
        return ModelSyntaxError(message, line, col)

    def skip(self):
        text = self.text
        while self.pos < len(text):
            ch = text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                nl = text.find("\n", self.pos)
                self.pos = len(text) if nl < 0 else nl
            else:
                break

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek_word(self) -> str:
        self.skip()
        if self.text.startswith("allow-diagonals", self.pos):
            return "allow-diagonals"
        m = _IDENT.match(self.text, self.pos)
        if m:
            return m.group(0)
        return self.text[self.pos:self.pos + 1]

    def ident(self, what: str = "identifier") -> tuple:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            found = self.text[self.pos:self.pos + 1] or "end of input"
            raise self.error(f"expected {what} but found {found!r}")
        self.pos = m.end()
        return m.group(0), m.start()

    def expect(self, token: str):
        self.skip()
        if not self.text.startswith(token, self.pos):
            found = self.text[self.pos:self.pos + 1] or "end of input"
            raise self.error(f"expected {token!r} but found {found!r}")
        self.pos += len(token)

    def accept(self, token: str) -> bool:
        self.skip()
        if self.text.startswith(token, self.pos):
            self.pos += len(token)
            return True
        return False

    def ident_list(self) -> list:
        items = []
        if self.accept(";"):
            return items
        while True:
            items.append(self.ident())
            if self.accept(";"):
                return items
            self.expect(",")

    def raw_until_semicolon(self) -> tuple:
        self.skip()
        start = self.pos
        end = start
        while end < len(self.text) and self.text[end] not in ";}\n#":
            end += 1
        if end >= len(self.text) or self.text[end] != ";":
            raise self.error("expected ';' after expression", end)
        self.pos = end + 1
        return self.text[start:end], start


class _ModelParser:
    def __init__(self, text: str):
        self.s = _Scanner(text)
        self.name = None
        self.clocks: list = []
        self.params: list = []
        self.actions: list = []
        self.diagonals = False
        self.locations: list = []
        self.edges: list = []  # (source, target, action, atom lists, resets, pos)

    def run(self) -> PtaModel:
        s = self.s
        while not s.at_end():
            word, pos = s.ident("a declaration")
            if word == "pta":
                self.name, _ = s.ident("model name")
                if s.peek_word() == "allow-diagonals":
                    s.expect("allow-diagonals")
                    self.diagonals = True
                s.expect(";")
            elif word == "allow" and s.accept("-diagonals"):
                self.diagonals = True
                s.expect(";")
            elif word == "clocks":
                self.clocks += self._declare(s.ident_list())
            elif word in ("parameters", "params"):
                self.params += self._declare(s.ident_list())
            elif word == "actions":
                self.actions += self._declare(s.ident_list())
            elif word == "location":
                self._location()
            elif word == "edge":
                self._edge()
            else:
                raise s.error(f"unknown declaration {word!r}", pos)
        if self.name is None:
            raise ModelSyntaxError("missing 'pta <name> ;' header", 1, 1)
        return self._build()

    def _declare(self, items) -> list:
        seen = set(self.clocks) | set(self.params) | set(self.actions)
        out = []
        for name, pos in items:
            if name in seen or name in out:
                raise self.s.error(f"duplicate declaration of {name!r}", pos)
            out.append(name)
        return out

    def _expr(self, names: Iterable[str]) -> list:
        text, start = self.s.raw_until_semicolon()
        try:
            atoms = parse_atoms(text, names)
        except ConstraintSyntaxError as exc:
            raise self.s.error(exc.message, start + exc.column - 1) from None
        clocks = set(self.clocks)
        for a in atoms:
            n = sum(1 for v in a.variables() if v in clocks)
            if n > 1 and not self.diagonals:
                raise self.s.error("comparison between clocks needs 'allow-diagonals'", start + a.column - 1)
        return [replace(a, column=start + a.column - 1) for a in atoms]

    def _location(self):
        s = self.s
        name, pos = s.ident("location name")
        if any(l[0] == name for l in self.locations):
            raise s.error(f"duplicate location {name!r}", pos)
        s.expect("{")
        initial = False
        invariant = []
        while not s.accept("}"):
            word, wpos = s.ident("'initial', 'invariant' or '}'")
            if word == "initial":
                initial = True
                s.expect(";")
            elif word == "invariant":
                for a in self._expr(self.clocks + self.params):
                    if a.rel == "!=":
                        raise s.error("'!=' is not allowed in an invariant", a.column)
                    invariant.append(a)
            else:
                raise s.error(f"unexpected {word!r} in location", wpos)
        self.locations.append((name, invariant, initial, pos))

    def _edge(self):
        s = self.s
        src, spos = s.ident("source location")
        s.expect("->")
        dst, dpos = s.ident("target location")
        s.expect("{")
        action = None
        guard = []
        resets = []
        while not s.accept("}"):
            word, wpos = s.ident("'sync', 'guard', 'reset' or '}'")
            if word in ("sync", "action"):
                action, apos = s.ident("action name")
                if action not in self.actions:
                    raise s.error(f"undeclared action {action!r}", apos)
                s.expect(";")
            elif word == "guard":
                guard += self._expr(self.clocks + self.params)
            elif word == "reset":
                for name, rpos in s.ident_list():
                    if name not in self.clocks:
                        raise s.error(f"{name!r} is not a declared clock", rpos)
                    if name not in resets:
                        resets.append(name)
            else:
                raise s.error(f"unexpected {word!r} in edge", wpos)
        if action is None:
            raise s.error("edge without 'sync <action> ;'", spos)
        self.edges.append((src, dst, action, guard, resets, spos, dpos))

    def _build(self) -> PtaModel:
        known = {l[0] for l in self.locations}
        inits = [l for l in self.locations if l[2]]
        if len(inits) != 1:
            pos = inits[1][3] if len(inits) > 1 else 0
            line, col = self.s.where(pos)
            raise ModelSyntaxError(f"expected exactly one initial location, found {len(inits)}", line, col)
        locations = tuple(
            Location(name, tuple(canonical_atom(a) for a in inv), init) for name, inv, init, _ in self.locations
        )
        edges = []
        for src, dst, action, guard, resets, spos, dpos in self.edges:
            if src not in known:
                raise self.s.error(f"unknown location {src!r}", spos)
            if dst not in known:
                raise self.s.error(f"unknown location {dst!r}", dpos)
            resets = tuple(c for c in self.clocks if c in resets)
            for variant in _split_disequalities(guard):
                edges.append(Edge(len(edges), src, dst, action, tuple(canonical_atom(a) for a in variant), resets))
        return PtaModel(
            self.name,
            tuple(self.actions),
            tuple(self.clocks),
            tuple(self.params),
            locations,
            tuple(edges),
            self.diagonals,
        )


def _split_disequalities(atoms: list) -> list:
    variants = [[]]
    for a in atoms:
        if a.rel == "!=":
            variants = [v + [replace(a, rel=r)] for v in variants for r in ("<", ">")]
        else:
            variants = [v + [a] for v in variants]
    return variants


def parse(text: str) -> PtaModel:
    """Parse model text; raises :class:`ModelSyntaxError` with line/column."""
    return _ModelParser(text).run()


def parse_file(path) -> PtaModel:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# rendering


def atom_text(atom: Atom, clocks: Iterable[str]) -> str:
    clocks = set(clocks)
    coeffs = dict(atom.coeffs)
    if not coeffs:
        return "true" if _const_true(atom) else "false"
    rel = atom.rel
    lead = next((k for k in sorted(coeffs) if k in clocks), None)
    if lead is None:
        lead = sorted(coeffs)[0]
    sign = 1 if coeffs[lead] > 0 else -1
    if sign < 0:
        rel = {"<": ">", "<=": ">=", "=": "="}[rel]
    left_names = [k for k in coeffs if k in clocks] or [lead]
    left, right = [], []
    for k in sorted(coeffs):
        q = coeffs[k] * sign
        if k in left_names:
            left.append((q, k))
        else:
            right.append((-q, k))
    const = -atom.const * sign
    return f"{_lin_text(left, 0)} {rel} {_lin_text(right, const)}"


def _const_true(atom: Atom) -> bool:
    c = atom.const
    return {"<": c < 0, "<=": c <= 0, "=": c == 0}[atom.rel]


def _lin_text(terms, const) -> str:
    out = ""
    for q, name in terms:
        mag = abs(q)
        body = name if mag == 1 else f"{format_rational(mag)}*{name}"
        if not out:
            out = body if q > 0 else f"-{body}"
        else:
            out += f" + {body}" if q > 0 else f" - {body}"
    if const or not out:
        if not out:
            out = format_rational(const)
        elif const > 0:
            out += f" + {format_rational(const)}"
        else:
            out += f" - {format_rational(-const)}"
    return out


def conjunction_text(atoms: Iterable[Atom], clocks: Iterable[str]) -> str:
    atoms = list(atoms)
    if not atoms:
        return "true"
    clocks = list(clocks)
    return " & ".join(atom_text(a, clocks) for a in atoms)


def render(m: PtaModel) -> str:
    """Model text in the grammar accepted by :func:`parse`."""
    lines = [f"pta {m.name}{' allow-diagonals' if m.allow_diagonals else ''} ;"]
    lines.append(f"clocks {', '.join(m.clocks)} ;")
    lines.append(f"parameters {', '.join(m.parameters)} ;")
    lines.append(f"actions {', '.join(m.actions)} ;")
    lines.append("")
    for l in m.locations:
        body = []
        if l.initial:
            body.append("initial ;")
        body.append(f"invariant {conjunction_text(l.invariant, m.clocks)} ;")
        lines.append(f"location {l.name} {{ {' '.join(body)} }}")
    lines.append("")
    for e in m.edges:
        body = [f"sync {e.action} ;"]
        if e.guard:
            body.append(f"guard {conjunction_text(e.guard, m.clocks)} ;")
        if e.resets:
            body.append(f"reset {', '.join(e.resets)} ;")
        lines.append(f"edge {e.source} -> {e.target} {{ {' '.join(body)} }}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ModelClass:
    deterministic: bool
    lu_status: str  # "L", "U", "L/U" or "neither"
    lower_params: frozenset
    upper_params: frozenset
    clock_count: int
    parametric_clocks: frozenset
    parameter_count: int
    has_diagonal_guards: bool
    linear_parameter_terms: bool
    parameter_only_atoms: bool = False

    @property
    def is_l(self) -> bool:
        return self.lu_status != "neither" and not self.upper_params

    @property
    def is_u(self) -> bool:
        return self.lu_status != "neither" and not self.lower_params

    @property
    def fragment(self) -> str:
        if self.has_diagonal_guards:
            return "diagonal"
        if self.linear_parameter_terms:
            return "linear-parameter-terms"
        return "atomic"

    def to_json(self) -> dict:
        return {
            "deterministic": self.deterministic,
            "lu_status": self.lu_status,
            "lower_params": sorted(self.lower_params),
            "upper_params": sorted(self.upper_params),
            "clock_count": self.clock_count,
            "parametric_clocks": sorted(self.parametric_clocks),
            "parameter_count": self.parameter_count,
            "has_diagonal_guards": self.has_diagonal_guards,
            "fragment": self.fragment,
        }


def classify(m: PtaModel) -> ModelClass:
    seen = set()
    deterministic = True
    for e in m.edges:
        key = (e.source, e.action)
        if key in seen:
            deterministic = False
        seen.add(key)
    clocks = set(m.clocks)
    params = set(m.parameters)
    lower, upper = set(), set()
    parametric = set()
    diagonal = linear = param_only = False
    for a in m.all_atoms():
        coeffs = dict(a.coeffs)
        cks = [k for k in coeffs if k in clocks]
        ps = [k for k in coeffs if k in params]
        if len(cks) > 1:
            diagonal = True
        if len(ps) > 1 or any(abs(coeffs[p]) != abs(coeffs[cks[0]]) for p in ps if len(cks) == 1):
            linear = True
        if not cks:
            if ps:
                param_only = True
            continue
        if ps:
            parametric.update(cks)
        if len(cks) > 1:
            # a parameter in a diagonal bounds differences, not one clock
            lower.update(ps)
            upper.update(ps)
            continue
        # In "t < 0" / "t <= 0" form, raising p relaxes the atom iff its
        # coefficient is negative: that is an upper-bound use.
        for p in ps:
            if a.rel == "=":
                lower.add(p)
                upper.add(p)
            elif coeffs[p] > 0:
                lower.add(p)
            else:
                upper.add(p)
    if lower & upper:
        status = "neither"
    elif lower and not upper:
        status = "L"
    elif upper and not lower:
        status = "U"
    else:
        status = "L/U"
    return ModelClass(
        deterministic=deterministic,
        lu_status=status,
        lower_params=frozenset(lower),
        upper_params=frozenset(upper),
        clock_count=len(m.clocks),
        parametric_clocks=frozenset(parametric),
        parameter_count=len(m.parameters),
        has_diagonal_guards=diagonal,
        linear_parameter_terms=linear,
        parameter_only_atoms=param_only,
    )


# ---------------------------------------------------------------------------
# valuation


def parse_valuation(text: str | Mapping[str, object] | None) -> dict:
    """``"p1=1, p2=3/2"`` (or a mapping) into a name -> Fraction dict."""
    if text is None:
        return {}
    if isinstance(text, Mapping):
        return {k: parse_rational(v) for k, v in text.items()}
    out = {}
    for part in re.split(r"[,\s]+", text.strip()):
        if not part:
            continue
        if "=" not in part:
            raise ValueError(f"expected name=value, got {part!r}")
        name, value = part.split("=", 1)
        out[name.strip()] = parse_rational(value)
    return out


def _substitute_atom(atom: Atom, val: Mapping[str, Fraction]) -> Atom:
    coeffs = []
    const = atom.const
    for name, c in atom.coeffs:
        if name in val:
            const += c * val[name]
        else:
            coeffs.append((name, c))
    return canonical_atom(Atom(tuple(coeffs), const, atom.rel, atom.column))


def valuate(m: PtaModel, v: Mapping[str, object]) -> PtaModel:
    """Substitute parameter values; the result has no parameters."""
    val = parse_valuation(v)
    for p in m.parameters:
        if p not in val:
            raise ValueError(f"valuation does not assign parameter {p!r}")
        if val[p] < 0:
            raise ValueError(f"negative value for parameter {p!r}")
    val = {p: val[p] for p in m.parameters}

    def sub(atoms):
        out = []
        for a in atoms:
            b = _substitute_atom(a, val)
            if not b.coeffs and _const_true(b):
                continue
            out.append(b)
        return tuple(out)

    locations = tuple(replace(l, invariant=sub(l.invariant)) for l in m.locations)
    edges = tuple(replace(e, guard=sub(e.guard)) for e in m.edges)
    return PtaModel(m.name, m.actions, m.clocks, (), locations, edges, m.allow_diagonals)


def max_constant(m: PtaModel) -> Fraction:
    """Largest absolute constant over guards and invariants of a TA."""
    best = Fraction(0)
    for a in m.all_atoms():
        coeffs = dict(a.coeffs)
        if not coeffs:
            continue
        scale = max(abs(c) for c in coeffs.values())
        best = max(best, abs(a.const) / scale)
    return best
