"""Exact linear constraints over clocks and parameters.

A :class:`Polyhedron` is a conjunction of linear inequalities ``t < 0``,
``t <= 0`` or ``t = 0`` with integer coefficients.  Every variable is
implicitly nonnegative.  Polyhedra are kept in a canonical form (affine hull
in reduced echelon form plus an irredundant set of inequalities), so two
polyhedra with the same point set normally compare equal.

All arithmetic is exact.  Emptiness and projection are decided by
Fourier-Motzkin elimination with strictness tracking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Mapping, Optional, Sequence

__all__ = [
    "Context",
    "Polyhedron",
    "DisjunctiveConstraint",
    "ConstraintSyntaxError",
    "Atom",
    "parse_atoms",
    "parse_rational",
    "format_rational",
    "satisfies",
    "is_empty",
    "eliminate",
    "project_params",
    "time_elapse",
    "reset",
    "intersect",
    "complement",
    "intersect_disjunctive",
    "includes",
    "equivalent",
    "contains_other_point",
]

LT, LE, EQ = 0, 1, 2
REL_TEXT = {LT: "<", LE: "<=", EQ: "="}
_REL_CODE = {"<": LT, "<=": LE, "=": EQ}

# A row is (coeffs, const, rel) meaning sum(coeffs[i] * v_i) + const  rel  0,
# with integer coefficients and rel in {LT, LE, EQ}.
Row = tuple


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``num``, ``num/den`` or a decimal literal into a Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Context:
    """Declared variables: clocks first, then parameters."""

    clocks: tuple = ()
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "clocks", tuple(self.clocks))
        object.__setattr__(self, "params", tuple(self.params))
        names = self.clocks + self.params
        if len(set(names)) != len(names):
            raise ValueError("duplicate variable name in context")

    @property
    def names(self) -> tuple:
        return self.clocks + self.params

    @property
    def size(self) -> int:
        return len(self.clocks) + len(self.params)

    def index(self, var: str | int) -> int:
        if isinstance(var, int):
            if not 0 <= var < self.size:
                raise ValueError(f"variable index {var} out of range")
            return var
        try:
            return self.names.index(var)
        except ValueError:
            raise ValueError(f"unknown variable {var!r}") from None

    def is_clock(self, var: str | int) -> bool:
        return self.index(var) < len(self.clocks)

    def clock_indices(self) -> range:
        return range(len(self.clocks))

    def param_indices(self) -> range:
        return range(len(self.clocks), self.size)


# ---------------------------------------------------------------------------
# row arithmetic


def _normalize(coeffs: tuple, const: int, rel: int) -> Row:
    g = 0
    for c in coeffs:
        if c:
            g = gcd(g, c)
    g = gcd(g, const)
    if g > 1:
        coeffs = tuple(c // g for c in coeffs)
        const //= g
    if rel == EQ:
        lead = next((c for c in coeffs if c), const)
        if lead < 0:
            coeffs = tuple(-c for c in coeffs)
            const = -const
    return (coeffs, const, rel)


def _from_fractions(coeffs: Sequence[Fraction], const: Fraction, rel: int) -> Row:
    den = 1
    for q in list(coeffs) + [const]:
        q = Fraction(q)
        den = den * q.denominator // gcd(den, q.denominator)
    ints = tuple(int(Fraction(c) * den) for c in coeffs)
    return _normalize(ints, int(Fraction(const) * den), rel)


def _is_constant(row: Row) -> bool:
    return not any(row[0])


def _constant_holds(row: Row) -> bool:
    c, rel = row[1], row[2]
    if rel == LT:
        return c < 0
    if rel == LE:
        return c <= 0
    return c == 0


def _negate(row: Row) -> Row:
    """The complement of an inequality row (not defined for equalities)."""
    coeffs, const, rel = row
    neg = tuple(-c for c in coeffs)
    return (neg, -const, LE if rel == LT else LT)


def _nonneg(i: int, n: int) -> Row:
    return (tuple(-1 if j == i else 0 for j in range(n)), 0, LE)


def _simplify(rows: Iterable[Row]) -> Optional[list]:
    """Normalize, drop trivial rows and keep the tightest of parallel rows.

    Returns None when a constant row is false.
    """
    best: dict = {}
    eqs: set = set()
    for row in rows:
        row = _normalize(*row)
        if _is_constant(row):
            if not _constant_holds(row):
                return None
            continue
        coeffs, const, rel = row
        if rel == EQ:
            eqs.add(row)
            continue
        prev = best.get(coeffs)
        if prev is None or const > prev[1] or (const == prev[1] and rel == LT):
            best[coeffs] = row
    return sorted(eqs) + list(best.values())


def _substitute(row: Row, eq: Row, var: int) -> Row:
    """Eliminate ``var`` from ``row`` using the equality ``eq``."""
    a = eq[0][var]
    b = row[0][var]
    if not b:
        return row
    if row[2] == EQ:
        m, k = a, b
    else:
        m, k = abs(a), b if a > 0 else -b
    coeffs = tuple(m * r - k * e for r, e in zip(row[0], eq[0]))
    return _normalize(coeffs, m * row[1] - k * eq[1], row[2])


def _combine(pos: Row, neg: Row, var: int) -> Row:
    a = pos[0][var]
    b = -neg[0][var]
    coeffs = tuple(b * p + a * q for p, q in zip(pos[0], neg[0]))
    rel = LT if LT in (pos[2], neg[2]) else LE
    return _normalize(coeffs, b * pos[1] + a * neg[1], rel)


def _fm(rows: Iterable[Row], n: int, elim: Iterable[int], trail: Optional[list] = None):
    """Fourier-Motzkin elimination of the variables in ``elim``.

    Nonnegativity of each eliminated variable is added first.  Returns the
    remaining rows, or None if the system is infeasible.  When ``trail`` is
    given, it receives ``(var, rows_mentioning_var)`` for each elimination
    step so that a witness can be rebuilt by back-substitution.
    """
    elim = set(elim)
    work = list(rows) + [_nonneg(i, n) for i in sorted(elim)]
    while True:
        work = _simplify(work)
        if work is None:
            return None
        live = [v for v in sorted(elim) if any(r[0][v] for r in work)]
        if not live:
            for v in sorted(elim):
                if trail is not None:
                    trail.append((v, []))
            return work
        eq = None
        for r in work:
            if r[2] == EQ:
                cands = [v for v in live if r[0][v]]
                if cands:
                    eq = (r, min(cands, key=lambda v: abs(r[0][v])))
                    break
        if eq is not None:
            row, v = eq
            if trail is not None:
                trail.append((v, [row]))
            work = [_substitute(r, row, v) for r in work if r is not row]
            elim.discard(v)
            continue
        best = None
        for v in live:
            p = sum(1 for r in work if r[0][v] > 0)
            q = sum(1 for r in work if r[0][v] < 0)
            score = p * q - p - q
            if best is None or score < best[0]:
                best = (score, v)
        v = best[1]
        pos = [r for r in work if r[0][v] > 0]
        neg = [r for r in work if r[0][v] < 0]
        if trail is not None:
            trail.append((v, pos + neg))
        rest = [r for r in work if not r[0][v]]
        work = rest + [_combine(p, q, v) for p in pos for q in neg]
        elim.discard(v)


def _empty_rows(rows: Iterable[Row], n: int) -> bool:
    return _fm(rows, n, range(n)) is None


@lru_cache(maxsize=1 << 16)
def _empty_cached(rows: tuple, n: int) -> bool:
    return _empty_rows(rows, n)


def _sample_rows(rows: Iterable[Row], n: int) -> Optional[list]:
    """A rational point satisfying ``rows`` (all variables >= 0), or None."""
    trail: list = []
    if _fm(rows, n, range(n), trail) is None:
        return None
    point = [Fraction(0)] * n
    for var, bound_rows in reversed(trail):
        lo, lo_strict, hi, hi_strict = Fraction(0), False, None, False
        fixed = None
        for coeffs, const, rel in bound_rows:
            a = coeffs[var]
            rest = sum((c * point[j] for j, c in enumerate(coeffs) if j != var and c), Fraction(0))
            value = -(rest + const) / a
            if rel == EQ:
                fixed = value
                break
            strict = rel == LT
            if a > 0:
                if hi is None or value < hi or (value == hi and strict):
                    hi, hi_strict = value, strict
            else:
                if value > lo or (value == lo and strict):
                    lo, lo_strict = value, strict
        if fixed is not None:
            point[var] = fixed
        elif hi is None:
            point[var] = lo + 1 if lo_strict else lo
        elif lo_strict or hi_strict:
            point[var] = (lo + hi) / 2
        else:
            point[var] = lo
    return point


def _row_key(row: Row):
    coeffs, const, rel = row
    support = tuple(i for i, c in enumerate(coeffs) if c)
    return (rel != EQ, support, coeffs, const, rel)


def _echelon(eqs: list, n: int) -> list:
    """Reduced row echelon form of a consistent set of equality rows."""
    mat = [[Fraction(c) for c in r[0]] + [Fraction(r[1])] for r in eqs]
    out = []
    row_i = 0
    for col in range(n):
        pivot = next((i for i in range(row_i, len(mat)) if mat[i][col]), None)
        if pivot is None:
            continue
        mat[row_i], mat[pivot] = mat[pivot], mat[row_i]
        lead = mat[row_i][col]
        mat[row_i] = [x / lead for x in mat[row_i]]
        for i in range(len(mat)):
            if i != row_i and mat[i][col]:
                f = mat[i][col]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[row_i])]
        out.append(col)
        row_i += 1
    rows = []
    for i, col in enumerate(out):
        rows.append((col, _from_fractions(mat[i][:n], mat[i][n], EQ)))
    return rows


@lru_cache(maxsize=1 << 15)
def _canonical(rows: tuple, n: int) -> Optional[tuple]:
    """Canonical row tuple for the point set of ``rows``; None if empty."""
    work = _simplify(rows)
    if work is None or _empty_rows(work, n):
        return None
    eqs = [r for r in work if r[2] == EQ]
    ineqs = [r for r in work if r[2] != EQ]
    # Implicit equalities: non-strict rows (including nonnegativity) that
    # are tight on the whole set.
    tight = set()
    for cand in [r for r in ineqs if r[2] == LE] + [_nonneg(i, n) for i in range(n)]:
        strict = (cand[0], cand[1], LT)
        if _empty_rows(work + [strict], n):
            tight.add(cand)
            eqs.append(_normalize(cand[0], cand[1], EQ))
    ineqs = [r for r in ineqs if r not in tight]
    basis = _echelon(eqs, n) if eqs else []
    pivots = {col for col, _ in basis}
    pool = ineqs + [_nonneg(i, n) for i in sorted(pivots)]
    for col, eq in basis:
        pool = [_substitute(r, eq, col) for r in pool]
    pool = _simplify(pool)
    assert pool is not None
    pool = [r for r in pool if not _is_free_nonneg(r, pivots)]
    eq_rows = [eq for _, eq in basis]
    kept = sorted(pool, key=_row_key)
    for r in list(kept):
        others = [k for k in kept if k is not r]
        if _empty_rows(eq_rows + others + [_negate(r)], n):
            kept = others
    return tuple(sorted(eq_rows + kept, key=_row_key))


def _is_free_nonneg(row: Row, pivots: set) -> bool:
    coeffs, const, rel = row
    if rel != LE or const != 0:
        return False
    support = [i for i, c in enumerate(coeffs) if c]
    return len(support) == 1 and coeffs[support[0]] == -1 and support[0] not in pivots


# ---------------------------------------------------------------------------
# parsing


class ConstraintSyntaxError(ValueError):
    """Malformed constraint text; ``column`` is 1-based within the text."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column}: {message}")
        self.message = message
        self.column = column


@dataclass(frozen=True)
class Atom:
    """One parsed comparison ``lhs rel rhs`` moved to ``expr rel 0``."""

    coeffs: tuple  # ((name, Fraction), ...)
    const: Fraction
    rel: str  # one of < <= = >= > !=
    column: int

    def variables(self) -> tuple:
        return tuple(name for name, _ in self.coeffs)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<op><=|>=|!=|==|&&|[<>=&+\-*/()]))"
)


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ConstraintSyntaxError(f"unexpected character {text[col - 1]!r}", col)
        kind = m.lastgroup
        start = m.start(kind) + 1
        out.append((kind, m.group(kind), start))
        pos = m.end()
    out.append(("end", "", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text: str, names: Optional[Iterable[str]]):
        self.toks = _tokenize(text)
        self.i = 0
        self.names = None if names is None else set(names)

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def conjunction(self) -> list:
        atoms = []
        while True:
            kind, val, col = self.peek()
            if kind == "id" and val in ("true", "false") and self._ends_atom(1):
                self.take()
                if val == "false":
                    atoms.append(Atom((), Fraction(1), "<=", col))
            else:
                atoms.append(self.atom())
            kind, val, col = self.peek()
            if kind == "end":
                return atoms
            if val in ("&", "&&") or (kind == "id" and val == "and"):
                self.take()
                continue
            raise ConstraintSyntaxError(f"expected '&' but found {val!r}", col)

    def _ends_atom(self, ahead: int) -> bool:
        kind, val, _ = self.toks[self.i + ahead]
        return kind == "end" or val in ("&", "&&", "and")

    def atom(self) -> Atom:
        col = self.peek()[2]
        left = self.linear()
        kind, val, rcol = self.take()
        rel = {"==": "="}.get(val, val)
        if rel not in ("<", "<=", "=", ">=", ">", "!="):
            raise ConstraintSyntaxError(f"expected a comparison but found {val or 'end of input'!r}", rcol)
        right = self.linear()
        coeffs = dict(left[0])
        for name, c in right[0].items():
            coeffs[name] = coeffs.get(name, 0) - c
        items = tuple((k, v) for k, v in coeffs.items() if v)
        return Atom(items, left[1] - right[1], rel, col)

    def linear(self):
        kind, val, col = self.peek()
        sign = 1
        if val in ("+", "-"):
            self.take()
            sign = -1 if val == "-" else 1
        acc = _scale(self.term(), sign)
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            acc = _add(acc, _scale(self.term(), -1 if op == "-" else 1))
        return acc

    def term(self):
        acc = self.factor()
        while self.peek()[1] in ("*", "/"):
            op, col = self.take()[1], self.peek()[2]
            rhs = self.factor()
            if op == "/":
                if rhs[0] or rhs[1] == 0:
                    raise ConstraintSyntaxError("division by a non-constant or zero", col)
                acc = _scale(acc, 1 / rhs[1])
            elif acc[0] and rhs[0]:
                raise ConstraintSyntaxError("non-linear term", col)
            elif acc[0]:
                acc = _scale(acc, rhs[1])
            else:
                acc = _scale(rhs, acc[1])
        return acc

    def factor(self):
        kind, val, col = self.take()
        if kind == "num":
            return ({}, Fraction(val))
        if kind == "id":
            if val in ("true", "false", "and"):
                raise ConstraintSyntaxError(f"unexpected {val!r}", col)
            if self.names is not None and val not in self.names:
                raise ConstraintSyntaxError(f"undeclared identifier {val!r}", col)
            return ({val: Fraction(1)}, Fraction(0))
        if val == "(":
            inner = self.linear()
            kind, val, col2 = self.take()
            if val != ")":
                raise ConstraintSyntaxError("expected ')'", col2)
            return inner
        raise ConstraintSyntaxError(f"unexpected {val or 'end of input'!r}", col)


def _scale(lin, k):
    return ({n: c * k for n, c in lin[0].items() if c * k}, lin[1] * k)


def _add(a, b):
    coeffs = dict(a[0])
    for n, c in b[0].items():
        coeffs[n] = coeffs.get(n, 0) + c
    return ({n: c for n, c in coeffs.items() if c}, a[1] + b[1])


def parse_atoms(text: str, names: Optional[Iterable[str]] = None) -> list:
    """Parse ``a1 & a2 & ...`` into :class:`Atom` objects.

    ``true`` contributes no atom.  With ``names`` given, any other
    identifier is rejected.
    """
    return _Parser(text, names).conjunction()


# ---------------------------------------------------------------------------
# polyhedra


class Polyhedron:
    """A canonical conjunction of linear constraints over a :class:`Context`."""

    __slots__ = ("context", "rows")

    def __init__(self, context: Context, rows: Iterable[Row] = ()):
        self.context = context
        canon = _canonical(tuple(_normalize(*r) for r in rows), context.size)
        # rows is None for the empty set
        self.rows = canon

    @classmethod
    def true(cls, context: Context) -> "Polyhedron":
        return cls(context, ())

    @classmethod
    def false(cls, context: Context) -> "Polyhedron":
        return cls(context, [((0,) * context.size, 1, LE)])

    @classmethod
    def parse(cls, context: Context, text: str) -> "Polyhedron":
        rows = []
        for atom in parse_atoms(text, context.names):
            rows.extend(atom_rows(context, atom))
        return cls(context, rows)

    @classmethod
    def from_point(cls, context: Context, val: Mapping[str, object], names: Iterable[str]) -> "Polyhedron":
        rows = []
        for name in names:
            coeffs = [Fraction(0)] * context.size
            coeffs[context.index(name)] = Fraction(1)
            rows.append(_from_fractions(coeffs, -parse_rational(val[name]), EQ))
        return cls(context, rows)

    def is_empty(self) -> bool:
        return self.rows is None

    def is_true(self) -> bool:
        return self.rows == ()

    def __eq__(self, other):
        return isinstance(other, Polyhedron) and self.context == other.context and self.rows == other.rows

    def __hash__(self):
        return hash((self.context, self.rows))

    def __repr__(self):
        return f"Polyhedron({self.to_text()!r})"

    def __str__(self):
        return self.to_text()

    def __and__(self, other):
        return intersect(self, other)

    def variables(self) -> set:
        if not self.rows:
            return set()
        return {i for r in self.rows for i, c in enumerate(r[0]) if c}

    def mentions_clocks(self) -> bool:
        return any(i < len(self.context.clocks) for i in self.variables())

    def with_rows(self, extra: Iterable[Row]) -> "Polyhedron":
        if self.rows is None:
            return self
        return Polyhedron(self.context, list(self.rows) + list(extra))

    def sample(self) -> Optional[dict]:
        """Some point of the polyhedron as a name -> Fraction map."""
        if self.rows is None:
            return None
        point = _sample_rows(self.rows, self.context.size)
        return dict(zip(self.context.names, point))

    def to_text(self) -> str:
        if self.rows is None:
            return "false"
        if not self.rows:
            return "true"
        return " & ".join(_row_text(r, self.context.names) for r in self.rows)

    def to_json(self) -> list:
        if self.rows is None:
            return [{"lhs": {"const": 1}, "rel": "<="}]
        out = []
        for coeffs, const, rel in self.rows:
            lhs = {name: c for name, c in zip(self.context.names, coeffs) if c}
            lhs["const"] = const
            out.append({"lhs": lhs, "rel": REL_TEXT[rel]})
        return out


def atom_rows(context: Context, atom: Atom) -> list:
    """Rows for a parsed atom; ``!=`` is rejected (split it beforehand)."""
    coeffs = [Fraction(0)] * context.size
    for name, c in atom.coeffs:
        coeffs[context.index(name)] += c
    const = atom.const
    rel = atom.rel
    if rel == "!=":
        raise ConstraintSyntaxError("'!=' is not convex; split the transition", atom.column)
    if rel in (">", ">="):
        coeffs = [-c for c in coeffs]
        const = -const
        rel = "<" if rel == ">" else "<="
    return [_from_fractions(coeffs, const, _REL_CODE[rel])]


def _row_text(row: Row, names: Sequence[str]) -> str:
    coeffs, const, rel = row
    lead_i = next(i for i, c in enumerate(coeffs) if c)
    lead = coeffs[lead_i]
    scale = Fraction(1, abs(lead))
    sign = 1 if lead > 0 else -1
    op = REL_TEXT[rel]
    if sign < 0:
        op = {"<": ">", "<=": ">=", "=": "="}[op]
    left, right = [], []
    for i, c in enumerate(coeffs):
        if not c:
            continue
        q = Fraction(c) * scale * sign
        if q > 0:
            left.append((q, names[i]))
        else:
            right.append((-q, names[i]))
    k = -Fraction(const) * scale * sign
    return f"{_side(left, 0)} {op} {_side(right, k)}"


def _side(terms, const) -> str:
    parts = []
    for q, name in terms:
        parts.append(name if q == 1 else f"{format_rational(q)}*{name}")
    text = " + ".join(parts)
    if const and parts:
        text += f" - {format_rational(-const)}" if const < 0 else f" + {format_rational(const)}"
    elif not parts:
        text = format_rational(const)
    return text


# ---------------------------------------------------------------------------
# operations


def _check_valuation(val: Mapping[str, object], names: Iterable[str]) -> dict:
    out = {}
    for name in names:
        if name not in val:
            raise ValueError(f"valuation does not assign {name!r}")
        q = parse_rational(val[name])
        if q < 0:
            raise ValueError(f"valuation assigns negative value to {name!r}")
        out[name] = q
    return out


def satisfies(val: Mapping[str, object], c: Polyhedron) -> bool:
    """Exact membership test.  Only variables that occur in ``c`` are read."""
    if c.rows is None:
        return False
    names = c.context.names
    needed = [names[i] for i in sorted(c.variables())]
    point = _check_valuation(val, needed)
    for coeffs, const, rel in c.rows:
        total = Fraction(const) + sum(coeffs[i] * point[names[i]] for i in range(len(coeffs)) if coeffs[i])
        if rel == LT and not total < 0:
            return False
        if rel == LE and not total <= 0:
            return False
        if rel == EQ and total != 0:
            return False
    return True


def is_empty(c: Polyhedron) -> bool:
    return c.rows is None


def eliminate(c: Polyhedron, variables: Iterable[str | int]) -> Polyhedron:
    """Existentially project away ``variables`` (the shadow of ``c``)."""
    if c.rows is None:
        return c
    idx = {c.context.index(v) for v in variables}
    rows = _fm(c.rows, c.context.size, idx)
    if rows is None:
        return Polyhedron.false(c.context)
    return Polyhedron(c.context, rows)


def project_params(c: Polyhedron) -> Polyhedron:
    return eliminate(c, c.context.clock_indices())


def time_elapse(c: Polyhedron) -> Polyhedron:
    """Future closure: all (w + d, v) with (w, v) in ``c`` and d >= 0."""
    if c.rows is None:
        return c
    ctx = c.context
    n = ctx.size
    nclk = len(ctx.clocks)
    rows = []
    for coeffs, const, rel in c.rows:
        d = -sum(coeffs[:nclk])
        rows.append((coeffs + (d,), const, rel))
    # the pre-delay valuation x - d is nonnegative too
    for i in range(nclk):
        rows.append((tuple(-1 if j == i else 0 for j in range(n)) + (1,), 0, LE))
    out = _fm(rows, n + 1, [n])
    if out is None:
        return Polyhedron.false(ctx)
    return Polyhedron(ctx, [(r[0][:n], r[1], r[2]) for r in out])


def reset(c: Polyhedron, clocks: Iterable[str | int]) -> Polyhedron:
    """Forget the given clocks and set them to zero."""
    idx = sorted({c.context.index(x) for x in clocks})
    for i in idx:
        if not c.context.is_clock(i):
            raise ValueError(f"{c.context.names[i]!r} is not a clock")
    if not idx or c.rows is None:
        return c
    n = c.context.size
    shadow = _fm(c.rows, n, idx)
    if shadow is None:
        return Polyhedron.false(c.context)
    zeros = [(tuple(1 if j == i else 0 for j in range(n)), 0, EQ) for i in idx]
    return Polyhedron(c.context, shadow + zeros)


def intersect(a: Polyhedron, b: Polyhedron) -> Polyhedron:
    if a.context != b.context:
        raise ValueError("polyhedra over different contexts")
    if a.rows is None:
        return a
    if b.rows is None:
        return b
    return Polyhedron(a.context, a.rows + b.rows)


def _negations(row: Row) -> list:
    if row[2] == EQ:
        return [(row[0], row[1], LT), (tuple(-c for c in row[0]), -row[1], LT)]
    return [_negate(row)]


def includes(a: Polyhedron, b: Polyhedron) -> bool:
    """True iff every point of ``b`` lies in ``a``."""
    if a.context != b.context:
        raise ValueError("polyhedra over different contexts")
    if b.rows is None:
        return True
    if a.rows is None:
        return False
    n = a.context.size
    for row in a.rows:
        for neg in _negations(row):
            if not _empty_cached(b.rows + (neg,), n):
                return False
    return True


def equivalent(a: Polyhedron, b: Polyhedron) -> bool:
    return includes(a, b) and includes(b, a)


class DisjunctiveConstraint:
    """A finite union of non-empty polyhedra over one context."""

    __slots__ = ("context", "disjuncts")

    def __init__(self, context: Context, disjuncts: Iterable[Polyhedron] = ()):
        self.context = context
        seen = {}
        for p in disjuncts:
            if p.context != context:
                raise ValueError("disjunct over a different context")
            if p.rows is not None:
                seen[p.rows] = p
        self.disjuncts = tuple(seen[k] for k in sorted(seen, key=lambda rows: [_row_key(r) for r in rows]))

    @classmethod
    def true(cls, context: Context) -> "DisjunctiveConstraint":
        return cls(context, [Polyhedron.true(context)])

    @classmethod
    def false(cls, context: Context) -> "DisjunctiveConstraint":
        return cls(context, [])

    def is_empty(self) -> bool:
        return not self.disjuncts

    def is_true(self) -> bool:
        return any(p.is_true() for p in self.disjuncts)

    def union(self, other) -> "DisjunctiveConstraint":
        if isinstance(other, Polyhedron):
            other = DisjunctiveConstraint(self.context, [other])
        return DisjunctiveConstraint(self.context, self.disjuncts + other.disjuncts)

    def __or__(self, other):
        return self.union(other)

    def __and__(self, other):
        if isinstance(other, Polyhedron):
            other = DisjunctiveConstraint(self.context, [other])
        return intersect_disjunctive(self, other)

    def __eq__(self, other):
        return (
            isinstance(other, DisjunctiveConstraint)
            and self.context == other.context
            and self.disjuncts == other.disjuncts
        )

    def __hash__(self):
        return hash((self.context, self.disjuncts))

    def __len__(self):
        return len(self.disjuncts)

    def __iter__(self):
        return iter(self.disjuncts)

    def __repr__(self):
        return f"DisjunctiveConstraint({self.to_text()!r})"

    def __str__(self):
        return self.to_text()

    def satisfied_by(self, val: Mapping[str, object]) -> bool:
        return any(satisfies(val, p) for p in self.disjuncts)

    def pruned(self) -> "DisjunctiveConstraint":
        """Drop disjuncts contained in another disjunct."""
        keep = []
        for i, p in enumerate(self.disjuncts):
            if not any(j != i and includes(q, p) and (j < i or not includes(p, q))
                       for j, q in enumerate(self.disjuncts)):
                keep.append(p)
        return DisjunctiveConstraint(self.context, keep)

    def to_text(self) -> str:
        if not self.disjuncts:
            return "false"
        if len(self.disjuncts) == 1:
            return self.disjuncts[0].to_text()
        return " | ".join(f"({p.to_text()})" for p in self.disjuncts)

    def to_json(self) -> list:
        return [p.to_json() for p in self.disjuncts]


def complement(d: DisjunctiveConstraint) -> DisjunctiveConstraint:
    """Complement within the nonnegative orthant, as a union of polyhedra."""
    ctx = d.context
    acc = [Polyhedron.true(ctx)]
    for p in d.disjuncts:
        pieces = [Polyhedron(ctx, [neg]) for row in p.rows for neg in _negations(row)]
        pieces = [q for q in pieces if q.rows is not None]
        acc = [intersect(a, q) for a in acc for q in pieces]
        acc = DisjunctiveConstraint(ctx, acc).pruned().disjuncts
        if not acc:
            break
    return DisjunctiveConstraint(ctx, acc)


def intersect_disjunctive(a: DisjunctiveConstraint, b: DisjunctiveConstraint) -> DisjunctiveConstraint:
    if a.context != b.context:
        raise ValueError("constraints over different contexts")
    parts = [intersect(p, q) for p in a.disjuncts for q in b.disjuncts]
    return DisjunctiveConstraint(a.context, parts).pruned()


def contains_other_point(d: DisjunctiveConstraint, val: Mapping[str, object]) -> Optional[dict]:
    """A parameter valuation v' != v inside some disjunct that contains v.

    Returns None when every disjunct containing v is the single point v.
    Raises ValueError when v does not satisfy ``d``.
    """
    ctx = d.context
    params = ctx.params
    point = _check_valuation(val, params)
    holding = [p for p in d.disjuncts if satisfies(point, p)]
    if not holding:
        raise ValueError("valuation does not satisfy the constraint")
    n = ctx.size
    for p in holding:
        for name in params:
            i = ctx.index(name)
            unit = tuple(1 if j == i else 0 for j in range(n))
            target = _from_fractions(unit, -point[name], EQ)
            for side in ((target[0], target[1], LT), _negate((target[0], target[1], LE))):
                q = p.with_rows([side])
                if q.rows is not None:
                    witness = q.sample()
                    return {k: witness[k] for k in params}
    return None
