import itertools
import random
from fractions import Fraction as F

import pytest

from oracles import interval_feasible
from ptasynth.constraints import (
    ConstraintSyntaxError,
    Context,
    DisjunctiveConstraint,
    Polyhedron,
    complement,
    contains_other_point,
    eliminate,
    equivalent,
    format_rational,
    includes,
    intersect,
    parse_atoms,
    parse_rational,
    project_params,
    reset,
    satisfies,
    time_elapse,
)

CTX = Context(("x1", "x2"), ("p1", "p2"))
PCTX = Context((), ("p", "q"))


def P(text, ctx=CTX):
    return Polyhedron.parse(ctx, text)


class TestParsing:
    def test_rationals(self):
        assert parse_rational("3/2") == F(3, 2)
        assert parse_rational("0.25") == F(1, 4)
        assert format_rational(F(-7, 3)) == "-7/3"
        assert format_rational(4) == "4"

    def test_atoms_and_connectives(self):
        atoms = parse_atoms("x1 <= 2*p1 + 1 && x2 > 0 and true", CTX.names)
        assert [a.rel for a in atoms] == ["<=", ">"]
        assert dict(atoms[0].coeffs) == {"x1": F(1), "p1": F(-2)}
        assert atoms[0].const == F(-1)

    def test_division_and_parentheses(self):
        (a,) = parse_atoms("(x1 + x2) / 2 = p1", CTX.names)
        assert dict(a.coeffs) == {"x1": F(1, 2), "x2": F(1, 2), "p1": F(-1)}

    def test_unknown_name_has_column(self):
        with pytest.raises(ConstraintSyntaxError) as err:
            parse_atoms("x1 <= zz", CTX.names)
        assert err.value.column == 7

    def test_bad_character(self):
        with pytest.raises(ConstraintSyntaxError):
            parse_atoms("x1 <= 3 $", CTX.names)

    def test_disequality_is_not_convex(self):
        with pytest.raises(ConstraintSyntaxError):
            P("x1 != 2")


class TestCanonicalForm:
    def test_equal_sets_have_equal_rows(self):
        assert P("x1 <= 3 & x1 <= 5") == P("x1 <= 3")
        assert P("x1 = x2 & x2 = 2") == P("x1 = 2 & x2 = 2")
        assert P("x1 >= 2 & x1 <= 2") == P("x1 = 2")

    def test_empty_and_true(self):
        assert P("x1 < 0").is_empty()
        assert P("p1 < p2 & p2 < p1").is_empty()
        assert P("true").is_true()
        assert P("x1 >= 0").is_true()

    def test_text_round_trip(self):
        c = P("x1 - x2 <= p1 & p2 > 1/2 & x2 = 3")
        assert P(c.to_text()) == c

    def test_sample_satisfies(self):
        c = P("x1 > p1 & p1 > 1/3 & x1 < 1 & x2 = x1 + p2")
        assert satisfies(c.sample(), c)
        assert P("x1 < 0").sample() is None


class TestOperations:
    def test_satisfies_reads_only_occurring_variables(self):
        assert satisfies({"p1": 1}, P("p1 >= 1"))
        with pytest.raises(ValueError):
            satisfies({"p2": 1}, P("p1 >= 1"))
        with pytest.raises(ValueError):
            satisfies({"p1": -1}, P("p1 >= 1"))

    def test_eliminate(self):
        assert eliminate(P("x1 >= 2 & x1 <= p1"), ["x1"]) == P("p1 >= 2")
        assert eliminate(P("x1 < 2 & x1 > p1"), ["x1"]) == P("p1 < 2")

    def test_projection_keeps_implicit_nonnegativity(self):
        # x1 = p1 - 3 with x1 >= 0 forces p1 >= 3
        assert project_params(P("x1 = p1 - 3")) == P("p1 >= 3")

    def test_reset(self):
        assert reset(P("x1 >= 3 & x2 = x1 + 1"), ["x1"]) == P("x1 = 0 & x2 >= 4")
        with pytest.raises(ValueError):
            reset(P("true"), ["p1"])

    def test_time_elapse(self):
        assert time_elapse(P("x1 = 0 & x2 = 0")) == P("x1 = x2")
        assert time_elapse(P("x1 = 1 & x2 = 0 & p1 = 2")) == P("x1 = x2 + 1 & p1 = 2")
        up = time_elapse(P("x1 <= 2 & x2 >= 1"))
        assert satisfies({"x1": 10, "x2": 11}, up)
        assert not satisfies({"x1": 10, "x2": 8}, up)

    def test_includes(self):
        assert includes(P("x1 <= 3"), P("x1 < 3"))
        assert not includes(P("x1 < 3"), P("x1 <= 3"))
        assert includes(P("true"), P("x1 < 0"))

    def test_intersect_context_mismatch(self):
        with pytest.raises(ValueError):
            intersect(P("true"), Polyhedron.true(PCTX))


class TestDisjunctive:
    def test_complement_of_point_is_two_open_halves(self):
        d = DisjunctiveConstraint(PCTX, [P("p = 2", PCTX)])
        c = complement(d)
        assert len(c) == 2
        assert not c.satisfied_by({"p": 2, "q": 0})
        assert c.satisfied_by({"p": F(5, 2), "q": 0})

    def test_complement_of_true_and_false(self):
        assert complement(DisjunctiveConstraint.true(PCTX)).is_empty()
        assert complement(DisjunctiveConstraint.false(PCTX)).is_true()

    def test_pruning_drops_contained_disjuncts(self):
        d = DisjunctiveConstraint(PCTX, [P("p <= 1", PCTX), P("p <= 3", PCTX)]).pruned()
        assert d.to_text() == "p <= 3"

    def test_contains_other_point(self):
        d = DisjunctiveConstraint(PCTX, [P("p = 1 & q = 1", PCTX), P("p >= 2 & p <= 3", PCTX)])
        assert contains_other_point(d, {"p": 1, "q": 1}) is None
        w = contains_other_point(d, {"p": 2, "q": 0})
        assert w is not None and w != {"p": 2, "q": 0} and d.satisfied_by(w)
        with pytest.raises(ValueError):
            contains_other_point(d, {"p": 5, "q": 0})


def test_fm_single_variable_against_interval_oracle():
    rng = random.Random(7)
    ctx = Context(("x",), ("p", "q"))
    outcomes = set()
    for _ in range(120):
        rows = [
            (tuple(rng.randint(-2, 2) for _ in range(3)), rng.randint(-3, 3), rng.choice((0, 1, 2)))
            for _ in range(rng.randint(1, 3))
        ]
        shadow = eliminate(Polyhedron(ctx, rows), ["x"])
        for p, q in itertools.product([F(i, 2) for i in range(5)], repeat=2):
            want = interval_feasible(rows, 0, {1: p, 2: q})
            outcomes.add(want)
            assert want == satisfies({"p": p, "q": q}, shadow), rows
    assert outcomes == {True, False}


def test_equivalent_is_mutual_inclusion():
    assert equivalent(P("x1 <= 2 & x1 >= 2"), P("x1 = 2"))
    assert not equivalent(P("x1 <= 2"), P("x1 < 2"))
