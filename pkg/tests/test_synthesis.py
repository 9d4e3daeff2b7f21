from fractions import Fraction as F

import pytest

from ptasynth.concrete import build_trace_automaton, trace_sets_equal
from ptasynth.constraints import Context, DisjunctiveConstraint, Polyhedron
from ptasynth.model import valuate
from ptasynth.synthesis import (
    PreconditionError,
    other_valuation,
    preserve_1c,
    preserve_lu_1ip,
    preserve_robust_1c,
    tps,
)


def same_traces(m, v, w) -> bool:
    return trace_sets_equal(build_trace_automaton(valuate(m, v)), build_trace_automaton(valuate(m, w))).holds


class TestTps:
    def test_coffee(self, corpus):
        m = corpus("coffee")
        res = tps(m, {"p1": 1, "p2": 2, "p3": 3})
        assert res.terminated and res.complete_for_model
        assert res.result.to_text() == "p1 > 1/3*p2 & p1 <= 1/2*p2 & p2 <= p3"
        assert res.result.satisfied_by({"p1": 1, "p2": 2, "p3": 3})
        # a point inside the result is trace-equivalent, one just outside is not
        assert same_traces(m, {"p1": 1, "p2": 2, "p3": 3}, {"p1": F(3, 4), "p2": F(3, 2), "p3": 5})
        assert not same_traces(m, {"p1": 1, "p2": 2, "p3": 3}, {"p1": F(2, 3), "p2": 2, "p3": 3})

    def test_result_json(self, corpus):
        j = tps(corpus("deadline_1c"), {"p": 4}).to_json()
        assert j["result"] == "p >= 3" and j["terminated"] is True

    def test_depth_cap(self, corpus):
        res = tps(corpus("coffee"), {"p1": 1, "p2": 3, "p3": 3}, depth=5)
        assert not res.terminated

    def test_nondeterministic_model_is_flagged(self, corpus):
        res = tps(corpus("nondet_incomplete"), {"p": 0})
        assert not res.complete_for_model
        assert res.result.to_text() == "p <= 1"

    @pytest.mark.parametrize("val", [{}, {"p": -1}])
    def test_bad_valuations(self, corpus, val):
        with pytest.raises(PreconditionError):
            tps(corpus("u_pta"), val)


class TestPreserve1c:
    def test_yes_with_witness(self, corpus):
        m = corpus("deadline_1c")
        v = preserve_1c(m, {"p": 4})
        assert v.answer == "yes" and v.witness != {"p": F(4)}
        assert same_traces(m, {"p": 4}, v.witness)

    def test_linear_terms(self, corpus):
        v = preserve_1c(corpus("linear_1c"), {"p": 1, "q": 1})
        assert v.answer == "yes" and v.constraint.to_text() == "p + q <= 3"

    def test_point_class(self):
        from ptasynth.model import parse

        m = parse("pta pt ; clocks x ; parameters p ; actions a, b ;\n"
                  "location l0 { initial ; invariant x <= 2 ; }\nlocation l1 { }\n"
                  "edge l0 -> l1 { sync a ; guard x = 1 & x <= p ; }\n"
                  "edge l0 -> l1 { sync b ; guard x = 1 & x >= p ; }\n")
        v = preserve_1c(m, {"p": 1})
        assert v.constraint.to_text() == "p = 1"
        assert v.answer == "no" and v.witness is None

    def test_nondeterministic_is_unknown_or_yes(self, corpus):
        v = preserve_1c(corpus("nondet_incomplete"), {"p": 0})
        assert v.answer == "yes" and "sound, not complete" in v.notes

    def test_robust(self, corpus):
        v = preserve_robust_1c(corpus("window_1c"), {"lo": 1, "hi": 3})
        assert v.answer == "yes" and "robust" in v.notes
        assert v.constraint.satisfied_by(v.witness)

    def test_language_question(self, corpus):
        assert preserve_1c(corpus("deadline_1c"), {"p": 4}, "language").question == "language"
        with pytest.raises(PreconditionError):
            preserve_1c(corpus("deadline_1c"), {"p": 4}, "words")

    def test_preconditions(self, corpus):
        with pytest.raises(PreconditionError):
            preserve_1c(corpus("coffee"), {"p1": 1, "p2": 2, "p3": 3})

    def test_json(self, corpus):
        j = preserve_1c(corpus("deadline_1c"), {"p": 4}).to_json()
        assert set(j) == {"question", "answer", "witness", "constraint", "constraint_text", "stats", "notes"}
        assert j["constraint_text"] == "p >= 3"


class TestPreserveLu:
    def test_answers(self, corpus):
        assert preserve_lu_1ip(corpus("u_pta"), {"p": 2}).answer == "no"
        assert preserve_lu_1ip(corpus("l_pta"), {"p": 2}).answer == "no"
        v = preserve_lu_1ip(corpus("unused_u"), {"p": 0})
        assert v.answer == "yes" and v.witness == {"p": F(1)}

    def test_preconditions(self, corpus):
        with pytest.raises(PreconditionError):
            preserve_lu_1ip(corpus("u_pta"), {"p": F(1, 2)})
        with pytest.raises(PreconditionError):
            preserve_lu_1ip(corpus("equality_gadget"), {"pl": 1, "pu": 1})
        with pytest.raises(PreconditionError):
            preserve_lu_1ip(corpus("nondet_incomplete"), {"p": 1})
        with pytest.raises(PreconditionError):
            preserve_lu_1ip(corpus("coffee"), {"p1": 1, "p2": 2, "p3": 3})


def test_other_valuation_avoids_the_point():
    ctx = Context((), ("p",))
    d = DisjunctiveConstraint(ctx, [Polyhedron.parse(ctx, "p >= 1 & p <= 2")])
    w = other_valuation(d, {"p": 1})
    assert w is not None and w["p"] != 1 and d.satisfied_by(w)
    single = DisjunctiveConstraint(ctx, [Polyhedron.parse(ctx, "p = 1")])
    assert other_valuation(single, {"p": 1}) is None
