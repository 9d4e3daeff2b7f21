from fractions import Fraction as F

import pytest

from oracles import automaton_trace_prefixes, explicit_trace_prefixes
from ptasynth.concrete import (
    TruncatedError,
    build_trace_automaton,
    trace_sets_equal,
    untimed_language_included,
    untimed_languages_equal,
)
from ptasynth.model import parse, valuate


def ta(corpus, name, **val):
    return build_trace_automaton(valuate(corpus(name), val))


@pytest.mark.parametrize(
    "name, vals",
    [
        ("timeout_1c", [0, 1, 3, 4]),
        ("inclusion_1c", [1, 2, F(5, 2), 3]),
        ("traces_1c", [0, 1, 2, 3]),
        ("deadline_1c", [1, 2, F(5, 2), 3, 4]),
        ("unused_u", [0, 5]),
    ],
)
def test_trace_prefixes_match_explicit_simulation(corpus, name, vals):
    for v in vals:
        m = valuate(corpus(name), {"p": v})
        t = build_trace_automaton(m)
        assert automaton_trace_prefixes(t, 4) == explicit_trace_prefixes(m, 4), (name, v)


def test_two_parameter_one_clock_models(corpus):
    for name, val in [("window_1c", {"lo": 1, "hi": F(3, 2)}), ("linear_1c", {"p": F(1, 2), "q": 2})]:
        m = valuate(corpus(name), val)
        assert automaton_trace_prefixes(build_trace_automaton(m), 4) == explicit_trace_prefixes(m, 4)


def test_u_pta_witness(corpus):
    r = trace_sets_equal(ta(corpus, "u_pta", p=1), ta(corpus, "u_pta", p=2))
    assert not r.holds
    assert r.word == ["a", "a"]


def test_l_pta_differs(corpus):
    assert not trace_sets_equal(ta(corpus, "l_pta", p=2), ta(corpus, "l_pta", p=3)).holds


def test_trace_equality_is_reflexive_on_nondeterministic_models(corpus):
    t = ta(corpus, "traces_1c", p=3)
    assert trace_sets_equal(t, t).holds
    assert untimed_languages_equal(t, t).holds


def test_nondeterministic_same_traces(corpus):
    # both guards together cover x = 1 for every p
    assert trace_sets_equal(ta(corpus, "nondet_incomplete", p=0), ta(corpus, "nondet_incomplete", p=2)).holds


def test_deadlock_marks(corpus):
    t = ta(corpus, "deadline_1c", p=1)
    assert len(t) == 1 and t.deadlock == [True]
    t = ta(corpus, "timeout_1c", p=2)
    done = [i for i in range(len(t)) if t.location(i) == "done"]
    assert done and all(t.deadlock[i] for i in done)


def test_finite_maximal_runs_matter(corpus):
    # at p = 2 the run through l3 gets stuck after a
    r = untimed_language_included(ta(corpus, "inclusion_1c", p=2), ta(corpus, "inclusion_1c", p=1))
    assert not r.holds and r.word == ["a"]
    relaxed = untimed_language_included(ta(corpus, "inclusion_1c", p=2), ta(corpus, "inclusion_1c", p=1),
                                        prefix_closed=True)
    assert relaxed.holds


def test_language_vs_traces(corpus):
    a, b = ta(corpus, "traces_1c", p=0), ta(corpus, "traces_1c", p=2)
    assert untimed_languages_equal(a, b).holds
    assert not trace_sets_equal(a, b).holds


def test_models_accepted_directly(corpus):
    a = valuate(corpus("inclusion_1c"), {"p": 1})
    b = valuate(corpus("inclusion_1c"), {"p": 3})
    assert untimed_language_included(a, b).holds


def test_truncation_is_refused(corpus):
    t = build_trace_automaton(valuate(corpus("coffee"), {"p1": 1, "p2": 2, "p3": 3}), depth=2)
    assert t.truncated
    with pytest.raises(TruncatedError):
        trace_sets_equal(t, t)


def test_parameters_must_be_valuated(corpus):
    with pytest.raises(ValueError):
        build_trace_automaton(corpus("coffee"))


def test_rational_constants_and_diagonals():
    m = parse("pta d allow-diagonals ; clocks x, y ; parameters ; actions a, b ;\n"
              "location l0 { initial ; invariant x <= 3/2 ; }\nlocation l1 { }\n"
              "edge l0 -> l1 { sync a ; guard x = 1/2 ; reset x ; }\n"
              "edge l1 -> l1 { sync b ; guard y - x = 1/2 & x <= 1 ; }\n")
    t = build_trace_automaton(m)
    assert t.scale == 2
    assert {a for ts in t.transitions for a, _, _ in ts} == {"a", "b"}


def test_exports(corpus):
    t = ta(corpus, "u_pta", p=1)
    j = t.to_json()
    assert j["states"][0]["location"] == "l1" and j["transitions"]
    assert t.to_dot().startswith('digraph "u_pta"')
    assert t.zone_polyhedron(0).to_text() == "x1 = 0 & x2 = 0"
