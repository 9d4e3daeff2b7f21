import pytest

from ptasynth.constraints import Context, Polyhedron, includes
from ptasynth.model import ModelError, parse
from ptasynth.symbolic import (
    MonotonicityError,
    explore,
    in_one_clock_shape,
    initial_state,
    linear_terms,
    one_clock_state_bound,
    succ,
)


def test_initial_state_is_time_closed(corpus):
    s = initial_state(corpus("coffee"))
    assert s.location == "l1"
    assert s.constraint.to_text() == "x = y"
    assert s.projection().is_true()


def test_initial_state_keeps_invariant(corpus):
    s = initial_state(corpus("deadline_1c"))
    assert s.constraint.to_text() == "x <= p"
    assert s.projection().is_true()


def test_empty_initial_state_is_an_error():
    m = parse("pta m ; clocks x ; parameters ; actions a ;\nlocation l0 { initial ; invariant x < 0 ; }\n")
    with pytest.raises(ModelError):
        initial_state(m)


def test_nondeterministic_graph(corpus):
    m = corpus("nondet_incomplete")
    g = explore(m, depth=None, state_cap=None)
    assert g.complete and len(g) == 3
    assert sorted(s.projection().to_text() for s in g.states_at("l1")) == ["p <= 1", "p > 1"]


def test_succ_rejects_foreign_edge(corpus):
    m = corpus("coffee")
    s = initial_state(m)
    with pytest.raises(ValueError):
        succ(s, m.outgoing("l2")[0], m)


def test_coffee_cup_successor(corpus):
    m = corpus("coffee")
    s = succ(initial_state(m), m.edges[0], m)
    assert s.location == "l2"
    t = succ(s, m.edges[2], m)
    assert t.location == "l3"
    ctx = Context(m.clocks, m.parameters)
    assert includes(Polyhedron.parse(ctx, "p2 <= p3"), t.projection())


def test_caps_report_incompleteness(corpus):
    g = explore(corpus("coffee"), depth=5)
    assert not g.complete and "depth" in g.reason
    g = explore(corpus("coffee"), depth=None, state_cap=10)
    assert not g.complete and len(g) == 10 and "state cap" in g.reason


def test_monotonicity_check_fires():
    # a parametric successor can never widen its parent's projection; fake one
    m = parse("pta m ; clocks x ; parameters p ; actions a ;\n"
              "location l0 { initial ; invariant x <= p ; }\nlocation l1 { }\n"
              "edge l0 -> l1 { sync a ; guard x >= 1 ; }\n")
    s = initial_state(m)
    t = succ(s, m.edges[0], m, check_monotone=True)
    assert includes(s.projection(), t.projection())
    assert issubclass(MonotonicityError, AssertionError)


def test_exports(corpus):
    g = explore(corpus("u_pta"), depth=3)
    j = g.to_json()
    assert j["states"][0]["location"] == "l1" and j["edges"]
    assert g.to_dot().startswith('digraph "u_pta"')


class TestOneClock:
    def test_linear_terms(self, corpus):
        assert len(linear_terms(corpus("window_1c"))) == 4  # lo, hi, 2, 4
        assert len(linear_terms(corpus("timeout_1c"))) == 2

    def test_shape_accepts_and_rejects(self, corpus):
        m = corpus("window_1c")
        ctx = m.context
        assert in_one_clock_shape(m, Polyhedron.parse(ctx, "x >= lo & x <= hi"))
        assert in_one_clock_shape(m, Polyhedron.parse(ctx, "lo <= hi"))
        assert not in_one_clock_shape(m, Polyhedron.parse(ctx, "x <= 7"))
        assert not in_one_clock_shape(m, Polyhedron.parse(ctx, "x <= lo + hi"))

    def test_bound(self, corpus):
        m = corpus("unused_u")
        assert one_clock_state_bound(m) == len(m.locations) * 2 ** 6
