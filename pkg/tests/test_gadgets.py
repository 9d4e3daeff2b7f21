from fractions import Fraction as F

import pytest

from ptasynth.concrete import build_trace_automaton, untimed_languages_equal
from ptasynth.model import classify, parse, render, valuate
from ptasynth.gadgets import (
    GadgetError,
    accepts_timed_word,
    compile,
    halt_reachable,
    one_location_transform,
    parse_machine,
    run_machine,
    timed_words,
    validate_encoding,
    validation_valuation,
)

TWO_INC = "state s0 ; inc c1 goto s1 ;\nstate s1 ; inc c1 goto s2 ;\nhalt s2 ;\n"
MIXED = """# moves c2 into c1 and back
state a ; inc c2 goto b ;
state b ; inc c1 goto c ;
state c ; tdec c2 zero d else c ;
state d ; tdec c1 zero h else e ;
state e ; inc c2 goto d ;
halt h ;
"""
LOOP = "state s0 ; inc c1 goto s0 ;\nhalt h ;\n"


class TestMachines:
    def test_parse_and_print(self):
        cm = parse_machine(MIXED)
        assert cm.initial == "a" and cm.halt == "h"
        assert cm.program["c"].op == "tdec" and cm.program["c"].other == "c"
        assert parse_machine(cm.to_text()) == cm

    @pytest.mark.parametrize(
        "text, message",
        [
            ("state s0 ; inc c1 goto s0 ; inc c2 goto s0 ; halt h ;", "more than one instruction"),
            ("state s0 ; inc c1 goto s0 ;", "no halting state"),
            ("state s0 ; inc c3 goto s0 ; halt h ;", "cannot parse"),
            ("state s0 ; inc c1 goto nowhere ; halt h ;", "undeclared state"),
            ("state s0 ; halt h ;", "no instruction"),
            ("inc c1 goto s0 ; halt s0 ;", "outside a state"),
            ("halt a ; halt b ;", "more than one halting"),
        ],
    )
    def test_errors(self, text, message):
        with pytest.raises(GadgetError, match=message):
            parse_machine(text)

    def test_interpreter(self):
        r = run_machine(parse_machine(MIXED))
        assert r.halted and r.length == 8 and r.max_counter == 1
        assert r.configs[-1] == ("h", 0, 1)
        loop = run_machine(parse_machine(LOOP), max_steps=20)
        assert not loop.halted and loop.length == 21


class TestCompile:
    def test_basic_shape(self):
        m = compile(parse_machine(TWO_INC), "basic")
        cls = classify(m)
        assert m.clocks == ("t", "x1", "x2", "z") and m.parameters == ("p",)
        assert cls.clock_count == 4 and cls.parametric_clocks == {"t", "x1", "x2", "z"}
        assert {"s0", "s0_bar", "s1_one", "s1", "s2", "s2_one"} <= {l.name for l in m.locations}
        assert m.initial == "s0"
        assert parse(render(m)).structurally_equal(m)

    def test_decrement_splits_disequality(self):
        m = compile(parse_machine("state s0 ; tdec c1 zero h else h ;\nhalt h ;"), "basic")
        out = [e for e in m.outgoing("s0_bar") if e.target != "s0_bar"]
        assert len(out) == 3  # zero test plus the two halves of t != 1

    def test_wrapper_on_empty_machine(self):
        m = compile(parse_machine("halt s0 ;"), "wrapper")
        assert m.initial == "s_init"
        zero = build_trace_automaton(valuate(m, {"p": 0}))
        one = build_trace_automaton(valuate(m, {"p": 1}))
        assert untimed_languages_equal(zero, one).holds

    def test_robust_increment_module(self):
        m = compile(parse_machine("state s0 ; inc c1 goto s1 ;\nhalt s1 ;"), "robust")
        assert m.clocks == ("t", "x1", "x2")
        guards = {str(m.guard(e)) for e in m.edges}
        assert "x1 = p + 1 & t <= 1" in guards or any("x1 = p + 1" in g for g in guards)
        assert any(g.startswith("x2 = 1") for g in guards)
        # both branches meet in the same location
        assert len([e for e in m.edges if e.target == "s0_mid"]) == 2

    def test_bounded_parameters(self):
        m = compile(parse_machine(MIXED), "bounded_time")
        assert m.parameters == ("p1", "p2")
        assert classify(m).clock_count == 3

    def test_unknown_kind(self):
        with pytest.raises(GadgetError):
            compile(parse_machine(TWO_INC), "fancy")


class TestValidation:
    @pytest.mark.parametrize("kind", ["basic", "wrapper", "robust", "bounded"])
    def test_mixed_machine(self, kind):
        cm = parse_machine(MIXED)
        run = run_machine(cm)
        rep = validate_encoding(cm, kind, run.length, run.max_counter, symbolic=False)
        assert rep.ok, rep.errors
        assert rep.correspondence is True

    def test_valuations(self):
        assert validation_valuation("basic", 3, 2) == {"p": F(4)}
        assert validation_valuation("bounded", 3, 2) == {"p1": F(2, 9), "p2": F(1, 9)}
        assert validation_valuation("bounded", 4, 0) == {"p1": F(1, 4), "p2": F(1, 4)}
        assert validation_valuation("robust", 3, 2) == {"p": F(1, 3)}

    def test_wrong_ground_truth(self):
        rep = validate_encoding(parse_machine(TWO_INC), "basic", 2, 2, symbolic=False)
        assert not rep.ok and "ground truth" in rep.errors[0]

    def test_non_halting_machine_never_reaches_halt(self):
        m = compile(parse_machine(LOOP), "basic")
        for p in range(1, 7):
            reached, t = halt_reachable(m, {"p": p}, "h")
            assert not reached and not t.truncated

    def test_bounded_needs_small_parameters(self):
        m = compile(parse_machine(TWO_INC), "bounded")
        from ptasynth.gadgets import _with_observer

        timed = _with_observer(m, F(1))
        assert halt_reachable(timed, {"p1": F(2, 9), "p2": F(1, 9)}, "s2")[0]
        assert not halt_reachable(timed, {"p1": F(1, 2), "p2": F(1, 4)}, "s2")[0]

    def test_report_json(self):
        cm = parse_machine(TWO_INC)
        j = validate_encoding(cm, "robust", 3, 2, symbolic=False).to_json()
        assert j["ok"] and j["valuation"] == {"p": "1/3"}


ZERO_DELAY = """pta zd ; clocks x, y ; parameters p ; actions a, b ;
location l0 { initial ; invariant x <= 2 ; }
location l1 { invariant y <= 1 ; }
location l2 { }
edge l0 -> l1 { sync a ; guard x >= p ; reset y ; }
edge l1 -> l2 { sync b ; guard y = 0 ; }
edge l1 -> l0 { sync a ; guard y = 1 ; reset x ; }
edge l2 -> l0 { sync b ; guard x < 3 ; reset x ; }
"""


class TestOneLocation:
    def test_clock_budget(self):
        m = parse("pta two ; clocks x ; parameters ; actions a ;\n"
                  "location l0 { initial ; }\nlocation l1 { }\nedge l0 -> l1 { sync a ; guard x >= 1 ; }\n")
        t = one_location_transform(m, 1)
        assert len(t.locations) == 1 and t.allow_diagonals
        assert len(t.clocks) - len(m.clocks) == 1 * 2 + 2
        assert parse(render(t)).structurally_equal(t)
        for w in timed_words(["a"], [0, F(1, 2), 1, 2], 2):
            assert accepts_timed_word(m, w) == accepts_timed_word(t, w)

    def test_rejects_k_zero(self):
        with pytest.raises(GadgetError):
            one_location_transform(parse(ZERO_DELAY), 0)

    @pytest.mark.parametrize("p", [0, 1, F(3, 2)])
    def test_timed_words_agree(self, p):
        m = parse(ZERO_DELAY)
        # a, b, b, a can all fire at one instant when p = 0
        t = one_location_transform(m, 4)
        assert len(t.clocks) == 2 + 4 * 3 + 2
        for w in timed_words(["a", "b"], [0, F(1, 2), 1, 2], 4):
            assert accepts_timed_word(m, w, {"p": p}) == accepts_timed_word(t, w, {"p": p}), w

    def test_too_small_k_loses_words(self):
        m = parse(ZERO_DELAY)
        t = one_location_transform(m, 1)
        w = [(F(1), "a"), (F(0), "b")]
        assert accepts_timed_word(m, w, {"p": 1}) and not accepts_timed_word(t, w, {"p": 1})

    def test_parameters_are_kept(self):
        t = one_location_transform(parse(ZERO_DELAY), 2)
        assert t.parameters == ("p",)
        assert classify(t).has_diagonal_guards
