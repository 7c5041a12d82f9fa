from __future__ import annotations

import pytest
from hypothesis import given, settings

from strategies import systems, traces
from swirl.ir import (
    NIL,
    Act,
    Dataflow,
    DuplicateLocation,
    Exec,
    LocationConfig,
    Par,
    Recv,
    Send,
    Seq,
    WorkflowSystem,
    congruent,
    normalize,
    normalize_system,
    predicates,
)
from swirl.syntax import SwirlSyntaxError, parse_swirl, parse_trace, render_swirl, render_trace

X = Act(Send("d1", "p1", "ld", "l1"))
Y = Act(Send("d2", "p2", "ld", "l2"))
Z = Act(Recv("p1", "ld", "l1"))
S1 = Exec("s1", Dataflow(frozenset(), frozenset({"d1", "d2"})), frozenset({"ld"}))


class TestPredicates:
    def test_dataflow_disjoint(self):
        with pytest.raises(ValueError):
            Dataflow(frozenset({"d"}), frozenset({"d"}))

    def test_exec_needs_locations(self):
        with pytest.raises(ValueError):
            Exec("s", Dataflow(frozenset(), frozenset()), frozenset())

    def test_empty_ids(self):
        with pytest.raises(ValueError):
            Send("", "p", "a", "b")

    def test_structural_equality(self):
        assert Send("d", "p", "a", "b") == Send("d", "p", "a", "b")
        assert len({Recv("p", "a", "b"), Recv("p", "a", "b")}) == 1

    def test_duplicate_location(self):
        c = LocationConfig("l", frozenset(), NIL)
        with pytest.raises(DuplicateLocation):
            WorkflowSystem((c, c))


class TestNormalize:
    def test_nil_identities(self):
        assert normalize(Seq(NIL, X)) == X
        assert normalize(Seq(X, NIL)) == X
        assert normalize(Par(X, NIL)) == X

    def test_commutativity(self):
        assert normalize(Par(Y, X)) == normalize(Par(X, Y))

    def test_right_nesting(self):
        assert normalize(Seq(Seq(X, Y), Z)) == Seq(X, Seq(Y, Z))
        assert normalize(Par(Par(Z, Y), X)) == normalize(Par(X, Par(Y, Z)))

    def test_congruent(self):
        assert congruent(Seq(NIL, X), X)
        assert congruent(Par(X, Y), Par(Y, X))
        assert not congruent(Seq(X, Y), Seq(Y, X))

    @given(traces())
    def test_idempotent(self, t):
        assert normalize(normalize(t)) == normalize(t)

    @given(traces())
    def test_keeps_predicates(self, t):
        assert sorted(p.text for p in predicates(t)) == sorted(p.text for p in predicates(normalize(t)))

    @given(traces(), traces())
    def test_par_commutes(self, a, b):
        assert congruent(Par(a, b), Par(b, a))

    @given(traces())
    def test_no_nil_children(self, t):
        def walk(u):
            if isinstance(u, (Seq, Par)):
                kids = (u.first, u.then) if isinstance(u, Seq) else (u.left, u.right)
                for k in kids:
                    assert k != NIL
                    walk(k)

        walk(normalize(t))


class TestSyntax:
    def test_single_nil_config(self):
        sys = parse_swirl("loc l { data={}; trace=0 }")
        assert sys.configs == (LocationConfig("l", frozenset(), NIL),)

    def test_builds_structure_exactly(self):
        t = parse_trace("exec(s1, {}->{d1,d2}, {ld}) . (send(d1->p1,ld,l1) | send(d2->p2,ld,l2))")
        assert t == Seq(Act(S1), Par(X, Y))

    def test_no_normalization_on_parse(self):
        assert parse_trace("0.send(d1->p1, ld, l1)") == Seq(NIL, X)

    def test_dot_binds_tighter(self):
        t = Par(X, Seq(Y, Z))
        assert render_trace(t) == "send(d1->p1, ld, l1) | send(d2->p2, ld, l2).recv(p1, ld, l1)"
        assert parse_trace(render_trace(t)) == t

    def test_parentheses_when_needed(self):
        t = Seq(Par(X, Y), Z)
        assert render_trace(t) == "(send(d1->p1, ld, l1) | send(d2->p2, ld, l2)).recv(p1, ld, l1)"
        assert parse_trace(render_trace(t)) == t

    def test_nil_renders_as_zero(self):
        assert render_trace(NIL) == "0"

    def test_empty_system(self):
        assert parse_swirl("  # nothing\n") == WorkflowSystem(())
        assert render_swirl(WorkflowSystem(())) == ""

    def test_comments_and_whitespace(self):
        text = "# header\nloc  l {data = {a , b};# note\n trace = 0}\n"
        assert parse_swirl(text).configs[0].data == {"a", "b"}

    @pytest.mark.parametrize(
        "text, where",
        [
            ("loc l { data={}; trace=oops }", (1, 24)),
            ("loc l { data={};\n trace=send(d, l, m) }", (2, 14)),
            ("loc l { data={}; trace=0 } |", (1, 29)),
            ("loc l { data={}; trace=0 } $", (1, 28)),
        ],
    )
    def test_error_positions(self, text, where):
        with pytest.raises(SwirlSyntaxError) as err:
            parse_swirl(text)
        assert (err.value.line, err.value.col) == where

    def test_duplicate_location_reported(self):
        with pytest.raises(DuplicateLocation, match="2:7"):
            parse_swirl("loc l { data={}; trace=0 }\n| loc l { data={}; trace=0 }")

    def test_ex2_fixture(self, ex2):
        assert [c.loc for c in ex2.configs] == ["ld", "l1", "l2", "l3"]
        assert ex2.config("ld").trace == Seq(
            Act(S1), Par(X, Par(Y, Act(Send("d2", "p2", "ld", "l3"))))
        )

    @settings(max_examples=200)
    @given(systems())
    def test_round_trip(self, sys):
        assert parse_swirl(render_swirl(sys)) == sys

    @given(systems())
    def test_render_is_canonical_after_one_pass(self, sys):
        once = render_swirl(parse_swirl(render_swirl(sys)))
        assert render_swirl(parse_swirl(once)) == once

    @given(systems())
    def test_normalize_system_sorted(self, sys):
        n = normalize_system(sys)
        assert [c.loc for c in n.configs] == sorted(c.loc for c in sys.configs)
