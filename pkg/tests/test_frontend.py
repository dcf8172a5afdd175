"""Parsing, pretty-printing and grounding of the surface syntax."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings

import strategies as stg
from faspc.core import (
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    HeadExpr,
    Interpretation,
    Neg,
    Program,
    Rule,
    deg,
    is_model,
    reduct,
    single_head,
    tp_fixpoint,
)
from faspc.frontend import (
    GroundError,
    ParseError,
    ground,
    load,
    parse,
    program_text,
    rule_text,
)

F = Fraction
p, q, r, s = Atom("p"), Atom("q"), Atom("r"), Atom("s")


# ----------------------------------------------------------------- parsing


def test_parse_rule_fact_and_constraint_shapes():
    prog = load("p :- q * 0.4.\nq.\n:- p + q.\n")
    assert prog == Program(
        (
            Rule(single_head(p), Bin(Conn.LUK_AND, AtomRef(q), Const(F(2, 5)))),
            Rule(single_head(q), Const(F(1))),
            Rule(
                single_head(Const(F(0))),
                Bin(Conn.LUK_OR, AtomRef(p), AtomRef(q)),
            ),
        )
    )


def test_parse_connectives_and_not_binding():
    prog = load("p :- not q * not not r.\n")
    body = prog.rules[0].body
    assert body == Bin(Conn.LUK_AND, Neg(AtomRef(q)), Neg(Neg(AtomRef(r))))


def test_parse_comma_is_min_sugar():
    assert load("p :- q, r.\n") == load("p :- q && r.\n")


def test_parse_single_connective_per_level():
    with pytest.raises(ParseError, match="ambiguous connective mix"):
        parse("p :- q * r + s.\n")
    # parenthesized mixing is fine
    prog = load("p :- q * (r + s).\n")
    assert prog.rules[0].body == Bin(
        Conn.LUK_AND, AtomRef(q), Bin(Conn.LUK_OR, AtomRef(r), AtomRef(s))
    )


def test_parse_multi_atom_heads():
    prog = load("q + s :- not not p.\np || q :- 0.5.\n")
    assert prog.rules[0].head == HeadExpr("lukor", (q, s))
    assert prog.rules[1].head == HeadExpr("godelor", (p, q))
    with pytest.raises(ParseError, match="mixed connectives in rule head"):
        parse("p + q || r :- 1.\n")


def test_parse_degree_forms_and_range_errors():
    prog = load("p :- 0.4 + 2/5.\n")
    assert prog.rules[0].body == Bin(Conn.LUK_OR, Const(F(2, 5)), Const(F(2, 5)))
    with pytest.raises(ParseError, match=r"outside \[0, 1\]"):
        parse("p :- 1.5.\n")
    with pytest.raises(ParseError, match=r"outside \[0, 1\]"):
        parse("p :- 7/5.\n")


def test_parse_comments_and_whitespace():
    prog = load("% leading comment\np :-  % inline\n   q.\n")
    assert prog == Program((Rule(single_head(p), AtomRef(q)),))


def test_parse_position_in_errors():
    with pytest.raises(ParseError, match="line 2:6"):
        parse("p :- q.\nq :- ..\n")


def test_parse_reserved_names_rejected_by_default():
    with pytest.raises(ParseError, match="reserved"):
        parse("__f1 :- p.\n")
    prog = load("__f1 :- p.\n", allow_reserved=True)
    assert prog.rules[0].head == single_head(Atom("__f1"))


def test_parse_rejects_function_terms_and_stray_input():
    with pytest.raises(ParseError, match="function terms"):
        parse("p(f(a)) :- q.\n")
    with pytest.raises(ParseError):
        parse("p :- q\n")  # missing dot
    with pytest.raises(ParseError, match="unexpected character"):
        parse("p :- q ? r.\n")


# ---------------------------------------------------------- pretty-printing


def test_rule_text_shapes():
    prog = load("p :- q * (r + s).\nq.\n:- p.\n1/2 :- p.\n")
    assert rule_text(prog.rules[0]) == "p :- q * (r + s)."
    assert rule_text(prog.rules[1]) == "q."
    assert rule_text(prog.rules[2]) == ":- p."
    assert rule_text(prog.rules[3]) == "1/2 :- p."


@settings(max_examples=200)
@given(program=stg.programs())
def test_parse_of_pretty_print_is_identity_on_ground_programs(program):
    """program_text emits exactly re-parseable text for ground programs."""
    assert load(program_text(program)) == program


def test_pretty_print_preserves_associativity():
    left = Bin(Conn.LUK_AND, Bin(Conn.LUK_AND, AtomRef(p), AtomRef(q)), AtomRef(r))
    right = Bin(Conn.LUK_AND, AtomRef(p), Bin(Conn.LUK_AND, AtomRef(q), AtomRef(r)))
    progs = [Program((Rule(single_head(s), body),)) for body in (left, right)]
    texts = [program_text(prog) for prog in progs]
    assert texts[0] == "s :- p * q * r.\n"
    assert texts[1] == "s :- p * (q * r).\n"
    assert [load(t) for t in texts] == progs


# --------------------------------------------------------------- grounding


def test_ground_is_identity_on_variable_free_programs():
    text = "p :- q * 2/5.\np :- q * 2/5.\nq.\n"
    prog = load(text)
    assert len(prog.rules) == 3  # duplicates survive: grounding is the identity
    assert program_text(prog) == text


def test_ground_expands_variables_over_term_universe():
    prog = load("edge(a,b).\nedge(b,c).\nnode(X) :- edge(X,Y).\n", fold=False)
    names = {rule.head.items[0].name for rule in prog.rules if not rule.body == Const(F(1))}
    # X,Y range over {a,b,c}; only the head atom varies with X
    assert Atom("node(a)") in prog.atoms()
    assert any(rule_text(rule) == "node(a) :- edge(a,b)." for rule in prog.rules)
    assert names == {"node(a)", "node(b)", "node(c)"}


def test_ground_safety_requires_positive_occurrence():
    with pytest.raises(GroundError, match="unsafe variable Y"):
        ground(parse("p(X) :- q(X) * not r(Y).\nq(a).\n"))
    # the same variable positively bound is fine
    ground(parse("p(X) :- q(X) * not r(X).\nq(a).\n"))


def test_ground_requires_ground_terms_for_variables():
    with pytest.raises(GroundError, match="no ground terms"):
        ground(parse("p(X) :- q(X).\n"))


def test_fold_inlines_fact_defined_predicates():
    text = "w(a) :- 0.8.\nw(b) :- 0.9.\nbig(X) :- w(X) * 0.5.\n"
    prog = ground(parse(text))
    # facts folded away: only the two big() rules remain, with inlined degrees
    assert [rule_text(rule) for rule in prog.rules] == [
        "big(a) :- 4/5 * 1/2.",
        "big(b) :- 9/10 * 1/2.",
    ]


def test_fold_drops_rules_with_identically_zero_bodies():
    text = "g(a).\nuse(X) :- val(X) && g(X).\nval(X) :- g(X) * 0.5.\n"
    prog = ground(parse(text))
    # X=b instance does not exist; only g(a) guard survives, as constant 1
    texts = [rule_text(rule) for rule in prog.rules]
    assert texts == ["use(a) :- val(a) && 1.", "val(a) :- 1 * 1/2."]


def test_fold_missing_fact_instance_reads_zero():
    text = "w(a) :- 0.8.\nkeep(X,Y) :- w(X) * w(Y) * l(X,Y).\nl(a,a).\nl(a,b).\n"
    prog = ground(parse(text))
    # pairs without both facts fold to zero-bodied rules and are dropped
    assert [rule_text(rule) for rule in prog.rules] == [
        "keep(a,a) :- 4/5 * 4/5 * 1."
    ]


# ------------------------------------------------ end-to-end: trust network

TRUST_TEXT = """
user(alice). user(bob).
succ(0,1). succ(1,2).
trust(alice,bob,0) :- 0.8.
conflict(alice,bob,1) :- 0.2.
distrust(X,Y,T2) :- (distrust(X,Y,T) + conflict(X,Y,T)) && user(X) && user(Y) && succ(T,T2).
trust(X,Y,T2) :- (trust(X,Y,T) * not (distrust(X,Y,T2) * not distrust(X,Y,T))) && user(X) && user(Y) && succ(T,T2).
"""


def test_trust_network_grounds_and_has_expected_stable_model():
    """A two-step trust/distrust cascade: degrees propagate exactly.

    The unique stable model follows the hand computation
    distrust(alice,bob,2) = 0 + 0.2 = 1/5 and
    trust(alice,bob,2) = 0.8 * ~(0.2 * ~0) = 3/5.
    """
    prog = load(TRUST_TEXT)
    # guards folded away entirely
    assert all("user" not in rule_text(rule) for rule in prog.rules)
    assert all("succ" not in rule_text(rule) for rule in prog.rules)

    expected = Interpretation(
        {
            "trust(alice,bob,0)": deg("0.8"),
            "trust(alice,bob,1)": deg("0.8"),
            "trust(alice,bob,2)": deg("0.6"),
            "distrust(alice,bob,2)": deg("0.2"),
        }
    )
    assert is_model(prog, expected)
    # atomic heads: stability is equivalent to "lfp of the reduct = I"
    lfp, _ = tp_fixpoint(reduct(prog, expected), cap=4 * len(prog.atoms()))
    assert lfp == expected
    assert expected["trust(alice,bob,2)"] == F(3, 5)
    assert expected["distrust(alice,bob,2)"] == F(1, 5)
