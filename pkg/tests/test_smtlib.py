import pytest
from hypothesis import given, settings, strategies as st

from minfind.smtlib import ParseError, parse_sexps, parse_theory, quote, to_term_form
from minfind.syntax import (
    App, Eq, Exists, Forall, Implies, Not, Or, And, Pred, Theory, Var, const,
    bound_theory, Profile, TRUE, FALSE,
)

HEAD = """
(declare-sort S 0)
(declare-fun f (S) S)
(declare-const c S)
(declare-fun P (S) Bool)
(declare-fun E (S S) Bool)
"""


def test_parses_declarations_and_axioms():
    t = parse_theory(HEAD + "(assert (forall ((x S)) (=> (P x) (P (f x)))))")
    assert t.signature.functions == {"f": (("S",), "S"), "c": ((), "S")}
    assert t.signature.predicates == {"P": ("S",), "E": ("S", "S")}
    x = Var("x", "S")
    assert t.axioms == (Forall((x,), Implies(Pred("P", (x,)), Pred("P", (App("f", (x,)),)))),)


def test_distinct_becomes_pairwise_disequalities():
    t = parse_theory(HEAD + "(declare-const d S)(declare-const e S)(assert (distinct c d e))")
    (ax,) = t.axioms
    assert isinstance(ax, And) and len(ax.args) == 3
    assert all(isinstance(a, Not) for a in ax.args)


def test_implication_is_right_associative():
    t = parse_theory(HEAD + "(assert (=> (P c) (P (f c)) (E c c)))")
    (ax,) = t.axioms
    assert isinstance(ax, Implies) and isinstance(ax.rhs, Implies)


def test_errors_carry_positions():
    with pytest.raises(ParseError) as e:
        parse_theory(HEAD + "(assert (Q c))")
    assert e.value.line == 7 and e.value.kind == "symbol"
    with pytest.raises(ParseError) as e:
        parse_theory("(declare-sort S 0")
    assert e.value.kind == "syntax"


@pytest.mark.parametrize("body, kind", [
    ("(assert (P 1))", "unsupported"),
    ("(assert (let ((z c)) (P z)))", "unsupported"),
    ("(assert (ite (P c) (P c) (P c)))", "unsupported"),
    ("(declare-sort T 1)", "unsupported"),
    ("(assert (= (P c) (P c)))", "unsupported"),
    ("(assert (forall ((b Bool)) b))", "unsupported"),
    ("(assert (P c c))", "sort"),
    ("(assert (= c (P c)))", "unsupported"),
    ("(declare-fun P (S) Bool)", "symbol"),
])
def test_rejections(body, kind):
    with pytest.raises(ParseError) as e:
        parse_theory(HEAD + body)
    assert e.value.kind == kind


def test_reserved_prefix_is_rejected():
    with pytest.raises(ParseError):
        parse_theory("(declare-sort S 0)(declare-const |@S!1| S)")


def test_quote():
    assert quote("f") == "f"
    assert quote("@S!1") == "|@S!1|"
    assert quote("forall") == "|forall|"
    assert quote("a b") == "|a b|"


def test_sexps_and_comments():
    assert parse_sexps("; hi\n(a (b |c d|) \"s\")") == [["a", ["b", "c d"], "s"]]


def test_bounded_theory_round_trips_through_text():
    t = parse_theory(HEAD + "(assert (exists ((x S)) (and (P x) (E x (f c)))))")
    b = bound_theory(t, Profile({"S": 2}))
    again = parse_theory(to_term_form(b).replace("|@S!", "|S!"))
    assert len(again.axioms) == len(b.axioms)


x, y = Var("x", "S"), Var("y", "S")
SIG = parse_theory(HEAD).signature
terms = st.recursive(st.sampled_from([x, y, const("c")]),
                     lambda t: st.builds(lambda a: App("f", (a,)), t), max_leaves=3)
atoms = st.one_of(
    st.builds(lambda a: Pred("P", (a,)), terms),
    st.builds(lambda a, b: Pred("E", (a, b)), terms, terms),
    st.builds(Eq, terms, terms),
    st.sampled_from([TRUE, FALSE]),
)
formulas = st.recursive(atoms, lambda f: st.one_of(
    st.builds(Not, f),
    st.builds(lambda a, b: And((a, b)), f, f),
    st.builds(lambda a, b: Or((a, b)), f, f),
    st.builds(Implies, f, f),
    st.builds(lambda a: Exists((x,), a), f),
    st.builds(lambda a: Forall((y,), a), f),
), max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(formulas)
def test_print_parse_round_trip(f):
    closed = Forall((x, y), f)
    t = Theory(SIG, (closed,))
    assert parse_theory(to_term_form(t)).axioms == t.axioms
