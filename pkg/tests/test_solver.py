import pytest

from minfind.smtlib import parse_theory
from minfind.solver import SolverConfig, SolverError, SolverSession, Verdict
from minfind.syntax import Eq, Pred, Profile, bound_theory, const

from util import CFG, needs_solver

pytestmark = needs_solver

T = parse_theory("""(declare-sort S 0)(declare-const a S)(declare-const b S)
(declare-fun P (S) Bool)(assert (P a))""")


def test_check_and_values():
    with SolverSession(CFG, T.signature) as s:
        s.assert_sentences(T.axioms)
        assert s.check_sat() is Verdict.SAT
        assert s.get_value_bool(Pred("P", (const("a"),)))
        assert s.check_sat_calls == 1


def test_push_pop_scopes_assertions_and_declarations():
    with SolverSession(CFG, T.signature) as s:
        s.assert_sentences(T.axioms)
        with s.frame():
            s.raw("(declare-const z S)")
            s.assert_sentences([Eq(const("a"), const("b")), ~Pred("P", (const("b"),))])
            assert s.check_sat() is Verdict.UNSAT
        assert s.depth == 0
        assert s.check_sat() is Verdict.SAT
        # z went away with the frame
        with pytest.raises(SolverError):
            s.raw("(assert (= z a))")


def test_pop_at_depth_zero_is_an_error():
    with SolverSession(CFG) as s:
        with pytest.raises(SolverError):
            s.pop()


def test_get_value_needs_sat():
    with SolverSession(CFG, T.signature) as s:
        s.assert_sentences([~Pred("P", (const("a"),)), Pred("P", (const("a"),))])
        assert s.check_sat() is Verdict.UNSAT
        with pytest.raises(SolverError):
            s.get_value(["a"])


def test_missing_binary():
    with pytest.raises(SolverError):
        SolverSession(SolverConfig(command="no-such-solver-binary"))


def test_transcript_counts_match():
    with SolverSession(CFG, T.signature) as s:
        s.assert_sentences(T.axioms)
        for _ in range(3):
            s.check_sat()
        assert s.transcript.count("(check-sat)") == s.check_sat_calls == 3
        assert s.transcript[0] == "(set-option :print-success true)"
        assert "(declare-fun |P| (S) Bool)" in s.transcript or "(declare-fun P (S) Bool)" in s.transcript


def test_timeout_reports_unknown():
    src = """(declare-sort S 0)(declare-fun m (S S) S)(declare-const e S)
    (declare-fun P (S) Bool)
    (assert (forall ((x S) (y S) (z S)) (= (m (m x y) z) (m x (m y z)))))
    (assert (forall ((x S)) (= (m e x) x)))
    (assert (forall ((x S) (y S)) (=> (= (m x y) (m y x)) (= x y))))
    (assert (exists ((x S)) (and (P x) (= (m x x) e))))"""
    t = bound_theory(parse_theory(src), Profile({"S": 12}))
    with SolverSession(SolverConfig(timeout_ms=1), t.signature) as s:
        s.assert_sentences(t.axioms)
        assert s.check_sat() is Verdict.UNKNOWN
        assert s.timed_out


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(timeout_ms=0)
    assert SolverConfig(command="z3 -in", timeout_ms=5).argv()[-2:] == ["-t:5", "smt.ematching=false"]
    assert "--tlimit-per=7" in SolverConfig(command="cvc5 --lang smt2", timeout_ms=7).argv()


def test_env_var_picks_solver(monkeypatch):
    monkeypatch.setenv("MINFIND_SOLVER", "cvc5 --incremental")
    assert SolverConfig().command == ("cvc5", "--incremental")
