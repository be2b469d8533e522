import io
import json
import subprocess
import sys

import pytest

from minfind.cli import main
from minfind.homs import hom_equivalent, isomorphic
from minfind.model import from_json, to_json

from util import CORPUS, mk, needs_solver, unary_sig

pytestmark = needs_solver


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def records(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def test_check_exit_codes():
    code, out = run("check", str(CORPUS / "pq.smt2"))
    assert code == 0 and "verdict: sat" in out and "check-sat-calls: 1" in out
    code, out = run("check", str(CORPUS / "unsat.smt2"), "--bound", "2")
    assert code == 1 and "unsat" in out


def test_check_unknown_on_timeout(tmp_path):
    p = tmp_path / "big.smt2"
    p.write_text("""(declare-sort S 0)(declare-fun m (S S) S)(declare-const e S)
    (declare-fun P (S) Bool)
    (assert (forall ((x S) (y S) (z S)) (= (m (m x y) z) (m x (m y z)))))
    (assert (forall ((x S)) (= (m e x) x)))
    (assert (forall ((x S) (y S)) (=> (= (m x y) (m y x)) (= x y))))
    (assert (exists ((x S)) (and (P x) (= (m x x) e))))""")
    code, out = run("check", str(p), "--bound", "12", "--timeout", "1")
    assert code == 2 and "unknown" in out


def test_models_pq_one_model_exhausted():
    code, out = run("models", str(CORPUS / "pq.smt2"), "--bound", "2", "--format", "json")
    recs = records(out)
    assert code == 0
    assert len([r for r in recs if "model" in r]) == 1
    assert recs[-1]["status"] == "exhausted"


def test_models_max_models_truncated():
    code, out = run("models", str(CORPUS / "choice.smt2"), "--max-models", "1")
    assert code == 0 and out.count("model ") == 1
    assert out.strip().splitlines()[-1].startswith("status: truncated")


def test_models_unsat_is_empty():
    code, out = run("models", str(CORPUS / "unsat.smt2"))
    assert code == 1 and "status: exhausted models: 0" in out


def test_alg_et_matches_us():
    path = str(CORPUS / "orbit.smt2")
    us = [from_json(r["model"]) for r in records(run("models", path, "--format", "json")[1]) if "model" in r]
    et = [from_json(r["model"]) for r in records(run("models", path, "--alg", "et", "--format", "json")[1])
          if "model" in r]
    assert len(us) == len(et)
    assert all(any(hom_equivalent(a, b) for b in et) for a in us)


def test_json_and_text_agree():
    path = str(CORPUS / "successor.smt2")
    _, text = run("models", path)
    _, js = run("models", path, "--format", "json")
    (rec,) = [r for r in records(js) if "model" in r]
    m = from_json(rec["model"])
    assert to_json(from_json(json.loads(json.dumps(to_json(m))))) == rec["model"]
    for fact in rec["model"]["facts"]:
        assert "  %s\n" % fact in text


def test_minimize_mode_a_from_model_file(tmp_path):
    sig = unary_sig(preds=("P", "Q"))
    start = tmp_path / "m.json"
    start.write_text(json.dumps(to_json(mk(sig, 1, {"P": [0], "Q": [0]}))))
    code, out = run("minimize", str(CORPUS / "pq.smt2"), "--model", str(start), "--mode", "a",
                    "--format", "json")
    (rec,) = records(out)
    assert code == 0 and rec["report"]["claim"] == "a-minimal"
    assert hom_equivalent(from_json(rec["model"]), mk(sig, 2, {"P": [0], "Q": [1]}))


def test_minimize_mode_i_keeps_fact_minimal_input(tmp_path):
    sig = unary_sig(preds=("P", "Q"))
    m = mk(sig, 2, {"P": [0], "Q": [1]})
    start = tmp_path / "m.json"
    start.write_text(json.dumps(to_json(m)))
    code, out = run("minimize", str(CORPUS / "pq.smt2"), "--model", str(start), "--mode", "i",
                    "--format", "json")
    (rec,) = records(out)
    assert code == 0 and rec["report"]["iterations"] == 0
    assert isomorphic(from_json(rec["model"]), m)


def test_minimize_rejects_non_model(tmp_path):
    start = tmp_path / "m.json"
    start.write_text(json.dumps(to_json(mk(unary_sig(preds=("P", "Q")), 1, {"P": [0]}))))
    code, _ = run("minimize", str(CORPUS / "pq.smt2"), "--model", str(start))
    assert code == 3


def test_core_from_model_file(tmp_path):
    start = tmp_path / "m.json"
    start.write_text(json.dumps(to_json(mk(unary_sig(), 2, {"P": [0, 1]}))))
    code, out = run("core", "--model", str(start), "--format", "json")
    (rec,) = records(out)
    assert code == 0 and rec["report"]["size"] == {"S": 1}


def test_transcript_file(tmp_path):
    tr = tmp_path / "t.smt2"
    code, out = run("models", str(CORPUS / "cover.smt2"), "--transcript", str(tr), "--format", "json")
    calls = records(out)[-1]["check_sat_calls"]
    assert tr.read_text().count("(check-sat)") == calls


def test_usage_errors(tmp_path):
    assert run("check", str(tmp_path / "missing.smt2"), "--bound", "2")[0] == 3
    bad = tmp_path / "bad.smt2"
    bad.write_text("(declare-sort S 0)(assert (P x))")
    assert run("check", str(bad), "--bound", "2")[0] == 3
    nob = tmp_path / "nob.smt2"
    nob.write_text("(declare-sort S 0)")
    assert run("check", str(nob))[0] == 3
    assert run("check", str(nob), "--bound", "T=2")[0] == 3
    with pytest.raises(SystemExit) as e:
        main(["models", str(nob), "--alg", "nope"])
    assert e.value.code == 3


def test_solver_flag_overrides_env(monkeypatch):
    monkeypatch.setenv("MINFIND_SOLVER", "definitely-not-a-solver")
    assert run("check", str(CORPUS / "pq.smt2"))[0] == 4
    assert run("check", str(CORPUS / "pq.smt2"), "--solver", "z3 -in -smt2")[0] == 0


def test_module_entry_point_reads_stdin():
    src = (CORPUS / "pq.smt2").read_text()
    p = subprocess.run([sys.executable, "-m", "minfind", "check", "-", "--bound", "2"],
                       input=src, capture_output=True, text=True)
    assert p.returncode == 0 and "verdict: sat" in p.stdout
