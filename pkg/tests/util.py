"""Shared test helpers: tiny model builders, random models, and pinning a
model inside a solver so sentences can be checked against it."""

import itertools
import shutil
from pathlib import Path

import pytest

from minfind.model import FiniteModel, diagram
from minfind.smtlib import parse_theory
from minfind.solver import SolverConfig, SolverSession, default_command
from minfind.syntax import Not, Signature, conj, domain_axiom

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

needs_solver = pytest.mark.skipif(shutil.which(default_command()[0]) is None,
                                  reason="no SMT solver on PATH")

CFG = SolverConfig(timeout_ms=20_000)


def theory(src):
    return parse_theory(src)


def unary_sig(preds=("P",), funcs=(), consts=()):
    fns = {f: (("S",), "S") for f in funcs}
    fns.update({c: ((), "S") for c in consts})
    return Signature(("S",), fns, {p: ("S",) for p in preds})


def mk(sig, n, preds=None, funcs=None, sort="S"):
    """One-sorted model on elements a0..a{n-1}; preds map name -> indices,
    funcs map name -> list of images (or an index for constants)."""
    els = tuple("a%d" % i for i in range(n))
    ps = {p: {(els[i],) for i in idx} for p, idx in (preds or {}).items()}
    fs = {}
    for f, img in (funcs or {}).items():
        if isinstance(img, int):
            fs[f] = {(): els[img]}
        else:
            fs[f] = {(els[i],): els[j] for i, j in enumerate(img)}
    return FiniteModel(sig, {sort: els}, fs, ps)


def random_model(sig, rng, max_size=3, prefix="e"):
    domains = {}
    for s in sig.sorts:
        n = rng.randint(1, max_size)
        domains[s] = tuple("%s%s%d" % (prefix, s, i) for i in range(n))
    funcs = {}
    for f, (args, res) in sig.functions.items():
        funcs[f] = {k: rng.choice(domains[res])
                    for k in itertools.product(*(domains[a] for a in args))}
    preds = {}
    for p, args in sig.predicates.items():
        preds[p] = {k for k in itertools.product(*(domains[a] for a in args)) if rng.random() < 0.4}
    return FiniteModel(sig, domains, funcs, preds)


def pin_sentences(m, prefix="@pin"):
    """Sentences (over the model's signature plus naming constants) whose
    models are exactly the copies of ``m``."""
    naming = {e: "%s!%s" % (prefix, e) for e in m.elements()}
    d = diagram(m, naming)
    sig = m.signature.extend(functions={c: ((), m.sort_of(e)) for e, c in naming.items()})
    parts = list(d.positive) + [Not(a) for a in d.negative]
    parts += [domain_axiom(s, [naming[e] for e in m.domains[s]]) for s in m.signature.sorts]
    return sig, conj(parts)


def solver_holds(m, sentence, extra_sig=None, session=None):
    """Does some expansion of ``m`` satisfy ``sentence``?"""
    sig, pinned = pin_sentences(m)
    own = session is None
    s = session or SolverSession(CFG)
    try:
        with s.frame():
            s.declare(sig)
            if extra_sig is not None:
                s.declare(extra_sig)
            s.assert_sentences([pinned, sentence])
            v = s.check_sat()
        assert v.value != "unknown"
        return v.value == "sat"
    finally:
        if own:
            s.close()


ACCEPTANCE = []


def report(name, ok, detail=""):
    """Record and print one acceptance line."""
    line = "%s %s%s" % ("PASS" if ok else "FAIL", name, (": " + detail) if detail else "")
    ACCEPTANCE.append(line)
    print(line)
    return ok
