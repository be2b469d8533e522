"""Minimal-model algorithms driven through a solver session.

* :func:`compute_core` shrinks a model along non-injective endomorphisms.
* :func:`i_minimize` drops facts at a fixed universe until no proper
  fact-subset satisfies the theory.
* :func:`a_minimize` descends strictly in the homomorphism preorder.
* :func:`set_of_support` streams a-minimal models until every bounded model
  is covered; :func:`et_stream` computes the same thing by the
  enumerated-types route.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .homs import avoid_sentence, ehom_sentence, find_hom, flip_sentence, hom_to_sentence
from .model import (
    FiniteModel, ModelError, induced_submodel, rename,
    satisfies, scrape_enumerated, scrape_model,
)
from .smtlib import quote
from .solver import SolverConfig, SolverSession, Verdict
from .syntax import Eq, MinfindError, Profile, Theory, bound_theory, const, fresh_constant, hom_symbol, App

log = logging.getLogger(__name__)


class Claim(str, enum.Enum):
    I_MINIMAL = "i-minimal"
    A_MINIMAL = "a-minimal"
    A_THEN_I = "a-then-i"
    CORE = "core"
    POSSIBLY_NON_MINIMAL = "possibly-non-minimal"
    NONE = "none"

    def __str__(self) -> str:
        return self.value


class EtError(MinfindError):
    pass


@dataclass
class MinimizationReport:
    input: FiniteModel
    output: FiniteModel
    iterations: int = 0
    check_sat_calls: int = 0
    claim: Claim = Claim.NONE
    transcripts: list = field(default_factory=list, repr=False, compare=False)

    def summary(self) -> dict:
        return {"iterations": self.iterations, "check_sat_calls": self.check_sat_calls,
                "claim": self.claim.value, "size": self.output.sizes(),
                "facts": self.output.fact_count()}


# ---------------------------------------------------------------------------
# helpers


def relabel(m: FiniteModel) -> FiniteModel:
    """Rename elements to ``@S!1 .. @S!k`` per sort, in domain order."""
    mapping = {}
    for s in m.signature.sorts:
        for i, e in enumerate(m.domains[s], 1):
            mapping[e] = fresh_constant(s, i)
    if all(k == v for k, v in mapping.items()) and all(k == v for k, v in m.names.items()):
        return m
    tmp = rename(m, {e: "\0%s" % e for e in mapping})
    out = rename(tmp, {"\0%s" % e: v for e, v in mapping.items()})
    return FiniteModel(out.signature, out.domains, out.funcs, out.preds,
                       {v: v for v in mapping.values()})


def attach(m: FiniteModel, theory: Theory) -> FiniteModel:
    """Make ``m``'s naming constants be bounding constants of ``theory``."""
    if set(m.names) <= {c for cs in theory.fresh.values() for c in cs}:
        return m
    for s in m.signature.sorts:
        if len(m.domains[s]) > len(theory.fresh[s]):
            raise ModelError("model has %d elements of sort %s, bound is %d"
                             % (len(m.domains[s]), s, len(theory.fresh[s])))
    return relabel(m)


def _open(cfg: SolverConfig | None, theory: Theory) -> SolverSession:
    s = SolverSession(cfg or SolverConfig(), theory.signature)
    s.assert_sentences(theory.axioms)
    return s


def _require_model(theory: Theory, m: FiniteModel) -> None:
    if not satisfies(m, theory):
        raise ModelError("input model does not satisfy the theory")


# ---------------------------------------------------------------------------
# cores


def compute_core(m: FiniteModel, cfg: SolverConfig | None = None):
    """Return ``(core, report)``.  While ``ehom(P)`` is satisfiable, replace
    P by the induced submodel on the image of the solver's endomorphism."""
    p = relabel(m)
    report = MinimizationReport(m, p, claim=Claim.CORE)
    with SolverSession(cfg or SolverConfig(), m.signature) as s:
        if s.transcript is not None:
            report.transcripts.append(s.transcript)
        while True:
            eh = ehom_sentence(p)
            with s.frame():
                s.declare(eh.signature)
                s.assert_sentences([eh.sentence])
                verdict = s.check_sat()
                if verdict is Verdict.SAT:
                    elems = p.elements()
                    image = set()
                    for e in elems:
                        cands = p.domains[p.sort_of(e)]
                        h = App(hom_symbol(p.sort_of(e)), (const(eh.naming[e]),))
                        vals = s.get_values_bool([Eq(h, const(eh.naming[t])) for t in cands])
                        hit = [t for t, v in zip(cands, vals) if v]
                        if not hit:
                            raise ModelError("endomorphism has no value at %s" % e)
                        image.add(hit[0])
            report.check_sat_calls = s.check_sat_calls
            if verdict is Verdict.UNSAT:
                break
            if verdict is Verdict.UNKNOWN:
                report.claim = Claim.POSSIBLY_NON_MINIMAL
                break
            p = induced_submodel(p, image)
            report.iterations += 1
    report.output = p
    return p, report


# ---------------------------------------------------------------------------
# i- and a-minimization inside an open session


def _i_loop(s: SolverSession, m: FiniteModel, scrape: Callable, report: MinimizationReport):
    p = m
    start = s.check_sat_calls
    while True:
        with s.frame():
            s.assert_sentences([flip_sentence(p)])
            verdict = s.check_sat()
            nxt = scrape(s) if verdict is Verdict.SAT else None
        report.check_sat_calls += s.check_sat_calls - start
        start = s.check_sat_calls
        if verdict is Verdict.UNSAT:
            return p, True
        if verdict is Verdict.UNKNOWN:
            return p, False
        p = nxt
        report.iterations += 1


def _a_loop(s: SolverSession, theory: Theory, m: FiniteModel, report: MinimizationReport):
    p = m
    start = s.check_sat_calls
    while True:
        ht = hom_to_sentence(p)
        with s.frame():
            s.declare(ht.signature)
            s.assert_sentences([ht.sentence, avoid_sentence(p)])
            verdict = s.check_sat()
            nxt = scrape_model(s, theory) if verdict is Verdict.SAT else None
        report.check_sat_calls += s.check_sat_calls - start
        start = s.check_sat_calls
        if verdict is Verdict.UNSAT:
            return p, True
        if verdict is Verdict.UNKNOWN:
            return p, False
        p = nxt
        report.iterations += 1


def _minimize_in(s: SolverSession, theory: Theory, m: FiniteModel, mode: str) -> MinimizationReport:
    report = MinimizationReport(m, m)
    p, done = m, True
    if mode in ("a", "both"):
        p, done = _a_loop(s, theory, p, report)
    if done and mode in ("i", "both"):
        p, done = _i_loop(s, p, lambda ss: scrape_model(ss, theory), report)
    report.output = p
    if not done:
        report.claim = Claim.POSSIBLY_NON_MINIMAL
    else:
        report.claim = {"a": Claim.A_MINIMAL, "i": Claim.I_MINIMAL,
                        "both": Claim.A_THEN_I, "none": Claim.NONE}[mode]
    return report


def _minimize(theory: Theory, m: FiniteModel, cfg: SolverConfig | None, mode: str):
    if not theory.is_bounded:
        raise MinfindError("minimization needs a bounded theory")
    _require_model(theory, m)
    p = attach(m, theory)
    with _open(cfg, theory) as s:
        report = _minimize_in(s, theory, p, mode)
        if s.transcript is not None:
            report.transcripts.append(s.transcript)
    report.input = m
    return report.output, report


def i_minimize(theory: Theory, m: FiniteModel, cfg: SolverConfig | None = None):
    """Return ``(model, report)``: a fact-minimal model of ``theory`` on the
    universe of ``m`` with no facts ``m`` lacks."""
    return _minimize(theory, m, cfg, "i")


def a_minimize(theory: Theory, m: FiniteModel, cfg: SolverConfig | None = None):
    """Return ``(model, report)``: a model below ``m`` in the homomorphism
    preorder with no model of ``theory`` strictly below it."""
    return _minimize(theory, m, cfg, "a")


def minimize_both(theory: Theory, m: FiniteModel, cfg: SolverConfig | None = None):
    """a-minimize, then i-minimize the result."""
    return _minimize(theory, m, cfg, "both")


# ---------------------------------------------------------------------------
# set of support


@dataclass
class SupportStream:
    """Models emitted so far, plus how the enumeration ended.

    ``status`` is ``running`` while iterating, then one of ``exhausted``,
    ``truncated`` (hit ``max_models``) or ``incomplete`` (solver gave up).
    """

    algorithm: str
    models: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    avoids: list = field(default_factory=list)
    status: str = "running"
    check_sat_calls: int = 0
    transcripts: list = field(default_factory=list)
    _gen: Iterator | None = field(default=None, repr=False)

    @property
    def exhausted(self) -> bool:
        return self.status == "exhausted"

    def __iter__(self) -> Iterator:
        if self._gen is None:
            yield from zip(self.models, self.reports)
            return
        gen, self._gen = self._gen, None
        yield from gen

    def collect(self) -> "SupportStream":
        for _ in self:
            pass
        return self


def _emit(stream: SupportStream, m: FiniteModel, report: MinimizationReport, avoid) -> None:
    stream.models.append(m)
    stream.reports.append(report)
    stream.avoids.append(avoid)


def set_of_support(theory: Theory, profile: Profile, cfg: SolverConfig | None = None,
                   mode: str = "both", max_models: int | None = None) -> SupportStream:
    """Stream minimal models until the bounded theory plus the accumulated
    avoid sentences is unsatisfiable."""
    bounded = bound_theory(theory, profile)
    stream = SupportStream("us")
    stream._gen = _us_run(stream, bounded, cfg, mode, max_models)
    return stream


def _us_run(stream: SupportStream, bounded: Theory, cfg, mode: str, max_models):
    s = _open(cfg, bounded)
    if s.transcript is not None:
        stream.transcripts.append(s.transcript)
    try:
        while True:
            if max_models is not None and len(stream.models) >= max_models:
                stream.status = "truncated"
                return
            verdict = s.check_sat()
            stream.check_sat_calls = s.check_sat_calls
            if verdict is Verdict.UNSAT:
                stream.status = "exhausted"
                return
            if verdict is Verdict.UNKNOWN:
                stream.status = "incomplete"
                return
            first = scrape_model(s, bounded)
            before = s.check_sat_calls
            report = _minimize_in(s, bounded, first, mode)
            report.check_sat_calls = s.check_sat_calls - before
            m = report.output
            av = avoid_sentence(m)
            _emit(stream, m, report, av)
            stream.check_sat_calls = s.check_sat_calls
            yield m, report
            if report.claim is Claim.POSSIBLY_NON_MINIMAL:
                stream.status = "incomplete"
                return
            s.assert_sentences([av])
    finally:
        stream.check_sat_calls = s.check_sat_calls
        s.close()


# ---------------------------------------------------------------------------
# enumerated types


class _Et:
    def __init__(self, stream: SupportStream, bounded: Theory, cfg: SolverConfig | None):
        self.stream = stream
        self.bounded = bounded
        self.cfg = cfg or SolverConfig()
        self.main = _open(self.cfg, bounded)
        if self.main.transcript is not None:
            stream.transcripts.append(self.main.transcript)
        self.calls_elsewhere = 0
        self.emitted_avoids: list = []

    def calls(self) -> int:
        return self.main.check_sat_calls + self.calls_elsewhere

    def first(self, extra: list):
        """ET-First on the main theory plus ``extra``: None when unsat,
        raises :class:`Unknown` if the solver gives up."""
        with self.main.frame():
            self.main.assert_sentences(extra)
            verdict = self.main.check_sat()
            sizes = scrape_model(self.main, self.bounded).sizes() if verdict is Verdict.SAT else None
        if verdict is Verdict.UNSAT:
            return None
        if verdict is Verdict.UNKNOWN:
            raise _Unknown()
        user = self.bounded.user_signature
        domains = {s: tuple(fresh_constant(s, i) for i in range(1, sizes[s] + 1)) for s in user.sorts}
        preamble = []
        for srt in user.sorts:
            ctors = " ".join("(%s)" % quote(c) for c in domains[srt])
            preamble.append("(declare-datatypes ((%s 0)) ((%s)))" % (quote(srt), ctors))
        with SolverSession(self.cfg, None, preamble) as enum_s:
            if enum_s.transcript is not None:
                self.stream.transcripts.append(enum_s.transcript)
            enum_s.declared[-1].update(user.sorts)
            enum_s.declare(user)
            enum_s.assert_sentences(self.bounded.user_axioms() + self.emitted_avoids + list(extra))
            verdict = enum_s.check_sat()
            if verdict is Verdict.UNSAT:
                self.calls_elsewhere += enum_s.check_sat_calls
                raise EtError("theory with enumerated sorts %s is unsatisfiable" % sizes)
            if verdict is Verdict.UNKNOWN:
                self.calls_elsewhere += enum_s.check_sat_calls
                raise _Unknown()
            m = scrape_enumerated(enum_s, user, domains)
            dummy = MinimizationReport(m, m)
            m, done = _i_loop(enum_s, m, lambda ss: scrape_enumerated(ss, user, domains), dummy)
            self.calls_elsewhere += enum_s.check_sat_calls
        if not done:
            raise _Unknown()
        return m

    def last(self, worklist: list) -> FiniteModel:
        """ET-Last: descend outside the cones of the worklist until nothing
        is left; the head is then a-minimal."""
        while True:
            n = self.first([avoid_sentence(m) for m in worklist])
            if n is None:
                return worklist[0]
            worklist = [n] + [m for m in worklist if find_hom(n, m) is None]


class _Unknown(Exception):
    pass


def et_stream(theory: Theory, profile: Profile, cfg: SolverConfig | None = None,
              max_models: int | None = None) -> SupportStream:
    """The enumerated-types pipeline: ET-First for a starting model, ET-Last
    to push it down to an a-minimal one, then avoid its cone and repeat."""
    bounded = bound_theory(theory, profile)
    stream = SupportStream("et")
    stream._gen = _et_run(stream, bounded, cfg, max_models)
    return stream


def _et_run(stream: SupportStream, bounded: Theory, cfg, max_models):
    et = _Et(stream, bounded, cfg)
    try:
        while True:
            if max_models is not None and len(stream.models) >= max_models:
                stream.status = "truncated"
                return
            before = et.calls()
            try:
                m = et.first([])
                if m is None:
                    stream.status = "exhausted"
                    return
                n = et.last([m])
            except _Unknown:
                stream.status = "incomplete"
                return
            finally:
                stream.check_sat_calls = et.calls()
            n = relabel(n)
            report = MinimizationReport(m, n, claim=Claim.A_THEN_I,
                                        check_sat_calls=et.calls() - before)
            av = avoid_sentence(n)
            _emit(stream, n, report, av)
            et.emitted_avoids.append(av)
            et.main.assert_sentences([av])
            yield n, report
    finally:
        stream.check_sat_calls = et.calls()
        et.main.close()
