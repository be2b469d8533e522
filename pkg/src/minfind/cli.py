"""Command-line interface.

    minfind check THEORY [--bound N | --bound SORT=N ...]
    minfind models THEORY [--alg us|et] [--mode i|a|both|none] [--max-models N]
    minfind minimize THEORY [--model JSON] [--mode ...]
    minfind core [THEORY] [--model JSON]

Exit codes: 0 sat/success, 1 unsat/empty, 2 unknown/incomplete, 3 usage or
input errors, 4 solver or internal errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import header_bounds, parse_profile
from .minimize import (
    Claim, MinimizationReport, a_minimize, compute_core, et_stream, i_minimize,
    minimize_both, set_of_support,
)
from .model import FiniteModel, ModelError, format_text, from_json, scrape_model, to_json
from .smtlib import ParseError, parse_theory
from .solver import SolverConfig, SolverError, SolverSession, Verdict, default_command
from .syntax import MinfindError, Theory, bound_theory

EXIT_OK, EXIT_EMPTY, EXIT_INCOMPLETE, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3, 4

log = logging.getLogger("minfind")


class UsageError(MinfindError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "%s: error: %s\n" % (self.prog, message))


@dataclass
class RunConfig:
    theory_path: str | None
    bound_specs: list = field(default_factory=list)
    solver: SolverConfig = field(default_factory=SolverConfig)
    algorithm: str = "us"
    mode: str = "both"
    max_models: int | None = None
    fmt: str = "text"
    transcript: str | None = None
    model_path: str | None = None


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError("cannot read %s: %s" % (path, e.strerror)) from None


def load_theory(cfg: RunConfig) -> tuple:
    """Parse the theory and work out its profile (flags, else file header)."""
    if cfg.theory_path is None:
        raise UsageError("a theory file is required")
    text = _read(cfg.theory_path)
    t = parse_theory(text)
    specs = cfg.bound_specs or header_bounds(text)
    if not specs:
        raise UsageError("no --bound given and the theory has no '; bound:' line")
    return t, parse_profile(specs, t.signature)


class Output:
    def __init__(self, cfg: RunConfig, out=None):
        self.cfg = cfg
        self.out = out or sys.stdout
        self.transcripts: list = []

    def line(self, text: str = "") -> None:
        self.out.write(text + "\n")
        self.out.flush()

    def record(self, obj: dict) -> None:
        self.line(json.dumps(obj, sort_keys=True))

    def model(self, m: FiniteModel, report: MinimizationReport | None, index: int | None = None) -> None:
        if self.cfg.fmt == "json":
            obj = {"model": to_json(m)}
            if report is not None:
                obj["report"] = report.summary()
            if index is not None:
                obj["index"] = index
            self.record(obj)
            return
        if index is not None:
            self.line("model %d" % index)
        self.line(format_text(m))
        if report is not None:
            r = report.summary()
            self.line("report: claim=%s iterations=%d check-sat=%d" % (
                r["claim"], r["iterations"], r["check_sat_calls"]))
        self.line()

    def status(self, **fields) -> None:
        if self.cfg.fmt == "json":
            self.record(fields)
        else:
            self.line(" ".join("%s: %s" % (k.replace("_", "-"), v) for k, v in fields.items()))

    def save_transcripts(self) -> None:
        if not self.cfg.transcript:
            return
        chunks = []
        for i, tr in enumerate(self.transcripts, 1):
            chunks.append("; session %d\n%s\n" % (i, "\n".join(tr)))
        Path(self.cfg.transcript).write_text("".join(chunks))


def _session(cfg: RunConfig, bounded: Theory, out: Output) -> SolverSession:
    s = SolverSession(cfg.solver, bounded.signature)
    if s.transcript is not None:
        out.transcripts.append(s.transcript)
    s.assert_sentences(bounded.axioms)
    return s


def cmd_check(cfg: RunConfig, out: Output) -> int:
    t, profile = load_theory(cfg)
    bounded = bound_theory(t, profile)
    with _session(cfg, bounded, out) as s:
        verdict = s.check_sat()
        calls = s.check_sat_calls
    out.status(verdict=verdict.value, check_sat_calls=calls)
    return {Verdict.SAT: EXIT_OK, Verdict.UNSAT: EXIT_EMPTY, Verdict.UNKNOWN: EXIT_INCOMPLETE}[verdict]


def cmd_models(cfg: RunConfig, out: Output) -> int:
    t, profile = load_theory(cfg)
    if cfg.algorithm == "et":
        if cfg.mode != "both":
            raise UsageError("--alg et always minimizes fully; --mode does not apply")
        stream = et_stream(t, profile, cfg.solver, cfg.max_models)
    else:
        stream = set_of_support(t, profile, cfg.solver, cfg.mode, cfg.max_models)
    out.transcripts = stream.transcripts
    n = 0
    for n, (m, report) in enumerate(stream, 1):
        out.model(m, report, n)
    out.status(status=stream.status, models=len(stream.models),
               check_sat_calls=stream.check_sat_calls)
    if stream.status == "incomplete":
        return EXIT_INCOMPLETE
    return EXIT_OK if stream.models else EXIT_EMPTY


def _starting_model(cfg: RunConfig, bounded: Theory | None, out: Output) -> FiniteModel | None:
    """The model from --model, or the solver's first model of the theory
    (None when the theory is unsatisfiable)."""
    if cfg.model_path:
        try:
            m = from_json(json.loads(_read(cfg.model_path)))
        except (ValueError, KeyError, TypeError) as e:
            raise UsageError("cannot load model: %s" % e) from None
        if bounded is not None:
            user = bounded.user_signature
            if (set(user.sorts) != set(m.signature.sorts) or user.functions != m.signature.functions
                    or user.predicates != m.signature.predicates):
                raise UsageError("model signature does not match the theory")
        return m
    with _session(cfg, bounded, out) as s:
        verdict = s.check_sat()
        if verdict is Verdict.UNKNOWN:
            raise _Incomplete()
        if verdict is Verdict.UNSAT:
            return None
        return scrape_model(s, bounded)


class _Incomplete(Exception):
    pass


def cmd_minimize(cfg: RunConfig, out: Output) -> int:
    t, profile = load_theory(cfg)
    bounded = bound_theory(t, profile)
    try:
        m = _starting_model(cfg, bounded, out)
    except _Incomplete:
        out.status(status="unknown")
        return EXIT_INCOMPLETE
    if m is None:
        out.status(status="unsat")
        return EXIT_EMPTY
    fn = {"i": i_minimize, "a": a_minimize, "both": minimize_both}.get(cfg.mode)
    if fn is None:
        result, report = m, MinimizationReport(m, m, claim=Claim.NONE)
    else:
        result, report = fn(bounded, m, cfg.solver)
        out.transcripts.extend(report.transcripts)
    out.model(result, report)
    return EXIT_INCOMPLETE if report.claim is Claim.POSSIBLY_NON_MINIMAL else EXIT_OK


def cmd_core(cfg: RunConfig, out: Output) -> int:
    bounded = None
    if cfg.theory_path is not None:
        t, profile = load_theory(cfg)
        bounded = bound_theory(t, profile)
    elif not cfg.model_path:
        raise UsageError("core needs a theory or --model")
    try:
        m = _starting_model(cfg, bounded, out)
    except _Incomplete:
        out.status(status="unknown")
        return EXIT_INCOMPLETE
    if m is None:
        out.status(status="unsat")
        return EXIT_EMPTY
    core, report = compute_core(m, cfg.solver)
    out.transcripts.extend(report.transcripts)
    out.model(core, report)
    return EXIT_INCOMPLETE if report.claim is Claim.POSSIBLY_NON_MINIMAL else EXIT_OK


COMMANDS = {"check": cmd_check, "models": cmd_models, "minimize": cmd_minimize, "core": cmd_core}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="minfind", description="Find minimal finite models with an SMT solver.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--bound", action="append", default=[], metavar="N|SORT=N",
                        help="domain bound, uniform or per sort (repeatable)")
    common.add_argument("--timeout", type=int, default=30_000, metavar="MS",
                        help="per check-sat timeout in milliseconds")
    common.add_argument("--solver", metavar="CMD",
                        help="solver command line (default: $MINFIND_SOLVER or 'z3 -in -smt2')")
    common.add_argument("--format", choices=("text", "json"), default="text", dest="fmt")
    common.add_argument("--transcript", metavar="PATH", help="write the SMT-LIB conversation here")
    for name in ("check", "models", "minimize", "core"):
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("theory", nargs="?" if name == "core" else None,
                        help="SMT-LIB theory file, or - for stdin")
        if name == "models":
            sp.add_argument("--alg", choices=("us", "et"), default="us")
            sp.add_argument("--max-models", type=int, metavar="N")
        if name in ("models", "minimize"):
            sp.add_argument("--mode", choices=("i", "a", "both", "none"), default="both")
        if name in ("minimize", "core"):
            sp.add_argument("--model", metavar="JSON", help="start from a model saved as json")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    command = tuple(ns.solver.split()) if ns.solver else default_command()
    try:
        solver = SolverConfig(command=command, timeout_ms=ns.timeout)
    except ValueError as e:
        raise UsageError(str(e)) from None
    max_models = getattr(ns, "max_models", None)
    if max_models is not None and max_models < 1:
        raise UsageError("--max-models must be at least 1")
    return RunConfig(
        theory_path=ns.theory, bound_specs=ns.bound, solver=solver,
        algorithm=getattr(ns, "alg", "us"), mode=getattr(ns, "mode", "both"),
        max_models=max_models, fmt=ns.fmt, transcript=ns.transcript,
        model_path=getattr(ns, "model", None))


def main(argv=None, out=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    output = None
    try:
        cfg = config_from_args(ns)
        output = Output(cfg, out)
        return COMMANDS[ns.command](cfg, output)
    except ParseError as e:
        print("minfind: parse error: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    except SolverError as e:
        print("minfind: solver error: %s" % e, file=sys.stderr)
        return EXIT_INTERNAL
    except (UsageError, ModelError) as e:
        print("minfind: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    except MinfindError as e:
        print("minfind: %s" % e, file=sys.stderr)
        return EXIT_USAGE
    finally:
        if output is not None:
            output.save_transcripts()


def main_entry() -> None:
    sys.exit(main())
