"""A conversation with an external SMT-LIB 2 solver over stdin/stdout."""

from __future__ import annotations

import enum
import logging
import os
import queue
import shlex
import subprocess
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .smtlib import ParseError, declarations, formula_text, parse_sexps, quote, sexp_to_text
from .syntax import Formula, MinfindError, Signature

log = logging.getLogger(__name__)

DEFAULT_SOLVER = "z3 -in -smt2"
SOLVER_ENV = "MINFIND_SOLVER"
# extra wall-clock allowance on top of the solver's own per-check timeout
WATCHDOG_GRACE_S = 5.0
COMMAND_TIMEOUT_S = 120.0


class SolverError(MinfindError):
    pass


class Verdict(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


def default_command() -> tuple:
    return tuple(shlex.split(os.environ.get(SOLVER_ENV) or DEFAULT_SOLVER))


@dataclass(frozen=True)
class SolverConfig:
    command: tuple = field(default_factory=default_command)
    timeout_ms: int = 30_000
    logic: str | None = None
    transcript: bool = True
    # z3 only: skip E-matching and let model-based instantiation do the work.
    # Every sort is covered by finitely many constants, so MBQI is complete
    # here, and trigger-based instantiation can spin for seconds on homTo.
    tuned: bool = True

    def __post_init__(self) -> None:
        if isinstance(self.command, str):
            object.__setattr__(self, "command", tuple(shlex.split(self.command)))
        if self.timeout_ms <= 0:
            raise ValueError("timeout must be positive")
        if not self.command:
            raise ValueError("empty solver command")

    def argv(self) -> list:
        argv = list(self.command)
        name = os.path.basename(argv[0])
        # per-check soft timeouts, where the solver has a flag for it
        if name.startswith("z3"):
            argv.append("-t:%d" % self.timeout_ms)
            if self.tuned:
                argv.append("smt.ematching=false")
        elif name.startswith("cvc5"):
            argv.append("--tlimit-per=%d" % self.timeout_ms)
        return argv


class _Reader(threading.Thread):
    """Splits the solver's stdout into complete s-expressions."""

    def __init__(self, stream):
        super().__init__(daemon=True)
        self.stream = stream
        self.out: queue.Queue = queue.Queue()

    def run(self) -> None:
        buf: list = []
        depth = 0
        in_bar = in_str = False
        try:
            while True:
                ch = self.stream.read(1)
                if not ch:
                    break
                buf.append(ch)
                if in_bar:
                    in_bar = ch != "|"
                    continue
                if in_str:
                    in_str = ch != '"'
                    continue
                if ch == "|":
                    in_bar = True
                elif ch == '"':
                    in_str = True
                elif ch == "(":
                    depth += 1
                elif ch == ")":
                    depth -= 1
                    if depth == 0:
                        self.out.put("".join(buf).strip())
                        buf = []
                elif ch == "\n" and depth == 0:
                    text = "".join(buf).strip()
                    buf = []
                    if text:
                        self.out.put(text)
        finally:
            self.out.put(None)


class SolverSession:
    """One solver process, with declarations, a push/pop stack and counters.

    A session has a single owner; it is not safe to issue commands from
    several threads.
    """

    def __init__(self, cfg: SolverConfig, sig: Signature | None = None,
                 preamble: Sequence[str] = ()):
        self.cfg = cfg
        self.check_sat_calls = 0
        self.get_value_calls = 0
        self.depth = 0
        self.transcript: list | None = [] if cfg.transcript else None
        self.last_verdict: Verdict | None = None
        self.timed_out = False
        self.declared: list = [set()]
        self.alive = False
        try:
            self.proc = subprocess.Popen(
                cfg.argv(), stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, text=True, bufsize=1)
        except OSError as e:
            raise SolverError("could not start solver %r: %s" % (cfg.command[0], e)) from None
        self.alive = True
        self.reader = _Reader(self.proc.stdout)
        self.reader.start()
        self._command("(set-option :print-success true)")
        self._command("(set-option :produce-models true)")
        if cfg.logic:
            self._command("(set-logic %s)" % cfg.logic)
        for line in preamble:
            self._command(line)
        if sig is not None:
            self.declare(sig)

    # -- plumbing

    def _write(self, text: str) -> None:
        if not self.alive:
            raise SolverError("solver session is closed")
        if self.transcript is not None:
            self.transcript.append(text)
        try:
            self.proc.stdin.write(text + "\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            self._die()
            raise SolverError("solver process died") from None

    def _read(self, timeout: float) -> str | None:
        try:
            resp = self.reader.out.get(timeout=timeout)
        except queue.Empty:
            return None
        if resp is None:
            self._die()
            raise SolverError("solver process died")
        return resp

    def _command(self, text: str) -> None:
        self._write(text)
        resp = self._read(COMMAND_TIMEOUT_S)
        if resp is None:
            self.close()
            raise SolverError("solver did not answer %s" % text[:60])
        if resp != "success":
            raise SolverError("solver rejected %s: %s" % (text[:200], resp))

    def _die(self) -> None:
        self.alive = False
        try:
            self.proc.kill()
        except OSError:
            pass

    # -- commands

    def declare(self, sig: Signature, skip_sorts: Iterable[str] = ()) -> None:
        """Declare the symbols of ``sig`` not already declared in this session."""
        known = set().union(*self.declared)
        fresh = Signature(
            sig.sorts,
            {k: v for k, v in sig.functions.items() if k not in known},
            {k: v for k, v in sig.predicates.items() if k not in known})
        old_sorts = known | set(skip_sorts)
        for line in declarations(fresh, old_sorts):
            self._command(line)
        self.declared[-1].update(s for s in sig.sorts if s not in old_sorts)
        self.declared[-1].update(fresh.symbols())

    def raw(self, text: str) -> None:
        """Send a command that answers ``success``."""
        self._command(text)

    def assert_sentences(self, fs: Iterable[Formula]) -> None:
        for f in fs:
            self._command("(assert %s)" % formula_text(f))

    def push(self) -> None:
        self._command("(push 1)")
        self.depth += 1
        self.declared.append(set())
        self.last_verdict = None

    def pop(self) -> None:
        if self.depth == 0:
            raise SolverError("pop at assertion-stack depth 0")
        self._command("(pop 1)")
        self.depth -= 1
        self.declared.pop()
        self.last_verdict = None

    @contextmanager
    def frame(self) -> Iterator["SolverSession"]:
        self.push()
        try:
            yield self
        finally:
            if self.alive:
                self.pop()

    def check_sat(self) -> Verdict:
        """Run ``(check-sat)``; a timeout is reported as UNKNOWN with
        :attr:`timed_out` set."""
        self._write("(check-sat)")
        self.check_sat_calls += 1
        resp = self._read(self.cfg.timeout_ms / 1000.0 + WATCHDOG_GRACE_S)
        if resp is None:
            log.warning("solver exceeded its timeout; killing it")
            self.timed_out = True
            self._die()
            self.last_verdict = Verdict.UNKNOWN
            return Verdict.UNKNOWN
        try:
            verdict = Verdict(resp)
        except ValueError:
            raise SolverError("unexpected check-sat answer: %s" % resp) from None
        if verdict is Verdict.UNKNOWN:
            self.timed_out = True
        self.last_verdict = verdict
        return verdict

    def get_value(self, terms: Sequence[str]) -> list:
        """Values of closed terms (given as SMT-LIB text) in the current model."""
        if self.last_verdict is not Verdict.SAT:
            raise SolverError("get-value requires a preceding sat answer")
        if not terms:
            return []
        self._write("(get-value (%s))" % " ".join(terms))
        self.get_value_calls += 1
        resp = self._read(COMMAND_TIMEOUT_S)
        if resp is None:
            self.close()
            raise SolverError("solver did not answer get-value")
        try:
            parsed = parse_sexps(resp)
        except ParseError:
            raise SolverError("malformed get-value answer: %s" % resp[:200]) from None
        if len(parsed) != 1 or not isinstance(parsed[0], list) or (
                parsed[0] and parsed[0][0] == "error"):
            raise SolverError("solver error: %s" % resp[:300])
        pairs = parsed[0]
        if len(pairs) != len(terms) or any(not isinstance(p, list) or len(p) != 2 for p in pairs):
            raise SolverError("malformed get-value answer: %s" % resp[:200])
        return [p[1] for p in pairs]

    def get_values_bool(self, fs: Sequence[Formula]) -> list:
        """Truth values of closed quantifier-free formulas, in one round trip."""
        vals = self.get_value([formula_text(f) for f in fs])
        out = []
        for f, v in zip(fs, vals):
            if v not in ("true", "false"):
                raise SolverError("non-boolean value %s for %s" % (sexp_to_text(v), f))
            out.append(v == "true")
        return out

    def get_value_bool(self, f: Formula) -> bool:
        return self.get_values_bool([f])[0]

    def close(self) -> None:
        if not self.alive:
            return
        try:
            self.proc.stdin.write("(exit)\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError):
            pass
        self.alive = False
        try:
            self.proc.wait(timeout=2)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()

    def __enter__(self) -> "SolverSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self) -> None:
        if getattr(self, "alive", False):
            self._die()

    def transcript_text(self) -> str:
        return "\n".join(self.transcript or []) + "\n"


def open_session(cfg: SolverConfig, sig: Signature) -> SolverSession:
    return SolverSession(cfg, sig)


def symbol_text(name: str) -> str:
    return quote(name)
