"""SMT-LIB 2.6 subset: s-expressions, theory parsing and printing.

Accepted commands: ``set-logic``, ``set-info``, ``set-option`` (ignored),
``declare-sort S 0``, ``declare-fun``, ``declare-const``, ``assert``,
``check-sat`` and ``exit`` (ignored).  Terms use ``true``, ``false``, ``=``,
``distinct``, ``and``, ``or``, ``not``, ``=>``, ``exists``, ``forall`` and
applications of declared symbols.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    BOOL, FALSE, TRUE, And, App, Bottom, Eq, Exists, Forall, Formula, Implies,
    MinfindError, Not, Or, Pred, Signature, SortError, Term, Theory, Top, Var,
    check_user_symbols,
)


class ParseError(MinfindError):
    def __init__(self, message: str, line: int = 0, col: int = 0, kind: str = "syntax"):
        self.message = message
        self.line = line
        self.col = col
        self.kind = kind
        where = " at line %d, column %d" % (line, col) if line else ""
        super().__init__("%s error%s: %s" % (kind, where, message))


# ---------------------------------------------------------------------------
# s-expressions


class Sym(str):
    """A symbol token carrying its source position."""

    line = 0
    col = 0
    quoted = False


class Str(str):
    line = 0
    col = 0


class SList(list):
    line = 0
    col = 0


_TOKEN = re.compile(r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<open>\()
  | (?P<close>\))
  | (?P<quoted>\|[^|]*\|)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<atom>[^\s()|";]+)
""", re.VERBOSE)


def _positions(text: str):
    line_starts = [0]
    for m in re.finditer("\n", text):
        line_starts.append(m.end())
    return line_starts


def parse_sexps(text: str) -> list:
    """Parse every s-expression in ``text``."""
    starts = _positions(text)

    def where(pos: int) -> tuple:
        lo, hi = 0, len(starts)
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if starts[mid] <= pos:
                lo = mid
            else:
                hi = mid
        return lo + 1, pos - starts[lo] + 1

    stack: list = [SList()]
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            line, col = where(pos)
            raise ParseError("unterminated quoted symbol or string", line, col)
        kind = m.lastgroup
        line, col = where(pos)
        pos = m.end()
        if kind == "ws":
            continue
        if kind == "open":
            node = SList()
            node.line, node.col = line, col
            stack.append(node)
        elif kind == "close":
            if len(stack) == 1:
                raise ParseError("unexpected ')'", line, col)
            node = stack.pop()
            stack[-1].append(node)
        elif kind == "string":
            s = Str(m.group()[1:-1].replace('""', '"'))
            s.line, s.col = line, col
            stack[-1].append(s)
        else:
            raw = m.group()
            sym = Sym(raw[1:-1] if kind == "quoted" else raw)
            sym.line, sym.col, sym.quoted = line, col, kind == "quoted"
            stack[-1].append(sym)
    if len(stack) != 1:
        node = stack[-1]
        raise ParseError("unbalanced '('", node.line, node.col)
    return list(stack[0])


_SIMPLE = re.compile(r"^[A-Za-z~!$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*$")
_RESERVED_WORDS = {
    "true", "false", "and", "or", "not", "=>", "=", "distinct", "exists",
    "forall", "let", "match", "par", "_", "!", "as", "ite", "Bool",
}


def quote(name: str) -> str:
    """Render a symbol, using ``|...|`` when it is not a plain simple symbol."""
    if _SIMPLE.match(name) and name not in _RESERVED_WORDS:
        return name
    if "|" in name or "\\" in name:
        raise ValueError("symbol cannot be quoted: %r" % name)
    return "|%s|" % name


def sexp_to_text(e) -> str:
    if isinstance(e, list):
        return "(%s)" % " ".join(sexp_to_text(x) for x in e)
    if isinstance(e, Str):
        return '"%s"' % e.replace('"', '""')
    return quote(e) if isinstance(e, Sym) and e.quoted else str(e)


# ---------------------------------------------------------------------------
# printing


def term_text(t: Term) -> str:
    if isinstance(t, Var):
        return quote(t.name)
    if not t.args:
        return quote(t.fn)
    return "(%s %s)" % (quote(t.fn), " ".join(term_text(a) for a in t.args))


def formula_text(f: Formula) -> str:
    """Print a formula as an SMT-LIB boolean term."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bottom):
        return "false"
    if isinstance(f, Pred):
        if not f.args:
            return quote(f.name)
        return "(%s %s)" % (quote(f.name), " ".join(term_text(a) for a in f.args))
    if isinstance(f, Eq):
        return "(= %s %s)" % (term_text(f.lhs), term_text(f.rhs))
    if isinstance(f, Not):
        return "(not %s)" % formula_text(f.arg)
    if isinstance(f, And):
        return "(and %s)" % " ".join(formula_text(a) for a in f.args)
    if isinstance(f, Or):
        return "(or %s)" % " ".join(formula_text(a) for a in f.args)
    if isinstance(f, Implies):
        return "(=> %s %s)" % (formula_text(f.lhs), formula_text(f.rhs))
    if isinstance(f, (Exists, Forall)):
        kw = "exists" if isinstance(f, Exists) else "forall"
        binders = " ".join("(%s %s)" % (quote(v.name), quote(v.sort)) for v in f.vars)
        return "(%s (%s) %s)" % (kw, binders, formula_text(f.body))
    raise TypeError(f)


def declarations(sig: Signature, skip_sorts=()) -> list:
    out = []
    for s in sig.sorts:
        if s not in skip_sorts:
            out.append("(declare-sort %s 0)" % quote(s))
    for name, (args, res) in sig.functions.items():
        out.append("(declare-fun %s (%s) %s)" % (
            quote(name), " ".join(quote(a) for a in args), quote(res)))
    for name, args in sig.predicates.items():
        out.append("(declare-fun %s (%s) Bool)" % (quote(name), " ".join(quote(a) for a in args)))
    return out


def to_term_form(t: Theory) -> str:
    """Render a theory as an SMT-LIB script of declarations and assertions."""
    lines = declarations(t.signature)
    lines.extend("(assert %s)" % formula_text(ax) for ax in t.axioms)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# parsing


_IGNORED = {"set-logic", "set-info", "set-option", "check-sat", "exit", "get-model"}
_UNSUPPORTED_TERMS = {"let", "match", "!", "ite", "as", "_", "par"}


@dataclass
class _Builder:
    sorts: list
    functions: dict
    predicates: dict

    def sig(self) -> Signature:
        key = (len(self.sorts), len(self.functions), len(self.predicates))
        if getattr(self, "_key", None) != key:
            self._sig = Signature(tuple(self.sorts), dict(self.functions), dict(self.predicates))
            self._key = key
        return self._sig


def _err(node, msg: str, kind: str = "syntax") -> ParseError:
    return ParseError(msg, getattr(node, "line", 0), getattr(node, "col", 0), kind)


def _symbol(node, what: str) -> Sym:
    if not isinstance(node, Sym):
        raise _err(node, "expected %s" % what)
    return node


def _sort(node, b: _Builder, allow_bool: bool = False) -> str:
    s = _symbol(node, "a sort")
    if s == BOOL and allow_bool:
        return BOOL
    if s == BOOL:
        raise _err(node, "Bool is only supported as a predicate result sort", "unsupported")
    if s not in b.sorts:
        if s in ("Int", "Real", "String") or s.startswith("BitVec"):
            raise _err(node, "built-in sort %s" % s, "unsupported")
        raise _err(node, "unknown sort %s" % s, "sort")
    return str(s)


def _fresh_name(node: Sym) -> str:
    if node.startswith("@"):
        raise _err(node, "symbol %s uses the reserved prefix '@'" % node, "symbol")
    return str(node)


def parse_theory(text: str) -> Theory:
    """Parse an SMT-LIB script into a :class:`Theory`."""
    b = _Builder([], {}, {})
    axioms: list = []
    for cmd in parse_sexps(text):
        if not isinstance(cmd, list) or not cmd:
            raise _err(cmd, "expected a command")
        head = _symbol(cmd[0], "a command name")
        if head in _IGNORED:
            continue
        if head == "declare-sort":
            if len(cmd) != 3:
                raise _err(cmd, "declare-sort takes a name and an arity")
            name = _fresh_name(_symbol(cmd[1], "a sort name"))
            if cmd[2] != "0":
                raise _err(cmd[2], "sorts of nonzero arity", "unsupported")
            if name in b.sorts or name == BOOL:
                raise _err(cmd[1], "sort %s declared twice" % name, "symbol")
            b.sorts.append(name)
        elif head in ("declare-fun", "declare-const"):
            if head == "declare-fun":
                if len(cmd) != 4 or not isinstance(cmd[2], list):
                    raise _err(cmd, "declare-fun takes a name, an argument list and a sort")
                arg_nodes, res_node = cmd[2], cmd[3]
            else:
                if len(cmd) != 3:
                    raise _err(cmd, "declare-const takes a name and a sort")
                arg_nodes, res_node = [], cmd[2]
            name = _fresh_name(_symbol(cmd[1], "a symbol name"))
            if name in b.functions or name in b.predicates:
                raise _err(cmd[1], "symbol %s declared twice" % name, "symbol")
            args = tuple(_sort(a, b) for a in arg_nodes)
            res = _sort(res_node, b, allow_bool=True)
            if res == BOOL:
                b.predicates[name] = args
            else:
                b.functions[name] = (args, res)
        elif head == "assert":
            if len(cmd) != 2:
                raise _err(cmd, "assert takes one term")
            f = _formula(cmd[1], b, {})
            axioms.append(f)
        elif head in ("define-fun", "define-sort", "declare-datatypes", "declare-datatype",
                      "push", "pop", "get-value", "define-fun-rec"):
            raise _err(cmd[0], "command %s" % head, "unsupported")
        else:
            raise _err(cmd[0], "unknown command %s" % head)
    sig = b.sig()
    check_user_symbols(sig)
    return Theory(sig, tuple(axioms))


def from_term_form(text: str) -> Theory:
    return parse_theory(text)


def _is_formula_node(node, b: _Builder, env: dict) -> bool:
    """Decide whether ``node`` denotes a boolean term."""
    if isinstance(node, list):
        if not node:
            return False
        head = node[0]
        if isinstance(head, list):
            return False
        if head in ("and", "or", "not", "=>", "=", "distinct", "exists", "forall"):
            return True
        return head in b.predicates and head not in env
    if node in ("true", "false"):
        return True
    return node in b.predicates and node not in env


def _formula(node, b: _Builder, env: dict) -> Formula:
    if isinstance(node, Str):
        raise _err(node, "string literal", "unsupported")
    if not isinstance(node, list):
        if node == "true":
            return TRUE
        if node == "false":
            return FALSE
        if node in env:
            raise _err(node, "variable %s is not boolean" % node, "sort")
        if node in b.predicates:
            if b.predicates[node]:
                raise _err(node, "predicate %s applied to no arguments" % node, "sort")
            return Pred(str(node), ())
        if node in b.functions:
            raise _err(node, "term %s is not boolean" % node, "sort")
        if re.match(r"^[0-9]", node):
            raise _err(node, "numeral %s" % node, "unsupported")
        raise _err(node, "unknown symbol %s" % node, "symbol")
    if not node:
        raise _err(node, "empty application")
    head = node[0]
    if isinstance(head, list):
        raise _err(head, "indexed or qualified identifiers", "unsupported")
    args = node[1:]
    if head in ("and", "or"):
        parts = tuple(_formula(a, b, env) for a in args)
        if not parts:
            return TRUE if head == "and" else FALSE
        return (And if head == "and" else Or)(parts) if len(parts) > 1 else parts[0]
    if head == "not":
        if len(args) != 1:
            raise _err(node, "not takes one argument")
        return Not(_formula(args[0], b, env))
    if head == "=>":
        if len(args) < 2:
            raise _err(node, "=> takes at least two arguments")
        parts = [_formula(a, b, env) for a in args]
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Implies(p, out)
        return out
    if head in ("=", "distinct"):
        if len(args) < 2:
            raise _err(node, "%s takes at least two arguments" % head)
        if any(_is_formula_node(a, b, env) for a in args):
            raise _err(node, "%s between formulas" % head, "unsupported")
        terms = [_term(a, b, env) for a in args]
        sig = b.sig()
        sorts = {_term_sort(sig, t, a) for t, a in zip(terms, args)}
        if len(sorts) != 1:
            raise _err(node, "%s between terms of different sorts" % head, "sort")
        if head == "=":
            eqs = [Eq(x, y) for x, y in zip(terms, terms[1:])]
        else:
            eqs = [Not(Eq(terms[i], terms[j]))
                   for i in range(len(terms)) for j in range(i + 1, len(terms))]
        return eqs[0] if len(eqs) == 1 else And(tuple(eqs))
    if head in ("exists", "forall"):
        if len(args) != 2 or not isinstance(args[0], list) or not args[0]:
            raise _err(node, "%s takes a binder list and a body" % head)
        vs = []
        inner = dict(env)
        for binder in args[0]:
            if not isinstance(binder, list) or len(binder) != 2:
                raise _err(binder, "malformed binder")
            vname = _symbol(binder[0], "a variable name")
            if binder[1] == BOOL:
                raise _err(binder[1], "quantified Bool variable %s" % vname, "unsupported")
            v = Var(str(vname), _sort(binder[1], b))
            vs.append(v)
            inner[str(vname)] = v
        body = _formula(args[1], b, inner)
        return (Exists if head == "exists" else Forall)(tuple(vs), body)
    if head in _UNSUPPORTED_TERMS:
        raise _err(head, "'%s' terms" % head, "unsupported")
    if head in b.predicates:
        want = b.predicates[head]
        if len(want) != len(args):
            raise _err(node, "%s expects %d arguments, got %d" % (head, len(want), len(args)), "sort")
        terms = tuple(_term(a, b, env) for a in args)
        sig = b.sig()
        for w, t, a in zip(want, terms, args):
            got = _term_sort(sig, t, a)
            if got != w:
                raise _err(a, "argument of %s has sort %s, expected %s" % (head, got, w), "sort")
        return Pred(str(head), terms)
    if head in b.functions:
        raise _err(node, "term %s is not boolean" % head, "sort")
    raise _err(head, "unknown symbol %s" % head, "symbol")


def _term_sort(sig: Signature, t: Term, node) -> str:
    try:
        return sig.sort_of(t)
    except SortError as e:
        raise _err(node, str(e), "sort") from None


def _term(node, b: _Builder, env: dict) -> Term:
    if isinstance(node, Str):
        raise _err(node, "string literal", "unsupported")
    if not isinstance(node, list):
        if node in env:
            return env[node]
        if node in b.functions:
            if b.functions[node][0]:
                raise _err(node, "function %s applied to no arguments" % node, "sort")
            return App(str(node), ())
        if re.match(r"^[0-9#]", node):
            raise _err(node, "literal %s" % node, "unsupported")
        raise _err(node, "unknown symbol %s" % node, "symbol")
    if not node:
        raise _err(node, "empty application")
    head = node[0]
    if isinstance(head, list) or head in _UNSUPPORTED_TERMS:
        raise _err(node, "'%s' terms" % sexp_to_text(head), "unsupported")
    if head not in b.functions:
        if head in b.predicates or head in ("and", "or", "not", "=>", "=", "distinct",
                                            "exists", "forall", "true", "false"):
            raise _err(node, "boolean term used where a term of an uninterpreted sort is expected", "unsupported")
        raise _err(head, "unknown symbol %s" % head, "symbol")
    args = node[1:]
    want, _ = b.functions[head]
    if len(want) != len(args):
        raise _err(node, "%s expects %d arguments, got %d" % (head, len(want), len(args)), "sort")
    terms = tuple(_term(a, b, env) for a in args)
    sig = b.sig()
    for w, t, a in zip(want, terms, args):
        got = _term_sort(sig, t, a)
        if got != w:
            raise _err(a, "argument of %s has sort %s, expected %s" % (head, got, w), "sort")
    return App(str(head), terms)
