"""Terms, formulas, signatures and theories for many-sorted first-order logic.

Everything here is immutable.  Formulas are a separate type from terms; the
SMT-LIB front end in :mod:`minfind.smtlib` converts between the two views.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

BOOL = "Bool"
RESERVED_PREFIX = "@"


class MinfindError(Exception):
    """Base class for errors raised by this package."""


class SortError(MinfindError):
    pass


class BoundingError(MinfindError):
    pass


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    """Function application; constants are applications with no arguments."""

    fn: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.fn
        return "%s(%s)" % (self.fn, ", ".join(map(str, self.args)))


Term = Union[Var, App]


def const(name: str) -> App:
    return App(name, ())


# ---------------------------------------------------------------------------
# formulas


class Formula:
    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj([self, other])

    def __or__(self, other: "Formula") -> "Formula":
        return disj([self, other])

    def __invert__(self) -> "Formula":
        return Not(self)


@dataclass(frozen=True)
class Top(Formula):
    def __str__(self) -> str:
        return "true"


@dataclass(frozen=True)
class Bottom(Formula):
    def __str__(self) -> str:
        return "false"


TRUE = Top()
FALSE = Bottom()


@dataclass(frozen=True)
class Pred(Formula):
    name: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return "%s(%s)" % (self.name, ", ".join(map(str, self.args)))


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term

    def __str__(self) -> str:
        return "%s = %s" % (self.lhs, self.rhs)


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self) -> str:
        return "¬%s" % _paren(self.arg)


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __str__(self) -> str:
        return " ∧ ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __str__(self) -> str:
        return " ∨ ".join(_paren(a) for a in self.args)


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula

    def __str__(self) -> str:
        return "%s → %s" % (_paren(self.lhs), _paren(self.rhs))


@dataclass(frozen=True)
class Exists(Formula):
    vars: tuple
    body: Formula

    def __str__(self) -> str:
        return "∃%s. %s" % (",".join(v.name for v in self.vars), self.body)


@dataclass(frozen=True)
class Forall(Formula):
    vars: tuple
    body: Formula

    def __str__(self) -> str:
        return "∀%s. %s" % (",".join(v.name for v in self.vars), self.body)


Atomic = (Top, Bottom, Pred, Eq)
Quantifier = (Exists, Forall)


def _paren(f: Formula) -> str:
    if isinstance(f, (And, Or, Implies, Exists, Forall)):
        return "(%s)" % f
    return str(f)


def conj(fs: Iterable[Formula]) -> Formula:
    """Conjunction that flattens nested ands and drops ``true``."""
    out = []
    for f in fs:
        if isinstance(f, And):
            out.extend(f.args)
        elif isinstance(f, Top):
            continue
        else:
            out.append(f)
    if not out:
        return TRUE
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(fs: Iterable[Formula]) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, Or):
            out.extend(f.args)
        elif isinstance(f, Bottom):
            continue
        else:
            out.append(f)
    if not out:
        return FALSE
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def exists(vs: Sequence[Var], body: Formula) -> Formula:
    return Exists(tuple(vs), body) if vs else body


def forall(vs: Sequence[Var], body: Formula) -> Formula:
    return Forall(tuple(vs), body) if vs else body


def neq(a: Term, b: Term) -> Formula:
    return Not(Eq(a, b))


# ---------------------------------------------------------------------------
# traversal


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from term_vars(a)


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def atom_terms(f: Formula) -> tuple:
    if isinstance(f, Pred):
        return f.args
    if isinstance(f, Eq):
        return (f.lhs, f.rhs)
    return ()


def children(f: Formula) -> tuple:
    if isinstance(f, (And, Or)):
        return f.args
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, Implies):
        return (f.lhs, f.rhs)
    if isinstance(f, (Exists, Forall)):
        return (f.body,)
    return ()


def free_vars(f: Formula) -> frozenset:
    if isinstance(f, (Pred, Eq)):
        return frozenset(v for t in atom_terms(f) for v in term_vars(t))
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - frozenset(f.vars)
    out: frozenset = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def subst_term(t: Term, env: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return env.get(t, t)
    if not t.args:
        return t
    return App(t.fn, tuple(subst_term(a, env) for a in t.args))


def subst(f: Formula, env: Mapping[Var, Term]) -> Formula:
    """Substitute terms for free variables.  Bound variables shadow ``env``;
    callers substitute closed terms or fresh variables, so capture cannot
    occur in this package."""
    if not env:
        return f
    if isinstance(f, Pred):
        return Pred(f.name, tuple(subst_term(a, env) for a in f.args))
    if isinstance(f, Eq):
        return Eq(subst_term(f.lhs, env), subst_term(f.rhs, env))
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(subst(f.arg, env))
    if isinstance(f, And):
        return And(tuple(subst(a, env) for a in f.args))
    if isinstance(f, Or):
        return Or(tuple(subst(a, env) for a in f.args))
    if isinstance(f, Implies):
        return Implies(subst(f.lhs, env), subst(f.rhs, env))
    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in env.items() if k not in f.vars}
        return type(f)(f.vars, subst(f.body, inner))
    raise TypeError(f)


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Rebuild ``f`` with ``fn`` applied to every maximal term of every atom."""
    if isinstance(f, Pred):
        return Pred(f.name, tuple(fn(a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(fn(f.lhs), fn(f.rhs))
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(map_terms(f.arg, fn))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(map_terms(a, fn) for a in f.args))
    if isinstance(f, Implies):
        return Implies(map_terms(f.lhs, fn), map_terms(f.rhs, fn))
    return type(f)(f.vars, map_terms(f.body, fn))


def symbols(f: Formula) -> set:
    """Function and predicate names occurring in ``f``."""
    out: set = set()

    def term(t: Term) -> None:
        if isinstance(t, App):
            out.add(t.fn)
            for a in t.args:
                term(a)

    def walk(g: Formula) -> None:
        if isinstance(g, Pred):
            out.add(g.name)
        for t in atom_terms(g):
            term(t)
        for c in children(g):
            walk(c)

    walk(f)
    return out


def quantifier_count(f: Formula) -> int:
    own = len(f.vars) if isinstance(f, (Exists, Forall)) else 0
    return own + sum(quantifier_count(c) for c in children(f))


# ---------------------------------------------------------------------------
# classification


def is_pe(f: Formula) -> bool:
    """Positive-existential: atoms (with true/false) under and, or, exists."""
    if isinstance(f, Atomic):
        return True
    if isinstance(f, (And, Or)):
        return all(is_pe(a) for a in f.args)
    if isinstance(f, Exists):
        return is_pe(f.body)
    return False


def geometric_parts(f: Formula) -> tuple | None:
    """Split an axiom as ``(vars, premise, conclusion)`` if it has the shape
    forall xs. premise -> conclusion with both sides PE, else None.

    A bare PE sentence is read with premise ``true``; nested universal
    prefixes are merged.
    """
    vs: list = []
    while isinstance(f, Forall):
        vs.extend(f.vars)
        f = f.body
    if isinstance(f, Implies):
        if is_pe(f.lhs) and is_pe(f.rhs):
            return tuple(vs), f.lhs, f.rhs
        return None
    if isinstance(f, Not) and is_pe(f.arg):
        return tuple(vs), f.arg, FALSE
    if is_pe(f):
        return tuple(vs), TRUE, f
    return None


def is_geometric(axioms: Iterable[Formula] | "Theory") -> bool:
    """Every axiom (after splitting top-level conjunctions) is geometric."""
    if isinstance(axioms, Theory):
        axioms = axioms.user_axioms()
    todo = list(axioms)
    while todo:
        f = todo.pop()
        if isinstance(f, And):
            todo.extend(f.args)
        elif geometric_parts(f) is None:
            return False
    return True


# ---------------------------------------------------------------------------
# signatures and theories


@dataclass(frozen=True)
class Signature:
    """Uninterpreted sorts plus function and predicate ranks.

    ``functions`` maps a name to ``(arg_sorts, result_sort)``; constants have
    no argument sorts.  ``predicates`` maps a name to its argument sorts.
    ``Bool`` is built in and is not listed in ``sorts``.
    """

    sorts: tuple = ()
    functions: Mapping = field(default_factory=dict)
    predicates: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(
            self, "functions",
            {k: (tuple(a), r) for k, (a, r) in self.functions.items()})
        object.__setattr__(
            self, "predicates", {k: tuple(a) for k, a in self.predicates.items()})
        self.validate()

    def validate(self) -> None:
        if len(set(self.sorts)) != len(self.sorts):
            raise SortError("duplicate sort declaration")
        if BOOL in self.sorts:
            raise SortError("Bool is built in and cannot be declared")
        clash = set(self.functions) & set(self.predicates)
        if clash:
            raise SortError("symbol declared twice: %s" % sorted(clash)[0])
        known = set(self.sorts)
        for name, (args, res) in self.functions.items():
            for s in (*args, res):
                if s not in known:
                    raise SortError("undeclared sort %s in rank of %s" % (s, name))
        for name, args in self.predicates.items():
            for s in args:
                if s not in known:
                    raise SortError("undeclared sort %s in rank of %s" % (s, name))

    def __hash__(self) -> int:
        return hash((self.sorts, tuple(sorted(self.functions.items())),
                     tuple(sorted(self.predicates.items()))))

    def symbols(self) -> set:
        return set(self.functions) | set(self.predicates)

    def constants(self, sort: str | None = None) -> list:
        return [n for n, (a, r) in self.functions.items()
                if not a and (sort is None or r == sort)]

    def extend(self, sorts: Sequence[str] = (), functions: Mapping | None = None,
               predicates: Mapping | None = None) -> "Signature":
        fs = dict(self.functions)
        ps = dict(self.predicates)
        for k, v in (functions or {}).items():
            if k in fs or k in ps:
                raise SortError("symbol declared twice: %s" % k)
            fs[k] = v
        for k, v in (predicates or {}).items():
            if k in fs or k in ps:
                raise SortError("symbol declared twice: %s" % k)
            ps[k] = v
        return Signature(self.sorts + tuple(s for s in sorts if s not in self.sorts), fs, ps)

    def restrict(self, names: Iterable[str]) -> "Signature":
        keep = set(names)
        return Signature(self.sorts,
                         {k: v for k, v in self.functions.items() if k in keep},
                         {k: v for k, v in self.predicates.items() if k in keep})

    def is_subsignature(self, other: "Signature") -> bool:
        """True if every symbol of ``self`` occurs in ``other`` with the same rank."""
        return (set(self.sorts) <= set(other.sorts)
                and all(other.functions.get(k) == v for k, v in self.functions.items())
                and all(other.predicates.get(k) == v for k, v in self.predicates.items()))

    # -- sort checking

    def sort_of(self, t: Term) -> str:
        if isinstance(t, Var):
            if t.sort not in self.sorts:
                raise SortError("variable %s has undeclared sort %s" % (t.name, t.sort))
            return t.sort
        if t.fn not in self.functions:
            raise SortError("unknown function symbol %s" % t.fn)
        args, res = self.functions[t.fn]
        if len(args) != len(t.args):
            raise SortError("%s expects %d arguments, got %d" % (t.fn, len(args), len(t.args)))
        for want, a in zip(args, t.args):
            got = self.sort_of(a)
            if got != want:
                raise SortError("argument of %s has sort %s, expected %s" % (t.fn, got, want))
        return res

    def check(self, f: Formula) -> None:
        """Raise :class:`SortError` unless ``f`` is well-sorted here."""
        if isinstance(f, Pred):
            if f.name not in self.predicates:
                raise SortError("unknown predicate symbol %s" % f.name)
            want = self.predicates[f.name]
            if len(want) != len(f.args):
                raise SortError("%s expects %d arguments, got %d" % (f.name, len(want), len(f.args)))
            for w, a in zip(want, f.args):
                got = self.sort_of(a)
                if got != w:
                    raise SortError("argument of %s has sort %s, expected %s" % (f.name, got, w))
        elif isinstance(f, Eq):
            a, b = self.sort_of(f.lhs), self.sort_of(f.rhs)
            if a != b:
                raise SortError("equality between sorts %s and %s" % (a, b))
        elif isinstance(f, (Exists, Forall)):
            for v in f.vars:
                if v.sort not in self.sorts:
                    raise SortError("bound variable %s has undeclared sort %s" % (v.name, v.sort))
            self.check(f.body)
        else:
            for c in children(f):
                self.check(c)


@dataclass(frozen=True)
class Profile:
    """Per-sort upper bounds on domain sizes."""

    bounds: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        for s, n in self.bounds.items():
            if not isinstance(n, int) or n < 1:
                raise BoundingError("bound for sort %s must be a positive integer, got %r" % (s, n))

    @classmethod
    def uniform(cls, sig: Signature, n: int) -> "Profile":
        return cls({s: n for s in sig.sorts})

    def __getitem__(self, sort: str) -> int:
        return self.bounds[sort]

    def __contains__(self, sort: str) -> bool:
        return sort in self.bounds


def fresh_constant(sort: str, i: int) -> str:
    return "%s%s!%d" % (RESERVED_PREFIX, sort, i)


def hom_symbol(sort: str) -> str:
    return "%shom!%s" % (RESERVED_PREFIX, sort)


@dataclass(frozen=True)
class Theory:
    """A signature with a list of axioms.

    ``notes`` records where each axiom came from (``user``, ``bounding``,
    ``avoid``, ...).  ``fresh`` lists, per bounded sort, the naming
    constants added by :func:`bound_theory`; ``base`` is the signature before
    bounding.
    """

    signature: Signature
    axioms: tuple = ()
    notes: tuple = ()
    fresh: Mapping = field(default_factory=dict)
    base: Signature | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "axioms", tuple(self.axioms))
        notes = tuple(self.notes) or ("user",) * len(self.axioms)
        if len(notes) != len(self.axioms):
            raise ValueError("one provenance note per axiom is required")
        object.__setattr__(self, "notes", notes)
        for ax in self.axioms:
            if not is_sentence(ax):
                raise SortError("axiom has free variables: %s" % ax)
            self.signature.check(ax)

    @property
    def user_signature(self) -> Signature:
        return self.base if self.base is not None else self.signature

    @property
    def is_bounded(self) -> bool:
        return bool(self.fresh)

    def with_axioms(self, fs: Iterable[Formula], note: str) -> "Theory":
        fs = list(fs)
        return Theory(self.signature, self.axioms + tuple(fs),
                      self.notes + (note,) * len(fs), self.fresh, self.base)

    def user_axioms(self) -> list:
        return [a for a, n in zip(self.axioms, self.notes) if n != "bounding"]


def used_sorts(t: Theory) -> set:
    """Sorts mentioned by a quantifier or a symbol rank."""
    out: set = set()
    sig = t.signature
    for args, res in sig.functions.values():
        out.update(args)
        out.add(res)
    for args in sig.predicates.values():
        out.update(args)

    def walk(f: Formula) -> None:
        if isinstance(f, (Exists, Forall)):
            out.update(v.sort for v in f.vars)
        for c in children(f):
            walk(c)

    for ax in t.axioms:
        walk(ax)
    return out


def domain_axiom(sort: str, names: Sequence[str], var: str = "x") -> Formula:
    """forall x:sort. x = c1 or ... or x = cn"""
    x = Var(var, sort)
    return Forall((x,), disj(Eq(x, const(c)) for c in names))


def bound_theory(t: Theory, p: Profile) -> Theory:
    """Add naming constants and covering axioms so every element is named.

    For each uninterpreted sort ``S`` with bound ``n`` this adds constants
    ``@S!1 .. @S!n`` and ``forall x:S. x = @S!1 or ... or x = @S!n``.
    """
    if t.is_bounded:
        raise BoundingError("theory is already bounded")
    sig = t.signature
    for s in p.bounds:
        if s not in sig.sorts:
            raise BoundingError("profile names unknown sort %s" % s)
    missing = sorted(s for s in used_sorts(t) | set(sig.sorts) if s not in p)
    if missing:
        raise BoundingError("no bound for sort %s" % missing[0])
    fresh = {s: tuple(fresh_constant(s, i) for i in range(1, p[s] + 1)) for s in sig.sorts}
    new_fns = {c: ((), s) for s, cs in fresh.items() for c in cs}
    bsig = sig.extend(functions=new_fns)
    covering = [domain_axiom(s, fresh[s]) for s in sig.sorts]
    return Theory(bsig, t.axioms + tuple(covering),
                  t.notes + ("bounding",) * len(covering), fresh, sig)


def check_user_symbols(sig: Signature) -> None:
    for name in itertools.chain(sig.sorts, sig.functions, sig.predicates):
        if name.startswith(RESERVED_PREFIX):
            raise SortError("symbol %s uses the reserved prefix %r" % (name, RESERVED_PREFIX))
