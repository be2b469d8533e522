"""Homomorphisms between finite models, and the sentences that let a solver
reason about them."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .model import FiniteModel, ModelError, diagram, element_naming, to_rewrite_rep
from .syntax import (
    FALSE, TRUE, And, App, Eq, Exists, Formula, Implies, Not, Pred, Signature, Term,
    Var, conj, const, disj, domain_axiom, exists, forall, hom_symbol, neq, subst,
    term_vars,
)


class HomKind(str, enum.Enum):
    UNRESTRICTED = "unrestricted"
    INJECTIVE = "injective"
    STRONG = "strong"
    EMBEDDING = "embedding"

    @property
    def injective(self) -> bool:
        return self in (HomKind.INJECTIVE, HomKind.EMBEDDING)

    @property
    def strong(self) -> bool:
        return self in (HomKind.STRONG, HomKind.EMBEDDING)


@dataclass(frozen=True)
class Hom:
    mapping: Mapping
    kind: HomKind = HomKind.UNRESTRICTED

    def __call__(self, e: str) -> str:
        return self.mapping[e]

    def image(self) -> set:
        return set(self.mapping.values())

    def compose(self, first: "Hom") -> "Hom":
        """``self`` after ``first``."""
        return Hom({e: self.mapping[v] for e, v in first.mapping.items()}, HomKind.UNRESTRICTED)

    def is_injective(self) -> bool:
        return len(set(self.mapping.values())) == len(self.mapping)


def same_signature(a: FiniteModel, b: FiniteModel) -> None:
    sa, sb = a.signature, b.signature
    if (set(sa.sorts) != set(sb.sorts) or sa.functions != sb.functions
            or sa.predicates != sb.predicates):
        raise ModelError("models have different signatures")


def is_hom(h: Mapping, a: FiniteModel, b: FiniteModel,
           kind: HomKind = HomKind.UNRESTRICTED) -> bool:
    """Check the homomorphism conditions of ``kind`` for a total map."""
    for e in a.elements():
        if e not in h or b._sort_of.get(h[e]) != a.sort_of(e):
            return False
    for f, table in a.funcs.items():
        for args, v in table.items():
            if b.funcs[f][tuple(h[x] for x in args)] != h[v]:
                return False
    for p, args in a.signature.predicates.items():
        for tup in itertools.product(*(a.domains[s] for s in args)):
            held = tup in a.preds[p]
            img = tuple(h[x] for x in tup) in b.preds[p]
            if held and not img:
                return False
            if kind.strong and img and not held:
                return False
    if kind.injective:
        for s in a.signature.sorts:
            if len({h[e] for e in a.domains[s]}) != len(a.domains[s]):
                return False
    return True


class _Search:
    """Backtracking over per-sort maps, most constrained element first."""

    def __init__(self, a: FiniteModel, b: FiniteModel, kind: HomKind):
        same_signature(a, b)
        self.a, self.b, self.kind = a, b, kind
        checks: list = []
        for f, table in a.funcs.items():
            for args, v in table.items():
                checks.append(("f", f, args, v))
        for p, args in a.signature.predicates.items():
            tuples = (itertools.product(*(a.domains[s] for s in args))
                      if kind.strong else sorted(a.preds[p]))
            for tup in tuples:
                checks.append(("p", p, tup, tup in a.preds[p]))
        degree = {e: 0 for e in a.elements()}
        for c in checks:
            for e in set(c[2]) | ({c[3]} if c[0] == "f" else set()):
                degree[e] += 1
        self.order = sorted(a.elements(), key=lambda e: (-degree[e], a.elements().index(e)))
        pos = {e: i for i, e in enumerate(self.order)}
        # each check runs once the last of its elements has been assigned
        self.due: dict = {e: [] for e in self.order}
        self.nullary: list = []
        for c in checks:
            involved = list(c[2]) + ([c[3]] if c[0] == "f" else [])
            if involved:
                self.due[max(involved, key=pos.__getitem__)].append(c)
            else:
                self.nullary.append(c)
        self.cands = {e: list(b.domains[a.sort_of(e)]) for e in self.order}

    def _ok(self, h: dict, c: tuple) -> bool:
        b = self.b
        if c[0] == "f":
            _, f, args, v = c
            return b.funcs[f][tuple(h[x] for x in args)] == h[v]
        _, p, tup, held = c
        img = tuple(h[x] for x in tup) in b.preds[p]
        return img if held else not (img and self.kind.strong)

    def run(self) -> Iterator[dict]:
        if not all(self._ok({}, c) for c in self.nullary):
            return
        h: dict = {}
        used: dict = {s: set() for s in self.a.signature.sorts}
        yield from self._go(0, h, used)

    def _go(self, i: int, h: dict, used: dict) -> Iterator[dict]:
        if i == len(self.order):
            yield dict(h)
            return
        e = self.order[i]
        s = self.a.sort_of(e)
        for t in self.cands[e]:
            if self.kind.injective and t in used[s]:
                continue
            h[e] = t
            if all(self._ok(h, c) for c in self.due[e]):
                used[s].add(t)
                yield from self._go(i + 1, h, used)
                used[s].discard(t)
            del h[e]


def find_hom(a: FiniteModel, b: FiniteModel,
             kind: HomKind = HomKind.UNRESTRICTED) -> Hom | None:
    """A homomorphism of the given kind from ``a`` to ``b``, or None."""
    for h in _Search(a, b, HomKind(kind)).run():
        return Hom(h, HomKind(kind))
    return None


def all_homs(a: FiniteModel, b: FiniteModel,
             kind: HomKind = HomKind.UNRESTRICTED) -> Iterator[Hom]:
    for h in _Search(a, b, HomKind(kind)).run():
        yield Hom(h, HomKind(kind))


@dataclass(frozen=True)
class Preorder:
    below: bool
    above: bool

    @property
    def equivalent(self) -> bool:
        return self.below and self.above

    @property
    def strictly_below(self) -> bool:
        return self.below and not self.above


def hom_preorder(a: FiniteModel, b: FiniteModel,
                 kind: HomKind = HomKind.UNRESTRICTED) -> Preorder:
    return Preorder(find_hom(a, b, kind) is not None, find_hom(b, a, kind) is not None)


def is_strictly_below(a: FiniteModel, b: FiniteModel) -> bool:
    return hom_preorder(a, b).strictly_below


def hom_equivalent(a: FiniteModel, b: FiniteModel) -> bool:
    return hom_preorder(a, b).equivalent


def isomorphic(a: FiniteModel, b: FiniteModel) -> bool:
    if a.sizes() != b.sizes():
        return False
    return find_hom(a, b, HomKind.EMBEDDING) is not None


# ---------------------------------------------------------------------------
# hom-to


def target_sort(sort: str) -> str:
    return "@tgt!%s" % sort


def target_constant(sort: str, i: int) -> str:
    return "@tgt!%s!%d" % (sort, i)


@dataclass(frozen=True)
class HomToSentence:
    """``sentence`` holds in an expansion of P to ``signature`` iff P maps
    homomorphically into the target model."""

    signature: Signature
    sentence: Formula
    targets: Mapping = field(default_factory=dict)


def hom_to_sentence(m: FiniteModel) -> HomToSentence:
    """For each sort S, a copy ``@tgt!S`` of m's S-domain (distinct, covering
    constants) and a map ``@hom!S : S -> @tgt!S``; then one implication per
    function and per predicate saying the map lands on m's graph."""
    sig = m.signature
    tgt: dict = {}
    new_fns: dict = {}
    clauses: list = []
    for s in sig.sorts:
        for i, e in enumerate(m.domains[s], 1):
            tgt[e] = target_constant(s, i)
            new_fns[tgt[e]] = ((), target_sort(s))
        new_fns[hom_symbol(s)] = ((s,), target_sort(s))
        cs = [tgt[e] for e in m.domains[s]]
        clauses.extend(neq(const(x), const(y)) for i, x in enumerate(cs) for y in cs[i + 1:])
        clauses.append(domain_axiom(target_sort(s), cs, "y"))
    ext = sig.extend(sorts=[target_sort(s) for s in sig.sorts], functions=new_fns)
    h = lambda t, s: App(hom_symbol(s), (t,))

    for f, (args, res) in sig.functions.items():
        xs = [Var("x%d" % i, a) for i, a in enumerate(args)]
        y = Var("y", res)
        options = []
        for tup, v in sorted(m.funcs[f].items()):
            options.append(conj([Eq(h(x, a), const(tgt[e])) for x, a, e in zip(xs, args, tup)]
                                + [Eq(h(y, res), const(tgt[v]))]))
        clauses.append(forall(xs + [y], Implies(Eq(App(f, tuple(xs)), y), disj(options))))
    for p, args in sig.predicates.items():
        xs = [Var("x%d" % i, a) for i, a in enumerate(args)]
        options = [conj([Eq(h(x, a), const(tgt[e])) for x, a, e in zip(xs, args, tup)])
                   for tup in sorted(m.preds[p])]
        clauses.append(forall(xs, Implies(Pred(p, tuple(xs)), disj(options))))
    return HomToSentence(ext, conj(clauses), tgt)


# ---------------------------------------------------------------------------
# hom-from


def rep_sentence(m: FiniteModel) -> Formula:
    """The C-rules and facts of m's rewrite presentation, with one
    existential variable per element in place of its canonical constant."""
    rep = to_rewrite_rep(m)
    naming = element_naming(m)
    xs = {}
    for i, e in enumerate(m.elements()):
        xs[const(naming[e])] = Var("x%d" % i, m.sort_of(e))

    def sub(t):
        if isinstance(t, App) and not t.args and t in xs:
            return xs[t]
        return App(t.fn, tuple(sub(a) for a in t.args))

    body = [Eq(sub(l), sub(r)) for l, r in rep.c_rules]
    body += [Pred(f.name, tuple(sub(a) for a in f.args)) for f in rep.facts]
    return exists(list(xs.values()), conj(body))


@dataclass(frozen=True)
class HomFromSentence:
    sentence: Formula
    residual: int
    trace: tuple = ()


def _var_term_key(t: Term, rank: Mapping) -> tuple:
    if isinstance(t, Var):
        return (1, 0, rank.get(t, (9, t.name)))
    return (1 + sum(_size(a) for a in t.args), 1, t.fn, tuple(_var_term_key(a, rank) for a in t.args))


def _size(t: Term) -> int:
    return 1 if isinstance(t, Var) else 1 + sum(_size(a) for a in t.args)


def _definition(c: Formula, vs: list) -> Var | None:
    """The variable defined by ``c`` if it has the shape f(ts) = x with x
    not occurring in ts."""
    if isinstance(c, Eq) and isinstance(c.rhs, Var) and c.rhs in vs and isinstance(c.lhs, App):
        if c.rhs not in set(term_vars(c.lhs)):
            return c.rhs
    return None


def compress_hom_from(rep: Formula, strategy: str = "graph") -> HomFromSentence:
    """Eliminate existential variables from a rep sentence.

    While some conjunct reads ``f(t1..tn) = x`` with ``x`` not in the ``ti``,
    substitute ``f(t1..tn)`` for ``x`` everywhere and drop ``x``.  With
    ``strategy="given"`` the first such conjunct is used; with ``"graph"``
    definitions whose left side is variable-free come first, then those whose
    variables are sources of the dependency graph (edge from each argument
    variable to the defined one), ties broken by the least left side.
    """
    if strategy not in ("graph", "given"):
        raise ValueError("unknown elimination strategy %r" % strategy)
    if isinstance(rep, Exists):
        vs, body = list(rep.vars), rep.body
    else:
        vs, body = [], rep
    conjs = list(body.args) if isinstance(body, And) else ([] if body == TRUE else [body])
    rank = {v: (i,) for i, v in enumerate(vs)}
    trace = []
    while True:
        eligible = [(i, _definition(c, vs)) for i, c in enumerate(conjs)]
        eligible = [(i, x) for i, x in eligible if x is not None]
        if not eligible:
            break
        if strategy == "given":
            i, x = eligible[0]
        else:
            defined = set()
            for c in conjs:
                if isinstance(c, Eq) and isinstance(c.rhs, Var) and isinstance(c.lhs, App):
                    defined.add(c.rhs)
            def tier(item):
                lhs = conjs[item[0]].lhs
                lv = set(term_vars(lhs))
                if not lv:
                    return 0
                if not (lv & defined):
                    return 1
                return 2
            i, x = min(eligible, key=lambda it: (tier(it), _var_term_key(conjs[it[0]].lhs, rank)))
        term = conjs[i].lhs
        rest = conjs[:i] + conjs[i + 1:]
        new = []
        for c in rest:
            c = subst(c, {x: term})
            if isinstance(c, Eq) and c.lhs == c.rhs:
                continue
            new.append(c)
        conjs = new
        vs.remove(x)
        trace.append((x, term))
    return HomFromSentence(exists(vs, conj(conjs)), len(vs), tuple(trace))


def hom_from_sentence(m: FiniteModel, strategy: str = "graph") -> HomFromSentence:
    return compress_hom_from(rep_sentence(m), strategy)


def avoid_sentence(m: FiniteModel) -> Formula:
    """True in B exactly when there is no homomorphism from m to B."""
    return Not(hom_from_sentence(m).sentence)


# ---------------------------------------------------------------------------
# flip and ehom


def domain_closure(m: FiniteModel, naming: Mapping) -> list:
    return [domain_axiom(s, [naming[e] for e in m.domains[s]]) for s in m.signature.sorts]


def flip_sentence(p: FiniteModel, naming: Mapping | None = None) -> Formula:
    """Keep every false atom false (distinctness included), make some true
    atom false, and keep the universe fixed to p's named elements."""
    d = diagram(p, naming)
    if not d.positive:
        return FALSE
    return conj(domain_closure(p, d.naming) + [Not(a) for a in d.negative]
                + [disj(Not(a) for a in d.positive)])


@dataclass(frozen=True)
class EhomSentence:
    signature: Signature
    sentence: Formula
    naming: Mapping


def ehom_sentence(m: FiniteModel) -> EhomSentence:
    """Satisfiable iff m has a non-injective endomorphism, read off the
    ``@hom!S`` symbols of a model."""
    naming = element_naming(m)
    d = diagram(m, naming)
    sig = m.signature
    new_fns = {c: ((), m.sort_of(e)) for e, c in naming.items()}
    new_fns.update({hom_symbol(s): ((s,), s) for s in sig.sorts})
    ext = sig.extend(functions=new_fns)
    c = lambda e: const(naming[e])
    h = lambda e: App(hom_symbol(m.sort_of(e)), (c(e),))
    parts = list(d.positive) + [Not(a) for a in d.negative] + domain_closure(m, naming)
    for f, table in sorted(m.funcs.items()):
        for args, v in sorted(table.items()):
            parts.append(Eq(App(f, tuple(h(a) for a in args)), h(v)))
    for pname in sorted(m.preds):
        for tup in sorted(m.preds[pname]):
            parts.append(Pred(pname, tuple(h(a) for a in tup)))
    collapse = []
    for s in sig.sorts:
        dom = m.domains[s]
        collapse.extend(Eq(h(a), h(b)) for i, a in enumerate(dom) for b in dom[i + 1:])
    parts.append(disj(collapse))
    return EhomSentence(ext, conj(parts), naming)
