"""Finite models: evaluation, scraping from a solver, rewrite presentation,
diagrams and serialization."""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .rewrite import TermOrder, complete, normalize
from .smtlib import sexp_to_text
from .syntax import (
    And, App, Bottom, Eq, Exists, Forall, Formula, Implies, MinfindError, Not, Or,
    Pred, Signature, Term, Theory, Top, Var, conj, const, exists, neq,
)


class ModelError(MinfindError):
    pass


class ScrapeError(MinfindError):
    pass


_FRESH = re.compile(r"^@(.+)!(\d+)$")


def constant_rank(name: str) -> tuple:
    """Canonical order on naming constants: by sort, then index."""
    m = _FRESH.match(name)
    if m:
        return (0, m.group(1), int(m.group(2)), "")
    return (1, "", 0, name)


@dataclass(frozen=True)
class FiniteModel:
    """A finite interpretation of ``signature``.

    Elements are strings and must be distinct across sorts.  ``names`` maps
    naming constants (for scraped models, the bounding constants) to the
    elements they denote; when omitted each element names itself.
    """

    signature: Signature
    domains: Mapping
    funcs: Mapping = field(default_factory=dict)
    preds: Mapping = field(default_factory=dict)
    names: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        sig = self.signature
        doms = {s: tuple(self.domains.get(s, ())) for s in sig.sorts}
        object.__setattr__(self, "domains", doms)
        object.__setattr__(self, "funcs", {
            f: {tuple(k): v for k, v in self.funcs.get(f, {}).items()} for f in sig.functions})
        object.__setattr__(self, "preds", {
            p: frozenset(tuple(t) for t in self.preds.get(p, ())) for p in sig.predicates})
        if not self.names:
            object.__setattr__(self, "names", {e: e for d in doms.values() for e in d})
        else:
            object.__setattr__(self, "names", dict(self.names))
        self._validate()

    def _validate(self) -> None:
        sort_of: dict = {}
        for s, d in self.domains.items():
            if not d:
                raise ModelError("sort %s has an empty domain" % s)
            for e in d:
                if e in sort_of:
                    raise ModelError("element %s occurs twice" % e)
                sort_of[e] = s
        object.__setattr__(self, "_sort_of", sort_of)
        extra = set(self.funcs) - set(self.signature.functions)
        extra |= set(self.preds) - set(self.signature.predicates)
        if extra:
            raise ModelError("symbols not in the signature: %s" % sorted(extra))
        for f, (args, res) in self.signature.functions.items():
            table = self.funcs[f]
            for tup in itertools.product(*(self.domains[a] for a in args)):
                v = table.get(tup)
                if v is None:
                    raise ModelError("function %s undefined at %s" % (f, tup))
                if sort_of.get(v) != res:
                    raise ModelError("function %s has value %s outside sort %s" % (f, v, res))
            if len(table) != _count(self.domains, args):
                raise ModelError("function table for %s has entries outside its domain" % f)
        for p, args in self.signature.predicates.items():
            for tup in self.preds[p]:
                if len(tup) != len(args) or any(sort_of.get(e) != s for e, s in zip(tup, args)):
                    raise ModelError("predicate %s holds of %s outside its domain" % (p, tup))
        for c, e in self.names.items():
            if e not in sort_of:
                raise ModelError("name %s denotes unknown element %s" % (c, e))
        named = set(self.names.values())
        for e in sort_of:
            if e not in named:
                raise ModelError("element %s is not named by any constant" % e)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.domains.items())),
                     tuple(sorted((p, tuple(sorted(v))) for p, v in self.preds.items()))))

    # -- queries

    def sort_of(self, e: str) -> str:
        return self._sort_of[e]

    def elements(self) -> list:
        return [e for s in self.signature.sorts for e in self.domains[s]]

    def size(self) -> int:
        return len(self._sort_of)

    def sizes(self) -> dict:
        return {s: len(d) for s, d in self.domains.items()}

    def rep(self, e: str) -> str:
        """The canonical (least) constant naming ``e``."""
        return min((c for c, v in self.names.items() if v == e), key=constant_rank)

    def facts(self) -> list:
        """Predicate facts as ``(name, tuple)`` pairs in a fixed order."""
        return [(p, t) for p in sorted(self.preds) for t in sorted(self.preds[p])]

    def fact_count(self) -> int:
        return sum(len(v) for v in self.preds.values())

    def value(self, t: Term, env: Mapping | None = None) -> str:
        if isinstance(t, Var):
            try:
                return env[t]  # type: ignore[index]
            except (KeyError, TypeError):
                raise ModelError("unbound variable %s" % t.name) from None
        if t.fn in self.funcs:
            return self.funcs[t.fn][tuple(self.value(a, env) for a in t.args)]
        if not t.args and t.fn in self.names:
            return self.names[t.fn]
        raise ModelError("symbol %s is not interpreted" % t.fn)

    def with_preds(self, preds: Mapping) -> "FiniteModel":
        return FiniteModel(self.signature, self.domains, self.funcs, preds, self.names)

    def __str__(self) -> str:
        return format_text(self)


def _count(domains: Mapping, args: Sequence[str]) -> int:
    n = 1
    for a in args:
        n *= len(domains[a])
    return n


def eval_formula(m: FiniteModel, f: Formula, env: Mapping | None = None) -> bool:
    """Tarski satisfaction; quantifiers range over the finite domains."""
    env = dict(env or {})
    return _eval(m, f, env)


def _eval(m: FiniteModel, f: Formula, env: dict) -> bool:
    if isinstance(f, Top):
        return True
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Pred):
        if f.name not in m.preds:
            raise ModelError("symbol %s is not interpreted" % f.name)
        return tuple(m.value(a, env) for a in f.args) in m.preds[f.name]
    if isinstance(f, Eq):
        return m.value(f.lhs, env) == m.value(f.rhs, env)
    if isinstance(f, Not):
        return not _eval(m, f.arg, env)
    if isinstance(f, And):
        return all(_eval(m, a, env) for a in f.args)
    if isinstance(f, Or):
        return any(_eval(m, a, env) for a in f.args)
    if isinstance(f, Implies):
        return (not _eval(m, f.lhs, env)) or _eval(m, f.rhs, env)
    if isinstance(f, (Exists, Forall)):
        want = isinstance(f, Exists)
        saved = {v: env.get(v) for v in f.vars}
        try:
            for vals in itertools.product(*(m.domains[v.sort] for v in f.vars)):
                env.update(zip(f.vars, vals))
                if _eval(m, f.body, env) == want:
                    return want
            return not want
        finally:
            for v, old in saved.items():
                if old is None:
                    env.pop(v, None)
                else:
                    env[v] = old
    raise TypeError(f)


def satisfies(m: FiniteModel, t: Theory | Iterable[Formula]) -> bool:
    axioms = t.user_axioms() if isinstance(t, Theory) else list(t)
    return all(eval_formula(m, a) for a in axioms)


def reduct(m: FiniteModel, sig: Signature) -> FiniteModel:
    """Forget the symbols of ``m`` that are not in ``sig``."""
    if not sig.is_subsignature(m.signature) or set(sig.sorts) != set(m.signature.sorts):
        raise ModelError("not a sub-signature of the model's signature")
    return FiniteModel(sig, m.domains,
                       {f: m.funcs[f] for f in sig.functions},
                       {p: m.preds[p] for p in sig.predicates}, m.names)


def induced_submodel(m: FiniteModel, keep: Iterable[str]) -> FiniteModel:
    """The submodel on ``keep`` with every fact of ``m`` among its elements.

    ``keep`` must be closed under the functions.  Names of dropped elements
    are discarded.
    """
    keep = set(keep)
    doms = {s: tuple(e for e in d if e in keep) for s, d in m.domains.items()}
    funcs = {}
    for f, table in m.funcs.items():
        sub = {k: v for k, v in table.items() if all(a in keep for a in k)}
        if any(v not in keep for v in sub.values()):
            raise ModelError("element set is not closed under %s" % f)
        funcs[f] = sub
    preds = {p: {t for t in ts if all(a in keep for a in t)} for p, ts in m.preds.items()}
    names = {c: e for c, e in m.names.items() if e in keep}
    return FiniteModel(m.signature, doms, funcs, preds, names)


def rename(m: FiniteModel, mapping: Mapping) -> FiniteModel:
    """Rename elements by the injective ``mapping`` (missing keys unchanged)."""
    g = lambda e: mapping.get(e, e)
    return FiniteModel(
        m.signature,
        {s: tuple(g(e) for e in d) for s, d in m.domains.items()},
        {f: {tuple(map(g, k)): g(v) for k, v in t.items()} for f, t in m.funcs.items()},
        {p: {tuple(map(g, k)) for k in ts} for p, ts in m.preds.items()},
        {c: g(e) for c, e in m.names.items()})


def canonical_names(m: FiniteModel) -> FiniteModel:
    """Rename every element to the least constant that names it."""
    return rename(m, {e: m.rep(e) for e in m.elements()})


# ---------------------------------------------------------------------------
# scraping


def scrape_model(session, theory: Theory) -> FiniteModel:
    """Read the solver's current model of a bounded theory.

    Equalities between the naming constants give the domains; every
    predicate and function is then queried on representatives only.
    """
    if not theory.is_bounded:
        raise ScrapeError("scraping needs a bounded theory")
    sig = theory.user_signature
    names: dict = {}
    domains: dict = {}
    for s in sig.sorts:
        cs = list(theory.fresh[s])
        pairs = [(i, j) for i in range(len(cs)) for j in range(i + 1, len(cs))]
        answers = session.get_values_bool([Eq(const(cs[i]), const(cs[j])) for i, j in pairs])
        same = {p for p, a in zip(pairs, answers) if a}
        rep_of: dict = {}
        for j in range(len(cs)):
            partners = [i for i in range(j) if (i, j) in same]
            rep_of[j] = rep_of[partners[0]] if partners else j
        for (i, j), a in zip(pairs, answers):
            if a != (rep_of[i] == rep_of[j]):
                raise ScrapeError("solver gave inconsistent equality answers on sort %s" % s)
        domains[s] = tuple(cs[j] for j in range(len(cs)) if rep_of[j] == j)
        for j, c in enumerate(cs):
            names[c] = cs[rep_of[j]]
    preds: dict = {}
    for p, args in sig.predicates.items():
        tuples = list(itertools.product(*(domains[a] for a in args)))
        vals = session.get_values_bool(
            [Pred(p, tuple(const(e) for e in t)) for t in tuples]) if tuples else []
        preds[p] = {t for t, v in zip(tuples, vals) if v}
    funcs: dict = {}
    for f, (args, res) in sig.functions.items():
        tuples = list(itertools.product(*(domains[a] for a in args)))
        cands = domains[res]
        queries = [Eq(App(f, tuple(const(e) for e in t)), const(c)) for t in tuples for c in cands]
        vals = session.get_values_bool(queries)
        table = {}
        for i, t in enumerate(tuples):
            row = vals[i * len(cands):(i + 1) * len(cands)]
            hit = [c for c, v in zip(cands, row) if v]
            if not hit:
                raise ScrapeError("%s%s has no value among the naming constants" % (f, t))
            table[t] = hit[0]
        funcs[f] = table
    return FiniteModel(sig, domains, funcs, preds, names)


def scrape_enumerated(session, sig: Signature, domains: Mapping) -> FiniteModel:
    """Read a model whose sorts are enumerated types with the given
    constructors, using get-value on constructor terms."""
    preds: dict = {}
    for p, args in sig.predicates.items():
        tuples = list(itertools.product(*(domains[a] for a in args)))
        vals = session.get_values_bool(
            [Pred(p, tuple(const(e) for e in t)) for t in tuples]) if tuples else []
        preds[p] = {t for t, v in zip(tuples, vals) if v}
    funcs: dict = {}
    from .smtlib import term_text
    for f, (args, res) in sig.functions.items():
        tuples = list(itertools.product(*(domains[a] for a in args)))
        vals = session.get_value([term_text(App(f, tuple(const(e) for e in t))) for t in tuples])
        table = {}
        for t, v in zip(tuples, vals):
            v = sexp_to_text(v) if isinstance(v, list) else str(v)
            if v not in domains[res]:
                raise ScrapeError("%s%s has unexpected value %s" % (f, t, v))
            table[t] = v
        funcs[f] = table
    return FiniteModel(sig, domains, funcs, preds)


# ---------------------------------------------------------------------------
# rewrite presentation


@dataclass(frozen=True)
class RewriteRep:
    c_rules: tuple
    d_rules: tuple
    facts: tuple
    order: tuple

    def rules(self) -> dict:
        return dict(self.c_rules + self.d_rules)

    def normal_form(self, t: App) -> App:
        return normalize(t, self.rules())

    def canonical_constants(self) -> list:
        lhs = {l.fn for l, _ in self.d_rules}
        return [c for c in self.order if c not in lhs]


def term_order(m: FiniteModel) -> TermOrder:
    return TermOrder({c: constant_rank(c) for c in m.names})


def to_rewrite_rep(m: FiniteModel) -> RewriteRep:
    """Complete the basic presentation (constant identifications, function
    graph on representatives, facts) into a convergent ground system."""
    order = term_order(m)
    eqs = []
    for c in sorted(m.names, key=constant_rank):
        r = m.rep(m.names[c])
        if c != r:
            eqs.append((const(c), const(r)))
    for f in sorted(m.funcs):
        for args, v in sorted(m.funcs[f].items()):
            eqs.append((App(f, tuple(const(m.rep(a)) for a in args)), const(m.rep(v))))
    rules = complete(eqs, order)
    c_rules, d_rules = [], []
    for lhs in sorted(rules, key=order.key):
        (d_rules if (not lhs.args and lhs.fn in m.names) else c_rules).append((lhs, rules[lhs]))
    facts = []
    for p, t in m.facts():
        facts.append(Pred(p, tuple(normalize(const(m.rep(e)), rules) for e in t)))
    return RewriteRep(tuple(c_rules), tuple(d_rules), tuple(facts),
                      tuple(sorted(m.names, key=constant_rank)))


# ---------------------------------------------------------------------------
# diagrams and characteristic sentences


@dataclass(frozen=True)
class Diagram:
    positive: tuple
    negative: tuple
    naming: Mapping


def _atoms(m: FiniteModel, naming: Mapping) -> tuple:
    """All ground atoms over the element constants, split by truth value."""
    pos, neg = [], []
    c = lambda e: const(naming[e])
    for s in m.signature.sorts:
        d = m.domains[s]
        for i, a in enumerate(d):
            for b in d[i + 1:]:
                neg.append(Eq(c(a), c(b)))
    for f, (args, res) in m.signature.functions.items():
        for tup in itertools.product(*(m.domains[a] for a in args)):
            v = m.funcs[f][tup]
            lhs = App(f, tuple(c(e) for e in tup))
            for e in m.domains[res]:
                (pos if e == v else neg).append(Eq(lhs, c(e)))
    for p, args in m.signature.predicates.items():
        for tup in itertools.product(*(m.domains[a] for a in args)):
            atom = Pred(p, tuple(c(e) for e in tup))
            (pos if tup in m.preds[p] else neg).append(atom)
    return tuple(pos), tuple(neg)


def element_naming(m: FiniteModel) -> dict:
    return {e: m.rep(e) for e in m.elements()}


def diagram(m: FiniteModel, naming: Mapping | None = None) -> Diagram:
    naming = dict(naming or element_naming(m))
    pos, neg = _atoms(m, naming)
    return Diagram(pos, neg, naming)


def positive_diagram(m: FiniteModel, naming: Mapping | None = None) -> tuple:
    return diagram(m, naming).positive


def element_vars(m: FiniteModel, prefix: str = "x") -> dict:
    return {e: Var("%s%d" % (prefix, i), m.sort_of(e)) for i, e in enumerate(m.elements())}


def characteristic_sentence(m: FiniteModel) -> Formula:
    """The positive diagram with one existential variable per element."""
    xs = element_vars(m)
    naming = {e: "\0%s" % e for e in xs}
    back = {const(naming[e]): v for e, v in xs.items()}
    body = [_replace(a, back) for a in positive_diagram(m, naming)]
    return exists(list(xs.values()), conj(body))


def i_characteristic_sentence(m: FiniteModel) -> Formula:
    """Like :func:`characteristic_sentence`, plus pairwise distinctness."""
    xs = element_vars(m)
    ch = characteristic_sentence(m)
    distinct = []
    for s in m.signature.sorts:
        vs = [xs[e] for e in m.domains[s]]
        distinct.extend(neq(a, b) for i, a in enumerate(vs) for b in vs[i + 1:])
    body = ch.body if isinstance(ch, Exists) else ch
    return exists(list(xs.values()), conj([body] + distinct))


def _replace_term(t: Term, env: Mapping) -> Term:
    if isinstance(t, App):
        if not t.args and t in env:
            return env[t]
        return App(t.fn, tuple(_replace_term(a, env) for a in t.args))
    return t


def _replace(f: Formula, env: Mapping) -> Formula:
    if isinstance(f, Pred):
        return Pred(f.name, tuple(_replace_term(a, env) for a in f.args))
    if isinstance(f, Eq):
        return Eq(_replace_term(f.lhs, env), _replace_term(f.rhs, env))
    raise TypeError(f)


# ---------------------------------------------------------------------------
# output formats


def _tstr(t: Term) -> str:
    return str(t)


def format_text(m: FiniteModel, rep: RewriteRep | None = None) -> str:
    rep = rep or to_rewrite_rep(m)
    lines = ["sorts:"]
    for s in m.signature.sorts:
        lines.append("  %s: %s" % (s, " ".join(m.domains[s])))
    lines.append("D-rules:")
    lines.extend("  %s -> %s" % (_tstr(l), _tstr(r)) for l, r in rep.d_rules)
    lines.append("C-rules:")
    lines.extend("  %s -> %s" % (_tstr(l), _tstr(r)) for l, r in rep.c_rules)
    lines.append("facts:")
    lines.extend("  %s" % f for f in rep.facts)
    return "\n".join(lines)


def to_json(m: FiniteModel) -> dict:
    rep = to_rewrite_rep(m)
    sig = m.signature
    return {
        "signature": {
            "sorts": list(sig.sorts),
            "functions": {f: [list(a), r] for f, (a, r) in sorted(sig.functions.items())},
            "predicates": {p: list(a) for p, a in sorted(sig.predicates.items())},
        },
        "sorts": {s: list(m.domains[s]) for s in sig.sorts},
        "funcs": {f: {",".join(k): v for k, v in sorted(m.funcs[f].items())}
                  for f in sorted(m.funcs)},
        "preds": {p: [list(t) for t in sorted(m.preds[p])] for p in sorted(m.preds)},
        "names": {c: m.names[c] for c in sorted(m.names, key=constant_rank)},
        "d_rules": [[_tstr(l), _tstr(r)] for l, r in rep.d_rules],
        "c_rules": [[_tstr(l), _tstr(r)] for l, r in rep.c_rules],
        "facts": [_tstr(f) for f in rep.facts],
    }


def from_json(data: Mapping) -> FiniteModel:
    s = data["signature"]
    sig = Signature(tuple(s["sorts"]),
                    {f: (tuple(a), r) for f, (a, r) in s["functions"].items()},
                    {p: tuple(a) for p, a in s["predicates"].items()})
    funcs = {f: {tuple(k.split(",")) if k else (): v for k, v in t.items()}
             for f, t in data["funcs"].items()}
    preds = {p: {tuple(t) for t in ts} for p, ts in data["preds"].items()}
    return FiniteModel(sig, {k: tuple(v) for k, v in data["sorts"].items()},
                       funcs, preds, data.get("names") or {})


def dumps(m: FiniteModel) -> str:
    return json.dumps(to_json(m), indent=2)
