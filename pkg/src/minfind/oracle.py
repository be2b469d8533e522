"""Brute-force reference implementations, used to check the solver-driven
algorithms on small signatures.

Everything here enumerates: models up to given per-sort sizes, fact subsets,
submodels, endomorphisms.  Only use it where the search space is tiny.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Iterator, Mapping

from .homs import all_homs, find_hom, hom_equivalent, is_strictly_below
from .model import FiniteModel, induced_submodel, satisfies
from .syntax import Signature, Theory, fresh_constant


def _tables(sig: Signature, domains: Mapping) -> Iterator[dict]:
    specs = []
    for f, (args, res) in sorted(sig.functions.items()):
        keys = list(itertools.product(*(domains[a] for a in args)))
        specs.append((f, keys, domains[res]))
    choices = [itertools.product(vals, repeat=len(keys)) for _, keys, vals in specs]
    for pick in itertools.product(*[list(c) for c in choices]):
        yield {f: dict(zip(keys, vs)) for (f, keys, _), vs in zip(specs, pick)}


def _pred_sets(sig: Signature, domains: Mapping) -> Iterator[dict]:
    specs = []
    for p, args in sorted(sig.predicates.items()):
        specs.append((p, list(itertools.product(*(domains[a] for a in args)))))
    flat = [(p, t) for p, ts in specs for t in ts]
    for bits in itertools.product((False, True), repeat=len(flat)):
        out: dict = {p: set() for p, _ in specs}
        for (p, t), b in zip(flat, bits):
            if b:
                out[p].add(t)
        yield out


def all_models(sig: Signature, bounds: Mapping) -> Iterator[FiniteModel]:
    """Every model with 1..bounds[S] elements per sort, elements ``@S!i``.

    Isomorphic copies are not removed.
    """
    sorts = list(sig.sorts)
    for sizes in itertools.product(*(range(1, bounds[s] + 1) for s in sorts)):
        domains = {s: tuple(fresh_constant(s, i) for i in range(1, n + 1))
                   for s, n in zip(sorts, sizes)}
        for funcs in _tables(sig, domains):
            for preds in _pred_sets(sig, domains):
                yield FiniteModel(sig, domains, funcs, preds)


def models_of(theory: Theory, bounds: Mapping) -> list:
    return [m for m in all_models(theory.user_signature, bounds) if satisfies(m, theory)]


def up_to_iso(models: Iterable[FiniteModel]) -> list:
    from .homs import isomorphic
    out: list = []
    for m in models:
        if not any(isomorphic(m, n) for n in out):
            out.append(m)
    return out


def fact_subsets(m: FiniteModel, proper: bool = True) -> Iterator[FiniteModel]:
    """Models on m's universe and functions with a subset of its facts."""
    facts = m.facts()
    for bits in itertools.product((False, True), repeat=len(facts)):
        if proper and all(bits):
            continue
        preds: dict = {p: set() for p in m.preds}
        for (p, t), b in zip(facts, bits):
            if b:
                preds[p].add(t)
        yield m.with_preds(preds)


def closed_subsets(m: FiniteModel) -> Iterator[set]:
    """Element sets closed under the functions, nonempty in every sort."""
    elems = m.elements()
    for bits in itertools.product((False, True), repeat=len(elems)):
        keep = {e for e, b in zip(elems, bits) if b}
        if any(not (keep & set(m.domains[s])) for s in m.signature.sorts):
            continue
        ok = all(v in keep for t in m.funcs.values() for k, v in t.items()
                 if all(a in keep for a in k))
        if ok:
            yield keep


def proper_submodels(m: FiniteModel) -> Iterator[FiniteModel]:
    """Substructures: a closed element subset carrying a subset of the facts,
    excluding m itself."""
    whole = set(m.elements())
    for keep in closed_subsets(m):
        sub = induced_submodel(m, keep)
        yield from fact_subsets(sub, proper=keep == whole)


def is_i_minimal_fixed(theory: Theory, m: FiniteModel) -> bool:
    """No proper fact subset on the same universe satisfies the theory."""
    return not any(satisfies(s, theory) for s in fact_subsets(m))


def is_submodel_minimal(theory: Theory, m: FiniteModel) -> bool:
    return not any(satisfies(s, theory) for s in proper_submodels(m))


def is_a_minimal(m: FiniteModel, models: Iterable[FiniteModel]) -> bool:
    return not any(is_strictly_below(n, m) for n in models)


def covers(emitted: list, models: Iterable[FiniteModel]) -> list:
    """Models not above any emitted model (empty when ``emitted`` covers)."""
    return [m for m in models if not any(find_hom(e, m) is not None for e in emitted)]


def is_antichain(models: list) -> bool:
    for i, a in enumerate(models):
        for b in models[i + 1:]:
            if find_hom(a, b) is not None or find_hom(b, a) is not None:
                return False
    return True


def endomorphisms(m: FiniteModel) -> Iterator:
    return all_homs(m, m)


def is_core(m: FiniteModel) -> bool:
    """Every endomorphism is injective."""
    return all(h.is_injective() for h in endomorphisms(m))


def retractions(m: FiniteModel) -> Iterator:
    """Endomorphisms r with r after r equal to r."""
    for h in endomorphisms(m):
        if all(h(h(e)) == h(e) for e in m.elements()):
            yield h


def brute_core(m: FiniteModel) -> FiniteModel:
    """Shrink along non-injective endomorphisms, taking the first found."""
    while True:
        h = next((h for h in endomorphisms(m) if not h.is_injective()), None)
        if h is None:
            return m
        m = induced_submodel(m, h.image())


def matched(xs: list, ys: list) -> bool:
    """Same size and a perfect matching under hom-equivalence."""
    if len(xs) != len(ys):
        return False
    left = list(ys)
    for x in xs:
        hit = next((i for i, y in enumerate(left) if hom_equivalent(x, y)), None)
        if hit is None:
            return False
        left.pop(hit)
    return True
