"""Ground completion: turn ground equations into a convergent, self-reduced
rewrite system.

Terms are :class:`~minfind.syntax.App` values.  The order is total on ground
terms: naming constants (the set ``K``) are smallest and ordered by their
given rank; every other term is compared by size, then symbol, then
arguments.  So ``f(..) > c`` for every naming constant ``c`` and the order is
monotone, which is all completion of ground equations needs.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .syntax import App, term_size


class TermOrder:
    def __init__(self, ranks: Mapping[str, tuple]):
        self.ranks = dict(ranks)

    def key(self, t: App) -> tuple:
        if not t.args and t.fn in self.ranks:
            return (1, 0, self.ranks[t.fn])
        return (term_size(t), 1, t.fn, tuple(self.key(a) for a in t.args))

    def greater(self, s: App, t: App) -> bool:
        return self.key(s) > self.key(t)


def normalize(t: App, rules: Mapping) -> App:
    """Innermost normal form under ground rules ``lhs -> rhs``."""
    while True:
        if t.args:
            t = App(t.fn, tuple(normalize(a, rules) for a in t.args))
        nxt = rules.get(t)
        if nxt is None:
            return t
        t = nxt


def _contains(big: App, small: App) -> bool:
    if big == small:
        return True
    return any(_contains(a, small) for a in big.args)


def complete(equations: Iterable[tuple], order: TermOrder) -> dict:
    """Ground completion.  Returns ``{lhs: rhs}`` with every ``lhs > rhs``,
    each right side irreducible and each left side irreducible by the other
    rules."""
    rules: dict = {}
    pending = list(equations)
    pending.reverse()
    while pending:
        s, t = pending.pop()
        s, t = normalize(s, rules), normalize(t, rules)
        if s == t:
            continue
        if order.greater(t, s):
            s, t = t, s
        for lhs in [l for l in rules if _contains(l, s)]:
            pending.append((lhs, rules.pop(lhs)))
        rules[s] = t
        for lhs in list(rules):
            rules[lhs] = normalize(rules[lhs], rules)
    return rules


def is_self_reduced(rules: Mapping) -> bool:
    for lhs, rhs in rules.items():
        if normalize(rhs, rules) != rhs:
            return False
        others = {l: r for l, r in rules.items() if l != lhs}
        if normalize(lhs, others) != lhs:
            return False
        # proper subterms of a left side must be irreducible by every rule
        if any(normalize(a, rules) != a for a in lhs.args):
            return False
    return True


def critical_overlaps(rules: Mapping) -> list:
    """Pairs of rules where one left side occurs inside another.

    For ground systems these are the only sources of critical pairs, so an
    empty result together with termination means the system is confluent.
    """
    out = []
    for l1 in rules:
        for l2 in rules:
            if l1 != l2 and _contains(l1, l2):
                out.append((l1, l2))
    return out
