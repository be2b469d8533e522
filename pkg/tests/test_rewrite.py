import itertools
import random

from hypothesis import given, settings, strategies as st

from minfind.model import to_rewrite_rep
from minfind.rewrite import TermOrder, complete, critical_overlaps, is_self_reduced, normalize
from minfind.syntax import App, Signature, const

from util import random_model


def terms_upto(sig, consts, depth):
    level = [const(c) for c in consts]
    seen = list(level)
    for _ in range(depth):
        nxt = []
        for f, (args, _) in sig.functions.items():
            if args:
                for tup in itertools.product(seen, repeat=len(args)):
                    nxt.append(App(f, tup))
        seen = list(dict.fromkeys(seen + nxt))
    return seen


def test_naming_constants_are_smallest():
    o = TermOrder({"@S!1": (0, "S", 1), "@S!2": (0, "S", 2)})
    assert o.greater(const("@S!2"), const("@S!1"))
    assert o.greater(App("f", (const("@S!1"),)), const("@S!2"))
    assert o.greater(const("c"), const("@S!2"))


def test_completion_of_a_cycle():
    a, f = const("a"), lambda t: App("f", (t,))
    o = TermOrder({"a": (0,)})
    rules = complete([(f(f(f(a))), a), (f(f(a)), a)], o)
    # f(f(a)) = a and f(f(f(a))) = a force f(a) = a
    assert normalize(f(a), rules) == a
    assert is_self_reduced(rules) and not critical_overlaps(rules)


def _check(m):
    rep = to_rewrite_rep(m)
    rules = rep.rules()
    assert is_self_reduced(rules)
    assert not critical_overlaps(rules)
    ts = terms_upto(m.signature, list(m.names) + m.signature.constants(), 2)
    for s in ts:
        for t in ts:
            assert (rep.normal_form(s) == rep.normal_form(t)) == (m.value(s) == m.value(t))


sig2 = Signature(("S",), {"f": (("S",), "S"), "g": (("S",), "S"), "c": ((), "S")}, {"P": ("S",)})


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_normal_forms_decide_equality(seed):
    rng = random.Random(seed)
    m = random_model(sig2, rng, max_size=3)
    # give some elements extra names so D-rules appear
    names = dict(m.names)
    for i, e in enumerate(m.elements()):
        if rng.random() < 0.5:
            names["k%d" % i] = e
    m = type(m)(m.signature, m.domains, m.funcs, m.preds, names)
    _check(m)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=5))
def test_completion_is_convergent(pairs):
    f = lambda t: App("f", (t,))
    cs = [const("k%d" % i) for i in range(3)]
    o = TermOrder({c.fn: (0, "S", i) for i, c in enumerate(cs)})
    mk = lambda n: f(mk(n - 1)) if n else cs[0]
    eqs = [(mk(a), mk(b) if b < 3 else cs[b % 3]) for a, b in pairs]
    rules = complete(eqs, o)
    assert is_self_reduced(rules)
    assert all(o.greater(l, r) for l, r in rules.items())
    for l, r in eqs:
        assert normalize(l, rules) == normalize(r, rules)
