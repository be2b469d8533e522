import itertools
import random

import pytest

from minfind.homs import (
    Hom, HomKind, all_homs, avoid_sentence, compress_hom_from, ehom_sentence, find_hom,
    flip_sentence, hom_equivalent, hom_from_sentence, hom_preorder, hom_to_sentence,
    is_hom, is_strictly_below, isomorphic, rep_sentence,
)
from minfind.model import FiniteModel, eval_formula
from minfind.syntax import (
    FALSE, And, App, Eq, Exists, Signature, Var, const, quantifier_count,
)

from util import mk, random_model, unary_sig

f = lambda t: App("f", (t,))
x0, x1, x2 = (Var("x%d" % i, "S") for i in range(3))
c = const("c")

# the running example: c sits on a 3-cycle of f
CYCLE = Exists((x0, x1, x2), And((Eq(f(x0), x2), Eq(f(x1), x0), Eq(f(x2), x1), Eq(c, x2))))


def conjuncts(g):
    body = g.body if isinstance(g, Exists) else g
    return set(body.args) if isinstance(body, And) else {body}


def test_given_order_golden():
    out = compress_hom_from(CYCLE, "given").sentence
    assert isinstance(out, Exists) and out.vars == (x1,)
    assert conjuncts(out) == {Eq(f(f(f(x1))), x1), Eq(c, f(f(x1)))}


def test_graph_order_golden():
    out = compress_hom_from(CYCLE, "graph")
    assert out.sentence == Eq(f(f(f(c))), c)
    assert out.residual == 0


def test_compression_never_adds_quantifiers():
    rng = random.Random(11)
    sig = unary_sig(preds=("P",), funcs=("f", "g"), consts=("c",))
    for _ in range(40):
        m = random_model(sig, rng)
        rep = rep_sentence(m)
        for strategy in ("given", "graph"):
            assert quantifier_count(compress_hom_from(rep, strategy).sentence) <= quantifier_count(rep)
    with pytest.raises(ValueError):
        compress_hom_from(CYCLE, "random")


def brute_homs(a, b, kind):
    elems = a.elements()
    choices = [b.domains[a.sort_of(e)] for e in elems]
    for pick in itertools.product(*choices):
        h = dict(zip(elems, pick))
        if is_hom(h, a, b, kind):
            yield h


@pytest.mark.parametrize("kind", list(HomKind))
def test_search_agrees_with_brute_force(kind):
    rng = random.Random(5)
    sig = Signature(("S", "T"), {"g": (("S",), "T")}, {"P": ("S",), "E": ("S", "T")})
    for _ in range(60):
        a, b = random_model(sig, rng, prefix="a"), random_model(sig, rng, prefix="b")
        found = sorted(tuple(sorted(h.mapping.items())) for h in all_homs(a, b, kind))
        brute = sorted(tuple(sorted(h.items())) for h in brute_homs(a, b, kind))
        assert found == brute
        assert (find_hom(a, b, kind) is None) == (not brute)


def test_preorder_basics():
    sig = unary_sig(preds=("P", "Q"))
    both = mk(sig, 1, {"P": [0], "Q": [0]})
    split = mk(sig, 2, {"P": [0], "Q": [1]})
    assert is_strictly_below(split, both)
    assert hom_preorder(both, split).above
    two_p = mk(unary_sig(), 2, {"P": [0, 1]})
    one_p = mk(unary_sig(), 1, {"P": [0]})
    assert hom_equivalent(two_p, one_p) and not isomorphic(two_p, one_p)
    assert isomorphic(split, mk(sig, 2, {"P": [1], "Q": [0]}))


def test_compose_and_image():
    h = Hom({"a": "b", "b": "b"})
    g = Hom({"b": "c"})
    assert g.compose(h).mapping == {"a": "c", "b": "c"}
    assert h.image() == {"b"} and not h.is_injective()


def test_homfrom_and_avoid_semantics_by_evaluation():
    rng = random.Random(9)
    sig = unary_sig(preds=("P",), funcs=("f",), consts=("c",))
    pool = [random_model(sig, rng) for _ in range(20)]
    for m in pool:
        rep = rep_sentence(m)
        hf = hom_from_sentence(m).sentence
        av = avoid_sentence(m)
        for n in pool:
            below = find_hom(m, n) is not None
            assert eval_formula(n, rep) == below
            assert eval_formula(n, hf) == below
            assert eval_formula(n, av) == (not below)


def test_flip_of_a_factless_model_is_false():
    sig = Signature(("S",), {}, {"P": ("S",)})
    m = FiniteModel(sig, {"S": ("@S!1", "@S!2")})
    assert flip_sentence(m) == FALSE


def test_hom_to_signature_is_fresh():
    m = mk(unary_sig(funcs=("f",)), 2, {"P": [0]}, {"f": [1, 0]})
    ht = hom_to_sentence(m)
    assert "@tgt!S" in ht.signature.sorts
    assert "@hom!S" in ht.signature.functions
    assert set(ht.targets) == {"a0", "a1"}


def test_ehom_signature_names_every_element():
    m = mk(unary_sig(), 2, {"P": [0, 1]})
    eh = ehom_sentence(m)
    assert set(eh.naming) == {"a0", "a1"}
    assert "@hom!S" in eh.signature.functions
