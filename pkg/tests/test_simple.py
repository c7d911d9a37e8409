import random

import pytest
from hypothesis import given, settings, strategies as st

from leftist.catalog import simple_transformers
from leftist.core import Grammar, Kind, Step, dele, ins
from leftist.derivations import Derivation, replay
from leftist.reach import oracle_derivations
from leftist.simple import (
    InsertionGrammar,
    NablaWitness,
    SimpleTransformer,
    check_decomposition,
    check_simple_length,
    decomposition_report,
    insertion_relation,
    nabla,
    strip_to_insertion,
    union,
    union_projection_violations,
    witness_derivation,
)
from leftist.transform import RelationBounds, TransformerError, make_transformer, rename_transformer

G0 = SimpleTransformer(make_transformer("g", [ins("g", "c"), ins("c", "c"), dele("c", "a")], {"a"}, (), {"c"}))
G_BOT = SimpleTransformer(make_transformer("g", [ins("g", "d"), ins("d", "d"), dele("d", "a")], {"a"}, (), {"d"}))


def test_strip_to_insertion():
    assert strip_to_insertion(G0.grammar).grammar.rules == {ins("g", "c"), ins("c", "c")}
    ig = strip_to_insertion(G0.grammar).grammar
    assert strip_to_insertion(ig).grammar == ig
    assert strip_to_insertion(Grammar.build("g", [dele("g", "a")])).grammar.rules == frozenset()
    with pytest.raises(ValueError):
        InsertionGrammar(G0.grammar)


def test_insertion_relation():
    ig = strip_to_insertion(G0.grammar)
    r = insertion_relation(ig, RelationBounds(2, 6, 3))
    assert (("c",), ("c", "c", "c")) in r
    assert (("c", "a"), ("c", "c", "a")) in r
    assert all((u, u) in r for u in [(), ("a",), ("c", "a"), ("a", "a")])
    from leftist.core import is_subword

    assert all(is_subword(u, v) for u, v in r.pairs)


def test_simple_rejects_temps_and_erased_outputs():
    with pytest.raises(TransformerError):
        SimpleTransformer(make_transformer("g", [ins("g", "c"), dele("c", "c")], {"a"}, (), {"c"}))
    with pytest.raises(TransformerError):
        SimpleTransformer(make_transformer("g", [ins("g", "t")], {"a"}, {"t"}, {"c"}))


def test_nabla_examples():
    assert nabla(G0, ("a",), ("c",)) == NablaWitness((1,))
    assert nabla(G0, (), ()) == NablaWitness(())
    assert nabla(G0, ("a",), ()) is None
    with pytest.raises(ValueError):
        nabla(G0, ("c",), ("c",))


def test_nabla_least_witness():
    t = SimpleTransformer(
        make_transformer(
            "g", [ins("g", "c2"), ins("c2", "c1"), dele("c1", "a1"), dele("c2", "a1"), dele("c2", "a2")],
            {"a1", "a2"}, (), {"c1", "c2"},
        )
    )
    assert nabla(t, ("a1", "a1", "a2"), ("c1", "c2")) == NablaWitness((1, 1, 2))
    assert nabla(t, ("a2", "a1"), ("c1", "c2")) == NablaWitness((2, 2))  # h need not be onto
    assert nabla(t, ("a2", "a1"), ("c1",)) is None
    assert nabla(t, ("a1",), ("c2", "c1")) is None  # no chain rule c1 -> c2


def test_simple_length_examples():
    d = witness_derivation(G0, ("a",), ("c",), NablaWitness((1,)))
    assert replay(d)[-1] == ("c", "g") and check_simple_length(G0, d)
    assert check_simple_length(G0, Derivation(G0.grammar, ("g",)))
    d3 = Derivation(
        G0.grammar, ("a", "a", "g"), (Step(ins("g", "c"), 3), Step(dele("c", "a"), 3), Step(dele("c", "a"), 2))
    )
    assert replay(d3)[-1] == ("c", "g") and check_simple_length(G0, d3)
    with pytest.raises(ValueError):
        check_simple_length(G0, Derivation(G0.grammar, ("a", "g"), (Step(ins("g", "c"), 2),)))


@pytest.mark.parametrize("name", sorted(simple_transformers()))
def test_step_count_on_catalog(name):
    st_ = simple_transformers()[name]
    A, C = st_.inputs, st_.outputs
    for u in [(), tuple(sorted(A))[:1], tuple(sorted(A)), tuple(sorted(A))[::-1]]:
        for d, w in oracle_derivations(st_.grammar, u + ("g",), 6, 6):
            if all(s in C for s in w[:-1]):
                assert check_simple_length(st_, d)


def test_decomposition_g0():
    rep = decomposition_report(G0, RelationBounds(2, 5, 6))
    assert rep.ok, rep


@pytest.mark.parametrize("name", sorted(simple_transformers()))
def test_decomposition_catalog(name):
    assert check_decomposition(simple_transformers()[name], RelationBounds(2, 5, 6))


def test_union():
    u = union(G0, G_BOT)
    assert u.inputs == {"a"} and u.outputs == {"c", "d"} and len(u.grammar.rules) == 6
    with pytest.raises(TransformerError, match="output overlap"):
        union(G0, G0)
    empty = SimpleTransformer(make_transformer("g", [], {"a"}, (), {"z"}))
    assert union(G0, empty).grammar.rules == G0.grammar.rules
    assert union(G0, empty).outputs == {"c", "z"}


def test_union_projection():
    assert union_projection_violations(G0, G_BOT, RelationBounds(2, 6, 8)) == []


@pytest.mark.parametrize("name", sorted(simple_transformers()))
def test_union_projection_catalog(name):
    st1 = simple_transformers()[name]
    st2 = SimpleTransformer(rename_transformer(st1.base, {c: c + "x" for c in st1.outputs}))
    assert union_projection_violations(st1, st2, RelationBounds(2, 6, 8)) == []


def _subwords(v):
    from itertools import combinations

    return {tuple(v[i] for i in idx) for k in range(len(v) + 1) for idx in combinations(range(len(v)), k)}


def _random_simple(rng):
    A, C = ["a1", "a2"], ["c1", "c2", "c3"]
    rules = {ins("g", rng.choice(C))}
    for _ in range(rng.randint(2, 7)):
        if rng.random() < 0.5:
            rules.add(ins(rng.choice(C + ["g"]), rng.choice(C)))
        else:
            rules.add(dele(rng.choice(C), rng.choice(A)))
    return SimpleTransformer(make_transformer("g", rules, A, (), C))


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_nabla_witness_replays(seed):
    rng = random.Random(seed)
    t = _random_simple(rng)
    u = tuple(rng.choice(["a1", "a2"]) for _ in range(rng.randint(0, 3)))
    v = tuple(rng.choice(["c1", "c2", "c3"]) for _ in range(rng.randint(0, 3)))
    w = nabla(t, u, v)
    if w is None:
        return
    assert all(a <= b for a, b in zip(w.h, w.h[1:]))
    d = witness_derivation(t, u, v, w)
    assert replay(d)[-1] == v + ("g",)
    assert len(d) == len(u) + len(v)
    assert all(s.rule.kind in (Kind.INSERT, Kind.DELETE) for s in d.steps)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reachability_factors_through_nabla(seed):
    from leftist.reach import SearchBounds, bounded_reach

    rng = random.Random(seed)
    t = _random_simple(rng)
    u = tuple(rng.choice(["a1", "a2"]) for _ in range(rng.randint(0, 2)))
    v = tuple(rng.choice(["c1", "c2", "c3"]) for _ in range(rng.randint(0, 3)))
    src, dst = u + ("g",), v + ("g",)
    k = len(u) + len(v)
    upto = bounded_reach(t.grammar, src, dst, SearchBounds(k + 4, 8)).found
    exact = bounded_reach(t.grammar, src, dst, SearchBounds(k, 8, exact=True)).found
    ig = strip_to_insertion(t.grammar).grammar
    factored = any(
        nabla(t, u, w) is not None and bounded_reach(ig, w + ("g",), dst, SearchBounds(len(v) - len(w), 8)).found
        for w in _subwords(v)
    )
    assert upto == exact == factored
    if nabla(t, u, v) is not None:
        assert exact
