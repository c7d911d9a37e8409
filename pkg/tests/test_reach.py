import random

import pytest
from hypothesis import given, settings, strategies as st

from leftist.catalog import random_grammar, random_word, tiny_grammars
from leftist.core import Grammar, dele, ins
from leftist.derivations import replay
from leftist.reach import SearchBounds, Verdict, bounded_reach, greedy_outputs, greedy_reach, oracle_enumerate

from refimpl import reach, reach_exact, triples

G0 = Grammar.build("g", [ins("g", "c"), ins("c", "c"), dele("c", "a")], ["a"])


def test_oracle_g0_depth_two():
    got = oracle_enumerate(G0, ("a", "g"), SearchBounds(2, 4))
    assert got == {("a", "g"): 0, ("a", "c", "g"): 1, ("c", "g"): 2, ("a", "c", "c", "g"): 2}


def test_oracle_depth_zero_and_no_rules():
    assert oracle_enumerate(G0, ("a", "g"), SearchBounds(0, 4)) == {("a", "g"): 0}
    empty = Grammar.build("g", [], ["a"])
    assert oracle_enumerate(empty, ("a", "g"), SearchBounds(5, 9)) == {("a", "g"): 0}


def test_reach_two_steps():
    res = bounded_reach(G0, ("a", "g"), ("c", "g"), SearchBounds(2, 4))
    assert res.found
    assert len(res.derivation) == 2
    assert replay(res.derivation)[-1] == ("c", "g")


def test_exact_three_steps_impossible():
    res = bounded_reach(G0, ("a", "g"), ("c", "g"), SearchBounds(3, 4, exact=True))
    assert res.verdict is Verdict.NOT_FOUND


def test_reflexive():
    res = bounded_reach(G0, ("a", "g"), ("a", "g"), SearchBounds(0, 4))
    assert res.found and len(res.derivation) == 0


def test_budget():
    res = bounded_reach(G0, ("a", "a", "a", "g"), ("c", "c", "c", "g"), SearchBounds(10, 8, budget=2))
    assert res.verdict is Verdict.BUDGET_EXCEEDED


def test_greedy_rejects_exact():
    with pytest.raises(ValueError):
        greedy_reach(G0, ("a", "g"), ("c", "g"), SearchBounds(2, 4, exact=True))


def test_greedy_witness_is_greedy():
    from leftist.derivations import classify

    res = greedy_reach(G0, ("a", "a", "g"), ("c", "g"), SearchBounds(4, 5))
    assert res.found and classify(res.derivation).greedy


def test_greedy_outputs_toy():
    g = tiny_grammars()["anchor"]
    outs = greedy_outputs(g, ("s", "a", "g"), "e", frozenset({"c"}), SearchBounds(6, 6), max_len=2)
    assert set(outs) == {("c",), ("c", "c")}


@pytest.mark.parametrize("name", sorted(tiny_grammars()))
def test_oracle_matches_reference(name):
    g = tiny_grammars()[name]
    rng = random.Random(name)
    for _ in range(10):
        w = random_word(rng, g, 3)
        assert oracle_enumerate(g, w, SearchBounds(5, 7)) == reach(triples(g), w, 5, 7)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_searches_agree_with_oracle(seed):
    rng = random.Random(seed)
    g = random_grammar(rng, letters=3, rules=rng.randint(3, 6))
    w = random_word(rng, g, 3)
    D, M = rng.randint(0, 6), rng.randint(len(w), 7)
    dist = oracle_enumerate(g, w, SearchBounds(D, M))
    targets = list(dist) + [random_word(rng, g, 3) for _ in range(3)]
    for t in targets:
        assert bounded_reach(g, w, t, SearchBounds(D, M)).found == (t in dist)
        exact = t in reach_exact(triples(g), w, D, M)
        assert bounded_reach(g, w, t, SearchBounds(D, M, exact=True)).found == exact


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_greedy_complete_without_width_pressure(seed):
    # greedy reordering may widen words, so compare where the width cannot bind
    rng = random.Random(seed)
    g = random_grammar(rng, letters=3, rules=rng.randint(3, 6))
    w = random_word(rng, g, 3)
    D = rng.randint(0, 6)
    wide = SearchBounds(D, len(w) + D)
    dist = oracle_enumerate(g, w, wide)
    for t in list(dist) + [random_word(rng, g, 3) for _ in range(3)]:
        assert greedy_reach(g, w, t, wide).found == (t in dist)


def test_greedy_needs_width():
    # the only greedy witness passes through a word of length 5
    g = Grammar.build("g", [ins("a", "c"), dele("c", "c"), dele("b", "c")], ["b"])
    w, t = ("a", "c", "c", "g"), ("c", "a", "c", "g")
    assert bounded_reach(g, w, t, SearchBounds(5, 4)).found
    assert not greedy_reach(g, w, t, SearchBounds(5, 4)).found
    assert greedy_reach(g, w, t, SearchBounds(5, 5)).found


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_found_derivations_replay(seed):
    rng = random.Random(seed)
    g = random_grammar(rng, letters=3, rules=5)
    w = random_word(rng, g, 3)
    dist = oracle_enumerate(g, w, SearchBounds(5, 7))
    t = rng.choice(sorted(dist))
    res = bounded_reach(g, w, t, SearchBounds(5, 7))
    words = replay(res.derivation)
    assert words[0] == w and words[-1] == t
    assert len(res.derivation) == dist[t]
    assert max(map(len, words)) <= 7
