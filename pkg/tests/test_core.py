import pytest
from hypothesis import given, settings, strategies as st

from leftist.core import (
    Grammar,
    GrammarError,
    Step,
    StepError,
    apply_step,
    dele,
    distance_lower_bound,
    enabled_steps,
    format_grammar,
    ins,
    is_subword,
    parse_grammar,
    parse_word,
    stutter_canonical,
    stutter_equivalent,
)

from refimpl import step_all, triples

G0 = Grammar.build("g", [ins("g", "c"), ins("c", "c"), dele("c", "a")], ["a"])


def test_parse_transcribes_rules():
    g = parse_grammar("final g\ninsert g c\ndelete c a")
    assert g == Grammar(frozenset({"a", "c"}), "g", frozenset({ins("g", "c"), dele("c", "a")}))


def test_axiom_as_patient_rejected():
    with pytest.raises(GrammarError, match="axiom"):
        parse_grammar("final g\ninsert g g")


def test_duplicate_final():
    with pytest.raises(GrammarError, match="duplicate final"):
        parse_grammar("final g\nfinal h")


def test_errors_carry_positions():
    with pytest.raises(GrammarError) as e:
        parse_grammar("final g\ninsert g c\nfrobnicate a b")
    assert e.value.line == 3


def test_bad_symbol_name():
    with pytest.raises(GrammarError):
        parse_grammar("final g\ninsert g c$")


def test_format_roundtrip():
    text = format_grammar(G0)
    assert parse_grammar(text) == G0
    assert format_grammar(parse_grammar(text)) == text


def test_idle_symbols_survive_roundtrip():
    g = Grammar.build("g", [ins("g", "a")], ["z"])
    assert parse_grammar(format_grammar(g)).alphabet == {"a", "z"}


def test_apply_insert_and_delete():
    assert apply_step(G0, ("a", "g"), Step(ins("g", "c"), 2)) == ("a", "c", "g")
    assert apply_step(G0, ("a", "c", "g"), Step(dele("c", "a"), 2)) == ("c", "g")


def test_patient_mismatch():
    with pytest.raises(StepError):
        apply_step(G0, ("c", "g"), Step(dele("c", "a"), 2))


def test_actor_mismatch():
    with pytest.raises(StepError):
        apply_step(G0, ("a", "g"), Step(dele("c", "a"), 2))


def test_rule_not_in_grammar():
    with pytest.raises(StepError):
        apply_step(G0, ("a", "g"), Step(ins("g", "a"), 2))


def test_enabled_steps_g0():
    assert enabled_steps(G0, ("a", "g")) == [Step(ins("g", "c"), 2)]
    assert enabled_steps(G0, ("a", "c", "g")) == [
        Step(ins("c", "c"), 2),
        Step(dele("c", "a"), 2),
        Step(ins("g", "c"), 3),
    ]
    assert enabled_steps(G0, ()) == []


def test_stutter():
    assert stutter_canonical(("a", "a", "b", "b", "a")) == ("a", "b", "a")
    assert stutter_canonical(()) == ()
    assert stutter_canonical(("a", "b", "a")) == ("a", "b", "a")
    assert stutter_equivalent(("a", "a"), ("a",))


def test_subword():
    assert is_subword(("a", "b"), ("a", "c", "b"))
    assert not is_subword(("a", "b"), ("a", "c", "b"), allowed={"d"})
    assert not is_subword(("b", "a"), ("a", "b"))


def test_parse_word():
    assert parse_word("-") == ()
    assert parse_word("a c g") == ("a", "c", "g")
    with pytest.raises(GrammarError):
        parse_word("a q", {"a"})


def test_acyclic():
    assert G0.is_acyclic() is False  # c -> c is a self loop
    assert Grammar.build("g", [ins("g", "c"), dele("c", "a")]).is_acyclic()


letters = st.sampled_from(["a", "c"])
words = st.lists(letters, max_size=5).map(lambda xs: tuple(xs) + ("g",))


@given(words)
def test_successors_match_reference(w):
    got = sorted((s.rule.actor, s.rule.patient, s.position) for s in enabled_steps(G0, w))
    ref = sorted((a, b, p) for _, a, b, p, _ in step_all(triples(G0), w))
    assert got == ref


@given(st.lists(letters, max_size=6), st.lists(letters, max_size=6))
def test_subword_matches_bruteforce(x, y):
    from itertools import combinations

    brute = any(tuple(y[i] for i in idx) == tuple(x) for idx in combinations(range(len(y)), len(x)))
    assert is_subword(x, y) == brute


@given(st.lists(letters, max_size=6), st.lists(letters, max_size=6), st.sets(letters))
def test_restricted_subword_matches_bruteforce(x, y, allowed):
    from itertools import combinations

    def ok(idx):
        dropped = [y[i] for i in range(len(y)) if i not in idx]
        return tuple(y[i] for i in idx) == tuple(x) and all(s in allowed for s in dropped)

    brute = any(ok(set(idx)) for idx in combinations(range(len(y)), len(x)))
    assert is_subword(x, y, allowed) == brute


@given(st.lists(letters, max_size=8))
def test_stutter_idempotent(w):
    c = stutter_canonical(w)
    assert stutter_canonical(c) == c
    assert all(c[i] != c[i + 1] for i in range(len(c) - 1))


@settings(max_examples=60)
@given(words, words)
def test_lower_bound_is_sound(w, t):
    from refimpl import reach

    dist = reach(triples(G0), w, 6, 8).get(t)
    if dist is not None:
        assert distance_lower_bound(G0, w, t) <= dist
