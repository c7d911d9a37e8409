import pytest

from leftist.catalog import TOYS, toy_relay, toy_t
from leftist.closure import (
    ClosureError,
    Reading,
    Renaming,
    RuleClass,
    anchored_relation,
    build_finishers,
    build_renamer,
    closure_parts,
    compare_closure,
    wrapper_pair_violations,
    extend_hprime,
    finisher_violations,
    glue,
    invariant_violations,
    make_anchored,
    mimic,
    mode_of,
    precheck,
    renamer_formula,
    transitive_closure,
    wrap,
    wrapper_soundness_violations,
)
from leftist.core import dele, ins
from leftist.derivations import replay
from leftist.reach import SearchBounds, bounded_reach
from leftist.transform import RelationBounds, check_transformer, format_transformer, parse_transformer, words_upto

AT, R = toy_t()


def test_toy_anchored_relation():
    rel = anchored_relation(AT, RelationBounds(2, 5, 6))
    assert (("a1",), ("c1",)) in rel
    res = bounded_reach(AT.grammar, ("b1", "a1", "g"), ("b2", "c1", "g"), SearchBounds(4, 5))
    assert res.found and len(res.derivation) == 4
    assert (("a1",), ()) not in rel


def test_renaming():
    assert R(("c1", "c1")) == ("a1", "a1")
    assert Renaming.parse("c1=a1,c2=a2").forward == {"c1": "a1", "c2": "a2"}
    with pytest.raises(ClosureError, match="bijection"):
        Renaming.of({"c1": "a1", "c2": "a1"})


def test_renamer_pairs():
    ren = build_renamer(AT.outputs, AT.inputs, R, AT.b2, AT.b1)
    rel = anchored_relation(ren, RelationBounds(2, 6, 8))
    assert (("c1",), ("a1",)) in rel
    assert (("c1", "c1"), ("a1",)) in rel
    assert (("c1",), ("a1", "a1")) in rel
    res = bounded_reach(ren.grammar, ("b2", "c1", "g"), ("b1", "a1", "g"), SearchBounds(4, 5))
    assert len(res.derivation) == 4


def test_renamer_matches_formula():
    ren = build_renamer(AT.outputs, AT.inputs, R, AT.b2, AT.b1)
    M = 6
    rel = anchored_relation(ren, RelationBounds(2, M, 8))
    for v in words_upto(ren.inputs, 2):
        for u in words_upto(ren.outputs, M - 2 - len(v)):
            if (v, u) == ((), ()):
                continue  # the end anchor needs an input letter to insert it
            assert ((v, u) in rel) == renamer_formula(R, v, u), (v, u)
    assert ((), ()) not in rel


def test_wrap_rule_classes():
    w = wrap(AT, "sq1", "sq2")
    tags = dict(w.tags)
    assert {r for r, c in tags.items() if c is RuleClass.MIRROR} == {ins("c1", "c1'"), ins("b2", "b2'")}
    assert tags[dele("c1'", "a1")] is RuleClass.REPLACE
    assert dele("c1", "a1") not in tags
    for r in AT.grammar.rules:
        if r.kind.name == "INSERT":
            assert tags[r] is RuleClass.KEPT
    assert tags[dele("sq2", "sq1")] is RuleClass.B_RULE
    check_transformer(w.at.grammar, w.at.inputs, w.at.temps, w.at.outputs)


def test_wrap_anchored_exit():
    w = wrap(AT, "sq1", "sq2", anchored_exit=True)
    exits = {r for r, c in w.tags if c is RuleClass.B_RULE and r.kind.name == "INSERT"}
    assert exits == {ins("b2'", "sq2")}


def test_wrap_rejects_active_start_anchor():
    bad = make_anchored("g", [ins("g", "c1"), dele("c1", "a1"), ins("b1", "c1"), ins("c1", "b2")], {"a1"}, {"b1", "b2"}, {"c1"}, "b1", "b2")
    with pytest.raises(ClosureError):
        wrap(bad, "sq1", "sq2")


@pytest.mark.parametrize("alpha", [(), ("a1'",), ("b1'", "a1'")])
@pytest.mark.parametrize("toy", ["T", "relay"])
def test_mimic_replays(toy, alpha):
    at, _ = TOYS[toy]()
    w = wrap(at, "sq1", "sq2")
    for u in [(), ("a1",), ("a1", "a1")]:
        for v in [("c1",), ("c1", "c1")]:
            res = bounded_reach(at.grammar, ("b1",) + u + ("g",), ("b2",) + v + ("g",), SearchBounds(8, 6))
            if not res.found:
                continue
            d = mimic(w, res.derivation, alpha)
            end = replay(d)[-1]
            assert end[0] == "sq2" and end[1] == "b2'" and end[2:] == ("b2",) + v + ("g",)


@pytest.mark.parametrize("toy", ["T", "relay"])
def test_wrapper_pairs(toy):
    at, _ = TOYS[toy]()
    assert wrapper_pair_violations(at, RelationBounds(2, 5, 6), alphas=((), ("a1'",))) == []


def test_wrapper_soundness():
    assert wrapper_soundness_violations(AT, (), ("b1", "a1"), 10, 7) == []
    assert wrapper_soundness_violations(AT, ("a1'",), ("b1",), 10, 7) == []


def test_glue_and_invariants():
    parts = closure_parts(AT, R)
    h = parts.glue
    assert h.grammar.rules == parts.fg.at.grammar.rules | parts.fr.at.grammar.rules
    for start in [("sq1", "b1", "a1", "g"), ("sq1", "a1'", "b1", "a1", "g")]:
        assert invariant_violations(h, start, 7, 7) == []


def test_glue_mismatch():
    parts = closure_parts(AT, R)
    with pytest.raises(ClosureError, match="mismatch"):
        glue(parts.fg, parts.fg)


def test_modes():
    h = closure_parts(AT, R).glue
    assert mode_of(h, ("sq1", "a1'", "b1", "a1", "g")) == "AC"
    assert mode_of(h, ("sq1", "b1", "a1", "g")) is None  # no primed prefix and no second square
    assert mode_of(h, ("sq2", "c1'", "c1", "a1'", "b1", "a1", "g")) == "CA"
    assert mode_of(h, ("a1", "g")) is None


def test_extend_hprime():
    parts = closure_parts(AT, R)
    hp = parts.hprime
    assert len(hp.grammar.rules - parts.glue.grammar.rules) == 2 + len(AT.inputs)
    assert dele("a1", "a1.d") in hp.grammar.rules
    check_transformer(hp.grammar, hp.inputs, hp.temps, hp.outputs)
    primed = extend_hprime(parts.glue, primed_entry=True)
    assert dele("a1'", "a1.d") in primed.grammar.rules and dele("a1", "a1.d") not in primed.grammar.rules


def test_finishers_shape():
    t1, t2 = build_finishers({"a1"}, "b1", "sq1", "sq2")
    assert t1.b1 == "sq2.d" and t1.b2 == "o1" and (t2.b1, t2.b2) == ("o1", "o2")
    rel = anchored_relation(t2, RelationBounds(4, 9, 10), inputs=[("sq1.dd", "a1'.dd", "b1.dd", "a1.dd")])
    assert (("sq1.dd", "a1'.dd", "b1.dd", "a1.dd"), ("a1.o",)) in rel


def test_finishers_match_characterisation():
    bad = finisher_violations({"a1"}, "b1", "sq1", "sq2", 3)
    assert bad["T1"] == [] and bad["T2"] == []
    # the stated shapes are wider than what the rule lists compute
    assert bad["T1-extra"] and bad["T2-stated"]


def test_precheck_toys():
    for name in ["T", "relay"]:
        at, _ = TOYS[name]()
        rep = precheck(at, RelationBounds(2, 5, 6))
        assert rep.theorem_hypothesis and rep.glue_hypothesis


def test_precheck_failure_blocks_closure():
    # c2 is never inserted, so outputs cannot grow by c2
    rules = [ins("g", "c1"), ins("c1", "c1"), dele("c1", "a1"), ins("c1", "b2"), dele("b2", "b1")]
    at = make_anchored("g", rules, {"a1", "a2"}, {"b1", "b2"}, {"c1", "c2"}, "b1", "b2")
    r = Renaming.of({"c1": "a1", "c2": "a2"})
    rep = precheck(at, RelationBounds(2, 5, 6))
    assert not rep.theorem_hypothesis and rep.failures[0][0] == "output"
    with pytest.raises(ClosureError, match="precondition"):
        transitive_closure(at, r, precheck_bounds=RelationBounds(2, 5, 6))
    transitive_closure(at, r, skip_precheck=True)


def test_closure_metadata_and_roundtrip():
    gp = transitive_closure(AT, R, precheck_bounds=RelationBounds(2, 5, 6), anchored_exit=True, primed_entry=True)
    meta = dict(gp.meta)
    assert meta["reading"] == Reading.PREFIXED.value and meta["precheck"] == "L=2 M=5 D=6"
    assert gp.inputs == AT.inputs and gp.outputs == AT.outputs and (gp.b1, gp.b2) == (AT.b1, AT.b2)
    back = parse_transformer(format_transformer(gp.base, (gp.b1, gp.b2)))
    assert back.grammar == gp.grammar


@pytest.mark.parametrize("toy", ["T", "relay"])
def test_closure_matches_iteration(toy):
    at, r = TOYS[toy]()
    gp = transitive_closure(at, r, skip_precheck=True, anchored_exit=True, primed_entry=True)
    cmp = compare_closure(at, r, gp)
    assert cmp.equal, (cmp.extra, cmp.missing)
    assert ("c1",) in cmp.closure[("a1",)]
