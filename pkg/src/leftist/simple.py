"""Insertion grammars, simple transformers and their witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import Grammar, Kind, Step, Symbol, Word, dele, ins
from .derivations import Derivation, replay
from .reach import SearchBounds, bounded_reach
from .transform import (
    BoundedRelation,
    RelationBounds,
    Transformer,
    TransformerError,
    bounded_relation,
    check_transformer,
    outputs_from,
    words_upto,
)


@dataclass(frozen=True)
class InsertionGrammar:
    grammar: Grammar

    def __post_init__(self):
        if any(r.kind is Kind.DELETE for r in self.grammar.rules):
            raise ValueError("insertion grammar with a deletion rule")


def strip_to_insertion(g: Grammar) -> InsertionGrammar:
    return InsertionGrammar(g.with_rules(r for r in g.rules if r.kind is Kind.INSERT))


def insertion_relation(ig: InsertionGrammar, bounds: RelationBounds, alphabet=None) -> BoundedRelation:
    """Bounded ``I_G`` over inputs drawn from ``alphabet`` (default: the whole alphabet).

    Insertions only add letters, so every pair has its input embedded in its output.
    """
    g = ig.grammar
    sigma = frozenset(g.alphabet if alphabet is None else alphabet)
    pairs = set()
    for u in words_upto(sigma, bounds.max_input):
        for v in outputs_from(g, u + (g.final,), g.alphabet, (), bounds.max_word, bounds.max_depth):
            pairs.add((u, v))
    return BoundedRelation(pairs, bounds)


@dataclass(frozen=True)
class SimpleTransformer:
    base: Transformer

    def __post_init__(self):
        t = self.base
        if t.temps:
            raise TransformerError("simple transformer with temporaries")
        for r in t.rules:
            if r.kind is Kind.DELETE and r.patient in t.outputs:
                raise TransformerError(f"simple transformer erases an output: {r}")

    @property
    def grammar(self) -> Grammar:
        return self.base.grammar

    @property
    def inputs(self):
        return self.base.inputs

    @property
    def outputs(self):
        return self.base.outputs

    @property
    def final(self):
        return self.base.final


def as_simple(t: Transformer) -> SimpleTransformer:
    return SimpleTransformer(t)


@dataclass(frozen=True)
class NablaWitness:
    h: tuple[int, ...]  # h[i-1] = image of i, 1-based into v


def nabla(st: SimpleTransformer, u: Sequence[Symbol], v: Sequence[Symbol]) -> NablaWitness | None:
    """The pointwise-least non-decreasing witness map, or None."""
    u, v = tuple(u), tuple(v)
    if any(a not in st.inputs for a in u) or any(c not in st.outputs for c in v):
        raise ValueError("alphabet violation: input must be over A and output over C")
    rules = st.grammar.rules
    chain = v + (st.final,)
    if any(ins(chain[j + 1], chain[j]) not in rules for j in range(len(v))):
        return None
    # Choosing the smallest admissible image at each i is optimal: any witness
    # dominates it pointwise, so the greedy choice never blocks a later letter.
    h = []
    j = 0
    for a in u:
        while j < len(v) and dele(v[j], a) not in rules:
            j += 1
        if j == len(v):
            return None
        h.append(j + 1)
    return NablaWitness(tuple(h))


def witness_derivation(st: SimpleTransformer, u: Sequence[Symbol], v: Sequence[Symbol], w: NablaWitness) -> Derivation:
    """A derivation ``u.g =>^{|u|+|v|} v.g`` built from a witness.

    Output letters are inserted from the right; right after ``c_j`` appears it
    deletes the (suffix of) input letters mapped to ``j``.  Deletions have to
    be interleaved this way: an input letter can only be erased by its
    immediate right neighbour.
    """
    u, v = tuple(u), tuple(v)
    n = len(u)
    steps = []
    remaining = n  # input letters still present; they occupy positions 1..remaining
    actor = st.final
    for j in range(len(v), 0, -1):
        steps.append(Step(ins(actor, v[j - 1]), remaining + 1))
        actor = v[j - 1]
        while remaining and w.h[remaining - 1] == j:
            steps.append(Step(dele(actor, u[remaining - 1]), remaining + 1))
            remaining -= 1
    assert remaining == 0
    return Derivation(st.grammar, u + (st.final,), tuple(steps))


def check_simple_length(st: SimpleTransformer, d: Derivation) -> bool:
    words = replay(d)
    first, last = words[0], words[-1]
    fin = st.final
    if first[-1] != fin or last[-1] != fin:
        raise ValueError("endpoint shape violation: words must end with the final symbol")
    u, v = first[:-1], last[:-1]
    if any(a not in st.inputs for a in u) or any(c not in st.outputs for c in v):
        raise ValueError("endpoint shape violation: expected A*.g to C*.g")
    return len(d.steps) == len(u) + len(v)


def _subwords(v: Word) -> set[Word]:
    out = {()}
    for c in v:
        out |= {w + (c,) for w in out}
    return out


@dataclass
class DecompositionReport:
    unfactored: set  # pairs of R with no u nabla w, (w, v) in I
    unrealized: set  # factored pairs missing from R
    nabla_not_in_r: set  # u nabla v but (u, v) missing from R
    not_below_nabla: set  # pairs of R with no w below v and u nabla w

    @property
    def ok(self) -> bool:
        return not (self.unfactored or self.unrealized or self.nabla_not_in_r or self.not_below_nabla)


def decomposition_report(st: SimpleTransformer, bounds: RelationBounds) -> DecompositionReport:
    """Compare bounded R with the product of nabla and the insertion relation.

    A factored pair (u, w, v) is realized by the witness derivation followed by
    the insertions, so it is expected in R when |u| + |v| <= D and both parts
    fit the width: |u| + |w| + 1 and |v| + 1 are at most M.
    """
    L, M, D = bounds.max_input, bounds.max_word, bounds.max_depth
    g = st.grammar
    ig = strip_to_insertion(g).grammar
    r = bounded_relation(st.base, bounds)

    def inserts(w: Word, v: Word) -> bool:
        return bounded_reach(ig, w + (g.final,), v + (g.final,), SearchBounds(len(v) - len(w), M)).found

    rep = DecompositionReport(set(), set(), set(), set())
    for u, v in r.pairs:
        below = [w for w in _subwords(v) if nabla(st, u, w) is not None]
        if not below:
            rep.not_below_nabla.add((u, v))
        if not any(inserts(w, v) for w in below):
            rep.unfactored.add((u, v))

    outs = st.outputs
    for u in words_upto(st.inputs, L):
        for w in words_upto(outs, M - len(u) - 1):
            if nabla(st, u, w) is None:
                continue
            if len(u) + len(w) <= D and (u, w) not in r.pairs:
                rep.nabla_not_in_r.add((u, w))
            for v in outputs_from(ig, w + (g.final,), outs, (), M, D - len(u) - len(w)):
                if (u, v) not in r.pairs:
                    rep.unrealized.add((u, v))
    return rep


def check_decomposition(st: SimpleTransformer, bounds: RelationBounds) -> bool:
    return decomposition_report(st, bounds).ok


def union(st1: SimpleTransformer, st2: SimpleTransformer) -> SimpleTransformer:
    if st1.final != st2.final:
        raise TransformerError("different final symbols")
    if st1.inputs != st2.inputs:
        raise TransformerError("input mismatch: union needs the same input alphabet")
    if st1.outputs & st2.outputs:
        raise TransformerError(f"output overlap: {sorted(st1.outputs & st2.outputs)}")
    g = Grammar(st1.grammar.alphabet | st2.grammar.alphabet, st1.final, st1.grammar.rules | st2.grammar.rules)
    return SimpleTransformer(check_transformer(g, st1.inputs, (), st1.outputs | st2.outputs))


def union_projection_violations(st1: SimpleTransformer, st2: SimpleTransformer, bounds: RelationBounds) -> list:
    """Pairs of the union with no sub-output realized by either summand.

    Also reports pairs whose nabla-factorizations mix outputs of both summands.
    """
    st = union(st1, st2)
    r = bounded_relation(st.base, bounds)
    r1 = bounded_relation(st1.base, bounds)
    r2 = bounded_relation(st2.base, bounds)
    bad = []
    for u, v in sorted(r.pairs):
        subs = _subwords(v)
        if not any((u, w) in r1.pairs or (u, w) in r2.pairs for w in subs):
            bad.append(("projection", u, v))
        for w in subs:
            if nabla(st, u, w) is not None and any(c in st1.outputs for c in w) and any(c in st2.outputs for c in w):
                bad.append(("mixed", u, w))
    return bad

