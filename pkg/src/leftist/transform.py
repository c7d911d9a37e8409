"""Leftist transformers: typed grammars, their bounded relations, and composition."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .core import (
    Grammar,
    GrammarError,
    Kind,
    Symbol,
    Word,
    format_grammar,
    parse_grammar,
    stutter_canonical,
)
from .reach import SearchBounds, bounded_reach, oracle_enumerate


class TransformerError(ValueError):
    pass


@dataclass(frozen=True)
class Transformer:
    """A grammar whose alphabet splits into inputs, temporaries and outputs.

    Inputs are inactive and never inserted.
    """

    grammar: Grammar
    inputs: frozenset[Symbol]
    temps: frozenset[Symbol]
    outputs: frozenset[Symbol]
    meta: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    @property
    def final(self) -> Symbol:
        return self.grammar.final

    @property
    def rules(self):
        return self.grammar.rules

    @property
    def working(self) -> frozenset[Symbol]:
        return self.temps | self.outputs


def check_transformer(g: Grammar, inputs: Iterable[Symbol], temps: Iterable[Symbol], outputs: Iterable[Symbol]) -> Transformer:
    A, B, C = frozenset(inputs), frozenset(temps), frozenset(outputs)
    for x, y, name in ((A, B, "inputs/temps"), (A, C, "inputs/outputs"), (B, C, "temps/outputs")):
        if x & y:
            raise TransformerError(f"overlap between {name}: {sorted(x & y)}")
    missing = g.alphabet - (A | B | C)
    if missing:
        raise TransformerError(f"uncovered symbols: {sorted(missing)}")
    extra = (A | B | C) - g.alphabet
    if extra:
        raise TransformerError(f"symbols outside the alphabet: {sorted(extra)}")
    for r in g.rules:
        if r.actor in A:
            raise TransformerError(f"input symbol active: {r}")
        if r.kind is Kind.INSERT and r.patient in A:
            raise TransformerError(f"input symbol inserted: {r}")
    return Transformer(g, A, B, C)


def make_transformer(final: Symbol, rules, inputs, temps, outputs) -> Transformer:
    """Build and type-check in one go; the alphabet is the union of the three sets."""
    rules = frozenset(rules)
    sigma = frozenset(inputs) | frozenset(temps) | frozenset(outputs)
    return check_transformer(Grammar(sigma, final, rules), inputs, temps, outputs)


# -- bounded relations ----------------------------------------------------------


@dataclass(frozen=True)
class RelationBounds:
    max_input: int  # L
    max_word: int  # M, counted with the final symbol
    max_depth: int  # D


@dataclass
class BoundedRelation:
    pairs: set[tuple[Word, Word]]
    bounds: RelationBounds

    def __contains__(self, pair) -> bool:
        return (tuple(pair[0]), tuple(pair[1])) in self.pairs

    def __len__(self) -> int:
        return len(self.pairs)

    def image(self, u: Word) -> set[Word]:
        return {v for (x, v) in self.pairs if x == u}


def words_upto(alphabet: Iterable[Symbol], n: int) -> Iterator[Word]:
    syms = sorted(alphabet)
    for k in range(n + 1):
        yield from itertools.product(syms, repeat=k)


def outputs_from(g: Grammar, start: Word, outputs: frozenset[Symbol], head: Word, width: int, depth: int) -> set[Word]:
    """All ``v`` over ``outputs`` with ``start =>* head.v.g`` inside the bounds (oracle search)."""
    reach = oracle_enumerate(g, start, SearchBounds(depth, width))
    out = set()
    k = len(head)
    for w in reach:
        if w[-1] != g.final or w[:k] != head:
            continue
        v = w[k:-1]
        if all(s in outputs for s in v):
            out.add(v)
    return out


def bounded_relation(t: Transformer, bounds: RelationBounds, inputs: Iterable[Word] | None = None) -> BoundedRelation:
    """Pairs ``(u, v)`` with ``u.g =>* v.g``, ``|u| <= L``, at most D steps, words of length <= M."""
    pairs = set()
    us = words_upto(t.inputs, bounds.max_input) if inputs is None else inputs
    for u in us:
        u = tuple(u)
        for v in outputs_from(t.grammar, u + (t.final,), t.outputs, (), bounds.max_word, bounds.max_depth):
            pairs.add((u, v))
    return BoundedRelation(pairs, bounds)


def derives(g: Grammar, source: Word, target: Word, depth: int, width: int) -> bool:
    return bounded_reach(g, source, target, SearchBounds(depth, width)).found


def product(r1: BoundedRelation, r2_image) -> set[tuple[Word, Word]]:
    """Relational product, ``r2_image(w)`` giving the set of ``v`` with ``w R2 v``."""
    out = set()
    cache: dict[Word, set[Word]] = {}
    for u, w in r1.pairs:
        if w not in cache:
            cache[w] = r2_image(w)
        for v in cache[w]:
            out.add((u, v))
    return out


# -- structural checks ------------------------------------------------------------


def prefix_invariant_violations(t: Transformer, u: Word, depth: int, width: int) -> list[Word]:
    """Words reachable from ``u.g`` that are not of the form A*.(B+C)*.g."""
    bad = []
    for w in oracle_enumerate(t.grammar, tuple(u) + (t.final,), SearchBounds(depth, width)):
        body = w[:-1]
        k = 0
        while k < len(body) and body[k] in t.inputs:
            k += 1
        if w[-1] != t.final or any(s not in t.working for s in body[k:]):
            bad.append(w)
    return bad


def check_prefix_invariant(t: Transformer, samples: Iterable[Word], depth: int = 6, width: int = 8) -> bool:
    return all(not prefix_invariant_violations(t, u, depth, width) for u in samples)


def closure_property_violations(t: Transformer, bounds: RelationBounds) -> list[tuple[str, Word, Word]]:
    """Check the bound-safe generators of the closure law on the bounded relation.

    For each pair (u, v): dropping an input letter keeps the pair (same
    bounds); doubling an input letter keeps it with one more step and one
    more letter of width; doubling an output letter keeps it with the same
    slack.  Stutter-canonical forms of pairs are pairs too.
    """
    rel = bounded_relation(t, bounds)
    D, M = bounds.max_depth, bounds.max_word
    g, fin = t.grammar, t.final
    bad = []
    for u, v in sorted(rel.pairs):
        for i in range(len(u)):
            shorter = u[:i] + u[i + 1 :]
            if not derives(g, shorter + (fin,), v + (fin,), D, M):
                bad.append(("drop-input", u, v))
            longer = u[: i + 1] + u[i:]
            if not derives(g, longer + (fin,), v + (fin,), D + 1, M + 1):
                bad.append(("stutter-input", u, v))
        for i in range(len(v)):
            longer = v[: i + 1] + v[i:]
            if not derives(g, u + (fin,), longer + (fin,), D + 1, M + 1):
                bad.append(("stutter-output", u, v))
        cu, cv = stutter_canonical(u), stutter_canonical(v)
        if not derives(g, cu + (fin,), cv + (fin,), D + len(u) + len(v), M):
            bad.append(("canonical", u, v))
    return bad


def check_closure_property(t: Transformer, bounds: RelationBounds) -> bool:
    return not closure_property_violations(t, bounds)


# -- composition -------------------------------------------------------------------


@dataclass(frozen=True)
class Composite:
    transformer: Transformer
    first: dict[Symbol, Symbol]  # temporaries of the first transformer renamed apart
    second: dict[Symbol, Symbol]  # ... and of the second


def fresh_name(base: Symbol, taken: set[Symbol]) -> Symbol:
    for k in itertools.count(1):
        cand = f"{base}.{k}"
        if cand not in taken:
            return cand
    raise AssertionError


def rename_grammar(g: Grammar, mapping: dict[Symbol, Symbol]) -> Grammar:
    if not mapping:
        return g
    f = lambda s: mapping.get(s, s)  # noqa: E731
    rules = frozenset(type(r)(r.kind, f(r.actor), f(r.patient)) for r in g.rules)
    return Grammar(frozenset(f(s) for s in g.alphabet), f(g.final), rules)


def rename_transformer(t: Transformer, mapping: dict[Symbol, Symbol]) -> Transformer:
    f = lambda xs: frozenset(mapping.get(s, s) for s in xs)  # noqa: E731
    return Transformer(rename_grammar(t.grammar, mapping), f(t.inputs), f(t.temps), f(t.outputs), t.meta)


def compose_with_renaming(t1: Transformer, t2: Transformer, shared: frozenset[Symbol] = frozenset()) -> Composite:
    """Compose, renaming colliding temporaries apart except those in ``shared``."""
    if t1.final != t2.final:
        raise TransformerError("transformers use different final symbols")
    if t1.outputs != t2.inputs:
        raise TransformerError("not chainable: outputs of the first differ from inputs of the second")
    if t1.inputs & t2.outputs:
        raise TransformerError("not chainable: inputs of the first meet outputs of the second")
    taken = set(t1.grammar.symbols | t2.grammar.symbols)
    m2 = {}
    for b in sorted((t2.temps & (t1.inputs | t1.temps)) - shared):
        m2[b] = fresh_name(b, taken)
        taken.add(m2[b])
    t2 = rename_transformer(t2, m2)
    m1 = {}
    for b in sorted((t1.temps & (t2.temps | t2.outputs)) - shared):
        m1[b] = fresh_name(b, taken)
        taken.add(m1[b])
    t1 = rename_transformer(t1, m1)
    g = Grammar(t1.grammar.alphabet | t2.grammar.alphabet, t1.final, t1.rules | t2.rules)
    composed = check_transformer(g, t1.inputs, t1.temps | t1.outputs | t2.temps, t2.outputs)
    return Composite(composed, m1, m2)


def compose(t1: Transformer, t2: Transformer) -> Transformer:
    return compose_with_renaming(t1, t2).transformer


def composition_mismatches(t1: Transformer, t2: Transformer, bounds: RelationBounds) -> dict[str, set]:
    """Compare the bounded relation of ``t1.t2`` with the product of the two relations.

    Both sides are enumerated at ``bounds``.  Pairs of the composite are
    checked against the product allowing the two halves the composite's full
    depth and a width of L + D + 1 (a greedy reordering may widen words);
    pairs of the product are checked against the composite allowing depth 2D
    (the witness concatenates two derivations).
    """
    comp = compose(t1, t2)
    L, M, D = bounds.max_input, bounds.max_word, bounds.max_depth
    r_comp = bounded_relation(comp, bounds)
    r1 = bounded_relation(t1, bounds)
    image2 = lambda w: outputs_from(t2.grammar, w + (t2.final,), t2.outputs, (), M, D)  # noqa: E731
    prod = product(r1, image2)

    wide = L + D + 1
    images2: dict[Word, set[Word]] = {}
    missing_from_product = set()
    for u in sorted({u for u, _ in r_comp.pairs}):
        reach = set()
        for w in outputs_from(t1.grammar, u + (t1.final,), t1.outputs, (), wide, D):
            if w not in images2:
                images2[w] = outputs_from(t2.grammar, w + (t2.final,), t2.outputs, (), wide, D)
            reach |= images2[w]
        missing_from_product |= {(u, v) for (x, v) in r_comp.pairs if x == u and v not in reach}
    slack: dict[Word, set[Word]] = {}
    missing_from_composite = set()
    for u, v in prod:
        if (u, v) in r_comp.pairs:
            continue
        if u not in slack:
            slack[u] = outputs_from(comp.grammar, u + (comp.final,), comp.outputs, (), M, 2 * D)
        if v not in slack[u]:
            missing_from_composite.add((u, v))
    return {"composite-not-in-product": missing_from_product, "product-not-in-composite": missing_from_composite}


# -- file format ---------------------------------------------------------------------


def parse_transformer(text: str) -> Transformer:
    extra = {"inputs": [], "temps": [], "outputs": [], "anchors": [], "meta": []}
    g = parse_grammar(text, extra)
    A = frozenset(s for _, args in extra["inputs"] for s in args)
    B = frozenset(s for _, args in extra["temps"] for s in args)
    C = frozenset(s for _, args in extra["outputs"] for s in args)
    g = Grammar(g.alphabet | A | B | C, g.final, g.rules)
    t = check_transformer(g, A, B, C)
    meta = tuple((args[0], " ".join(args[1:])) for _, args in extra["meta"] if args)
    t = Transformer(t.grammar, t.inputs, t.temps, t.outputs, meta)
    if extra["anchors"]:
        (lineno, args), *_ = extra["anchors"]
        if len(args) != 2:
            raise GrammarError("expected 'anchors <b1> <b2>'", lineno, 1)
        from .closure import AnchoredTransformer

        return AnchoredTransformer(t, args[0], args[1])  # type: ignore[return-value]
    return t


def format_transformer(t: Transformer, anchors: Sequence[Symbol] = ()) -> str:
    header = [
        "inputs " + " ".join(sorted(t.inputs)),
        "temps " + " ".join(sorted(t.temps)),
        "outputs " + " ".join(sorted(t.outputs)),
    ]
    header = [h.rstrip() for h in header]
    if anchors:
        header.append("anchors " + " ".join(anchors))
    header += [f"meta {k} {v}".rstrip() for k, v in t.meta]
    return format_grammar(t.grammar, header)

