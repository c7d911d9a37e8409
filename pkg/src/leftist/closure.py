"""Anchored transformers and the construction of their transitive closure.

The pipeline: a renamer turns outputs back into inputs, both the transformer
and the renamer are wrapped so that each pass can be told apart, the two
wrappings are glued into one grammar, the glue gets an entry point, and two
finishing transformers check and strip the bookkeeping letters.

Copies of symbols are made by suffixing names: ``'`` (primed), ``.d``
(dotted) and ``.dd`` (double-dotted).  T2 writes a further ``.o`` copy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import Grammar, Kind, Rule, Step, Symbol, Word, dele, ins
from .derivations import Derivation, replay
from .reach import SearchBounds, greedy_outputs, oracle_enumerate
from .transform import (
    BoundedRelation,
    RelationBounds,
    Transformer,
    TransformerError,
    check_transformer,
    compose_with_renaming,
    fresh_name,
    rename_transformer,
    words_upto,
)


class ClosureError(ValueError):
    pass


def prime(s: Symbol) -> Symbol:
    return s + "'"


def dot(s: Symbol) -> Symbol:
    return s + ".d"


def ddot(s: Symbol) -> Symbol:
    return s + ".dd"


def out_copy(s: Symbol) -> Symbol:
    return s + ".o"


def _require_fresh(new: Iterable[Symbol], taken: Iterable[Symbol], what: str) -> None:
    clash = set(new) & set(taken)
    if clash:
        raise ClosureError(f"freshness violation for {what}: {sorted(clash)}")


# -- anchored transformers ----------------------------------------------------------------


@dataclass(frozen=True)
class AnchoredTransformer:
    base: Transformer
    b1: Symbol  # start anchor
    b2: Symbol  # end anchor

    def __post_init__(self):
        if self.b1 == self.b2:
            raise TransformerError("anchors must differ")
        for b in (self.b1, self.b2):
            if b not in self.base.temps:
                raise TransformerError(f"anchor {b!r} is not a temporary")

    @property
    def grammar(self) -> Grammar:
        return self.base.grammar

    @property
    def inputs(self):
        return self.base.inputs

    @property
    def temps(self):
        return self.base.temps

    @property
    def outputs(self):
        return self.base.outputs

    @property
    def final(self):
        return self.base.final

    @property
    def meta(self):
        return self.base.meta

    def with_meta(self, **kw) -> "AnchoredTransformer":
        meta = tuple(self.base.meta) + tuple((k, str(v)) for k, v in kw.items())
        b = self.base
        return AnchoredTransformer(Transformer(b.grammar, b.inputs, b.temps, b.outputs, meta), self.b1, self.b2)


def make_anchored(final, rules, inputs, temps, outputs, b1, b2) -> AnchoredTransformer:
    rules = frozenset(rules)
    sigma = frozenset(inputs) | frozenset(temps) | frozenset(outputs)
    return AnchoredTransformer(check_transformer(Grammar(sigma, final, rules), inputs, temps, outputs), b1, b2)


def anchored_outputs(at: AnchoredTransformer, u: Word, width: int, depth: int) -> set[Word]:
    """All ``v`` with ``b1.u.g =>* b2.v.g`` inside the bounds."""
    g = at.grammar
    start = (at.b1,) + tuple(u) + (g.final,)
    out = set()
    for w in oracle_enumerate(g, start, SearchBounds(depth, width)):
        if w[0] == at.b2 and w[-1] == g.final and all(s in at.outputs for s in w[1:-1]):
            out.add(w[1:-1])
    return out


def anchored_relation(at: AnchoredTransformer, bounds: RelationBounds, inputs: Iterable[Word] | None = None) -> BoundedRelation:
    pairs = set()
    us = words_upto(at.inputs, bounds.max_input) if inputs is None else inputs
    for u in us:
        u = tuple(u)
        for v in anchored_outputs(at, u, bounds.max_word, bounds.max_depth):
            pairs.add((u, v))
    return BoundedRelation(pairs, bounds)


def compose_anchored(t1: AnchoredTransformer, t2: AnchoredTransformer) -> AnchoredTransformer:
    """Sequential composition where the end anchor of ``t1`` is the start anchor of ``t2``."""
    if t1.b2 != t2.b1:
        raise TransformerError("anchors do not chain: end anchor of the first must start the second")
    comp = compose_with_renaming(t1.base, t2.base, shared=frozenset({t1.b2}))
    b2 = comp.second.get(t2.b2, t2.b2)
    b1 = comp.first.get(t1.b1, t1.b1)
    return AnchoredTransformer(comp.transformer, b1, b2)


# -- renaming --------------------------------------------------------------------------------


@dataclass(frozen=True)
class Renaming:
    """A bijection from outputs to inputs, lifted letter by letter to words."""

    mapping: tuple[tuple[Symbol, Symbol], ...]

    def __post_init__(self):
        src = [c for c, _ in self.mapping]
        dst = [a for _, a in self.mapping]
        if len(set(src)) != len(src) or len(set(dst)) != len(dst):
            raise ClosureError("renaming is not a bijection")

    @classmethod
    def of(cls, m: Mapping[Symbol, Symbol]) -> "Renaming":
        return cls(tuple(sorted(m.items())))

    @classmethod
    def parse(cls, text: str) -> "Renaming":
        pairs = {}
        for part in text.split(","):
            part = part.strip()
            if not part:
                continue
            c, eq, a = part.partition("=")
            if not eq or not c.strip() or not a.strip():
                raise ClosureError(f"bad renaming entry {part!r}; expected c=a")
            pairs[c.strip()] = a.strip()
        return cls.of(pairs)

    @property
    def forward(self) -> dict[Symbol, Symbol]:
        return dict(self.mapping)

    @property
    def backward(self) -> dict[Symbol, Symbol]:
        return {a: c for c, a in self.mapping}

    def __call__(self, v: Sequence[Symbol]) -> Word:
        f = self.forward
        return tuple(f[c] for c in v)

    def inverse(self, u: Sequence[Symbol]) -> Word:
        b = self.backward
        return tuple(b[a] for a in u)

    def check(self, C: Iterable[Symbol], A: Iterable[Symbol]) -> None:
        C, A = set(C), set(A)
        if len(C) != len(A):
            raise ClosureError(f"size mismatch: {len(C)} outputs vs {len(A)} inputs")
        f = self.forward
        if set(f) != C or set(f.values()) != A:
            raise ClosureError("renaming must map the outputs onto the inputs")


def build_renamer(C: Iterable[Symbol], A: Iterable[Symbol], r: Renaming, start: Symbol, end: Symbol, final: Symbol = "g") -> AnchoredTransformer:
    """The anchored transformer C |- A with start anchor ``start`` and end anchor ``end``.

    Its rules: ``g`` and every ``a`` insert any ``a``; every ``a`` may insert
    the end anchor; ``a_i`` erases ``c_i``; the end anchor erases the start.
    """
    C, A = frozenset(C), frozenset(A)
    r.check(C, A)
    _require_fresh({start, end}, C | A | {final}, "renamer anchors")
    rules = set()
    for a in A:
        rules.add(ins(final, a))
        rules.add(ins(a, end))
        for a2 in A:
            rules.add(ins(a, a2))
    for c, a in r.mapping:
        rules.add(dele(a, c))
    rules.add(dele(end, start))
    return make_anchored(final, rules, C, {start, end}, A, start, end)


def renamer_formula(r: Renaming, v: Word, u: Word) -> bool:
    """Does ``v`` relate to ``u`` under stuttering, then subword, then renaming?"""
    from .core import is_subword, stutter_canonical

    return is_subword(stutter_canonical(r(v)), u)


# -- wrapping -----------------------------------------------------------------------------------


class RuleClass(str, enum.Enum):
    KEPT = "kept"
    REPLACE = "replace"
    MIRROR = "mirror"
    CLEAN = "clean"
    B_RULE = "b-rule"


@dataclass(frozen=True)
class Wrapped:
    at: AnchoredTransformer  # the wrapper itself, anchored by the two squares
    source: AnchoredTransformer
    tags: tuple[tuple[Rule, RuleClass], ...] = field(compare=False)

    def tag_of(self, r: Rule) -> RuleClass:
        return dict(self.tags)[r]

    @property
    def D(self) -> frozenset[Symbol]:
        return self.source.temps | self.source.outputs


def wrap(at: AnchoredTransformer, sq1: Symbol, sq2: Symbol, anchored_exit: bool = False) -> Wrapped:
    """Wrap ``at`` so that a pass through it is entered at ``sq1`` and left at ``sq2``.

    Inputs become A, A', b1, b1'; outputs C, b2, C' and the primed temporaries
    other than b1'.  Needs b1 inactive and never inserted, since it turns into
    an input.

    With ``anchored_exit`` only the primed end anchor may insert ``sq2``, so a
    pass can only be left once the end anchor has been produced.
    """
    g = at.grammar
    A, B, C, b1, b2 = at.inputs, at.temps, at.outputs, at.b1, at.b2
    fin = g.final
    if not g.is_inactive(b1) or any(r.kind is Kind.INSERT and r.patient == b1 for r in g.rules):
        raise ClosureError("start anchor must be inactive and never inserted to be wrapped")
    D = B | C
    primes = {x: prime(x) for x in A | D}
    _require_fresh(set(primes.values()) | {sq1, sq2}, g.symbols, "wrapper copies")
    if sq1 == sq2:
        raise ClosureError("squares must differ")
    Dp = frozenset(primes[d] for d in D)
    b1p = primes[b1]
    Ap = frozenset(primes[a] for a in A)
    tags: dict[Rule, RuleClass] = {}
    erasable = A | {b1}
    for r in g.rules:
        if r.kind is Kind.DELETE and r.patient in erasable:
            tags[dele(primes[r.actor], r.patient)] = RuleClass.REPLACE
        else:
            tags[r] = RuleClass.KEPT
    for d in D - {b1}:
        tags[ins(d, primes[d])] = RuleClass.MIRROR
    for dp in Dp - {b1p}:
        for ep in Dp - {b1p}:
            tags[dele(dp, ep)] = RuleClass.CLEAN
    for ap in Ap | {b1p}:
        tags[dele(sq2, ap)] = RuleClass.CLEAN
    tags[dele(sq2, sq1)] = RuleClass.B_RULE
    for dp in [primes[b2]] if anchored_exit else Dp - {b1p}:
        tags[ins(dp, sq2)] = RuleClass.B_RULE
    inputs = A | Ap | {b1, b1p}
    temps = {sq1, sq2} | (B - {b1, b2})
    outputs = C | {b2} | (Dp - {b1p})
    w = make_anchored(fin, tags, inputs, temps, outputs, sq1, sq2)
    return Wrapped(w, at, tuple(sorted(tags.items(), key=lambda kv: kv[0])))


def mimic(wrapped: Wrapped, d: Derivation, alpha: Sequence[Symbol]) -> Derivation:
    """Turn a derivation ``u.g =>+ v.g`` of the source into one of the wrapper.

    The result runs from ``sq1.alpha.u.g`` to ``sq2.beta.v.g`` where ``beta``
    is the primed first letter of ``v``.  Steps that erase an input or the
    start anchor are replayed through a primed copy of the deleter, which
    first clears the primed letters accumulated so far.
    """
    src = wrapped.source
    sq1, sq2 = wrapped.at.b1, wrapped.at.b2
    erasable = src.inputs | {src.b1}
    words = replay(d)
    u = words[0][:-1]
    if any(x not in erasable for x in u):
        raise ClosureError("derivation must start from inputs and the start anchor")
    alpha = tuple(alpha)
    steps: list[Step] = []
    n1 = len(u)  # letters of the inert input part still present
    gamma = 0  # primed letters between the input part and the rest
    head = 1 + len(alpha)  # letters before the input part
    for k, s in enumerate(d.steps):
        r = s.rule
        offset = head + gamma
        if r.kind is Kind.DELETE and r.patient in erasable:
            if s.position != n1 + 1:
                raise ClosureError("unexpected deletion of an input letter")
            p = s.position + offset  # the deleter in the wrapped word
            dp = prime(r.actor)
            steps.append(Step(ins(r.actor, dp), p))
            q = p  # dp now sits at q, the gamma letters just left of it
            for _ in range(gamma):
                left = _letter_at(wrapped, steps, alpha, u, q - 1, d)
                steps.append(Step(dele(dp, left), q))
                q -= 1
            steps.append(Step(dele(dp, r.patient), q))
            n1 -= 1
            gamma = 1
        else:
            steps.append(Step(r, s.position + offset))
    if n1:
        raise ClosureError("inputs left over at the end of the derivation")
    w = _replay_steps(wrapped, alpha, u, steps)
    v = words[-1][:-1]
    if not v:
        raise ClosureError("the output must be non-empty")
    p = head + gamma + 1  # first letter of v
    beta = prime(v[0])
    steps.append(Step(ins(v[0], beta), p))
    q = p
    for _ in range(gamma):
        w = _replay_steps(wrapped, alpha, u, steps)
        steps.append(Step(dele(beta, w[q - 2]), q))
        q -= 1
    steps.append(Step(ins(beta, sq2), q))
    for _ in range(len(alpha)):
        w = _replay_steps(wrapped, alpha, u, steps)
        steps.append(Step(dele(sq2, w[q - 2]), q))
        q -= 1
    steps.append(Step(dele(sq2, sq1), 2))
    return Derivation(wrapped.at.grammar, (sq1,) + alpha + u + (src.final,), tuple(steps))


def _replay_steps(wrapped: Wrapped, alpha, u, steps) -> Word:
    d = Derivation(wrapped.at.grammar, (wrapped.at.b1,) + tuple(alpha) + tuple(u) + (wrapped.source.final,), tuple(steps))
    return replay(d)[-1]


def _letter_at(wrapped, steps, alpha, u, pos, d) -> Symbol:
    return _replay_steps(wrapped, alpha, u, steps)[pos - 1]


# -- glue, entry point and finishers ------------------------------------------------------------


@dataclass(frozen=True)
class Glue:
    grammar: Grammar
    fg: Wrapped
    fr: Wrapped
    renamer: AnchoredTransformer
    sq1: Symbol
    sq2: Symbol


def glue(fg: Wrapped, fr: Wrapped) -> Glue:
    """The union of the wrapped transformer and the wrapped renamer (not a transformer)."""
    if fg.at.final != fr.at.final:
        raise ClosureError("symbol-universe mismatch: different final symbols")
    if (fg.at.b1, fg.at.b2) != (fr.at.b2, fr.at.b1):
        raise ClosureError("symbol-universe mismatch: the renamer must be wrapped with the squares swapped")
    extra = fr.at.grammar.alphabet - fg.at.grammar.alphabet
    if extra:
        raise ClosureError(f"symbol-universe mismatch: renamer wrapper adds {sorted(extra)}")
    g = Grammar(fg.at.grammar.alphabet, fg.at.final, fg.at.grammar.rules | fr.at.grammar.rules)
    return Glue(g, fg, fr, fr.source, fg.at.b1, fg.at.b2)


def extend_hprime(h: Glue, primed_entry: bool = False) -> AnchoredTransformer:
    """Give the glue dotted inputs and dotted anchors.

    Adds: the dotted end anchor erases the dotted start anchor, the first
    square inserts the dotted end anchor, and each input letter erases its
    dotted copy.

    With ``primed_entry`` the dotted copy is erased by the primed input letter
    instead.  The prime stays on the left until the renamer's end anchor
    clears it, so the first pass of the transformer cannot run before its
    start anchor is in place.
    """
    src = h.fg.source
    A = src.inputs
    g = h.grammar
    s1d, s2d = dot(h.sq1), dot(h.sq2)
    Ad = {a: dot(a) for a in A}
    _require_fresh(set(Ad.values()) | {s1d, s2d}, g.symbols, "dotted copies")
    rules = set(g.rules)
    rules.add(dele(s2d, s1d))
    rules.add(ins(h.sq1, s2d))
    for a in A:
        rules.add(dele(prime(a) if primed_entry else a, Ad[a]))
    outputs = A | {prime(a) for a in A} | {src.b1, prime(src.b1), h.sq1}
    inputs = frozenset(Ad.values())
    temps = (g.alphabet | {s1d, s2d}) - outputs - inputs
    return make_anchored(g.final, rules, inputs, temps, outputs, s1d, s2d)


def build_finishers(A: Iterable[Symbol], b1: Symbol, sq1: Symbol, sq2: Symbol, o1: Symbol = "o1", o2: Symbol = "o2", final: Symbol = "g"):
    """The two finishing transformers.

    T1 copies ``sq1.alpha.b1.u`` (alpha over primed inputs and b1', u over
    inputs) into double-dotted letters, possibly with extra insertions; it is
    anchored by the dotted ``sq2`` and ``o1``.  T2 keeps the double-dotted
    input letters, rewritten to the ``.o`` copy with possible insertions, and
    erases everything else; it is anchored by ``o1`` and ``o2``.
    """
    A = frozenset(A)
    Ap = frozenset(prime(a) for a in A)
    b1p = prime(b1)
    t1_in = A | Ap | {sq1, b1, b1p}
    Add = {a: ddot(a) for a in A}
    Apdd = frozenset(ddot(x) for x in Ap | {b1p})  # double-dotted A' and b1'
    b1dd, sq1dd = ddot(b1), ddot(sq1)
    s2d = dot(sq2)
    t1_out = frozenset(Add.values()) | Apdd | {b1dd, sq1dd}
    _require_fresh(t1_out | {o1, o2, s2d}, t1_in | {final}, "finisher copies")
    rules1 = set()
    for l in t1_in:
        rules1.add(dele(ddot(l), l))
    for x in Add.values():
        rules1.add(ins(final, x))
        rules1.add(ins(x, b1dd))
        for y in Add.values():
            rules1.add(ins(x, y))
    for xp in Apdd:
        rules1.add(ins(b1dd, xp))
        rules1.add(ins(xp, sq1dd))
        for yp in Apdd:
            rules1.add(ins(xp, yp))
    rules1.add(ins(sq1dd, o1))
    rules1.add(dele(o1, s2d))
    T1 = make_anchored(final, rules1, t1_in, {s2d, o1}, t1_out, s2d, o1)

    outs = {a: out_copy(a) for a in A}
    _require_fresh(outs.values(), t1_out | t1_in | {o1, o2, final}, "finisher outputs")
    rules2 = set()
    junk = Apdd | {b1dd, sq1dd}
    for a, x in outs.items():
        rules2.add(ins(final, x))
        rules2.add(ins(x, o2))
        rules2.add(dele(x, Add[a]))
        for y in outs.values():
            rules2.add(ins(x, y))
        for l in junk:
            rules2.add(dele(x, l))
    rules2.add(dele(o2, o1))
    T2 = make_anchored(final, rules2, t1_out, {o1, o2}, frozenset(outs.values()), o1, o2)
    return T1, T2


# -- preconditions ---------------------------------------------------------------------------


@dataclass
class PrecheckReport:
    bounds: RelationBounds
    upward_outputs: bool  # the transformation absorbs extra output letters
    downward_inputs: bool  # ... and tolerates dropping input letters
    failures: list = field(default_factory=list)

    @property
    def theorem_hypothesis(self) -> bool:
        return self.upward_outputs

    @property
    def glue_hypothesis(self) -> bool:
        return self.upward_outputs and self.downward_inputs


def precheck(at: AnchoredTransformer, bounds: RelationBounds) -> PrecheckReport:
    """Check both closure hypotheses on the bounded anchored relation.

    Outputs: for each pair, every one-letter extension of the output that
    still fits the width is a pair (at one more step and one more letter of
    width, since a letter needs inserting).  Inputs: every one-letter
    deletion of the input is a pair at the same bounds.
    """
    rel = anchored_relation(at, bounds)
    D, M = bounds.max_depth, bounds.max_word
    rows: dict[Word, set[Word]] = {}

    def row(u: Word, width: int, depth: int) -> set[Word]:
        key = (u, width, depth)
        if key not in rows:
            rows[key] = anchored_outputs(at, u, width, depth)
        return rows[key]

    rep = PrecheckReport(bounds, True, True)
    outs = sorted(at.outputs)
    for u, v in sorted(rel.pairs):
        if len(v) + 3 <= M:
            for i in range(len(v) + 1):
                for c in outs:
                    v2 = v[:i] + (c,) + v[i:]
                    if v2 not in row(u, M + 1, D + 1):
                        rep.upward_outputs = False
                        rep.failures.append(("output", u, v, v2))
        for i in range(len(u)):
            u2 = u[:i] + u[i + 1 :]
            if v not in row(u2, M, D):
                rep.downward_inputs = False
                rep.failures.append(("input", u, v, u2))
    return rep


# -- the closure --------------------------------------------------------------------------------


class Reading(str, enum.Enum):
    LITERAL = "literal"  # the entry-point/finisher pipeline alone
    PREFIXED = "prefixed"  # one pass of the transformer in front of that pipeline


@dataclass(frozen=True)
class ClosureParts:
    source: AnchoredTransformer
    renaming: Renaming
    renamer: AnchoredTransformer
    fg: Wrapped
    fr: Wrapped
    glue: Glue
    hprime: AnchoredTransformer
    t1: AnchoredTransformer
    t2: AnchoredTransformer


def closure_parts(
    at: AnchoredTransformer, r: Renaming, sq1: Symbol = "sq1", sq2: Symbol = "sq2", anchored_exit: bool = False, primed_entry: bool = False
) -> ClosureParts:
    r.check(at.outputs, at.inputs)
    renamer = build_renamer(at.outputs, at.inputs, r, at.b2, at.b1, at.final)
    fg = wrap(at, sq1, sq2, anchored_exit)
    fr = wrap(renamer, sq2, sq1, anchored_exit)
    h = glue(fg, fr)
    hp = extend_hprime(h, primed_entry)
    t1, t2 = build_finishers(at.inputs, at.b1, sq1, sq2, final=at.final)
    return ClosureParts(at, r, renamer, fg, fr, h, hp, t1, t2)


def transitive_closure(
    at: AnchoredTransformer,
    r: Renaming,
    *,
    reading: Reading = Reading.PREFIXED,
    precheck_bounds: RelationBounds | None = RelationBounds(2, 6, 8),
    skip_precheck: bool = False,
    anchored_exit: bool = False,
    primed_entry: bool = False,
) -> AnchoredTransformer:
    """An anchored transformer A |- C for the iterated transformation, with A, C and anchors kept.

    ``anchored_exit`` and ``primed_entry`` switch on the two repairs of the
    glue (see :func:`wrap` and :func:`extend_hprime`); both default to the
    construction as stated.
    """
    report = None
    if precheck_bounds is not None and not skip_precheck:
        report = precheck(at, precheck_bounds)
        if not report.theorem_hypothesis:
            raise ClosureError(f"precondition failure: outputs not closed upward at {precheck_bounds}")
    parts = closure_parts(at, r, anchored_exit=anchored_exit, primed_entry=primed_entry)
    tail = compose_anchored(compose_anchored(parts.hprime, parts.t1), parts.t2)
    A, C = at.inputs, at.outputs
    fwd = r.forward
    if reading is Reading.LITERAL:
        # dotted inputs read as the inputs themselves
        entry = {dot(a): a for a in A}
        result = _rename_apart(tail, entry, {tail.b1: at.b1, tail.b2: at.b2}, {out_copy(a): c for c, a in fwd.items()})
    else:
        # one pass of G whose outputs are read by the pipeline as dotted inputs
        first = _rename_apart(at, {}, {at.b2: tail.b1}, {c: dot(a) for c, a in fwd.items()})
        both = compose_anchored(first, tail)
        result = _rename_apart(both, {}, {both.b1: at.b1, both.b2: at.b2}, {out_copy(a): c for c, a in fwd.items()})
    meta = dict(reading=reading.value, anchored_exit=anchored_exit, primed_entry=primed_entry, copies="' .d .dd .o")
    if report is not None:
        b = report.bounds
        meta.update(precheck=f"L={b.max_input} M={b.max_word} D={b.max_depth}", upward_outputs=report.upward_outputs, downward_inputs=report.downward_inputs)
    else:
        meta.update(precheck="skipped")
    return result.with_meta(**meta)


def _rename_apart(at: AnchoredTransformer, inputs: dict, anchors: dict, outputs: dict) -> AnchoredTransformer:
    """Apply the given renamings, first moving any other symbol out of the way."""
    wanted = {**inputs, **anchors, **outputs}
    targets = set(wanted.values())
    taken = set(at.grammar.symbols) | targets
    mapping = dict(wanted)
    for s in sorted(at.grammar.symbols):
        if s in targets and s not in wanted:
            mapping[s] = fresh_name(s, taken)
            taken.add(mapping[s])
    t = rename_transformer(at.base, mapping)
    return AnchoredTransformer(t, mapping.get(at.b1, at.b1), mapping.get(at.b2, at.b2))


# -- reference and checks ---------------------------------------------------------------------------


def closure_reference(
    at: AnchoredTransformer, r: Renaming, inputs: Iterable[Word], width: int, depth: int, max_rounds: int = 10
) -> dict[Word, set[Word]]:
    """The iterated relation computed directly from bounded rows of the anchored relation.

    Intermediate words are limited by ``width``; rows are cached.
    """
    rows: dict[Word, set[Word]] = {}

    def row(u: Word) -> set[Word]:
        if u not in rows:
            rows[u] = anchored_outputs(at, u, width, depth)
        return rows[u]

    out = {}
    for u in inputs:
        u = tuple(u)
        seen = set(row(u))
        frontier = set(seen)
        for _ in range(max_rounds):
            nxt = set()
            for v in frontier:
                for w in row(r(v)):
                    if w not in seen:
                        seen.add(w)
                        nxt.add(w)
            if not nxt:
                break
            frontier = nxt
        out[u] = seen
    return out


def invariant_patterns(h: Glue) -> dict[str, tuple[frozenset, frozenset]]:
    """The three two-letter patterns whose presence in a word is preserved by the glue."""
    src = h.fg.source
    A, b1 = src.inputs, src.b1
    D = src.temps | src.outputs
    sq = frozenset({h.sq1, h.sq2})
    Ap = frozenset(prime(a) for a in A)
    Dp = frozenset(prime(d) for d in D)
    return {
        "I1": (frozenset(A | D), sq),
        "I2": (frozenset(A | {b1}), sq | Ap | {prime(b1)}),
        "I3": (frozenset(D - {b1}), sq | (Dp - {prime(b1)})),
    }


def matches(w: Sequence[Symbol], pattern: tuple[frozenset, frozenset]) -> bool:
    left, right = pattern
    return any(w[i] in left and w[i + 1] in right for i in range(len(w) - 1))


def invariant_violations(h: Glue, start: Word, depth: int, width: int) -> list[tuple[str, Word, Word]]:
    """Steps from a word matching a pattern to one that does not, among all enumerated words."""
    pats = invariant_patterns(h)
    g = h.grammar
    from .core import raw_successors

    bad = []
    for w in oracle_enumerate(g, tuple(start), SearchBounds(depth, width)):
        for name, pat in pats.items():
            if matches(w, pat):
                for _, _, v in raw_successors(g, w):
                    if len(v) <= width and not matches(v, pat):
                        bad.append((name, w, v))
    return bad


def mode_of(h: Glue, w: Sequence[Symbol]) -> str | None:
    """``"AC"`` or ``"CA"`` when the word lies in the corresponding mode language, else None."""
    src = h.fg.source
    A, b1 = src.inputs, src.b1
    D = src.temps | src.outputs
    Ap1 = {prime(a) for a in A} | {prime(b1)}
    A1 = set(A) | {b1}
    Dp = {prime(d) for d in D} - {prime(b1)}
    Dm = set(D) - {b1}
    if not w or w[-1] != src.final:
        return None
    body = list(w[:-1])
    for name, head, cls in (
        ("AC", h.sq1, [Ap1, {h.sq2}, A1, Dp, Dm]),
        ("CA", h.sq2, [Dp, {h.sq1}, Dm, Ap1, A1]),
    ):
        if not body or body[0] != head:
            continue
        counts = _split(body[1:], cls)
        if counts is not None and _mode_constraint(*counts):
            return name
    return None


def _split(body, classes) -> tuple[int, ...] | None:
    counts = []
    i = 0
    for cls in classes:
        j = i
        while j < len(body) and body[j] in cls:
            j += 1
        counts.append(j - i)
        i = j
    return tuple(counts) if i == len(body) else None


def _mode_constraint(n1, n2, n3, n4, n5) -> bool:
    return n2 <= 1 and (n1 > 0 or n2 > 0) and (n2 == 0 or n3 == 0) and (n3 > 0 or n4 > 0) and (n4 == 0 or n5 > 0)



# -- bounded checks of the stated stage shapes -------------------------------------------------


def t1_expected(A: Iterable[Symbol], b1: Symbol, sq1: Symbol, u: Word, t1: AnchoredTransformer, width: int) -> set[Word]:
    """Outputs T1 should produce from ``u``: the double-dotted copy of ``u`` plus T1's insertions.

    Empty unless ``u`` has the shape ``sq1.alpha.b1.u'`` with ``alpha`` nonempty over primed
    inputs and b1', ``u'`` over inputs.
    """
    A = frozenset(A)
    Ap1 = {prime(a) for a in A} | {prime(b1)}
    k = 1
    if not u or u[0] != sq1:
        return set()
    while k < len(u) and u[k] in Ap1:
        k += 1
    if k == 1 or k >= len(u) or u[k] != b1 or any(x not in A for x in u[k + 1 :]):
        return set()
    ins_only = t1.grammar.with_rules(r for r in t1.grammar.rules if r.kind is Kind.INSERT)
    start = tuple(ddot(x) for x in u) + (t1.final,)
    out = set()
    for w in oracle_enumerate(ins_only, start, SearchBounds(width - len(start), width)):
        out.add(w[:-1])
    return out


def t1_characterized(u: Word, t1: AnchoredTransformer, empty_outputs: set[Word]) -> set[Word]:
    """What T1 actually computes from ``u``.

    Each output letter erases a run (possibly empty) of its own undotted letter
    before it inserts its left neighbour, so ``v`` is produced iff T1 produces it
    from the empty input and the run-collapsed ``u`` embeds in the undotted ``v``.
    """
    from .core import is_subword, stutter_canonical

    cu = stutter_canonical(u)
    return {v for v in empty_outputs if is_subword(cu, tuple(x[: -len(".dd")] for x in v))}


def finisher_violations(A: Iterable[Symbol], b1: Symbol, sq1: Symbol, sq2: Symbol, max_input: int, max_extra: int = 1):
    """Compare enumerated T1/T2 relations with their stated shapes.

    Inputs range over all words up to ``max_input``; outputs are compared up to
    ``max_extra`` letters beyond the input length.  Returns a dict of
    (u, v) lists: ``T1`` against :func:`t1_characterized`, ``T1-missing`` for
    pairs of the shape-restricted statement that T1 fails to produce,
    ``T1-extra`` for pairs T1 produces outside that statement, ``T2``
    against its run-collapsed reading (nonempty ``v`` above the collapsed
    projection) and ``T2-stated`` against the plain projection.
    """
    from .core import is_subword, stutter_canonical

    A = frozenset(A)
    t1, t2 = build_finishers(A, b1, sq1, sq2)
    bad: dict[str, list] = {"T1": [], "T1-missing": [], "T1-extra": [], "T2": [], "T2-stated": []}
    top = max_input + max_extra
    empty = anchored_outputs(t1, (), top + 3, top + 2)
    for u in words_upto(t1.inputs, max_input):
        cap = len(u) + max_extra
        got = {v for v in anchored_outputs(t1, u, len(u) + cap + 3, len(u) + cap + 2) if len(v) <= cap}
        want = {v for v in t1_characterized(u, t1, empty) if len(v) <= cap}
        bad["T1"] += [(u, v) for v in got ^ want]
        shaped = {v for v in t1_expected(A, b1, sq1, u, t1, cap + 1) if len(v) <= cap}
        bad["T1-missing"] += [(u, v) for v in shaped - got]
        bad["T1-extra"] += [(u, v) for v in got - shaped]
    back = {out_copy(a): ddot(a) for a in A}
    for u in words_upto(t2.inputs, max_input):
        proj = tuple(x for x in u if x in back.values())
        width = len(u) + len(proj) + max_extra + 3
        depth = len(u) + len(proj) + max_extra + 2
        got = {v for v in anchored_outputs(t2, u, width, depth) if len(v) <= len(proj) + max_extra}
        cproj = stutter_canonical(proj)
        for v in words_upto(t2.outputs, len(proj) + max_extra):
            dv = tuple(back[x] for x in v)
            if (v in got) != (bool(v) and is_subword(cproj, dv)):
                bad["T2"].append((u, v))
            if (v in got) != is_subword(proj, dv):
                bad["T2-stated"].append((u, v))
    return bad


def wrapper_pair_violations(at: AnchoredTransformer, bounds: RelationBounds, alphas: Iterable[Word] = ((),)) -> list:
    """Anchored pairs of G against pairs of its wrapper read through ``alpha.b1`` and ``beta.b2``.

    Forward: each pair of G at the bounds must show up in the wrapper for some
    ``beta``, allowing twice the depth plus the bookkeeping steps and room for
    ``alpha``, the input and three more letters.  Backward: each wrapper pair
    enumerated at those larger bounds must be a pair of G at the same larger
    bounds.  Returns (direction, u, alpha, v) for each failure.
    """
    from .transform import derives

    w = wrap(at, "sq1", "sq2")
    L, M, D = bounds.max_input, bounds.max_word, bounds.max_depth
    betas = sorted({prime(c) for c in at.outputs} | {prime(at.b2)})
    bad = []
    for u in words_upto(at.inputs, L):
        s_g = anchored_outputs(at, u, M, D)
        for alpha in alphas:
            alpha = tuple(alpha)
            mw, md = M + len(alpha) + L + 3, 2 * D + len(alpha) + 4
            got = set()
            for v in anchored_outputs(w.at, alpha + (at.b1,) + u, mw, md):
                if len(v) >= 2 and v[0] in betas and v[1] == at.b2 and all(x in at.outputs for x in v[2:]):
                    got.add(v[2:])
            for v in s_g - got:
                bad.append(("forward", u, alpha, v))
            for v in got - s_g:
                if not derives(at.grammar, (at.b1,) + u + (at.final,), (at.b2,) + v + (at.final,), md, mw):
                    bad.append(("backward", u, alpha, v))
    return bad


def wrapper_soundness_violations(at: AnchoredTransformer, alpha: Word, u: Word, depth: int, width: int) -> list[Word]:
    """Wrapper words ``sq2.beta.v.g`` reached from ``sq1.alpha.u.g`` whose ``v`` the source cannot derive."""
    from .transform import derives

    w = wrap(at, "sq1", "sq2")
    A1 = at.inputs | {at.b1}
    C1 = at.outputs | {at.b2}
    Bp = {prime(x) for x in C1}
    if any(x not in A1 for x in u):
        raise ClosureError("u must be over inputs and the start anchor")
    bad = []
    start = ("sq1",) + tuple(alpha) + tuple(u) + (at.final,)
    for x in oracle_enumerate(w.at.grammar, start, SearchBounds(depth, width)):
        if x[0] != "sq2" or x[-1] != at.final:
            continue
        k = 1
        while k < len(x) - 1 and x[k] in Bp:
            k += 1
        v = x[k:-1]
        if k == 1 or not v or any(y not in C1 for y in v):
            continue
        if not derives(at.grammar, tuple(u) + (at.final,), v + (at.final,), depth, width):
            bad.append(x)
    return bad


def closure_outputs(gp: AnchoredTransformer, u: Word, depth: int, width: int, max_len: int) -> dict[Word, int]:
    """Outputs of a closure grammar from ``u`` (greedy derivations only, see :func:`greedy_outputs`)."""
    start = (gp.b1,) + tuple(u) + (gp.final,)
    return greedy_outputs(gp.grammar, start, gp.b2, gp.outputs, SearchBounds(depth, width), max_len)


@dataclass
class ClosureComparison:
    """Both sides of the closure equality on one toy, restricted to outputs of length <= ``max_len``."""

    closure: dict[Word, set[Word]]
    reference: dict[Word, set[Word]]
    depths: dict[tuple[Word, Word], int]

    @property
    def extra(self) -> list[tuple[Word, Word]]:
        return sorted((u, v) for u, vs in self.closure.items() for v in vs - self.reference[u])

    @property
    def missing(self) -> list[tuple[Word, Word]]:
        return sorted((u, v) for u, vs in self.reference.items() for v in vs - self.closure[u])

    @property
    def equal(self) -> bool:
        return not self.extra and not self.missing


def compare_closure(
    at: AnchoredTransformer,
    r: Renaming,
    gp: AnchoredTransformer,
    max_input: int = 2,
    max_len: int = 2,
    g_depth: int = 10,
    g_width: int = 7,
    stages: int = 4,
    width_slack: int = 0,
) -> ClosureComparison:
    """Enumerate the closure grammar and the iterated relation independently and line them up.

    The reference iterates rows of the anchored relation of ``at`` computed at
    ``g_depth``/``g_width``; the closure grammar is searched at ``stages``
    times that depth and ``width_slack`` extra letters of width, since the
    greedy search reorders steps and the anchors of later stages take room.
    """
    us = list(words_upto(at.inputs, max_input))
    ref = closure_reference(at, r, us, g_width, g_depth)
    ref = {u: {v for v in vs if len(v) <= max_len} for u, vs in ref.items()}
    got: dict[Word, set[Word]] = {}
    depths = {}
    for u in us:
        outs = closure_outputs(gp, u, stages * g_depth, g_width + width_slack, max_len)
        got[u] = set(outs)
        depths.update({(u, v): d for v, d in outs.items()})
    return ClosureComparison(got, ref, depths)
