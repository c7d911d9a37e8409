"""Small grammars and transformers used by tests, scripts and the acceptance suite."""

from __future__ import annotations

import random
from typing import Callable

from .closure import AnchoredTransformer, Renaming, make_anchored
from .core import Grammar, Rule, dele, ins, successors
from .derivations import Derivation
from .simple import SimpleTransformer
from .transform import Transformer, make_transformer


def _g(final: str, rules: list[Rule], extra=()) -> Grammar:
    return Grammar.build(final, rules, extra)


def tiny_grammars() -> dict[str, Grammar]:
    """Hand-picked grammars, each over at most four letters."""
    return {
        "g0": _g("g", [ins("g", "a"), ins("a", "b"), dele("b", "c")], ["c"]),
        "runs": _g("g", [ins("g", "a"), ins("a", "a"), dele("a", "b")], ["b"]),
        "cycle": _g("g", [ins("g", "a"), ins("a", "b"), ins("b", "a"), dele("a", "c"), dele("b", "a")], ["c"]),
        "eraser": _g("g", [dele("g", "a"), dele("g", "b"), dele("a", "b")]),
        "relay": _g("g", [ins("g", "x"), dele("x", "a"), ins("x", "y"), dele("y", "x"), dele("y", "b")], ["a", "b"]),
        "anchor": _g("g", [ins("g", "c"), ins("c", "c"), dele("c", "a"), ins("c", "e"), dele("e", "s")], ["a", "s"]),
        "mutual": _g("g", [ins("g", "a"), ins("g", "b"), ins("a", "b"), ins("b", "a"), dele("a", "a"), dele("b", "b")]),
    }


def random_grammar(rng: random.Random, letters: int = 3, rules: int = 5, final: str = "g") -> Grammar:
    syms = [chr(ord("a") + i) for i in range(letters)]
    actors = syms + [final]
    chosen: set[Rule] = set()
    while len(chosen) < rules:
        make = ins if rng.random() < 0.5 else dele
        chosen.add(make(rng.choice(actors), rng.choice(syms)))
    return _g(final, sorted(chosen, key=lambda r: (r.kind, r.actor, r.patient)), syms)


def random_word(rng: random.Random, g: Grammar, max_len: int) -> tuple[str, ...]:
    letters = sorted(g.alphabet)
    return tuple(rng.choice(letters) for _ in range(rng.randint(0, max_len))) + (g.final,)


def random_derivation(rng: random.Random, g: Grammar, start: tuple[str, ...], depth: int, width: int = 8) -> Derivation:
    """A random walk of at most ``depth`` steps that keeps words within ``width``."""
    steps, w = [], start
    for _ in range(depth):
        options = [(s, nw) for s, nw in successors(g, w) if len(nw) <= width]
        if not options:
            break
        s, w = rng.choice(options)
        steps.append(s)
    return Derivation(g, start, tuple(steps))


# -- transformers ----------------------------------------------------------------
#
# Level-0 transformers map {a1,a2} to {c1,c2}; level-1 ones map {c1,c2} to
# {e1,e2}.  Every level-0 / level-1 pair is chainable.


def _level(inputs, outputs, body) -> Callable[[], Transformer]:
    def build() -> Transformer:
        rules, temps = body(inputs, outputs)
        return make_transformer("g", rules, inputs, temps, outputs)

    return build


def _copy(A, C):
    x1, x2 = A
    y1, y2 = C
    return [ins("g", y1), ins("g", y2), ins(y1, y2), ins(y2, y1), dele(y1, x1), dele(y2, x2)], ()


def _swap(A, C):
    x1, x2 = A
    y1, y2 = C
    return [ins("g", y1), ins("g", y2), ins(y1, y2), ins(y2, y1), dele(y1, x2), dele(y2, x1)], ()


def _eat(A, C):
    x1, x2 = A
    y1, _ = C
    return [ins("g", y1), dele(y1, x1), dele(y1, x2)], ()


def _runs(A, C):
    x1, _ = A
    y1, _ = C
    return [ins("g", y1), ins(y1, y1), dele(y1, x1)], ()


def _via_temp(A, C):
    x1, x2 = A
    y1, y2 = C
    t = f"t{y1}"
    return [ins("g", t), dele(t, x1), dele(t, x2), ins(t, y1), dele(y1, t), ins(y1, y2)], (t,)


def _guard(A, C):
    x1, x2 = A
    _, y2 = C
    return [ins("g", y2), dele(y2, x2), ins(y2, y2)], ()


A0, C0, E0 = ("a1", "a2"), ("c1", "c2"), ("e1", "e2")
BODIES = {"copy": _copy, "swap": _swap, "eat": _eat, "runs": _runs, "temp": _via_temp, "guard": _guard}


def tiny_transformers() -> dict[str, Transformer]:
    out = {}
    for name, body in BODIES.items():
        out[f"{name}0"] = _level(A0, C0, body)()
        out[f"{name}1"] = _level(C0, E0, body)()
    return out


def chainable_pairs() -> list[tuple[str, str]]:
    names = sorted(BODIES)
    return [(f"{x}0", f"{y}1") for x in names for y in names]


def simple_transformers() -> dict[str, SimpleTransformer]:
    """Catalog transformers without temporaries; none of them erases an output."""
    return {k: SimpleTransformer(t) for k, t in tiny_transformers().items() if not t.temps}


# -- anchored toys ----------------------------------------------------------------


def toy_t() -> tuple[AnchoredTransformer, Renaming]:
    """Any input becomes a nonempty run of c1."""
    rules = [ins("g", "c1"), ins("c1", "c1"), dele("c1", "a1"), ins("c1", "b2"), dele("b2", "b1")]
    return make_anchored("g", rules, {"a1"}, {"b1", "b2"}, {"c1"}, "b1", "b2"), Renaming.of({"c1": "a1"})


def toy_relay() -> tuple[AnchoredTransformer, Renaming]:
    """Like T, but inputs are erased by a temporary that c1 inserts and later removes."""
    rules = [ins("g", "c1"), ins("c1", "c1"), ins("c1", "t"), dele("t", "a1"), dele("c1", "t")]
    rules += [ins("c1", "b2"), dele("b2", "b1")]
    return make_anchored("g", rules, {"a1"}, {"b1", "b2", "t"}, {"c1"}, "b1", "b2"), Renaming.of({"c1": "a1"})


def toy_copy() -> tuple[AnchoredTransformer, Renaming]:
    """c1 erases a1 and c2 erases a2; iterating adds nothing new."""
    C = ("c1", "c2")
    rules = [ins("g", c) for c in C] + [ins(x, y) for x in C for y in C]
    rules += [dele("c1", "a1"), dele("c2", "a2")] + [ins(c, "b2") for c in C] + [dele("b2", "b1")]
    return make_anchored("g", rules, {"a1", "a2"}, {"b1", "b2"}, set(C), "b1", "b2"), Renaming.of({"c1": "a1", "c2": "a2"})


def toy_shift() -> tuple[AnchoredTransformer, Renaming]:
    """a1 is erased by c2 and a2 by c1, so one pass swaps the letters."""
    C = ("c1", "c2")
    rules = [ins("g", c) for c in C] + [ins(x, y) for x in C for y in C]
    rules += [dele("c2", "a1"), dele("c1", "a2")] + [ins(c, "b2") for c in C] + [dele("b2", "b1")]
    return make_anchored("g", rules, {"a1", "a2"}, {"b1", "b2"}, set(C), "b1", "b2"), Renaming.of({"c1": "a1", "c2": "a2"})


def toy_contains() -> tuple[AnchoredTransformer, Renaming]:
    """Only c1 may insert the end anchor, so every output contains c1."""
    C = ("c1", "c2")
    rules = [ins("g", c) for c in C] + [ins(x, y) for x in C for y in C]
    rules += [dele(c, a) for c in C for a in ("a1", "a2")] + [ins("c1", "b2"), dele("b2", "b1")]
    return make_anchored("g", rules, {"a1", "a2"}, {"b1", "b2"}, set(C), "b1", "b2"), Renaming.of({"c1": "a1", "c2": "a2"})


TOYS: dict[str, Callable[[], tuple[AnchoredTransformer, Renaming]]] = {
    "T": toy_t,
    "relay": toy_relay,
    "copy": toy_copy,
    "shift": toy_shift,
    "contains": toy_contains,
}
