"""Symbols, words, rules, grammars and the one-step rewrite relation.

Symbols are plain strings (their names); a word is a tuple of symbols.  The
final symbol (the axiom) is kept outside the grammar's alphabet, and rules
may never insert or delete it.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

Symbol = str
Word = tuple[str, ...]

NAME_RE = re.compile(r"^[A-Za-z0-9_.'\"-]+$")


class GrammarError(ValueError):
    """Malformed grammar, grammar text, or word."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


class StepError(ValueError):
    """A rewrite step that cannot be applied to a word."""


class Kind(enum.IntEnum):
    INSERT = 0
    DELETE = 1


@dataclass(frozen=True, order=True)
class Rule:
    """``a -> b`` (a inserts b on its left) or ``d ~> c`` (d deletes c on its left)."""

    kind: Kind
    actor: Symbol
    patient: Symbol

    def __str__(self) -> str:
        arrow = "->" if self.kind is Kind.INSERT else "~>"
        return f"{self.actor} {arrow} {self.patient}"

    @property
    def is_insertion(self) -> bool:
        return self.kind is Kind.INSERT


def ins(actor: Symbol, patient: Symbol) -> Rule:
    return Rule(Kind.INSERT, actor, patient)


def dele(actor: Symbol, patient: Symbol) -> Rule:
    return Rule(Kind.DELETE, actor, patient)


@dataclass(frozen=True, order=True)
class Step:
    rule: Rule
    position: int  # 1-based index of the active letter before the step

    def __str__(self) -> str:
        return f"{self.rule} @{self.position}"


@dataclass(frozen=True)
class Grammar:
    alphabet: frozenset[Symbol]
    final: Symbol
    rules: frozenset[Rule] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "rules", frozenset(self.rules))
        if self.final in self.alphabet:
            raise GrammarError(f"final symbol {self.final!r} must not be in the alphabet")
        for name in (*self.alphabet, self.final):
            if not NAME_RE.match(name):
                raise GrammarError(f"illegal symbol name {name!r}")
        universe = self.alphabet | {self.final}
        for r in self.rules:
            if r.patient == self.final:
                raise GrammarError(f"rule touches axiom as patient: {r}")
            if r.actor not in universe or r.patient not in universe:
                raise GrammarError(f"unknown symbol in rule {r}")

    @classmethod
    def build(cls, final: Symbol, rules: Iterable[Rule], extra: Iterable[Symbol] = ()) -> "Grammar":
        """Grammar whose alphabet is every symbol used by ``rules`` plus ``extra``."""
        rules = frozenset(rules)
        alphabet = {s for r in rules for s in (r.actor, r.patient)} | set(extra)
        alphabet.discard(final)
        return cls(frozenset(alphabet), final, rules)

    @cached_property
    def symbols(self) -> frozenset[Symbol]:
        return self.alphabet | {self.final}

    @cached_property
    def inserts(self) -> dict[Symbol, tuple[Symbol, ...]]:
        out: dict[Symbol, list[Symbol]] = {}
        for r in self.rules:
            if r.kind is Kind.INSERT:
                out.setdefault(r.actor, []).append(r.patient)
        return {a: tuple(sorted(ps)) for a, ps in out.items()}

    @cached_property
    def deletes(self) -> dict[Symbol, frozenset[Symbol]]:
        out: dict[Symbol, set[Symbol]] = {}
        for r in self.rules:
            if r.kind is Kind.DELETE:
                out.setdefault(r.actor, set()).add(r.patient)
        return {a: frozenset(ps) for a, ps in out.items()}

    @cached_property
    def deleters(self) -> dict[Symbol, frozenset[Symbol]]:
        out: dict[Symbol, set[Symbol]] = {}
        for r in self.rules:
            if r.kind is Kind.DELETE:
                out.setdefault(r.patient, set()).add(r.actor)
        return {c: frozenset(ds) for c, ds in out.items()}

    def is_inactive(self, s: Symbol) -> bool:
        return s not in self.inserts and s not in self.deletes

    def is_acyclic(self) -> bool:
        """No directed cycle in the may-act-upon graph (actor -> patient)."""
        succ: dict[Symbol, set[Symbol]] = {}
        for r in self.rules:
            succ.setdefault(r.actor, set()).add(r.patient)
        WHITE, GREY, BLACK = 0, 1, 2
        color = dict.fromkeys(self.symbols, WHITE)
        for root in sorted(self.symbols):
            if color[root] != WHITE:
                continue
            color[root] = GREY
            stack = [(root, iter(sorted(succ.get(root, ()))))]
            while stack:
                node, it = stack[-1]
                nxt = next(it, None)
                if nxt is None:
                    color[node] = BLACK
                    stack.pop()
                elif color[nxt] == GREY:
                    return False
                elif color[nxt] == WHITE:
                    color[nxt] = GREY
                    stack.append((nxt, iter(sorted(succ.get(nxt, ())))))
        return True

    def with_rules(self, rules: Iterable[Rule], extra: Iterable[Symbol] = ()) -> "Grammar":
        rules = frozenset(rules)
        alphabet = set(self.alphabet) | set(extra)
        alphabet |= {s for r in rules for s in (r.actor, r.patient)}
        alphabet.discard(self.final)
        return Grammar(frozenset(alphabet), self.final, rules)

    def sorted_rules(self) -> list[Rule]:
        return sorted(self.rules)


def apply_step(g: Grammar, w: Sequence[Symbol], s: Step) -> Word:
    """Rewrite ``w`` by one step; raises :class:`StepError` when the step is not enabled."""
    w = tuple(w)
    p, r = s.position, s.rule
    if r not in g.rules:
        raise StepError(f"rule not in grammar: {r}")
    if not 1 <= p <= len(w):
        raise StepError(f"position {p} out of range for word of length {len(w)}")
    if w[p - 1] != r.actor:
        raise StepError(f"actor mismatch: position {p} holds {w[p - 1]!r}, rule needs {r.actor!r}")
    if r.kind is Kind.INSERT:
        return w[: p - 1] + (r.patient,) + w[p - 1 :]
    if p < 2 or w[p - 2] != r.patient:
        found = w[p - 2] if p >= 2 else None
        raise StepError(f"patient mismatch: left of position {p} is {found!r}, rule needs {r.patient!r}")
    return w[: p - 2] + w[p - 1 :]


def _moves(g: Grammar) -> dict[Symbol, tuple[tuple[Rule, ...], dict[Symbol, Rule]]]:
    """Per actor: its insertion rules in patient order, and its deletion rules by patient."""
    cached = g.__dict__.get("_moves")
    if cached is None:
        cached = {}
        for a in g.symbols:
            insr = tuple(Rule(Kind.INSERT, a, b) for b in g.inserts.get(a, ()))
            delr = {c: Rule(Kind.DELETE, a, c) for c in g.deletes.get(a, ())}
            if insr or delr:
                cached[a] = (insr, delr)
        g.__dict__["_moves"] = cached
    return cached


def raw_successors(g: Grammar, w: Word, lo: int = 1) -> list[tuple[Rule, int, Word]]:
    """Like :func:`successors` but yields ``(rule, position, word)`` without building steps."""
    out = []
    moves = _moves(g)
    for p in range(max(lo, 1), len(w) + 1):
        mv = moves.get(w[p - 1])
        if mv is None:
            continue
        insr, delr = mv
        if insr:
            head, tail = w[: p - 1], w[p - 1 :]
            for r in insr:
                out.append((r, p, head + (r.patient,) + tail))
        if p >= 2 and delr:
            r = delr.get(w[p - 2])
            if r is not None:
                out.append((r, p, w[: p - 2] + w[p - 1 :]))
    return out


def successors(g: Grammar, w: Word, lo: int = 1) -> list[tuple[Step, Word]]:
    """Enabled steps with their results, in the canonical order, for active positions >= lo."""
    return [(Step(r, p), v) for r, p, v in raw_successors(g, w, lo)]


def enabled_steps(g: Grammar, w: Sequence[Symbol]) -> list[Step]:
    return [s for s, _ in successors(g, tuple(w))]


def stutter_canonical(w: Sequence[Symbol]) -> Word:
    out: list[Symbol] = []
    for s in w:
        if not out or out[-1] != s:
            out.append(s)
    return tuple(out)


def stutter_equivalent(x: Sequence[Symbol], y: Sequence[Symbol]) -> bool:
    return stutter_canonical(x) == stutter_canonical(y)


def is_subword(x: Sequence[Symbol], y: Sequence[Symbol], allowed: Iterable[Symbol] | None = None) -> bool:
    """``x`` embeds in ``y``; with ``allowed``, only symbols of ``allowed`` may be dropped from ``y``.

    The unrestricted case is a greedy scan.  The restricted case is greedy as
    well: a letter of ``y`` must be matched when it cannot be dropped, and
    matching early never hurts when it can.
    """
    if allowed is None:
        it = iter(y)
        return all(any(s == t for t in it) for s in x)
    allowed = frozenset(allowed)
    i = 0
    for t in y:
        if i < len(x) and x[i] == t:
            i += 1
        elif t not in allowed:
            return False
    return i == len(x)


def parse_word(text: str, universe: Iterable[Symbol] | None = None) -> Word:
    """Whitespace-separated symbol names; ``-`` or ``ε`` alone is the empty word."""
    toks = text.split()
    if toks in (["-"], ["ε"]):
        return ()
    known = None if universe is None else frozenset(universe)
    for t in toks:
        if not NAME_RE.match(t):
            raise GrammarError(f"illegal symbol name {t!r}")
        if known is not None and t not in known:
            raise GrammarError(f"unknown symbol {t!r}")
    return tuple(toks)


def format_word(w: Sequence[Symbol]) -> str:
    return " ".join(w) if w else "-"


_DIRECTIVES = {"final", "insert", "delete", "symbols"}


def parse_grammar(text: str, extra_directives: dict[str, list] | None = None) -> Grammar:
    """Parse the line-oriented grammar format.

    Unknown directives listed in ``extra_directives`` are collected there
    (as ``(line_no, args)``) instead of raising; the transformer format uses
    this for its header lines.
    """
    final: str | None = None
    rules: set[Rule] = set()
    declared: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        toks = line.split()
        head = toks[0]
        col = {t: line.index(t) + 1 for t in toks}
        for t in toks[1:] if head != "meta" else ():  # metadata values are free text
            if not NAME_RE.match(t):
                raise GrammarError(f"illegal symbol name {t!r}", lineno, col[t])
        if head == "final":
            if len(toks) != 2:
                raise GrammarError("expected 'final <name>'", lineno, 1)
            if final is not None:
                raise GrammarError("duplicate final declaration", lineno, 1)
            final = toks[1]
        elif head in ("insert", "delete"):
            if len(toks) != 3:
                raise GrammarError(f"expected '{head} <actor> <patient>'", lineno, 1)
            kind = Kind.INSERT if head == "insert" else Kind.DELETE
            rules.add(Rule(kind, toks[1], toks[2]))
        elif head == "symbols":
            declared.update(toks[1:])
        elif extra_directives is not None and head in extra_directives:
            extra_directives[head].append((lineno, toks[1:]))
        else:
            raise GrammarError(f"unknown directive {head!r}", lineno, 1)
    if final is None:
        raise GrammarError("missing 'final <name>' line")
    for r in rules:
        if r.patient == final:
            raise GrammarError(f"rule touches axiom as patient: {r}")
    if final in declared:
        raise GrammarError(f"final symbol {final!r} also declared as a symbol")
    return Grammar.build(final, rules, declared)


def format_grammar(g: Grammar, header: Sequence[str] = ()) -> str:
    lines = [*header, f"final {g.final}"]
    used = {s for r in g.rules for s in (r.actor, r.patient)}
    idle = sorted(g.alphabet - used)
    if idle:
        lines.append("symbols " + " ".join(idle))
    for r in g.sorted_rules():
        verb = "insert" if r.kind is Kind.INSERT else "delete"
        lines.append(f"{verb} {r.actor} {r.patient}")
    return "\n".join(lines) + "\n"


def distance_lower_bound(g: Grammar, w: Word, t: Word) -> float:
    """Fewest steps any derivation ``w =>* t`` could take; ``inf`` if none can exist.

    The sum of :func:`alignment_bound` and :func:`helper_bound`, which count
    disjoint sets of steps.
    """
    a = alignment_bound(g, w, t)
    if a == float("inf"):
        return a
    return a + helper_bound(g, w, t)


def quick_lower_bound(g: Grammar, w: Word, t: Word) -> float:
    """A cheaper, weaker :func:`distance_lower_bound`.

    Letters of ``w`` whose symbol is missing from ``t`` must be deleted and
    letters of ``t`` whose symbol is missing from ``w`` must be inserted.
    """
    return forced_bound(w, t) + helper_bound(g, w, t)


def forced_bound(w: Word, t: Word) -> int:
    sw, st = set(w), set(t)
    forced = sum(1 for x in w if x not in st) + sum(1 for x in t if x not in sw)
    return max(forced, abs(len(w) - len(t)))


def alignment_bound(g: Grammar, w: Word, t: Word) -> float:
    """Steps spent on letters of ``w`` and letters of ``t``.

    The letters of ``w`` that survive into ``t`` form a common subsequence;
    every other letter of ``w`` costs a deletion (so its symbol must be
    deletable) and every other letter of ``t`` an insertion (so its symbol
    must be insertable).  Maximizing the kept subsequence under those
    constraints gives the bound.
    """
    deletable = g.deleters
    insertable = _insertable(g)
    # Equal end letters can always be kept: swapping a match onto them only
    # ever frees a letter with the same symbol, whose constraint already held.
    lo = 0
    while lo < len(w) and lo < len(t) and w[lo] == t[lo]:
        lo += 1
    hi = 0
    while hi < len(w) - lo and hi < len(t) - lo and w[-1 - hi] == t[-1 - hi]:
        hi += 1
    w, t = w[lo : len(w) - hi], t[lo : len(t) - hi]
    n, m = len(w), len(t)
    NEG = -1 << 30
    prev = [NEG] * (m + 1)
    prev[0] = 0
    for j in range(1, m + 1):
        prev[j] = prev[j - 1] if t[j - 1] in insertable and prev[j - 1] > NEG else NEG
    for i in range(1, n + 1):
        cur = [NEG] * (m + 1)
        a = w[i - 1]
        can_del = a in deletable
        cur[0] = prev[0] if can_del and prev[0] > NEG else NEG
        for j in range(1, m + 1):
            best = NEG
            if can_del and prev[j] > best:
                best = prev[j]
            if t[j - 1] in insertable and cur[j - 1] > best:
                best = cur[j - 1]
            if a == t[j - 1] and prev[j - 1] > NEG and prev[j - 1] + 1 > best:
                best = prev[j - 1] + 1
            cur[j] = best
        prev = cur
    keep = prev[m]
    if keep <= NEG // 2:
        return float("inf")
    return n + m - 2 * keep


def helper_bound(g: Grammar, w: Word, t: Word) -> float:
    """Steps spent on helper letters: letters in neither ``w`` nor the final ``t``.

    A letter of ``w`` whose symbol is absent from ``t`` must be deleted by a
    letter that sits to its right.  That deleter descends from a letter of
    ``w`` to the right, or survives into ``t``, or is a helper (inserted, then
    deleted by yet another letter, and so on).  Each helper on the chain costs
    two steps.  Chains of letters in different components of the deletion
    graph never share a helper, so per component we may add the longest one.
    """
    target = frozenset(t)
    comp = _deletion_components(g)
    worst: dict[int, float] = {}
    right: set[Symbol] = set()
    for x in reversed(w):
        if x not in target:
            cost = _helper_cost(g, x, target, right)
            if cost == float("inf"):
                return cost
            k = comp[x]
            if cost > worst.get(k, 0):
                worst[k] = cost
        right.add(x)
    return sum(worst.values())


def _helper_cost(g: Grammar, x: Symbol, target: frozenset[Symbol], right: set[Symbol]) -> float:
    """Twice the least number of helpers on a deletion chain from ``x`` to a free letter."""
    up = _deleter_closure(g, x)
    key = (x, target & up, frozenset(s for s in right if s in up))
    memo = g.__dict__.setdefault("_helper_memo", {})
    got = memo.get(key)
    if got is not None:
        return got
    if len(memo) > 200_000:
        memo.clear()
    free = key[1] | key[2]
    deleters = g.deleters
    seen = {x}
    layer = {x}
    cost = float("inf")
    k = 0
    while layer:
        nxt = set()
        for s in layer:
            ds = deleters.get(s, frozenset())
            if ds & free:
                cost = 2 * k
                break
            nxt |= ds - seen
        if cost != float("inf"):
            break
        seen |= nxt
        layer = nxt
        k += 1
    memo[key] = cost
    return cost


def _deleter_closure(g: Grammar, x: Symbol) -> frozenset[Symbol]:
    """Symbols reachable from ``x`` by repeatedly taking a deleter."""
    cache = g.__dict__.setdefault("_deleter_closure", {})
    got = cache.get(x)
    if got is None:
        deleters = g.deleters
        seen: set[Symbol] = set()
        stack = list(deleters.get(x, ()))
        while stack:
            y = stack.pop()
            if y not in seen:
                seen.add(y)
                stack.extend(deleters.get(y, ()))
        got = cache[x] = frozenset(seen)
    return got


def _deletion_components(g: Grammar) -> dict[Symbol, int]:
    cached = g.__dict__.get("_del_components")
    if cached is None:
        parent = {s: s for s in g.symbols}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for r in g.rules:
            if r.kind is Kind.DELETE:
                parent[find(r.actor)] = find(r.patient)
        ids: dict[Symbol, int] = {}
        cached = {s: ids.setdefault(find(s), len(ids)) for s in sorted(g.symbols)}
        g.__dict__["_del_components"] = cached
    return cached


def _insertable(g: Grammar) -> frozenset[Symbol]:
    cached = g.__dict__.get("_insertable")
    if cached is None:
        cached = frozenset(r.patient for r in g.rules if r.kind is Kind.INSERT)
        g.__dict__["_insertable"] = cached
    return cached
