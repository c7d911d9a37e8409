"""Bounded reachability: the brute-force oracle and the decision procedures.

``oracle_enumerate`` is deliberately naive and is what the other searches
(and most of the test-suite) are checked against.  ``bounded_reach`` prunes
with :func:`~leftist.core.distance_lower_bound` only, so it stays complete.
``greedy_reach`` additionally restricts itself to greedy derivations.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

from .core import Grammar, Kind, Step, Word, alignment_bound, distance_lower_bound, forced_bound, helper_bound, raw_successors, successors
from .derivations import Derivation


@dataclass(frozen=True)
class SearchBounds:
    max_depth: int
    max_word_len: int | None = None  # None: default ceiling, see width_bound()
    exact: bool = False
    budget: int | None = None  # node expansions

    def __post_init__(self):
        if self.max_depth < 0 or (self.max_word_len is not None and self.max_word_len < 0):
            raise ValueError("bounds must be non-negative")

    def width_bound(self, g: Grammar, source: Word, target: Word | None = None) -> int:
        if self.max_word_len is not None:
            return self.max_word_len
        return len(source) + len(target or ()) + 2 * len(g.rules)


class Verdict(enum.Enum):
    FOUND = "found"
    NOT_FOUND = "not-found"
    BUDGET_EXCEEDED = "budget-exceeded"


@dataclass
class SearchStats:
    expanded: int = 0
    max_frontier: int = 0
    dedup_hits: int = 0
    pruned: int = 0

    def as_dict(self) -> dict:
        return dict(expanded=self.expanded, max_frontier=self.max_frontier, dedup_hits=self.dedup_hits, pruned=self.pruned)


@dataclass
class SearchResult:
    verdict: Verdict
    derivation: Derivation | None = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def found(self) -> bool:
        return self.verdict is Verdict.FOUND


def _bound(g: Grammar, target: Word):
    """Memoized lower bound towards a fixed target.

    ``lb(w, budget)`` may return any valid bound once it exceeds ``budget``,
    so the cheap bound is tried before the full one.
    """
    memo: dict[Word, float] = {}
    partial: dict[Word, float] = {}

    def lb(w: Word, budget: float = float("inf")) -> float:
        v = memo.get(w)
        if v is not None:
            return v
        h = partial.get(w)
        if h is None:
            h = partial[w] = helper_bound(g, w, target)
        if h + forced_bound(w, target) > budget:
            return h + forced_bound(w, target)
        v = memo[w] = alignment_bound(g, w, target) + h
        return v

    return lb


def oracle_enumerate(g: Grammar, source: Word, bounds: SearchBounds) -> dict[Word, int]:
    """Every word reachable from ``source`` within the bounds, with its least step count.

    Plain breadth-first search over words no longer than the width bound.
    """
    source = tuple(source)
    width = bounds.width_bound(g, source)
    seen = {source: 0}
    frontier = [source]
    for depth in range(1, bounds.max_depth + 1):
        nxt = []
        for w in frontier:
            for _, _, v in raw_successors(g, w):
                if len(v) <= width and v not in seen:
                    seen[v] = depth
                    nxt.append(v)
        frontier = nxt
    return seen


def oracle_layers(g: Grammar, source: Word, bounds: SearchBounds) -> list[set[Word]]:
    """Words reachable in exactly k steps, k = 0..max_depth (no pruning)."""
    source = tuple(source)
    width = bounds.width_bound(g, source)
    layers = [{source}]
    for _ in range(bounds.max_depth):
        layers.append({v for w in layers[-1] for _, _, v in raw_successors(g, w) if len(v) <= width})
    return layers


def bounded_reach(g: Grammar, source: Word, target: Word, bounds: SearchBounds) -> SearchResult:
    """Is there a derivation ``source =>^D target`` (exact) or ``=>^{<=D}`` (otherwise)?

    The ``<=`` mode returns the shortest derivation, least in step order among
    the shortest; the exact mode returns the least derivation of length D.
    """
    source, target = tuple(source), tuple(target)
    if bounds.exact:
        return _exact_reach(g, source, target, bounds)
    return _upto_reach(g, source, target, bounds)


def _upto_reach(g: Grammar, source: Word, target: Word, bounds: SearchBounds) -> SearchResult:
    stats = SearchStats()
    width = bounds.width_bound(g, source, target)
    D = bounds.max_depth
    if len(source) > width or distance_lower_bound(g, source, target) > D:
        return SearchResult(Verdict.NOT_FOUND, stats=stats)
    lb = _bound(g, target)
    parent: dict[Word, tuple | None] = {source: None}
    frontier = [source]
    depth = 0
    while frontier:
        if target in parent:
            break
        if depth == D:
            break
        nxt = []
        for w in frontier:
            stats.expanded += 1
            if bounds.budget is not None and stats.expanded > bounds.budget:
                return SearchResult(Verdict.BUDGET_EXCEEDED, stats=stats)
            for r, p, v in raw_successors(g, w):
                if len(v) > width:
                    continue
                if v in parent:
                    stats.dedup_hits += 1
                    continue
                if depth + 1 + lb(v, D - depth - 1) > D:
                    stats.pruned += 1
                    continue
                parent[v] = (w, r, p)
                nxt.append(v)
        frontier = nxt
        depth += 1
        stats.max_frontier = max(stats.max_frontier, len(frontier))
    if target not in parent:
        return SearchResult(Verdict.NOT_FOUND, stats=stats)
    steps = []
    w = target
    while parent[w] is not None:
        w, r, p = parent[w]
        steps.append(Step(r, p))
    return SearchResult(Verdict.FOUND, Derivation(g, source, tuple(reversed(steps))), stats)


def _exact_reach(g: Grammar, source: Word, target: Word, bounds: SearchBounds) -> SearchResult:
    stats = SearchStats()
    width = bounds.width_bound(g, source, target)
    D = bounds.max_depth

    lb = _bound(g, target)

    def viable(w: Word, remaining: int) -> bool:
        if (remaining - abs(len(w) - len(target))) % 2:
            return False
        return lb(w, remaining) <= remaining

    if len(source) > width or not viable(source, D):
        return SearchResult(Verdict.NOT_FOUND, stats=stats)
    layers: list[set[Word]] = [{source}]
    for depth in range(D):
        nxt: set[Word] = set()
        for w in layers[-1]:
            stats.expanded += 1
            if bounds.budget is not None and stats.expanded > bounds.budget:
                return SearchResult(Verdict.BUDGET_EXCEEDED, stats=stats)
            for _, _, v in raw_successors(g, w):
                if len(v) > width:
                    continue
                if v in nxt:
                    stats.dedup_hits += 1
                    continue
                if not viable(v, D - depth - 1):
                    stats.pruned += 1
                    continue
                nxt.add(v)
        layers.append(nxt)
        stats.max_frontier = max(stats.max_frontier, len(nxt))
        if not nxt:
            return SearchResult(Verdict.NOT_FOUND, stats=stats)
    if target not in layers[D]:
        return SearchResult(Verdict.NOT_FOUND, stats=stats)
    # Walk forward along the least successor that can still finish on time.
    good: list[set[Word]] = [set() for _ in range(D + 1)]
    good[D] = {target}
    for k in range(D - 1, -1, -1):
        good[k] = {w for w in layers[k] if any(v in good[k + 1] for _, _, v in raw_successors(g, w))}
    steps = []
    w = source
    for k in range(D):
        for s, v in successors(g, w):
            if v in good[k + 1]:
                steps.append(s)
                w = v
                break
    return SearchResult(Verdict.FOUND, Derivation(g, source, tuple(steps)), stats)


def greedy_reach(g: Grammar, source: Word, target: Word, bounds: SearchBounds) -> SearchResult:
    """``<=``-mode reachability restricted to greedy derivations.

    Every derivation has an equivalent greedy one that is no longer, so this
    is complete for the ``<=`` question as long as the width bound is not
    binding (reordering steps into leftmost order can widen intermediate
    words).  A search state is ``(word, barrier, keep)``: the first
    ``barrier`` letters must stay inert (leftmost), and the first ``keep``
    letters must survive to the end (an insertion was made while they could
    have been deleted, which eagerness only allows for survivors).
    """
    if bounds.exact:
        raise ValueError("greedy search cannot answer exact-length questions")
    source, target = tuple(source), tuple(target)
    stats = SearchStats()
    width = bounds.width_bound(g, source, target)
    D = bounds.max_depth
    deleters = g.deleters

    def lcp(w: Word, n: int) -> int:
        k = 0
        limit = min(n, len(target))
        while k < limit and w[k] == target[k]:
            k += 1
        return k

    lb = _bound(g, target)
    start = (source, 0, 0)
    if len(source) > width or lb(source) > D:
        return SearchResult(Verdict.NOT_FOUND, stats=stats)
    parent: dict[tuple, tuple | None] = {start: None}
    frontier = [start]
    hit = start if source == target else None
    depth = 0
    while frontier and hit is None and depth < D:
        nxt = []
        for state in frontier:
            w, barrier, keep = state
            stats.expanded += 1
            if bounds.budget is not None and stats.expanded > bounds.budget:
                return SearchResult(Verdict.BUDGET_EXCEEDED, stats=stats)
            for r, p, v in raw_successors(g, w, lo=barrier + 1):
                if len(v) > width:
                    continue
                if r.kind is Kind.INSERT:
                    nb = p - 1
                    nk = keep
                    # pairs b a inside the inert prefix (a may be the actor): b must survive
                    for q in range(p - 1, 0, -1):
                        if w[q] in deleters.get(w[q - 1], ()):
                            nk = max(nk, q)
                            break
                    if nk > lcp(w, nb):
                        stats.pruned += 1
                        continue
                else:
                    if p - 1 <= keep:
                        stats.pruned += 1
                        continue
                    nb, nk = p - 2, keep
                ns = (v, nb, nk)
                if ns in parent:
                    stats.dedup_hits += 1
                    continue
                if depth + 1 + lb(v, D - depth - 1) > D:
                    stats.pruned += 1
                    continue
                parent[ns] = (state, r, p)
                if v == target:
                    hit = ns
                    break
                nxt.append(ns)
            if hit is not None:
                break
        frontier = nxt
        depth += 1
        stats.max_frontier = max(stats.max_frontier, len(frontier))
    if hit is None:
        return SearchResult(Verdict.NOT_FOUND, stats=stats)
    steps = []
    node = hit
    while parent[node] is not None:
        node, r, p = parent[node]
        steps.append(Step(r, p))
    return SearchResult(Verdict.FOUND, Derivation(g, source, tuple(reversed(steps))), stats)


def oracle_derivations(g: Grammar, source: Word, max_depth: int, max_word_len: int):
    """Every derivation from ``source`` of at most ``max_depth`` steps (depth-first, no dedup)."""
    source = tuple(source)
    steps: list[Step] = []

    def walk(w: Word):
        yield Derivation(g, source, tuple(steps)), w
        if len(steps) == max_depth:
            return
        for s, v in successors(g, w):
            if len(v) <= max_word_len:
                steps.append(s)
                yield from walk(v)
                steps.pop()

    yield from walk(source)


def greedy_outputs(
    g: Grammar, source: Word, head: str, body, bounds: SearchBounds, max_len: int | None = None
) -> dict[Word, int]:
    """Every ``v`` over ``body`` with ``source =>* head.v.g`` by a greedy derivation, with its step count.

    Same state space as :func:`greedy_reach`, but the target is only known by
    its shape: a letter outside ``body`` and ``head`` costs at least one step,
    helpers are counted as in :func:`helper_bound`, and letters kept for good
    must already spell a prefix of ``head.body*``.
    """
    if bounds.exact:
        raise ValueError("greedy search cannot answer exact-length questions")
    body = frozenset(body)
    allowed = body | {head}
    shape = tuple(sorted(allowed)) + (g.final,)
    source = tuple(source)
    width = bounds.width_bound(g, source)
    D = bounds.max_depth
    deleters = g.deleters
    memo: dict[Word, float] = {}

    def lb(w: Word) -> float:
        v = memo.get(w)
        if v is None:
            stray = sum(1 for x in w[:-1] if x not in allowed)
            v = memo[w] = stray + helper_bound(g, w, shape) + (head not in w)
        return v

    def shaped(w: Word, n: int) -> int:
        k = 0
        while k < n and (w[k] == head if k == 0 else w[k] in body):
            k += 1
        return k

    def final(w: Word) -> Word | None:
        if w[0] == head and w[-1] == g.final and all(x in body for x in w[1:-1]):
            v = w[1:-1]
            if max_len is None or len(v) <= max_len:
                return v
        return None

    out: dict[Word, int] = {}
    v0 = final(source)
    if v0 is not None:
        out[v0] = 0
    start = (source, 0, 0)
    seen = {start}
    frontier = [start]
    expanded = 0
    for depth in range(D):
        nxt = []
        for w, barrier, keep in frontier:
            expanded += 1
            if bounds.budget is not None and expanded > bounds.budget:
                raise BudgetExceeded(expanded)
            for r, p, v in raw_successors(g, w, lo=barrier + 1):
                if len(v) > width:
                    continue
                if r.kind is Kind.INSERT:
                    nb, nk = p - 1, keep
                    for q in range(p - 1, 0, -1):
                        if w[q] in deleters.get(w[q - 1], ()):
                            nk = max(nk, q)
                            break
                    if nk > shaped(w, nb):
                        continue
                else:
                    if p - 1 <= keep:
                        continue
                    nb, nk = p - 2, keep
                ns = (v, nb, nk)
                if ns in seen or depth + 1 + lb(v) > D:
                    continue
                seen.add(ns)
                fv = final(v)
                if fv is not None and fv not in out:
                    out[fv] = depth + 1
                nxt.append(ns)
        frontier = nxt
    return out


class BudgetExceeded(RuntimeError):
    def __init__(self, expanded: int):
        super().__init__(f"search budget exceeded after {expanded} expansions")
        self.expanded = expanded
