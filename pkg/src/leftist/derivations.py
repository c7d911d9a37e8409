"""Derivations: replay, letter tracing, the greedy disciplines and normalization."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

from .core import (
    Grammar,
    GrammarError,
    Kind,
    Rule,
    Step,
    StepError,
    Word,
    apply_step,
    distance_lower_bound,
    format_word,
    parse_word,
    successors,
)


class DerivationError(ValueError):
    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"invalid step {index}: {reason}")


@dataclass(frozen=True)
class Derivation:
    grammar: Grammar
    initial: Word
    steps: tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "initial", tuple(self.initial))
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    @property
    def final(self) -> Word:
        return replay(self)[-1]

    def measure(self) -> tuple[int, ...]:
        return measure(self.steps)


def measure(steps: Sequence[Step]) -> tuple[int, ...]:
    """The tuple <n, p1, ..., pn>; tuples compare lexicographically, length first."""
    return (len(steps), *(s.position for s in steps))


def replay(d: Derivation) -> list[Word]:
    words = [d.initial]
    for k, s in enumerate(d.steps, start=1):
        try:
            words.append(apply_step(d.grammar, words[-1], s))
        except StepError as e:
            raise DerivationError(k, str(e)) from None
    return words


# -- letter tracing ---------------------------------------------------------


@dataclass(frozen=True)
class Birth:
    by: int | None = None  # None: letter of the initial word
    step: int | None = None


@dataclass(frozen=True)
class Death:
    by: int | None = None  # None: survives to the final word
    step: int | None = None


@dataclass
class TracedDerivation:
    derivation: Derivation
    words: list[Word]
    ids: list[tuple[int, ...]]  # letter ids of each intermediate word
    symbol: dict[int, str]
    birth: dict[int, Birth]
    death: dict[int, Death]
    active: list[int]  # id of the active letter of each step
    useful: frozenset[int] = field(default_factory=frozenset)

    @property
    def useless(self) -> list[int]:
        return sorted(set(self.symbol) - self.useful)

    def last_active(self) -> dict[int, int]:
        """Letter id -> index (1-based) of the last step where it is active."""
        out: dict[int, int] = {}
        for k, lid in enumerate(self.active, start=1):
            out[lid] = k
        return out


def trace(d: Derivation) -> TracedDerivation:
    words = replay(d)
    cur = tuple(range(len(d.initial)))
    symbol = dict(enumerate(d.initial))
    birth = {i: Birth() for i in cur}
    death: dict[int, Death] = {}
    ids = [cur]
    active = []
    fresh = len(cur)
    for k, s in enumerate(d.steps, start=1):
        p = s.position
        actor = cur[p - 1]
        active.append(actor)
        if s.rule.kind is Kind.INSERT:
            symbol[fresh] = s.rule.patient
            birth[fresh] = Birth(actor, k)
            cur = cur[: p - 1] + (fresh,) + cur[p - 1 :]
            fresh += 1
        else:
            death[cur[p - 2]] = Death(actor, k)
            cur = cur[: p - 2] + cur[p - 1 :]
        ids.append(cur)
    for lid in symbol:
        death.setdefault(lid, Death())

    # usefulness: letters of the endpoints, and (transitively) letters that act on useful letters
    acts_on: dict[int, set[int]] = {}
    for lid, b in birth.items():
        if b.by is not None:
            acts_on.setdefault(b.by, set()).add(lid)
    for lid, dth in death.items():
        if dth.by is not None:
            acts_on.setdefault(dth.by, set()).add(lid)
    useful = set(ids[0]) | set(ids[-1])
    changed = True
    while changed:
        changed = False
        for lid, victims in acts_on.items():
            if lid not in useful and victims & useful:
                useful.add(lid)
                changed = True
    return TracedDerivation(d, words, ids, symbol, birth, death, active, frozenset(useful))


# -- classification ----------------------------------------------------------


@dataclass(frozen=True)
class DerivationReport:
    leftmost: bool
    eager: bool
    pure: bool
    measure: tuple[int, ...]
    useless: tuple[int, ...]
    leftmost_violation: int | None = None  # step index
    eager_violation: int | None = None
    impure_letter: int | None = None

    @property
    def greedy(self) -> bool:
        return self.leftmost and self.eager and self.pure

    def as_dict(self) -> dict:
        return {
            "leftmost": self.leftmost,
            "eager": self.eager,
            "pure": self.pure,
            "greedy": self.greedy,
            "measure": list(self.measure),
            "useless": list(self.useless),
        }


def _leftmost_violation(t: TracedDerivation) -> int | None:
    last = t.last_active()
    for k, s in enumerate(t.derivation.steps, start=1):
        prefix = t.ids[k - 1][: s.position - 1]
        if any(last.get(lid, 0) > k for lid in prefix):
            return k
    return None


def _eager_candidates(t: TracedDerivation, k: int) -> list[int]:
    """0-based indices q where ``word[q], word[q+1] = b, a`` witnesses a missed deletion before step k.

    ``a ~> b`` must be a rule, ``b`` must be deleted later, and ``b`` together
    with everything on its left must stay inert from step k on.
    """
    g = t.derivation.grammar
    last = t.last_active()
    word, lids = t.words[k - 1], t.ids[k - 1]
    out = []
    for q in range(len(word) - 1):
        if last.get(lids[q], 0) >= k:
            break  # this letter and all later ones are not part of an inert prefix
        if word[q + 1] in g.deleters.get(word[q], ()) and t.death[lids[q]].by is not None:
            out.append(q)
    return out


def _eager_violation(t: TracedDerivation) -> int | None:
    for k, s in enumerate(t.derivation.steps, start=1):
        if s.rule.kind is Kind.INSERT and _eager_candidates(t, k):
            return k
    return None


def classify(d: Derivation) -> DerivationReport:
    t = trace(d)
    lm = _leftmost_violation(t)
    ev = _eager_violation(t)
    useless = tuple(t.useless)
    return DerivationReport(
        leftmost=lm is None,
        eager=ev is None,
        pure=not useless,
        measure=d.measure(),
        useless=useless,
        leftmost_violation=lm,
        eager_violation=ev,
        impure_letter=useless[0] if useless else None,
    )


# -- greedy normalization ----------------------------------------------------


def _drop_useless(t: TracedDerivation) -> tuple[Step, ...] | None:
    """Remove a useless letter: skip its insertion and its deletion.

    A useless letter is inert (it acts on nothing useful; by induction on the
    inserts-or-deletes order, the last-inserted useless letter acts on
    nothing at all), so the remaining steps replay with shifted positions.
    """
    useless = set(t.useless)
    for lid in sorted(useless, key=lambda x: -t.birth[x].step):
        if lid in t.active:
            continue
        return _excise(t, lid)
    return None


def _excise(t: TracedDerivation, lid: int) -> tuple[Step, ...]:
    born, dies = t.birth[lid].step, t.death[lid].step
    out = []
    for k, s in enumerate(t.derivation.steps, start=1):
        if k in (born, dies):
            continue
        p = s.position
        if born < k < dies:
            idx = t.ids[k - 1].index(lid)
            if idx < p - 1:
                p -= 1
        out.append(Step(s.rule, p))
    return tuple(out)


def _eager_repair(t: TracedDerivation) -> tuple[Step, ...] | None:
    """Perform the neglected deletion right away and skip its later duplicate."""
    k = _eager_violation(t)
    if k is None:
        return None
    q = _eager_candidates(t, k)[0]
    word, lid = t.words[k - 1], t.ids[k - 1][q]
    steps = t.derivation.steps
    dies = t.death[lid].step
    head = list(steps[: k - 1]) + [Step(Rule(Kind.DELETE, word[q + 1], word[q]), q + 2)]
    tail = []
    for j in range(k, len(steps) + 1):
        if j == dies:
            continue
        s = steps[j - 1]
        if j > dies:  # both derivations agree again once the letter is gone
            tail.append(s)
            continue
        idx = t.ids[j - 1].index(lid)
        tail.append(Step(s.rule, s.position - 1 if idx < s.position - 1 else s.position))
    return tuple(head + tail)


def _swap_repair(d: Derivation) -> tuple[Step, ...] | None:
    """Exchange the first adjacent pair of non-interfering steps that is out of order."""
    steps = d.steps
    for i in range(len(steps) - 1):
        s1, s2 = steps[i], steps[i + 1]
        p1, p2 = s1.position, s2.position
        if p2 < p1 - 1 or (p2 == p1 - 1 and s1.rule.kind is Kind.INSERT):
            shift = 1 if s2.rule.kind is Kind.INSERT else -1
            return steps[:i] + (s2, Step(s1.rule, p1 + shift)) + steps[i + 2 :]
    return None


def greedy_normalize(d: Derivation) -> Derivation:
    """An equivalent greedy derivation with measure no larger than ``d``'s.

    Repairs are tried in order purity, leftmost-swap, eagerness.  Each one
    yields an equivalent derivation of strictly smaller measure (the eager
    repair needs the swap repair to be exhausted first when the neglecting
    letter is itself the active one), so the loop ends, and it ends at a
    derivation with no repair available, i.e. a greedy one.
    """
    replay(d)
    cur = d
    while True:
        t = trace(cur)
        new = _drop_useless(t)
        if new is None:
            new = _swap_repair(cur)
        if new is None:
            new = _eager_repair(t)
        if new is None:
            return cur
        nxt = Derivation(cur.grammar, cur.initial, new)
        assert measure(new) < cur.measure()
        cur = nxt


# -- mu-minimality -------------------------------------------------------------


class Minimality(enum.Enum):
    MINIMAL = "minimal"
    NOT_MINIMAL = "not-minimal"
    BUDGET_EXCEEDED = "budget-exceeded"


@dataclass(frozen=True)
class MinimalityResult:
    verdict: Minimality
    witness: Derivation | None = None
    explored: int = 0


class _OutOfBudget(Exception):
    pass


def _least_derivation(
    g: Grammar, start: Word, goal: Word, n: int, ceiling: tuple[int, ...] | None, budget: list[int]
) -> tuple[Step, ...] | None:
    """The ``n``-step derivation ``start =>* goal`` with least positions, strictly below ``ceiling``.

    Depth-first in position order; a branch is cut once its positions so far
    compare greater than the reference (best found so far, else the ceiling).
    """
    best_steps: tuple[Step, ...] | None = None
    ref = ceiling
    path: list[Step] = []
    pos: list[int] = []

    def rec(w: Word):
        nonlocal best_steps, ref
        depth = len(path)
        if ref is not None and tuple(pos) > ref[:depth]:
            return
        remaining = n - depth
        if remaining == 0:
            if w == goal and (ref is None or tuple(pos) < ref):
                best_steps, ref = tuple(path), tuple(pos)
            return
        if distance_lower_bound(g, w, goal) > remaining:
            return
        for s, nw in successors(g, w):
            budget[0] -= 1
            if budget[0] < 0:
                raise _OutOfBudget
            path.append(s)
            pos.append(s.position)
            rec(nw)
            path.pop()
            pos.pop()

    rec(start)
    return best_steps


def is_mu_minimal(d: Derivation, budget: int = 1_000_000) -> MinimalityResult:
    """Brute-force check that no equivalent derivation has a smaller measure.

    Every derivation between the same endpoints with at most ``len(d)`` steps
    is a candidate; shorter ones are smaller outright.  The witness returned
    is the equivalent derivation of least measure.
    """
    words = replay(d)
    g, start, goal = d.grammar, words[0], words[-1]
    left = [budget]
    try:
        for n in range(len(d.steps) + 1):
            ceiling = tuple(s.position for s in d.steps) if n == len(d.steps) else None
            found = _least_derivation(g, start, goal, n, ceiling, left)
            if found is not None:
                return MinimalityResult(Minimality.NOT_MINIMAL, Derivation(g, start, found), budget - left[0])
    except _OutOfBudget:
        return MinimalityResult(Minimality.BUDGET_EXCEEDED, None, budget)
    return MinimalityResult(Minimality.MINIMAL, None, budget - left[0])


# -- file format -------------------------------------------------------------


def parse_derivation(text: str, g: Grammar) -> Derivation:
    initial: Word | None = None
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if toks[0] == "from":
            if initial is not None:
                raise GrammarError("duplicate 'from' line", lineno, 1)
            initial = parse_word(" ".join(toks[1:]), g.symbols)
        elif toks[0] in ("ins", "del"):
            if initial is None:
                raise GrammarError("step before 'from' line", lineno, 1)
            if len(toks) != 5 or toks[3] != "@":
                raise GrammarError(f"expected '{toks[0]} <actor> <patient> @ <pos>'", lineno, 1)
            try:
                pos = int(toks[4])
            except ValueError:
                raise GrammarError(f"bad position {toks[4]!r}", lineno, line.index(toks[4]) + 1) from None
            kind = Kind.INSERT if toks[0] == "ins" else Kind.DELETE
            steps.append(Step(Rule(kind, toks[1], toks[2]), pos))
        else:
            raise GrammarError(f"unknown directive {toks[0]!r}", lineno, 1)
    if initial is None:
        raise GrammarError("missing 'from' line")
    return Derivation(g, initial, tuple(steps))


def format_derivation(d: Derivation) -> str:
    lines = [f"from {format_word(d.initial)}"]
    for s in d.steps:
        verb = "ins" if s.rule.kind is Kind.INSERT else "del"
        lines.append(f"{verb} {s.rule.actor} {s.rule.patient} @ {s.position}")
    return "\n".join(lines) + "\n"


def concat(d1: Derivation, d2: Derivation) -> Derivation:
    if d1.final != d2.initial:
        raise ValueError("derivations do not meet")
    return Derivation(d1.grammar, d1.initial, d1.steps + d2.steps)


def rebase(d: Derivation, g: Grammar) -> Derivation:
    """The same steps, read in a larger grammar."""
    return Derivation(g, d.initial, d.steps)


def frame(d: Derivation, left: Sequence[str]) -> Derivation:
    """Shift a derivation right by prepending an inert word."""
    off = len(left)
    return Derivation(d.grammar, tuple(left) + d.initial, tuple(Step(s.rule, s.position + off) for s in d.steps))

