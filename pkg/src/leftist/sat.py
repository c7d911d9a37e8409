"""Compiling 3-CNF formulas into acyclic leftist grammars, and back.

A satisfying valuation becomes a derivation from ``U1.0 ... Um.0 g`` to
``T1.n ... Tm.n g``; level ``j`` of the grammar reads the level ``j-1``
letters and records, per clause, whether the choices for ``x1..xj`` already
satisfy it (``T``) or not yet (``U``).  Primed letters belong to the copy that
sets ``xj`` false.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .core import Grammar, Step, Symbol, Word, dele, ins
from .derivations import Derivation, concat, rebase, replay, trace
from .simple import NablaWitness, SimpleTransformer, union
from .simple import witness_derivation as simple_witness
from .transform import Transformer, check_transformer, compose

FINAL = "g"

Literal = tuple[int, bool]  # (variable, positive?)


class CnfError(ValueError):
    pass


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[tuple[Literal, Literal, Literal], ...]

    def __post_init__(self):
        if not self.clauses:
            raise CnfError("formula needs at least one clause")
        for c in self.clauses:
            if len(c) != 3:
                raise CnfError(f"clause is not a 3-clause: {c}")
            for v, _ in c:
                if not 1 <= v <= self.num_vars:
                    raise CnfError(f"variable {v} out of range 1..{self.num_vars}")

    @property
    def m(self) -> int:
        return len(self.clauses)

    @property
    def n(self) -> int:
        return self.num_vars

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for c in self.clauses:
            lines.append(" ".join(str(v if pos else -v) for v, pos in c) + " 0")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Valuation:
    values: tuple[bool, ...]  # values[j-1] is the value of x_j

    def __len__(self) -> int:
        return len(self.values)

    def restrict(self, j: int) -> "Valuation":
        return Valuation(self.values[:j])

    def literal(self, lit: Literal) -> bool | None:
        v, pos = lit
        if v > len(self.values):
            return None
        return self.values[v - 1] == pos

    def satisfies_clause(self, clause: Sequence[Literal]) -> bool:
        return any(self.literal(l) for l in clause)

    def satisfies(self, f: "CnfFormula") -> bool:
        return all(self.satisfies_clause(c) for c in f.clauses)


# -- DIMACS ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RawCnf:
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]


def parse_dimacs(text: str) -> RawCnf:
    num_vars = None
    declared = None
    clauses: list[tuple[int, ...]] = []
    cur: list[int] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise CnfError(f"line {lineno}: bad problem line")
            num_vars, declared = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise CnfError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                x = int(tok)
            except ValueError:
                raise CnfError(f"line {lineno}: not an integer: {tok!r}") from None
            if x == 0:
                clauses.append(tuple(cur))
                cur = []
            elif abs(x) > num_vars:
                raise CnfError(f"line {lineno}: variable {abs(x)} exceeds declared {num_vars}")
            else:
                cur.append(x)
    if cur:
        clauses.append(tuple(cur))
    if num_vars is None:
        raise CnfError("missing problem line")
    if declared is not None and declared != len(clauses):
        raise CnfError(f"header declares {declared} clauses, found {len(clauses)}")
    return RawCnf(num_vars, tuple(clauses))


@dataclass
class PreprocessReport:
    dropped_tautologies: list[int] = field(default_factory=list)  # 0-based raw clause indices
    padded: list[int] = field(default_factory=list)
    deduplicated: list[int] = field(default_factory=list)
    forcing_var: int | None = None
    unsat: bool = False  # an empty clause was present


def preprocess(raw: RawCnf) -> tuple[CnfFormula | None, PreprocessReport]:
    """Normalize to exact 3-clauses without tautologies, plus a forcing variable.

    The returned formula is equisatisfiable with ``raw`` and every satisfying
    valuation sets its last variable true.  Returns ``(None, report)`` when an
    empty clause makes the input trivially unsatisfiable.
    """
    rep = PreprocessReport()
    out = []
    for k, c in enumerate(raw.clauses):
        if not c:
            rep.unsat = True
            return None, rep
        lits = list(dict.fromkeys(c))
        if len(lits) < len(c):
            rep.deduplicated.append(k)
        if any(-x in lits for x in lits):
            rep.dropped_tautologies.append(k)
            continue
        if len(lits) > 3:
            raise CnfError(f"clause {k + 1} has width {len(lits)} > 3")
        if len(lits) < 3:
            rep.padded.append(k)
            lits += [lits[-1]] * (3 - len(lits))
        out.append(tuple((abs(x), x > 0) for x in lits))
    z = raw.num_vars + 1
    rep.forcing_var = z
    out.append(((z, True),) * 3)
    return CnfFormula(z, tuple(out)), rep


def truth_table_sat(f: CnfFormula) -> Valuation | None:
    """The least satisfying valuation in the order false < true, x1 most significant."""
    for bits in itertools.product((False, True), repeat=f.num_vars):
        theta = Valuation(bits)
        if theta.satisfies(f):
            return theta
    return None


# -- symbols ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LevelSymbol:
    letter: str  # "T" or "U"
    primed: bool
    index: int  # clause, 1..m
    level: int  # 0..n

    @property
    def name(self) -> Symbol:
        return f"{self.letter}{chr(39) if self.primed else ''}{self.index}.{self.level}"

    @classmethod
    def parse(cls, s: Symbol) -> "LevelSymbol | None":
        if not s or s[0] not in "TU":
            return None
        primed = s[1:2] == "'"
        body = s[2:] if primed else s[1:]
        i, dot, j = body.partition(".")
        if not dot or not i.isdigit() or not j.isdigit():
            return None
        return cls(s[0], primed, int(i), int(j))


def sym(letter: str, i: int, j: int, primed: bool = False) -> Symbol:
    return LevelSymbol(letter, primed, i, j).name


def level_alphabet(m: int, j: int, copies=(False, True)) -> frozenset[Symbol]:
    return frozenset(sym(L, i, j, p) for L in "TU" for p in copies for i in range(1, m + 1))


def start_word(f: CnfFormula) -> Word:
    return tuple(sym("U", i, 0) for i in range(1, f.m + 1)) + (FINAL,)


def goal_word(f: CnfFormula) -> Word:
    return tuple(sym("T", i, f.n) for i in range(1, f.m + 1)) + (FINAL,)


# -- grammars ---------------------------------------------------------------------------


def _satisfied_by(clause, j: int, b: bool) -> bool:
    return any(v == j and pos == b for v, pos in clause)


def build_level_transformer(f: CnfFormula, j: int, b: bool) -> SimpleTransformer:
    """Level ``j`` for the choice ``x_j = b``: reads level ``j-1``, writes one copy of level ``j``."""
    if not 1 <= j <= f.n:
        raise CnfError(f"level {j} out of range 1..{f.n}")
    m, primed = f.m, not b
    out = lambda L, i: sym(L, i, j, primed)  # noqa: E731
    inp = lambda L, i, p: sym(L, i, j - 1, p)  # noqa: E731
    rules = set()
    for L in "TU":
        rules.add(ins(FINAL, out(L, m)))
    for i in range(1, m):
        for L1 in "TU":
            for L2 in "TU":
                rules.add(ins(out(L1, i + 1), out(L2, i)))
    for i, clause in enumerate(f.clauses, start=1):
        for p in (False, True):
            rules.add(dele(out("T", i), inp("T", i, p)))
            rules.add(dele(out("U", i), inp("U", i, p)))
            if _satisfied_by(clause, j, b):
                rules.add(dele(out("T", i), inp("U", i, p)))
    A = level_alphabet(m, j - 1)
    C = level_alphabet(m, j, (primed,))
    g = Grammar(A | C, FINAL, frozenset(rules))
    return SimpleTransformer(check_transformer(g, A, (), C))


def build_level_union(f: CnfFormula, j: int) -> SimpleTransformer:
    return union(build_level_transformer(f, j, True), build_level_transformer(f, j, False))


def build_phi_grammar(f: CnfFormula) -> Transformer:
    t = build_level_union(f, 1).base
    for j in range(2, f.n + 1):
        t = compose(t, build_level_union(f, j).base)
    return t


# -- derivations --------------------------------------------------------------------------


def coding_word(f: CnfFormula, theta: Valuation, j: int) -> Word:
    """The j-clean word coding ``theta_j`` in the copy of ``theta(x_j)`` (unprimed at j = 0)."""
    primed = j > 0 and not theta.values[j - 1]
    t = theta.restrict(j)
    return tuple(sym("T" if t.satisfies_clause(c) else "U", i, j, primed) for i, c in enumerate(f.clauses, start=1))


def witness_derivation(f: CnfFormula, theta: Valuation, grammar: Transformer | None = None) -> Derivation:
    """The level-by-level derivation of length 2mn for a satisfying valuation."""
    if len(theta) != f.n or not theta.satisfies(f):
        raise CnfError("valuation does not satisfy the formula")
    big = (grammar or build_phi_grammar(f)).grammar
    ident = NablaWitness(tuple(range(1, f.m + 1)))
    d = Derivation(big, start_word(f))
    for j in range(1, f.n + 1):
        st = build_level_transformer(f, j, theta.values[j - 1])
        seg = simple_witness(st, coding_word(f, theta, j - 1), coding_word(f, theta, j), ident)
        d = concat(d, rebase(seg, big))
    return d


def level_segments(f: CnfFormula, d: Derivation) -> list[int]:
    """Steps per level: an insertion counts for the level it writes, a deletion for its actor's."""
    counts = [0] * (f.n + 1)
    for s in d.steps:
        a = s.rule.patient if s.rule.kind.name == "INSERT" else s.rule.actor
        ls = LevelSymbol.parse(a)
        if ls is None:
            raise CnfError(f"step outside the level grammar: {s}")
        counts[ls.level] += 1
    return counts[1:]


def decode_assignment(f: CnfFormula, d: Derivation) -> Valuation:
    """Read a satisfying valuation off a derivation from the start to the goal word.

    Level-j letters on deletion chains leading to the goal letters decide
    ``x_j`` (unprimed means true).  If several copies occur on those chains,
    the combinations are tried in order and the first satisfying one wins.
    """
    words = replay(d)
    if words[0] != start_word(f) or words[-1] != goal_word(f):
        raise CnfError("derivation endpoints are not the start and goal words")
    t = trace(d)
    # letters transitively responsible for deleting letters on the chain
    survivors = [t.ids[-1][k] for k in range(len(words[-1]) - 1)]
    erased_by: dict[int, list[int]] = {}
    for lid, death in t.death.items():
        if death is not None:
            erased_by.setdefault(death.by, []).append(lid)
    seen, stack = set(survivors), list(survivors)
    while stack:
        x = stack.pop()
        for y in erased_by.get(x, ()):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    copies: list[set[bool]] = [set() for _ in range(f.n + 1)]
    for lid in seen:
        ls = LevelSymbol.parse(t.symbol[lid])
        if ls and ls.level >= 1:
            copies[ls.level].add(not ls.primed)
    options = [sorted(c, reverse=True) or [True, False] for c in copies[1:]]
    for bits in itertools.product(*options):
        theta = Valuation(tuple(bits))
        if theta.satisfies(f):
            return theta
    raise CnfError("decoded valuation does not satisfy the formula")


# -- the padded instance -------------------------------------------------------------------


def pad_symbol(i: int) -> Symbol:
    return f"P{i}"


@dataclass(frozen=True)
class HardInstance:
    grammar: Grammar
    derivation: Derivation
    k: int
    segments: tuple[int, int, int, int]


def build_hard_instance(f: CnfFormula, k: int) -> HardInstance:
    """Add a chain of k padding letters giving a direct derivation of length 2m + 2k.

    That derivation is mu-minimal exactly when the formula is unsatisfiable.
    """
    m, n = f.m, f.n
    if k <= m * (n - 1):
        raise CnfError(f"padding too small: need k > m(n-1) = {m * (n - 1)}")
    base = build_phi_grammar(f).grammar
    chain = [sym("T", 1, n)] + [pad_symbol(i) for i in range(1, k + 1)]
    rules = set(base.rules)
    for i in range(1, k + 1):
        rules.add(ins(chain[i - 1], chain[i]))
        rules.add(dele(chain[i - 1], chain[i]))
    for i in range(1, m + 1):
        rules.add(dele(chain[k], sym("U", i, 0)))
    g = Grammar(base.alphabet | frozenset(chain[1:]), FINAL, frozenset(rules))
    steps: list[Step] = []
    goal_letters = [sym("T", i, n) for i in range(1, m + 1)]
    actor = FINAL
    for i in range(m, 0, -1):  # insert the goal letters
        steps.append(Step(ins(actor, goal_letters[i - 1]), m + 1))
        actor = goal_letters[i - 1]
    for i in range(1, k + 1):  # grow the padding chain in front of them
        steps.append(Step(ins(chain[i - 1], chain[i]), m + 1))
    for i in range(m, 0, -1):  # the last padding letter erases the start letters
        steps.append(Step(dele(chain[k], sym("U", i, 0)), i + 1))
    for i in range(k, 0, -1):  # the chain erases itself from the left
        steps.append(Step(dele(chain[i - 1], chain[i]), 2))
    d = Derivation(g, start_word(f), tuple(steps))
    assert d.final == goal_word(f)
    return HardInstance(g, d, k, (m, k, m, k))


def symbol_table(g: Grammar) -> list[tuple[Symbol, str, str, int, int]]:
    """Rows (symbol, letter, copy, clause, level) for the level symbols of a compiled grammar."""
    rows = []
    for s in sorted(g.alphabet):
        ls = LevelSymbol.parse(s)
        if ls:
            rows.append((s, ls.letter, "false" if ls.primed else "true", ls.index, ls.level))
    return rows



# -- solving by reachability -------------------------------------------------------------


@dataclass
class SolveResult:
    satisfiable: bool | None  # None: search budget ran out
    valuation: Valuation | None
    derivation: Derivation | None
    expanded: int


def solve(f: CnfFormula, mode: str = "greedy", budget: int | None = None) -> SolveResult:
    """Decide ``f`` by searching its grammar for a derivation of length 2mn (``mode``: greedy, upto or exact)."""
    from .reach import SearchBounds, Verdict, bounded_reach, greedy_reach

    g = build_phi_grammar(f).grammar
    D = 2 * f.m * f.n
    width = f.m + 2
    search = greedy_reach if mode == "greedy" else bounded_reach
    if mode not in ("greedy", "upto", "exact"):
        raise ValueError(f"unknown search mode {mode!r}")
    res = search(g, start_word(f), goal_word(f), SearchBounds(D, width, exact=mode == "exact", budget=budget))
    if res.verdict is Verdict.BUDGET_EXCEEDED:
        return SolveResult(None, None, None, res.stats.expanded)
    if not res.found:
        return SolveResult(False, None, None, res.stats.expanded)
    return SolveResult(True, decode_assignment(f, res.derivation), res.derivation, res.stats.expanded)
