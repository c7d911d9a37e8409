"""The ``lgr`` command line.

Exit codes: 0 success, 64 usage, 65 domain error, 66 file error.  ``derive``
reports its verdict as 0 found, 1 not found, 2 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time
from pathlib import Path

from . import FORMAT_VERSION, __version__
from .closure import AnchoredTransformer, ClosureError, Reading, Renaming, transitive_closure
from .core import Grammar, GrammarError, StepError, format_grammar, format_word, parse_grammar, parse_word
from .derivations import (
    DerivationError,
    classify,
    format_derivation,
    greedy_normalize,
    is_mu_minimal,
    parse_derivation,
)
from .reach import SearchBounds, Verdict, bounded_reach, greedy_reach
from .sat import CnfError, build_hard_instance, build_phi_grammar, parse_dimacs, preprocess, solve, symbol_table
from .simple import SimpleTransformer, as_simple, nabla, union
from .transform import (
    RelationBounds,
    Transformer,
    TransformerError,
    bounded_relation,
    compose,
    format_transformer,
    parse_transformer,
)

EX_USAGE, EX_DATAERR, EX_NOINPUT = 64, 65, 66


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise FileNotFoundError(f"{path}: {e.strerror or e}") from e


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise FileNotFoundError(f"{path}: {e.strerror or e}") from e


def _grammar(path: str) -> Grammar:
    return parse_grammar(_read(path))


def _transformer(path: str) -> Transformer | AnchoredTransformer:
    return parse_transformer(_read(path))


def _plain(t) -> Transformer:
    return t.base if isinstance(t, AnchoredTransformer) else t


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, default=str))
    else:
        print(text)


# -- subcommands ---------------------------------------------------------------------


def cmd_check(args) -> int:
    text = _read(args.grammar)
    g = parse_grammar(text, {"inputs": [], "temps": [], "outputs": [], "anchors": [], "meta": []})
    out = {"grammar": True, "acyclic": g.is_acyclic(), "symbols": len(g.alphabet), "rules": len(g.rules)}
    lines = ["LGr: ok", f"acyclic: {'yes' if out['acyclic'] else 'no'}"]
    if any(line.split()[:1] in (["inputs"], ["outputs"], ["temps"]) for line in text.splitlines()):
        t = _transformer(args.grammar)
        out["transformer"] = True
        lines.append("LTr typing: ok")
        if isinstance(t, AnchoredTransformer):
            out["anchored"] = True
            lines.append(f"anchors: {t.b1} {t.b2}")
        try:
            as_simple(_plain(t))
            out["simple"] = True
            lines.append("simple-LTr shape: ok")
        except (TransformerError, ValueError) as e:
            out["simple"] = False
            lines.append(f"simple-LTr shape: no ({e})")
    _emit(args, out, "\n".join(lines))
    return 0


def cmd_derive(args) -> int:
    g = _grammar(args.grammar)
    src = parse_word(args.source, g.symbols)
    dst = parse_word(args.target, g.symbols)
    bounds = SearchBounds(args.steps, args.max_word, exact=args.exact, budget=args.budget)
    t0 = time.perf_counter()
    res = (greedy_reach if args.greedy else bounded_reach)(g, src, dst, bounds)
    elapsed = time.perf_counter() - t0
    code = {Verdict.FOUND: 0, Verdict.NOT_FOUND: 1, Verdict.BUDGET_EXCEEDED: 2}[res.verdict]
    if res.found and args.emit:
        _write(args.emit, format_derivation(res.derivation))
    payload = {"verdict": res.verdict.value, "stats": res.stats.as_dict(), "seconds": round(elapsed, 3)}
    if res.found:
        payload["steps"] = len(res.derivation)
        payload["derivation"] = format_derivation(res.derivation)
    text = res.verdict.value
    if res.found:
        text += f" ({len(res.derivation)} steps)\n" + format_derivation(res.derivation).rstrip()
    _emit(args, payload, text)
    return code


def _derivation(args):
    g = _grammar(args.grammar)
    return parse_derivation(_read(args.derivation), g)


def cmd_verify(args) -> int:
    rep = classify(_derivation(args))
    d = rep.as_dict()
    _emit(args, d, "\n".join(f"{k}: {v}" for k, v in d.items()))
    return 0


def cmd_normalize(args) -> int:
    d = greedy_normalize(_derivation(args))
    text = format_derivation(d)
    if args.output:
        _write(args.output, text)
    _emit(args, {"steps": len(d), "derivation": text}, text.rstrip())
    return 0


def cmd_muminimal(args) -> int:
    res = is_mu_minimal(_derivation(args), budget=args.budget)
    payload = {"verdict": res.verdict.value, "explored": res.explored}
    text = res.verdict.value
    if res.witness is not None:
        payload["witness"] = format_derivation(res.witness)
        text += "\nsmaller witness:\n" + format_derivation(res.witness).rstrip()
    _emit(args, payload, text)
    return 0


def cmd_compose(args) -> int:
    t = compose(_plain(_transformer(args.first)), _plain(_transformer(args.second)))
    return _save_transformer(args, t)


def cmd_union(args) -> int:
    u = union(as_simple(_plain(_transformer(args.first))), as_simple(_plain(_transformer(args.second))))
    return _save_transformer(args, u.base if isinstance(u, SimpleTransformer) else u)


def _save_transformer(args, t: Transformer, anchors=()) -> int:
    text = format_transformer(t, anchors)
    if args.output:
        _write(args.output, text)
    _emit(args, {"symbols": len(t.grammar.alphabet), "rules": len(t.rules), "text": text}, text.rstrip())
    return 0


def cmd_nabla(args) -> int:
    st = as_simple(_plain(_transformer(args.grammar)))
    u = parse_word(args.source, st.base.grammar.symbols)
    v = parse_word(args.target, st.base.grammar.symbols)
    w = nabla(st, u, v)
    _emit(args, {"witness": list(w.h) if w else None}, " ".join(map(str, w.h)) if w else "none")
    return 0


def cmd_relation(args) -> int:
    t = _transformer(args.grammar)
    bounds = RelationBounds(args.max_input, args.max_word, args.max_depth)
    if isinstance(t, AnchoredTransformer):
        from .closure import anchored_relation

        rel = anchored_relation(t, bounds)
    else:
        rel = bounded_relation(t, bounds)
    pairs = sorted(rel.pairs)
    if args.format == "tsv":
        text = "\n".join(f"{format_word(u) or '-'}\t{format_word(v) or '-'}" for u, v in pairs)
    else:
        text = "\n".join(f"{format_word(u) or '-'} => {format_word(v) or '-'}" for u, v in pairs)
    _emit(args, {"pairs": [[list(u), list(v)] for u, v in pairs]}, text)
    return 0


def cmd_closure(args) -> int:
    at = _transformer(args.grammar)
    if not isinstance(at, AnchoredTransformer):
        raise ClosureError("closure needs an anchored transformer ('anchors <b1> <b2>' header)")
    r = Renaming.parse(args.map)
    gp = transitive_closure(
        at, r, reading=Reading(args.reading), skip_precheck=args.skip_precheck,
        anchored_exit=args.anchored_exit, primed_entry=args.primed_entry,
    )
    return _save_transformer(args, gp.base, (gp.b1, gp.b2))


def _cnf(path: str):
    raw = parse_dimacs(_read(path))
    f, report = preprocess(raw)
    return f, report, raw


def cmd_cnf_compile(args) -> int:
    f, report, _ = _cnf(args.cnf)
    if f is None:
        raise CnfError("formula is trivially unsatisfiable (empty clause)")
    t = build_phi_grammar(f)
    text = format_grammar(t.grammar, [f"# compiled from {args.cnf}: m={f.m} n={f.n}"])
    meta = "\n".join("\t".join(map(str, row)) for row in symbol_table(t.grammar)) + "\n"
    if args.output:
        _write(args.output, text)
        _write(str(Path(args.output).with_suffix(".meta")), meta)
    _emit(args, {"m": f.m, "n": f.n, "rules": len(t.rules), "preprocess": report.__dict__}, text.rstrip())
    return 0


def cmd_cnf_solve(args) -> int:
    f, _, raw = _cnf(args.cnf)
    if f is None:
        _emit(args, {"result": "UNSAT"}, "UNSAT")
        return 0
    res = solve(f, mode=args.mode, budget=args.budget)
    if res.satisfiable is None:
        _emit(args, {"result": "UNKNOWN", "expanded": res.expanded}, "UNKNOWN (budget exceeded)")
        return 2
    if not res.satisfiable:
        _emit(args, {"result": "UNSAT", "expanded": res.expanded}, "UNSAT")
        return 0
    vals = res.valuation.restrict(raw.num_vars).values
    lits = [i + 1 if b else -(i + 1) for i, b in enumerate(vals)]
    _emit(args, {"result": "SAT", "assignment": lits, "expanded": res.expanded}, "SAT\n" + " ".join(map(str, lits)) + " 0")
    return 0


def cmd_cnf_hard(args) -> int:
    f, _, _ = _cnf(args.cnf)
    if f is None:
        raise CnfError("formula is trivially unsatisfiable (empty clause)")
    hi = build_hard_instance(f, args.k)
    text = format_grammar(hi.grammar, [f"# padded instance k={hi.k}"])
    if args.output:
        _write(args.output, text)
    if args.derivation:
        _write(args.derivation, format_derivation(hi.derivation))
    _emit(args, {"k": hi.k, "steps": len(hi.derivation), "segments": list(hi.segments)}, text.rstrip())
    return 0


# -- argument parsing -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=0, help="seed for any randomness (default 0)")
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; searches run sequentially")

    p = _Parser(prog="lgr", description="Leftist grammars and transformers.", parents=[common])
    p.add_argument("--version", action="version", version=f"lgr {__version__} (format {FORMAT_VERSION})")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    sp = add("check", cmd_check, "parse and classify a grammar or transformer")
    sp.add_argument("grammar")

    sp = add("derive", cmd_derive, "search for a bounded derivation")
    sp.add_argument("grammar")
    sp.add_argument("--from", dest="source", required=True)
    sp.add_argument("--to", dest="target", required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--exact", action="store_true")
    sp.add_argument("--greedy", action="store_true", help="only search greedy derivations")
    sp.add_argument("--max-word", type=int, default=None)
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--emit", default=None, help="write the derivation found here")

    for name, fn, help_ in (
        ("verify", cmd_verify, "classify a derivation"),
        ("normalize", cmd_normalize, "rewrite a derivation into greedy form"),
        ("muminimal", cmd_muminimal, "brute-force mu-minimality check"),
    ):
        sp = add(name, fn, help_)
        sp.add_argument("grammar")
        sp.add_argument("derivation")
        if name == "normalize":
            sp.add_argument("-o", "--output", default=None)
        if name == "muminimal":
            sp.add_argument("--budget", type=int, default=1_000_000)

    for name, fn, help_ in (("compose", cmd_compose, "sequential composition"), ("union", cmd_union, "union of simple transformers")):
        sp = add(name, fn, help_)
        sp.add_argument("first")
        sp.add_argument("second")
        sp.add_argument("-o", "--output", default=None)

    sp = add("nabla", cmd_nabla, "witness map of a simple transformer")
    sp.add_argument("grammar")
    sp.add_argument("--from", dest="source", required=True)
    sp.add_argument("--to", dest="target", required=True)

    sp = add("relation", cmd_relation, "bounded relation of a transformer")
    sp.add_argument("grammar")
    sp.add_argument("--max-input", type=int, required=True)
    sp.add_argument("--max-word", type=int, required=True)
    sp.add_argument("--max-depth", type=int, required=True)
    sp.add_argument("--format", choices=("text", "tsv"), default="text")

    sp = add("closure", cmd_closure, "transitive closure of an anchored transformer")
    sp.add_argument("grammar")
    sp.add_argument("--map", required=True, help='output-to-input renaming, e.g. "c1=a1,c2=a2"')
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--skip-precheck", action="store_true")
    sp.add_argument("--reading", choices=[r.value for r in Reading], default=Reading.PREFIXED.value)
    sp.add_argument("--anchored-exit", action="store_true", help="leave each pass only through the end anchor")
    sp.add_argument("--primed-entry", action="store_true", help="dotted inputs are erased by primed inputs")

    cnf = sub.add_parser("cnf", help="3-CNF reduction", parents=[common])
    csub = cnf.add_subparsers(dest="cnf_command", parser_class=_Parser)
    sp = csub.add_parser("compile", parents=[common])
    sp.set_defaults(fn=cmd_cnf_compile)
    sp.add_argument("cnf")
    sp.add_argument("-o", "--output", default=None)
    sp = csub.add_parser("solve", parents=[common])
    sp.set_defaults(fn=cmd_cnf_solve)
    sp.add_argument("cnf")
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("--mode", choices=("greedy", "upto", "exact"), default="greedy")
    sp = csub.add_parser("hard", parents=[common])
    sp.set_defaults(fn=cmd_cnf_hard)
    sp.add_argument("cnf")
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("-o", "--output", default=None)
    sp.add_argument("--derivation", default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "fn", None) is None:
            raise UsageError("missing subcommand")
        random.seed(args.seed)
        return args.fn(args)
    except UsageError as e:
        print(f"lgr: usage error: {e}", file=sys.stderr)
        return EX_USAGE
    except FileNotFoundError as e:
        print(f"lgr: {e}", file=sys.stderr)
        return EX_NOINPUT
    except (GrammarError, StepError, DerivationError, TransformerError, ClosureError, CnfError, ValueError) as e:
        print(f"lgr: {type(e).__name__}: {e}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
