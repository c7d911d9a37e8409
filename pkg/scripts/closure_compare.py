"""Build the closure grammar for a toy and compare it with the iterated relation.

    python scripts/closure_compare.py contains --anchored-exit --primed-entry
"""

import argparse
import time

from leftist.catalog import TOYS
from leftist.closure import compare_closure, transitive_closure


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("toy", choices=sorted(TOYS))
    ap.add_argument("--anchored-exit", action="store_true")
    ap.add_argument("--primed-entry", action="store_true")
    ap.add_argument("--max-input", type=int, default=2)
    ap.add_argument("--max-len", type=int, default=2)
    ap.add_argument("--depth", type=int, default=10, help="depth for one pass of the toy")
    ap.add_argument("--width", type=int, default=7)
    ap.add_argument("--stages", type=int, default=4)
    ap.add_argument("--width-slack", type=int, default=0)
    args = ap.parse_args(argv)

    at, r = TOYS[args.toy]()
    t0 = time.time()
    gp = transitive_closure(at, r, skip_precheck=True, anchored_exit=args.anchored_exit, primed_entry=args.primed_entry)
    print(f"closure grammar: {len(gp.grammar.alphabet)} letters, {len(gp.grammar.rules)} rules")
    cmp = compare_closure(
        at, r, gp, args.max_input, args.max_len, args.depth, args.width, args.stages, args.width_slack
    )
    for u, v in cmp.extra:
        print(f"extra   {' '.join(u) or '-'} -> {' '.join(v) or '-'} (depth {cmp.depths[(u, v)]})")
    for u, v in cmp.missing:
        print(f"missing {' '.join(u) or '-'} -> {' '.join(v) or '-'}")
    print(f"{'equal' if cmp.equal else 'differ'} in {time.time() - t0:.1f}s")
    return 0 if cmp.equal else 1


if __name__ == "__main__":
    raise SystemExit(main())
