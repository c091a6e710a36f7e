"""Command-line front end.

Exit codes: 0 when a test case is produced, 1 for unknown or proven
unsat, 2 for usage and parse errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Dict, List, Optional

from fuzzysat import expr as E
from fuzzysat import oracle
from fuzzysat.corpus import LoadedQuery, load_query, run_corpus
from fuzzysat.mutate import FAMILIES, MutationConfig
from fuzzysat.smtlib import ParseError
from fuzzysat.solver import PROVEN_UNSAT, SAT, QueryError, Session

EXIT_OK, EXIT_NO, EXIT_USAGE = 0, 1, 2


def _hex(b: bytes) -> str:
    return " ".join(f"{x:02X}" for x in b)


def _config(args) -> MutationConfig:
    kw = {"rng_seed": args.rng_seed}
    if getattr(args, "families", None):
        kw["families"] = tuple(args.families.split(","))
    if getattr(args, "budget", None):
        kw["per_query_attempt_budget"] = args.budget
    return MutationConfig(**kw)


def _oracle_line(status: str, lq: LoadedQuery, cap_bits: int) -> Dict[str, object]:
    """Cross-check a solve verdict by enumeration when the query is small."""
    p = lq.parsed
    try:
        v = oracle.exhaustive_solve(p.branch, p.pi, seed=lq.seed, cap_bits=cap_bits, max_models=1)
    except oracle.BitCapExceeded as exc:
        return {"verdict": "skipped", "line": f"oracle: skipped ({exc})", "missed": 0}
    out: Dict[str, object] = {"verdict": v.status, "count": v.count, "missed": 0}
    if v.sat and status != SAT:
        out["missed"] = 1
        tag = "FALSE-UNSAT" if status == PROVEN_UNSAT else "missed-sat"
        out["line"] = f"oracle: {tag} ({v.count} models, solver said {status})"
    elif not v.sat and status == SAT:
        out["line"] = "oracle: DISAGREE (solver sat, oracle unsat)"
    elif v.sat or status == PROVEN_UNSAT:
        out["line"] = f"oracle: {v.status} (agree)"
    else:
        out["line"] = f"oracle: unsat (solver said {status})"
    return out


def cmd_solve(args) -> int:
    try:
        lq = load_query(args.query, args.seed)
    except (ParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    p = lq.parsed
    if args.primitive:
        p = dataclasses.replace(p, primitive=args.primitive)
        lq = dataclasses.replace(lq, parsed=p)
    cfg = _config(args)
    sess = Session(cfg)
    out_path = Path(args.output) if args.output else Path(args.query).with_suffix(".testcase")
    stats: Dict[str, object] = {"query": str(args.query), "seed": lq.seed_source,
                                "primitive": p.primitive}
    if lq.seed_source == "zero-filled":
        print(f"seed: zero-filled ({len(lq.seed)} bytes)")

    if p.primitive == "solve":
        try:
            q = lq.query(opt=True if args.opt else None)
            r = sess.solve(q)
        except (ParseError, QueryError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(f"status: {r.status}")
        if not r.seed_satisfies_pi:
            print("warning: seed does not satisfy the path constraints")
        if r.attribution:
            print(f"attribution: {r.attribution}")
        if r.reason:
            print(f"reason: {r.reason}")
        stats.update(status=r.status, attribution=r.attribution, reason=r.reason,
                     seed_satisfies_pi=r.seed_satisfies_pi, stats=r.stats)
        code = EXIT_NO
        if r.is_sat:
            tc = r.testcase(q.seed)
            print(f"testcase: {_hex(tc)}")
            out_path.write_bytes(tc)
            print(f"written: {out_path}")
            stats["testcase"] = tc.hex()
            code = EXIT_OK
        if args.oracle_check:
            oc = _oracle_line(r.status, lq, args.oracle_cap)
            print(oc.pop("line"))
            print(f"missed: {oc['missed']}")
            stats["oracle"] = oc
        if args.verbose:
            print(sess.store.dump([q.branch, *q.pi]))
    else:
        if p.target is None:
            print(f"error: primitive {p.primitive} needs a minimize/maximize/enumerate target",
                  file=sys.stderr)
            return EXIT_USAGE
        try:
            fn = {"min": sess.solve_min, "max": sess.solve_max, "all": sess.solve_all}[p.primitive]
            res = fn(p.target, p.pi, lq.seed)
        except QueryError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        found = bool(res)
        print(f"status: {'found' if found else 'none'}")
        stats["status"] = "found" if found else "none"
        if p.primitive == "all":
            vals = [v for _, v in res]
            print("values: " + " ".join(f"{v:#x}" for v in vals))
            stats["values"] = vals
        elif found:
            a, v = res
            tc = E.apply(a, lq.seed)
            print(f"value: {v:#x}")
            print(f"testcase: {_hex(tc)}")
            out_path.write_bytes(tc)
            print(f"written: {out_path}")
            stats.update(value=v, testcase=tc.hex())
        if args.oracle_check and found:
            try:
                mm = oracle.exhaustive_minmax(p.target, p.pi, seed=lq.seed, cap_bits=args.oracle_cap)
                print(f"oracle: min={mm[0]:#x} max={mm[1]:#x}" if mm else "oracle: infeasible")
                stats["oracle"] = {"minmax": list(mm) if mm else None}
            except oracle.BitCapExceeded as exc:
                print(f"oracle: skipped ({exc})")
        if args.verbose:
            print(sess.store.dump([p.target, *p.pi]))
        code = EXIT_OK if found else EXIT_NO
    if args.stats_json:
        Path(args.stats_json).write_text(json.dumps(stats, indent=1, sort_keys=True, default=str))
    return code


def cmd_corpus(args) -> int:
    try:
        rep = run_corpus(args.directory, _config(args))
    except NotADirectoryError as exc:
        print(f"error: not a directory: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = rep.body() if args.body_only else rep.render()
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    print(rep.summary(), file=sys.stderr)
    return EXIT_OK


def cmd_oracle(args) -> int:
    try:
        lq = load_query(args.query, args.seed)
        p = lq.parsed
        if p.primitive == "solve":
            v = oracle.exhaustive_solve(p.branch, p.pi, seed=lq.seed, cap_bits=args.oracle_cap,
                                        max_models=1)
            print(f"oracle: {v.status} ({v.count} models)")
            if v.models:
                print(f"model: {_hex(E.apply(v.models[0], lq.seed))}")
            return EXIT_OK if v.sat else EXIT_NO
        mm = oracle.exhaustive_minmax(p.target, p.pi, seed=lq.seed, cap_bits=args.oracle_cap)
        print(f"oracle: min={mm[0]:#x} max={mm[1]:#x}" if mm else "oracle: infeasible")
        return EXIT_OK if mm else EXIT_NO
    except (ParseError, OSError, oracle.BitCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def cmd_gen(args) -> int:
    from fuzzysat.synth import write_corpus

    paths = write_corpus(args.directory, args.count, args.rng_seed, args.max_bytes, args.max_pi)
    print(f"wrote {len(paths)} queries to {args.directory}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fuzzysat", description="Approximate bitvector solving by mutation.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--rng-seed", type=int, default=0, help="havoc RNG seed (default 0)")
        p.add_argument("--families", help=f"comma-separated subset of {','.join(FAMILIES)}")
        p.add_argument("--budget", type=int, help="per-query candidate budget")

    s = sub.add_parser("solve", help="solve one query file")
    s.add_argument("query")
    s.add_argument("--seed", help="raw binary seed file")
    s.add_argument("--opt", action="store_true", help="allow branch-only (optimistic) answers")
    s.add_argument("--primitive", choices=("solve", "min", "max", "all"))
    s.add_argument("--stats-json", help="write a JSON stats record here")
    s.add_argument("--output", "-o", help="test-case output path (default <query>.testcase)")
    s.add_argument("--oracle-check", action="store_true", help="cross-check by enumeration")
    s.add_argument("--oracle-cap", type=int, default=oracle.DEFAULT_BIT_CAP, help=argparse.SUPPRESS)
    s.add_argument("-v", "--verbose", action="store_true", help="dump analysis facts")
    common(s)
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("corpus", help="replay a directory of query files")
    c.add_argument("directory")
    c.add_argument("--output", "-o", help="write the JSON report here")
    c.add_argument("--body-only", action="store_true", help="omit the timing section")
    common(c)
    c.set_defaults(func=cmd_corpus)

    o = sub.add_parser("oracle-check", help="decide a small query by enumeration")
    o.add_argument("query")
    o.add_argument("--seed")
    o.add_argument("--oracle-cap", type=int, default=oracle.DEFAULT_BIT_CAP)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("gen-corpus", help="write a random synthetic corpus")
    g.add_argument("directory")
    g.add_argument("--count", type=int, default=100)
    g.add_argument("--rng-seed", type=int, default=0)
    g.add_argument("--max-bytes", type=int, default=4)
    g.add_argument("--max-pi", type=int, default=4)
    g.set_defaults(func=cmd_gen)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ValueError as exc:       # bad --families and the like
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
