"""Exact reference solver by exhaustive enumeration of small input spaces.

Deliberately shares no code with the tape kernels: the scalar evaluator
works on Python integers straight from SMT-LIB definitions, and the
enumerator walks the DAG recursively over numpy columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from fuzzysat.expr import Assignment, Kind, Node, inputs_of, topo_order

DEFAULT_BIT_CAP = 24
_CHUNK = 1 << 20


class BitCapExceeded(ValueError):
    pass


def _signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) & 1 else v


def reference_eval(e: Node, tc) -> int:
    """Big-integer evaluation of ``e`` on ``tc``; booleans come back as 0/1."""
    tc = bytes(tc)
    memo: Dict[int, int] = {}
    for n in topo_order([e]):
        memo[n.id] = _ref_node(n, [memo[c.id] for c in n.children], tc)
    return memo[e.id]


def _ref_node(n: Node, args: List[int], tc: bytes) -> int:
    k = n.kind
    w = n.width
    m = (1 << w) - 1
    if k is Kind.CONST or k is Kind.BCONST:
        return n.params[0]
    if k is Kind.INPUT:
        return tc[n.params[0]]
    if k is Kind.CONCAT:
        return (args[0] << n.children[1].width) | args[1]
    if k is Kind.EXTRACT:
        hi, lo = n.params
        return (args[0] >> lo) & ((1 << (hi - lo + 1)) - 1)
    if k is Kind.ZEXT:
        return args[0]
    if k is Kind.SEXT:
        return _signed(args[0], n.children[0].width) & m
    if k is Kind.NOT:
        return ~args[0] & m
    if k is Kind.NEG:
        return -args[0] & m
    if k is Kind.BNOT:
        return 1 - args[0]
    if k is Kind.BAND:
        return args[0] & args[1]
    if k is Kind.BOR:
        return args[0] | args[1]
    if k is Kind.ITE:
        return args[1] if args[0] else args[2]
    a = args[0]
    b = args[1] if len(args) > 1 else 0
    cw = n.children[0].width
    if k is Kind.EQ:
        return int(a == b)
    if k is Kind.ULT:
        return int(a < b)
    if k is Kind.ULE:
        return int(a <= b)
    if k is Kind.SLT:
        return int(_signed(a, cw) < _signed(b, cw))
    if k is Kind.SLE:
        return int(_signed(a, cw) <= _signed(b, cw))
    if k is Kind.ADD:
        return (a + b) & m
    if k is Kind.SUB:
        return (a - b) & m
    if k is Kind.MUL:
        return (a * b) & m
    if k is Kind.AND:
        return a & b
    if k is Kind.OR:
        return a | b
    if k is Kind.XOR:
        return a ^ b
    if k is Kind.UDIV:
        return m if b == 0 else a // b
    if k is Kind.UREM:
        return a if b == 0 else a % b
    if k is Kind.SDIV:
        sa, sb = _signed(a, w), _signed(b, w)
        if sb == 0:
            return 1 if sa < 0 else m
        q = abs(sa) // abs(sb)
        return (q if (sa < 0) == (sb < 0) else -q) & m
    if k is Kind.SREM:
        sa, sb = _signed(a, w), _signed(b, w)
        if sb == 0:
            return a
        r = abs(sa) % abs(sb)
        return (-r if sa < 0 else r) & m
    if k is Kind.SHL:
        return (a << b) & m if b < w else 0
    if k is Kind.LSHR:
        return a >> b if b < w else 0
    if k is Kind.ASHR:
        return (_signed(a, w) >> min(b, w)) & m
    raise ValueError(f"unhandled kind {k!r}")


# -- vectorized enumeration -------------------------------------------------

def _col_eval(e: Node, env: Dict[int, np.ndarray], n: int, memo: Dict[int, np.ndarray]) -> np.ndarray:
    """Recursive columnar evaluation over ``n`` assignments (uint64 or bool)."""
    hit = memo.get(e.id)
    if hit is not None:
        return hit
    k = e.kind
    w = e.width
    m = np.uint64(((1 << w) - 1) if w else 1)
    kids = [_col_eval(c, env, n, memo) for c in e.children]
    if k is Kind.CONST:
        r = np.full(n, e.params[0], np.uint64)
    elif k is Kind.BCONST:
        r = np.full(n, bool(e.params[0]))
    elif k is Kind.INPUT:
        r = env[e.params[0]]
    elif k is Kind.CONCAT:
        r = (kids[0] << np.uint64(e.children[1].width)) | kids[1]
    elif k is Kind.EXTRACT:
        r = (kids[0] >> np.uint64(e.params[1])) & m
    elif k is Kind.ZEXT:
        r = kids[0]
    elif k is Kind.SEXT:
        cw = e.children[0].width
        r = (kids[0].view(np.int64) << np.int64(64 - cw) >> np.int64(64 - cw)).view(np.uint64) & m
    elif k is Kind.NOT:
        r = kids[0] ^ m
    elif k is Kind.NEG:
        r = (np.uint64(0) - kids[0]) & m
    elif k is Kind.BNOT:
        r = ~kids[0]
    elif k is Kind.BAND:
        r = kids[0] & kids[1]
    elif k is Kind.BOR:
        r = kids[0] | kids[1]
    elif k is Kind.ITE:
        r = np.where(kids[0], kids[1], kids[2])
    else:
        a, b = kids
        cw = e.children[0].width
        if k in (Kind.SLT, Kind.SLE) or k in (Kind.SDIV, Kind.SREM, Kind.ASHR):
            sh = np.int64(64 - cw)
            sa = a.view(np.int64) << sh >> sh
            sb = b.view(np.int64) << sh >> sh
        if k is Kind.EQ:
            r = a == b
        elif k is Kind.ULT:
            r = a < b
        elif k is Kind.ULE:
            r = a <= b
        elif k is Kind.SLT:
            r = sa < sb
        elif k is Kind.SLE:
            r = sa <= sb
        elif k is Kind.ADD:
            r = (a + b) & m
        elif k is Kind.SUB:
            r = (a - b) & m
        elif k is Kind.MUL:
            r = (a * b) & m
        elif k is Kind.AND:
            r = a & b
        elif k is Kind.OR:
            r = a | b
        elif k is Kind.XOR:
            r = a ^ b
        elif k is Kind.UDIV:
            with np.errstate(divide="ignore"):
                r = np.where(b == 0, m, a // np.maximum(b, np.uint64(1)))
        elif k is Kind.UREM:
            r = np.where(b == 0, a, a % np.maximum(b, np.uint64(1)))
        elif k in (Kind.SDIV, Kind.SREM):
            # magnitudes as uint64 avoid the int64 overflow of MIN / -1
            ma = np.where(sa < 0, np.uint64(0) - a, a) & m
            mb = np.where(sb < 0, np.uint64(0) - b, b) & m
            safe = np.maximum(mb, np.uint64(1))
            if k is Kind.SDIV:
                q = ma // safe
                q = np.where((sa < 0) != (sb < 0), np.uint64(0) - q, q)
                r = np.where(mb == 0, np.where(sa < 0, np.uint64(1), m), q) & m
            else:
                rem = np.where(mb == 0, ma, ma % safe)
                r = np.where(sa < 0, np.uint64(0) - rem, rem) & m
        elif k is Kind.SHL:
            r = np.where(b < w, (a << np.minimum(b, np.uint64(63))) & m, np.uint64(0))
        elif k is Kind.LSHR:
            r = np.where(b < w, a >> np.minimum(b, np.uint64(63)), np.uint64(0))
        elif k is Kind.ASHR:
            r = (sa >> np.minimum(b, np.uint64(63)).astype(np.int64)).view(np.uint64) & m
        else:
            raise ValueError(f"unhandled kind {k!r}")
    memo[e.id] = r
    return r


@dataclass
class OracleVerdict:
    sat: bool
    count: int
    models: List[Assignment] = field(default_factory=list)
    extrema: Optional[Tuple[int, int]] = None

    @property
    def status(self) -> str:
        return "sat" if self.sat else "unsat"


def _relevant(exprs: Iterable[Node], relevant: Optional[Sequence[int]], cap_bits: int) -> List[int]:
    if relevant is None:
        acc = set()
        for x in exprs:
            acc |= inputs_of(x)
        relevant = sorted(acc)
    else:
        relevant = sorted(set(relevant))
    if 8 * len(relevant) > cap_bits:
        raise BitCapExceeded(f"{len(relevant)} relevant bytes exceed the {cap_bits}-bit cap")
    return relevant


def _chunks(relevant: List[int], seed: bytes):
    total = 1 << (8 * len(relevant))
    for start in range(0, total, _CHUNK):
        x = np.arange(start, min(total, start + _CHUNK), dtype=np.uint64)
        env = {}
        for j, b in enumerate(relevant):
            env[b] = (x >> np.uint64(8 * j)) & np.uint64(0xFF)
        for b, v in enumerate(seed):
            if b not in env:
                env[b] = np.full(x.shape[0], v, np.uint64)
        yield x, env


def _ensure_seed(exprs, seed):
    hi = max((max(inputs_of(x), default=-1) for x in exprs), default=-1)
    seed = bytes(seed or b"")
    return seed + bytes(max(0, hi + 1 - len(seed)))


def exhaustive_solve(e: Node, pi: Sequence[Node] = (), relevant: Optional[Sequence[int]] = None,
                     seed: bytes = b"", cap_bits: int = DEFAULT_BIT_CAP,
                     max_models: int = 256) -> OracleVerdict:
    """Decide ``e and all(pi)`` over every value of the relevant bytes.

    Bytes outside ``relevant`` keep their ``seed`` values. At most
    ``max_models`` models are materialized; ``count`` is always exact.
    """
    exprs = [e, *pi]
    rel = _relevant(exprs, relevant, cap_bits)
    seed = _ensure_seed(exprs, seed)
    count = 0
    models: List[Assignment] = []
    for x, env in _chunks(rel, seed):
        memo: Dict[int, np.ndarray] = {}
        ok = _col_eval(e, env, x.shape[0], memo).astype(bool)
        for p in pi:
            ok &= _col_eval(p, env, x.shape[0], memo).astype(bool)
        hits = np.nonzero(ok)[0]
        count += int(hits.size)
        for h in hits[: max(0, max_models - len(models))]:
            v = int(x[h])
            models.append({b: (v >> (8 * j)) & 0xFF for j, b in enumerate(rel)})
    return OracleVerdict(sat=count > 0, count=count, models=models)


def exhaustive_minmax(target: Node, pi: Sequence[Node] = (), relevant: Optional[Sequence[int]] = None,
                      seed: bytes = b"", cap_bits: int = DEFAULT_BIT_CAP) -> Optional[Tuple[int, int]]:
    """Exact unsigned (min, max) of ``target`` over the feasible set, None if infeasible."""
    exprs = [target, *pi]
    rel = _relevant(exprs, relevant, cap_bits)
    seed = _ensure_seed(exprs, seed)
    lo = hi = None
    for x, env in _chunks(rel, seed):
        memo: Dict[int, np.ndarray] = {}
        ok = np.ones(x.shape[0], bool)
        for p in pi:
            ok &= _col_eval(p, env, x.shape[0], memo).astype(bool)
        if not ok.any():
            continue
        vals = _col_eval(target, env, x.shape[0], memo)[ok]
        cmin, cmax = int(vals.min()), int(vals.max())
        lo = cmin if lo is None else min(lo, cmin)
        hi = cmax if hi is None else max(hi, cmax)
    return None if lo is None else (lo, hi)


def feasible_values(target: Node, pi: Sequence[Node] = (), relevant: Optional[Sequence[int]] = None,
                    seed: bytes = b"", cap_bits: int = DEFAULT_BIT_CAP) -> set:
    """Every value ``target`` takes over assignments satisfying ``pi``."""
    exprs = [target, *pi]
    rel = _relevant(exprs, relevant, cap_bits)
    seed = _ensure_seed(exprs, seed)
    out: set = set()
    for x, env in _chunks(rel, seed):
        memo: Dict[int, np.ndarray] = {}
        ok = np.ones(x.shape[0], bool)
        for p in pi:
            ok &= _col_eval(p, env, x.shape[0], memo).astype(bool)
        out.update(int(v) for v in np.unique(_col_eval(target, env, x.shape[0], memo)[ok]))
    return out
