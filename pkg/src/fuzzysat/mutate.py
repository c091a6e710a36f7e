"""The mutation engine.

``mutate`` patches the seed through a fixed pipeline of transformation
families and stops at the first assignment satisfying the target and the
whole path condition:

    I2S -> BF -> IC -> GD -> DET -> HAVOC

Candidates live as rows of a ``(N, C)`` uint8 matrix over the columns of a
compiled tape (the bytes the target, the range screens and the conflicting
path constraints read), so every family is checked in batches by the
kernels. Deterministic and havoc candidates share the ``D+ND`` tag.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fuzzysat import expr as E
from fuzzysat import kernels
from fuzzysat.analysis import ExprFacts, InputGroup, MetadataStore
from fuzzysat.expr import Assignment, Node
from fuzzysat.interval import WrappedInterval, intersect
from fuzzysat.kernels._ops import (
    ARITH_MAX, FULL, INTERESTING_8, INTERESTING_16, INTERESTING_32, INTERESTING_8_U,
    INTERESTING_ALL_U, N_ALL_OPS, N_BYTE_OPS, SCREENED,
)
from fuzzysat.tape import compile_tape

FAMILIES = ("I2S", "BF", "IC", "GD", "DET", "HAVOC")
TAGS = {"I2S": "I2S", "BF": "BF", "IC": "IC", "GD": "GD", "DET": "D+ND", "HAVOC": "D+ND",
        "SEED": "D+ND"}
SA_CAP = 4096


@dataclass
class MutationConfig:
    bruteforce_full_cap: int = 2048
    bruteforce_secondary_cap: int = 512
    havoc_k_floor: int = 100
    havoc_k_per_input: int = 20
    havoc_stack_exponent_range: Tuple[int, int] = (1, 8)
    arith_max: int = ARITH_MAX
    rng_seed: int = 0
    interval_enumerate_cap: int = 4096
    gd_max_iterations: int = 64
    per_query_attempt_budget: int = 65536
    families: Tuple[str, ...] = FAMILIES

    def __post_init__(self):
        for name in ("bruteforce_full_cap", "bruteforce_secondary_cap", "havoc_k_floor",
                     "havoc_k_per_input", "arith_max", "interval_enumerate_cap",
                     "gd_max_iterations", "per_query_attempt_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        lo, hi = self.havoc_stack_exponent_range
        if not 1 <= lo <= hi:
            raise ValueError("havoc_stack_exponent_range must satisfy 1 <= lo <= hi")
        unknown = set(self.families) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown families {sorted(unknown)}")

    def havoc_k(self, n_inputs: int) -> int:
        return max(self.havoc_k_floor, n_inputs * self.havoc_k_per_input)


@dataclass
class Candidate:
    assignment: Assignment
    pi_sat: int
    tag: str


@dataclass
class FamilyStats:
    attempts: int = 0
    sat_e: int = 0
    sat_all: int = 0
    note: str = ""


@dataclass
class MutationOutcome:
    status: str                       # "solved" | "unsat" | "exhausted"
    assignment: Optional[Assignment] = None
    tag: Optional[str] = None
    reason: str = ""
    sa: List[Candidate] = field(default_factory=list)
    stats: Dict[str, FamilyStats] = field(default_factory=dict)
    attempts: int = 0
    pi_evals: int = 0
    budget_exhausted: bool = False

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    @property
    def proven_unsat(self) -> bool:
        return self.status == "unsat"


class _Solved(Exception):
    pass


class _Unsat(Exception):
    def __init__(self, reason: str, tag: str):
        super().__init__(reason)
        self.tag = tag


class _Budget(Exception):
    pass


# -- objectives ----------------------------------------------------------------

class NotAComparison(ValueError):
    pass


@dataclass(frozen=True)
class Objective:
    """``lhs op rhs`` recast as minimizing a loss that is 0 exactly on success."""

    op: str
    lhs: Node
    rhs: Node

    @property
    def signed(self) -> bool:
        return self.op[0] == "s"

    @property
    def f(self) -> Node:
        """The minimized difference, e.g. ``rhs - lhs`` for ``lhs > rhs``."""
        if self.op[1:] in ("gt", "ge"):
            return E.sub(self.rhs, self.lhs)
        return E.sub(self.lhs, self.rhs)

    @property
    def success(self) -> str:
        """Predicate on ``f`` (read in the comparison's signedness)."""
        return {"lt": "f < 0", "gt": "f < 0", "le": "f <= 0", "ge": "f <= 0",
                "eq": "f == 0", "ne": "f != 0"}[self.op[-2:]]

    def loss(self, lv: np.ndarray, rv: np.ndarray) -> np.ndarray:
        w = self.lhs.width
        a = lv.astype(np.float64)
        b = rv.astype(np.float64)
        if self.signed:
            half = float(1 << (w - 1))
            full = float(1 << w)
            a = np.where(a >= half, a - full, a)
            b = np.where(b >= half, b - full, b)
        base = self.op[-2:]
        if base == "lt":
            return np.maximum(0.0, a - b + 1)
        if base == "le":
            return np.maximum(0.0, a - b)
        if base == "gt":
            return np.maximum(0.0, b - a + 1)
        if base == "ge":
            return np.maximum(0.0, b - a)
        if base == "eq":
            return np.abs(a - b)
        return (lv == rv).astype(np.float64)


def to_minimization(e: Node) -> Objective:
    cmp = E.as_comparison(e)
    if cmp is None:
        raise NotAComparison(f"{e.kind.name} is not a comparison")
    op, lhs, rhs = cmp
    if op == "eq":
        return Objective("eq", lhs, rhs)
    if op == "ne":
        return Objective("ne", lhs, rhs)
    return Objective(op, lhs, rhs)


# -- search context --------------------------------------------------------------

class _Search:
    """State of one mutate run: base row, tapes, screens, counters, SA."""

    def __init__(self, e: Node, pi: Sequence[Node], seed: bytes, store: MetadataStore,
                 cfg: MutationConfig, optimistic: bool = False, certify: bool = True):
        self.e = e
        self.cfg = cfg
        self.store = store
        self.optimistic = optimistic
        self.facts: ExprFacts = store.analyze(e)
        pi = [] if optimistic else list(pi)
        self.pi = pi
        self.certify = certify and not optimistic and not store.locked
        self.fixed: Dict[int, int] = {} if optimistic else store.fixed_bytes()
        top = max([max(E.inputs_of(x), default=-1) for x in [e, *pi]] + list(self.fixed) + [-1])
        seed = bytes(seed) + bytes(max(0, top + 1 - len(seed)))
        self.seed = seed
        base = bytearray(seed)
        for b, v in self.fixed.items():
            if b < len(base):
                base[b] = v
        self.base = bytes(base)
        self.e_inputs = sorted(self.facts.inputs)
        self.free = [b for b in self.e_inputs if b not in self.fixed]
        free = set(self.free)

        self.screens: List[Tuple[InputGroup, WrappedInterval]] = []
        if not optimistic:
            for g, iv in store.ranges.items():
                if not iv.is_top and g.inputs & free:
                    self.screens.append((g, iv))
        self.screens.sort(key=lambda t: t[0].slots)
        self.conflicts = [p for p in pi if E.inputs_of(p) & free]
        conflict_ids = {p.id for p in self.conflicts}
        others = [p for p in pi if p.id not in conflict_ids]
        self.others_sat = sum(bool(E.evaluate(p, self.base)) for p in others)
        self.others_ok = self.others_sat == len(others)

        roots = [e] + [g.node() for g, _ in self.screens] + self.conflicts
        cols = set(self.e_inputs)
        for r in roots:
            cols |= E.inputs_of(r)
        self.cols = sorted(cols)
        self.col = {b: j for j, b in enumerate(self.cols)}
        self.tape = compile_tape(roots, self.cols)
        self.n_screen = len(self.screens)
        scr = [iv.screen() for _, iv in self.screens]
        self.screen_lo = np.array([s[0] for s in scr], np.uint64)
        self.screen_span = np.array([s[1] for s in scr], np.uint64)
        self.screen_mask = np.array([s[2] for s in scr], np.uint64)
        self.base_row = np.array([self.base[c] for c in self.cols], np.uint8)

        self.stats: Dict[str, FamilyStats] = {f: FamilyStats() for f in FAMILIES}
        self.stats["SEED"] = FamilyStats()
        self.attempts = 0
        self.pi_evals = 0
        self.seen: set = set()
        self.sa: List[Candidate] = []
        self.sa_keys: set = set()
        self.solution: Optional[Assignment] = None
        self.solution_tag: Optional[str] = None

    # rows <-> assignments
    def assignment(self, row: np.ndarray) -> Assignment:
        out = {b: int(row[self.col[b]]) for b in self.free}
        for b, v in self.fixed.items():
            if b < len(self.seed) and self.seed[b] != v:
                out[b] = v
        return out

    def value_of(self, node: Node, rows: np.ndarray) -> np.ndarray:
        t = compile_tape((node,), self.cols)
        return t.run(rows)[:, 0]

    def encode_rows(self, g: InputGroup, values, big_endian: bool = False,
                    start: Optional[np.ndarray] = None) -> np.ndarray:
        """Rows with group ``g`` set to each value; infeasible values are dropped."""
        vals = np.asarray(values, dtype=np.uint64).reshape(-1)
        n = len(g.slots)
        if n < 8:
            vals = vals[(vals >> np.uint64(8 * n)) == 0]
        rows = np.tile(self.base_row if start is None else start, (vals.shape[0], 1))
        if vals.shape[0] == 0:
            return rows
        ok = np.ones(vals.shape[0], bool)
        written = set()
        sx = []
        for j, (kind, x) in enumerate(g.slots):
            lane = n - 1 - j if big_endian else j
            L = ((vals >> np.uint64(8 * lane)) & np.uint64(0xFF)).astype(np.uint8)
            if kind == "c":
                ok &= L == x
            elif kind == "sx":
                sx.append((x, L))
            else:
                c = self.col[x]
                if x in self.fixed:
                    ok &= L == self.fixed[x]
                elif c in written:
                    ok &= rows[:, c] == L
                else:
                    rows[:, c] = L
                    written.add(c)
        for x, L in sx:
            src = rows[:, self.col[x]]
            ok &= L == np.where(src & 0x80, 0xFF, 0).astype(np.uint8)
        return rows[ok]

    def decode_rows(self, g: InputGroup, rows: np.ndarray, big_endian: bool = False) -> np.ndarray:
        n = len(g.slots)
        v = np.zeros(rows.shape[0], np.uint64)
        for j, (kind, x) in enumerate(g.slots):
            lane = n - 1 - j if big_endian else j
            if kind == "c":
                b = np.full(rows.shape[0], x, np.uint64)
            elif kind == "in":
                b = rows[:, self.col[x]].astype(np.uint64)
            else:
                b = np.where(rows[:, self.col[x]] & 0x80, 0xFF, 0).astype(np.uint64)
            v |= b << np.uint64(8 * lane)
        return v

    # checking
    def check(self, rows: np.ndarray, family: str) -> np.ndarray:
        """Classify rows, record SA entries and stop on a full solution.

        Returns the kernel status per (deduplicated) row.
        """
        if rows.shape[0] == 0:
            return np.zeros(0, np.int8)
        keep = []
        for i in range(rows.shape[0]):
            k = rows[i].tobytes()
            if k not in self.seen:
                self.seen.add(k)
                keep.append(i)
        left = self.cfg.per_query_attempt_budget - self.attempts
        if left <= 0:
            raise _Budget()
        if len(keep) > left:
            keep = keep[:left]
        rows = np.ascontiguousarray(rows[keep])
        t = self.tape
        status, pisat, pev = kernels.check_batch(
            t.op, t.width, t.arg0, t.arg1, t.arg2, t.param, t.root_slot, t.root_end, rows,
            self.n_screen, self.screen_lo, self.screen_span, self.screen_mask)
        st = self.stats[family]
        st.attempts += rows.shape[0]
        self.attempts += rows.shape[0]
        self.pi_evals += int(pev)
        hit_e = status >= SCREENED
        st.sat_e += int(hit_e.sum())
        full = np.nonzero(status == FULL)[0] if self.others_ok else np.zeros(0, np.int64)
        st.sat_all += int(full.size)
        tag = TAGS[family]
        for i in np.nonzero(hit_e)[0]:
            if full.size and i >= full[0]:
                break
            key = rows[i].tobytes()
            if len(self.sa) < SA_CAP and key not in self.sa_keys:
                self.sa_keys.add(key)
                self.sa.append(Candidate(self.assignment(rows[i]), int(pisat[i]) + self.others_sat, tag))
        if full.size:
            self.solution = self.assignment(rows[full[0]])
            self.solution_tag = tag
            raise _Solved()
        if self.attempts >= self.cfg.per_query_attempt_budget:
            raise _Budget()
        return status

    def certified_fail(self, rows: np.ndarray, g: InputGroup) -> bool:
        """True if every row provably violates e or a constraint on g's bytes only."""
        if rows.shape[0] == 0:
            return True
        gin = g.inputs
        scr = [(h, iv) for h, iv in self.store.ranges.items() if not iv.is_top and h.inputs <= gin]
        pis = [p for p in self.pi if E.inputs_of(p) <= gin]
        roots = [self.e] + [h.node() for h, _ in scr] + pis
        t = compile_tape(roots, self.cols)
        s3 = [iv.screen() for _, iv in scr]
        status, _, _ = kernels.check_batch(
            t.op, t.width, t.arg0, t.arg1, t.arg2, t.param, t.root_slot, t.root_end,
            np.ascontiguousarray(rows), len(scr),
            np.array([s[0] for s in s3], np.uint64), np.array([s[1] for s in s3], np.uint64),
            np.array([s[2] for s in s3], np.uint64))
        return bool((status != FULL).all())

    def group_range(self, g: InputGroup) -> WrappedInterval:
        iv = WrappedInterval.top(g.width) if self.optimistic else self.store.range_of(g)
        for h, r in self.facts.ranges:
            if h == g:
                iv = intersect(iv, r)
        return iv

    def free_groups(self) -> List[InputGroup]:
        free = set(self.free)
        return [g for g in self.facts.groups if g.inputs & free]


# -- families ------------------------------------------------------------------

def _i2s(s: _Search) -> None:
    fact = s.facts.i2s
    if fact is None:
        return
    g, op = fact.group, fact.op
    if not g.inputs & set(s.free):
        return
    w = g.width
    m = (1 << w) - 1
    v = int(s.value_of(fact.operand, s.base_row[None, :])[0])
    if op == "eq":
        values = [v]
    elif op == "ne":
        values = [(v + 1) & m, (v - 1) & m]
    else:
        values = [v, (v - 1) & m, (v + 1) & m]
    rows = s.encode_rows(g, values)
    s.check(rows, "I2S")
    if op == "eq" and fact.operand.kind is E.Kind.CONST and s.certify:
        if rows.shape[0] == 0:
            raise _Unsat("input-to-state value cannot be encoded in the group", "I2S")
        if s.certified_fail(rows, g):
            raise _Unsat("input-to-state assignment contradicts the path constraints", "I2S")


def _bruteforce(s: _Search) -> None:
    groups = s.free_groups()
    if not groups:
        return
    cfg = s.cfg
    single = len(s.facts.groups) == 1 and s.facts.groups[0].inputs == s.facts.inputs
    if single:
        g = groups[0]
        iv = s.group_range(g)
        if iv.is_bottom:
            if s.certify:
                raise _Unsat("empty range interval", "BF")
            return
        if iv.size() < cfg.bruteforce_full_cap:
            vals = np.fromiter(iv.enumerate(), np.uint64, iv.size())
            rows = s.encode_rows(g, vals)
            s.check(rows, "BF")
            if s.certify and s.certified_fail(rows, g):
                raise _Unsat(f"brute force over {iv!r} exhausted", "BF")
        else:
            s.check(s.encode_rows(g, [iv.min_unsigned(), iv.max_unsigned()]), "BF")
        return
    ivs = [(s.group_range(g), g) for g in groups]
    ivs = [t for t in ivs if not t[0].is_bottom]
    if not ivs:
        return
    iv, g = min(ivs, key=lambda t: t[0].size())
    if iv.size() < cfg.bruteforce_secondary_cap:
        vals = np.fromiter(iv.enumerate(), np.uint64, iv.size())
        s.check(s.encode_rows(g, vals), "BF")


def _encodings(c: int, w: int) -> List[Tuple[int, bool]]:
    m = (1 << w) - 1
    nat = max(1, (c.bit_length() + 7) // 8)
    out = [(c & m, False), (c & m, True)]
    if nat * 8 < w:
        swapped = int.from_bytes(c.to_bytes(nat, "little"), "big")
        out.append((swapped, False))
        if c >> (nat * 8 - 1) & 1:
            out.append(((c | (m ^ ((1 << (nat * 8)) - 1))) & m, False))
    seen, uniq = set(), []
    for t in out:
        if t not in seen:
            seen.add(t)
            uniq.append(t)
    return uniq


def _constants(s: _Search) -> None:
    consts = list(s.facts.constants)
    groups = s.free_groups()
    if not consts or not groups:
        return
    batches = []
    for c in consts:
        for g in groups:
            for v, be in _encodings(c, g.width):
                r = s.encode_rows(g, [v], big_endian=be)
                if r.shape[0]:
                    batches.append(r)
    if batches:
        s.check(np.concatenate(batches), "IC")


def _gd_dims(s: _Search) -> List[InputGroup]:
    """Disjoint all-free groups as dimensions, other free bytes one by one."""
    free = set(s.free)
    dims, used = [], set()
    groups = [g for g in s.facts.groups
              if all(k == "in" for k, _ in g.slots) and g.inputs <= free
              and len(g.inputs) == len(g.slots)]
    disjoint = all(not (a.inputs & b.inputs) for i, a in enumerate(groups) for b in groups[i + 1:])
    if disjoint:
        for g in groups:
            dims.append(g)
            used |= g.inputs
    for b in s.free:
        if b not in used:
            dims.append(InputGroup((("in", b),)))
    return dims


def _write_dims(s: _Search, dims: List[InputGroup], X: np.ndarray) -> np.ndarray:
    rows = np.tile(s.base_row, (X.shape[0], 1))
    for d, g in enumerate(dims):
        for j, (_, b) in enumerate(g.slots):
            rows[:, s.col[b]] = ((X[:, d] >> np.uint64(8 * j)) & np.uint64(0xFF)).astype(np.uint8)
    return rows


def descend(s: _Search, loss_fn, family: str, dims: Optional[List[InputGroup]] = None,
            on_rows=None) -> Tuple[np.ndarray, float, str]:
    """Gradient descent over group-valued dimensions.

    ``loss_fn(rows)`` gives one float per row. Every evaluated batch is also
    passed through ``s.check`` (or ``on_rows``), so a full solution found on
    the way ends the search. Returns the final point, its loss and why the
    descent stopped.
    """
    dims = _gd_dims(s) if dims is None else dims
    if not dims:
        return np.zeros(0, np.uint64), float("inf"), "no-dimensions"
    widths = np.array([g.width for g in dims])
    masks = np.array([(1 << w) - 1 if w < 64 else 0xFFFFFFFFFFFFFFFF for w in widths], np.uint64)
    x = np.array([int(s.decode_rows(g, s.base_row[None, :])[0]) for g in dims], np.uint64)
    check = on_rows or (lambda r: s.check(r, family))

    def evaluate(X):
        rows = _write_dims(s, dims, X)
        losses = loss_fn(rows)
        check(rows)
        return losses

    fx = float(evaluate(x[None, :])[0])
    D = len(dims)
    eye = np.eye(D, dtype=np.uint64)
    max_w = int(widths.max())
    reason = "max-iterations"
    for _ in range(s.cfg.gd_max_iterations):
        if fx == 0:
            reason = "success"
            break
        probes = np.concatenate([(x + eye) & masks, (x - eye) & masks])
        pl = evaluate(probes)
        up, down = pl[:D], pl[D:]
        grad = (up - down) / 2.0
        # a dimension where both neighbours are worse is locally flat for us
        grad[(up >= fx) & (down >= fx)] = 0.0
        if not np.any(grad):
            best = int(np.argmin(pl))
            if pl[best] < fx:
                x, fx = probes[best], float(pl[best])
                continue
            reason = "local-minimum"
            break
        direction = -grad / np.max(np.abs(grad))
        steps = 2.0 ** np.arange(min(max_w, 63))
        moves = np.rint(direction[None, :] * steps[:, None]).astype(np.int64)
        cand = [(x.astype(np.int64)[None, :] + moves)]
        # coordinate moves along the descending direction of each dimension
        for d in np.nonzero(grad)[0]:
            sgn = -1 if grad[d] > 0 else 1
            st = (2 ** np.arange(min(int(widths[d]), 63), dtype=np.int64)) * sgn
            c = np.tile(x.astype(np.int64), (st.shape[0], 1))
            c[:, d] += st
            cand.append(c)
        C = np.concatenate(cand).astype(np.uint64) & masks
        cl = evaluate(C)
        best = int(np.argmin(cl))
        if cl[best] < fx:
            x, fx = C[best], float(cl[best])
        else:
            reason = "local-minimum"
            break
    return x, fx, reason


def _gradient(s: _Search) -> None:
    try:
        obj = to_minimization(s.e)
    except NotAComparison:
        s.stats["GD"].note = "not-a-comparison"
        return
    tape = compile_tape((obj.lhs, obj.rhs), s.cols)

    def loss(rows):
        v = tape.run(rows)
        return obj.loss(v[:, 0], v[:, 1])

    _, _, reason = descend(s, loss, "GD")
    s.stats["GD"].note = reason


_BYTE_CONSTS = sorted({0x00, 0x01, 0x7F, 0x80, 0xFF} | {v & 0xFF for v in INTERESTING_8})


def _deterministic(s: _Search) -> None:
    amax = s.cfg.arith_max
    batches = []
    for b in s.free:
        c = s.col[b]
        cur = int(s.base_row[c])
        vals = [cur ^ (1 << k) for k in range(8)] + [cur ^ 0xFF] + _BYTE_CONSTS
        vals += [(cur + d) & 0xFF for d in range(1, amax + 1)]
        vals += [(cur - d) & 0xFF for d in range(1, amax + 1)]
        rows = np.tile(s.base_row, (len(vals), 1))
        rows[:, c] = np.array(vals, np.uint8)
        batches.append(rows)
    free = set(s.free)
    for g in s.free_groups():
        if len(g.slots) < 2 or len(g.inputs & free) < 2:
            continue
        w = g.width
        m = (1 << w) - 1
        lanes = [s.col[x] for k, x in g.slots if k == "in" and x in free]
        for span in (2, 4):
            for j in range(len(lanes) - span + 1):
                r = s.base_row.copy()
                for c in lanes[j:j + span]:
                    r[c] ^= 0xFF
                batches.append(r[None, :])
        table = INTERESTING_8 + INTERESTING_16 + (INTERESTING_32 if w >= 32 else ())
        for be in (False, True):
            vals = [v & m for v in table]
            cur = int(s.decode_rows(g, s.base_row[None, :], big_endian=be)[0])
            vals += [(cur + d) & m for d in range(1, amax + 1)]
            vals += [(cur - d) & m for d in range(1, amax + 1)]
            batches.append(s.encode_rows(g, vals, big_endian=be))
    if batches:
        s.check(np.concatenate(batches), "DET")


def stack_size(draw, cfg: MutationConfig):
    """Havoc stack length for a uniform draw in ``0 .. hi-lo`` (AFL: ``1 << (1 + draw)``)."""
    return np.left_shift(np.int64(1), np.int64(cfg.havoc_stack_exponent_range[0]) + draw).astype(np.int64)


def _havoc(s: _Search, rng: np.random.Generator) -> None:
    if not s.free:
        return
    cfg = s.cfg
    k = cfg.havoc_k(len(s.e_inputs))
    free = set(s.free)
    free_cols = np.array([s.col[b] for b in s.free], np.int64)
    multi = []
    for g in s.free_groups():
        lanes = [s.col[x] if (k_ == "in" and x in free) else -1 for k_, x in g.slots]
        if sum(c >= 0 for c in lanes) >= 2:
            multi.append(lanes)
    if multi:
        group_lanes = np.full((len(multi), 8), -1, np.int64)
        for i, lanes in enumerate(multi):
            group_lanes[i, :len(lanes)] = lanes
        group_len = np.array([len(l) for l in multi], np.int64)
        nops = N_ALL_OPS
    else:
        group_lanes = np.full((1, 8), -1, np.int64)
        group_len = np.ones(1, np.int64)
        nops = N_BYTE_OPS
    lo, hi = cfg.havoc_stack_exponent_range
    stack_len = stack_size(rng.integers(0, hi - lo + 1, size=k), cfg)
    total = int(stack_len.sum())
    ops = rng.integers(0, nops, size=total).astype(np.int64)
    pos = rng.integers(0, 1 << 31, size=total).astype(np.int64)
    val = rng.integers(0, np.iinfo(np.uint64).max, size=total, dtype=np.uint64, endpoint=True)
    rows = kernels.havoc_apply(s.base_row, free_cols, group_lanes, group_len, stack_len, ops, pos,
                               val, INTERESTING_8_U, INTERESTING_ALL_U, cfg.arith_max)
    s.check(rows, "HAVOC")


# -- entry points ----------------------------------------------------------------

def _run(s: _Search) -> MutationOutcome:
    status, reason, budget = "exhausted", "", False
    tag = None
    fams = s.cfg.families
    try:
        if not s.optimistic and s.store.contradiction and s.certify:
            raise _Unsat("path constraints are contradictory", "BF")
        s.check(s.base_row[None, :], "SEED")
        if "I2S" in fams:
            _i2s(s)
        if "BF" in fams:
            _bruteforce(s)
        if "IC" in fams:
            _constants(s)
        if "GD" in fams:
            _gradient(s)
        if "DET" in fams:
            _deterministic(s)
        if "HAVOC" in fams:
            _havoc(s, np.random.default_rng(s.cfg.rng_seed))
    except _Solved:
        status, tag = "solved", s.solution_tag
    except _Unsat as u:
        status, reason, tag = "unsat", str(u), u.tag
    except _Budget:
        budget = True
        reason = "attempt budget exhausted"
    stats = {f: st for f, st in s.stats.items()}
    return MutationOutcome(status=status, assignment=s.solution, tag=tag, reason=reason, sa=s.sa,
                           stats=stats, attempts=s.attempts, pi_evals=s.pi_evals,
                           budget_exhausted=budget)


def mutate(e: Node, pi: Sequence[Node], seed: bytes, store: MetadataStore,
           cfg: Optional[MutationConfig] = None, certify: bool = True) -> MutationOutcome:
    """Search for an assignment satisfying ``e`` and every member of ``pi``.

    ``store`` must already hold ``pi`` as its admitted path condition (see
    :meth:`MetadataStore.sync_pi`); bytes it locks are never changed.
    """
    cfg = cfg or MutationConfig()
    return _run(_Search(e, pi, seed, store, cfg, certify=certify))


def mutate_opt(e: Node, pi: Sequence[Node], seed: bytes, store: MetadataStore,
               cfg: Optional[MutationConfig] = None) -> Optional[Assignment]:
    """Like :func:`mutate` but ignoring every fact derived from ``pi``."""
    cfg = cfg or MutationConfig()
    out = _run(_Search(e, pi, seed, store, cfg, optimistic=True))
    return out.assignment if out.solved else None


def new_search(e: Node, pi: Sequence[Node], seed: bytes, store: MetadataStore,
               cfg: MutationConfig, optimistic: bool = False) -> _Search:
    return _Search(e, pi, seed, store, cfg, optimistic=optimistic, certify=False)
