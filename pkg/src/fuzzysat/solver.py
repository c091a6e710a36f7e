"""Reasoning primitives: Solve (with multi-goal strategy and optimistic
fallback), SolveMin, SolveMax and SolveAll."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fuzzysat import expr as E
from fuzzysat.analysis import InputGroup, MetadataStore
from fuzzysat.expr import Assignment, Node
from fuzzysat.interval import WrappedInterval
from fuzzysat.kernels._ops import FULL
from fuzzysat.mutate import (
    Candidate, MutationConfig, MutationOutcome, _Budget, _Solved, _Search, _run, descend, mutate,
)
from fuzzysat.tape import compile_tape

SAT = "sat"
OPT_SAT = "opt-sat"
PROVEN_UNSAT = "proven-unsat"
UNKNOWN = "unknown"
STATUSES = (SAT, OPT_SAT, PROVEN_UNSAT, UNKNOWN)
ATTRIBUTIONS = ("I2S", "BF", "IC", "GD", "D+ND", "MGS")


class QueryError(ValueError):
    """The query is malformed (e.g. a non-boolean branch)."""


@dataclass
class Query:
    branch: Node
    pi: List[Node] = field(default_factory=list)
    seed: bytes = b""
    opt: bool = False

    def __post_init__(self):
        self.pi = list(self.pi)
        self.seed = bytes(self.seed)
        top = max([max(E.inputs_of(x), default=-1) for x in [self.branch, *self.pi]] + [-1])
        if len(self.seed) < top + 1:
            self.seed = self.seed + bytes(top + 1 - len(self.seed))


@dataclass
class SolverResult:
    status: str
    assignment: Optional[Assignment] = None
    attribution: Optional[str] = None
    reason: str = ""
    seed_satisfies_pi: bool = True
    stats: Dict[str, object] = field(default_factory=dict)

    @property
    def is_sat(self) -> bool:
        return self.status in (SAT, OPT_SAT)

    def testcase(self, seed: bytes) -> bytes:
        return E.apply(self.assignment or {}, seed)


def _holds(e: Node, tc: bytes) -> bool:
    return bool(E.evaluate(e, tc))


def pick_best_assignment(pi: Sequence[Node], sa: Sequence[Candidate]) -> Optional[Candidate]:
    """Candidate satisfying most of ``pi``; earliest wins ties."""
    best = None
    for c in sa:
        if best is None or c.pi_sat > best.pi_sat:
            best = c
    return best


def fix_input_bytes(a: Assignment, m: MetadataStore) -> MetadataStore:
    return m.fix_input_bytes(a)


class _Stats:
    def __init__(self):
        self.attempts = 0
        self.pi_evals = 0
        self.mutate_calls = 0
        self.families: Dict[str, Dict[str, int]] = {}
        self.budget_exhausted = False

    def add(self, out: MutationOutcome) -> MutationOutcome:
        self.mutate_calls += 1
        self.attempts += out.attempts
        self.pi_evals += out.pi_evals
        self.budget_exhausted |= out.budget_exhausted
        for f, st in out.stats.items():
            d = self.families.setdefault(f, {"attempts": 0, "sat_e": 0, "sat_all": 0})
            d["attempts"] += st.attempts
            d["sat_e"] += st.sat_e
            d["sat_all"] += st.sat_all
        return out

    def as_dict(self) -> Dict[str, object]:
        return {"candidates": self.attempts, "pi_evals": self.pi_evals,
                "mutate_calls": self.mutate_calls, "families": self.families,
                "budget_exhausted": self.budget_exhausted}


def solve(q: Query, m: Optional[MetadataStore] = None,
          cfg: Optional[MutationConfig] = None) -> SolverResult:
    """Solve ``branch ∧ pi`` by mutating the seed."""
    t0 = time.perf_counter()
    cfg = cfg or MutationConfig()
    m = m if m is not None else MetadataStore()
    e = q.branch
    if not e.is_bool:
        raise QueryError("branch condition must be boolean")
    for p in q.pi:
        if not p.is_bool:
            raise QueryError("path constraints must be boolean")
    stats = _Stats()
    seed = q.seed
    seed_ok = all(_holds(p, seed) for p in q.pi)

    m.sync_pi(q.pi)
    m.analyze(e)

    def finish(status, a=None, tag=None, reason=""):
        if status == SAT and not (a is not None and _holds(e, E.apply(a, seed))
                                  and all(_holds(p, E.apply(a, seed)) for p in q.pi)):
            status, reason = (OPT_SAT if q.opt and _holds(e, E.apply(a, seed)) else UNKNOWN,
                              "candidate failed re-verification")
            if status == UNKNOWN:
                a, tag = None, None
        if status == OPT_SAT and not (a is not None and _holds(e, E.apply(a, seed))):
            status, a, tag, reason = UNKNOWN, None, None, "candidate failed re-verification"
        d = stats.as_dict()
        d["time"] = time.perf_counter() - t0
        return SolverResult(status, dict(sorted(a.items())) if a is not None else None, tag,
                            reason, seed_ok, d)

    out = stats.add(mutate(e, q.pi, seed, m, cfg))
    if out.solved:
        return finish(SAT, out.assignment, out.tag)
    if out.proven_unsat and not q.opt:
        return finish(PROVEN_UNSAT, tag=out.tag, reason=out.reason)

    best = pick_best_assignment(q.pi, out.sa)
    a = best.assignment if best is not None else None
    a_tag = best.tag if best is not None else None
    if a is not None and not out.proven_unsat:
        m2 = m.fix_input_bytes(a)
        base = E.apply(a, seed)
        cc = [p for p in m2.conflicting(e, exclude_fixed=False)
              if not _holds(p, base) and E.inputs_of(p) - set(m2.locked)]
        goal = list(q.pi) + [e]
        for e2 in cc:
            o2 = stats.add(mutate(e2, goal, seed, m2, cfg, certify=False))
            if o2.solved:
                merged = dict(a)
                merged.update(o2.assignment)
                return finish(SAT, merged, "MGS")
            b2 = pick_best_assignment(goal, o2.sa)
            if b2 is None:
                break
            merged = dict(a)
            merged.update(b2.assignment)
            if _holds(e, E.apply(merged, seed)):
                a, a_tag = merged, "MGS"
            m2 = m2.fix_input_bytes(merged)
    if q.opt:
        if a is None:
            o3 = stats.add(_run(_Search(e, q.pi, seed, m, cfg, optimistic=True)))
            if o3.solved:
                a, a_tag = o3.assignment, o3.tag
        if a is not None:
            return finish(OPT_SAT, a, a_tag, "optimistic: branch only")
    if out.proven_unsat:
        return finish(PROVEN_UNSAT, tag=out.tag, reason=out.reason)
    return finish(UNKNOWN, reason=out.reason or "no assignment found")


# -- SolveMin / SolveMax / SolveAll ------------------------------------------------

def _explore(target: Node, pi: Sequence[Node], seed: bytes, m: MetadataStore,
             cfg: MutationConfig) -> Dict[int, Assignment]:
    """π-valid points found while pushing ``target`` down and up.

    Returns a map from target value to the first assignment reaching it.
    """
    if target.is_bool:
        raise QueryError("SolveMin/SolveMax/SolveAll need a bitvector expression")
    m.sync_pi(pi)
    m.analyze(target)
    probe = E.eq(target, target)          # always true; carries target's inputs
    facts = m.analyze(target)
    s = _Search(probe, pi, seed, m, cfg, certify=False)
    s.facts = facts
    s.free = [b for b in sorted(facts.inputs) if b not in s.fixed]
    s.e_inputs = sorted(facts.inputs)
    tape = compile_tape((target,), s.cols)
    t = s.tape
    pool: Dict[int, Assignment] = {}
    if m.contradiction:
        return pool

    def record(rows):
        if rows.shape[0] == 0:
            return
        rows = np.ascontiguousarray(rows)
        from fuzzysat import kernels
        status, _, pev = kernels.check_batch(
            t.op, t.width, t.arg0, t.arg1, t.arg2, t.param, t.root_slot, t.root_end, rows,
            s.n_screen, s.screen_lo, s.screen_span, s.screen_mask)
        s.attempts += rows.shape[0]
        s.pi_evals += int(pev)
        if not s.others_ok:
            return
        ok = np.nonzero(status == FULL)[0]
        if ok.size == 0:
            return
        vals = tape.run(rows[ok])[:, 0]
        for i, v in zip(ok, vals):
            v = int(v)
            if v not in pool:
                pool[v] = s.assignment(rows[i])
        if s.attempts >= cfg.per_query_attempt_budget:
            raise _Budget()

    try:
        record(s.base_row[None, :])
        groups = s.free_groups()
        for g in groups:
            iv = s.group_range(g)
            if iv.is_bottom:
                continue
            if iv.size() <= cfg.interval_enumerate_cap:
                vals = np.fromiter(iv.enumerate(), np.uint64, iv.size())
            else:
                vals = [iv.min_unsigned(), iv.max_unsigned(), iv.lo, iv.hi]
            record(s.encode_rows(g, vals))
            record(s.encode_rows(g, [0, (1 << g.width) - 1]))
        consts = list(facts.constants)
        for g in groups:
            for c in consts:
                record(s.encode_rows(g, [c & ((1 << g.width) - 1)]))
        for sign in (1.0, -1.0):
            def loss(rows, sign=sign):
                v = tape.run(rows)[:, 0].astype(np.float64)
                return sign * v
            descend(s, loss, "GD", on_rows=record)
        # single-byte sweeps catch what the descent steps over
        for b in s.free:
            rows = np.tile(s.base_row, (256, 1))
            rows[:, s.col[b]] = np.arange(256, dtype=np.uint8)
            record(rows)
    except (_Budget, _Solved):
        pass
    return pool


def solve_min(e: Node, pi: Sequence[Node] = (), seed: bytes = b"", m: Optional[MetadataStore] = None,
              cfg: Optional[MutationConfig] = None) -> Optional[Tuple[Assignment, int]]:
    pool = _explore(e, pi, _pad(seed, e, pi), m or MetadataStore(), cfg or MutationConfig())
    if not pool:
        return None
    v = min(pool)
    return pool[v], v


def solve_max(e: Node, pi: Sequence[Node] = (), seed: bytes = b"", m: Optional[MetadataStore] = None,
              cfg: Optional[MutationConfig] = None) -> Optional[Tuple[Assignment, int]]:
    pool = _explore(e, pi, _pad(seed, e, pi), m or MetadataStore(), cfg or MutationConfig())
    if not pool:
        return None
    v = max(pool)
    return pool[v], v


def solve_all(e: Node, pi: Sequence[Node] = (), seed: bytes = b"", m: Optional[MetadataStore] = None,
              cfg: Optional[MutationConfig] = None) -> List[Tuple[Assignment, int]]:
    pool = _explore(e, pi, _pad(seed, e, pi), m or MetadataStore(), cfg or MutationConfig())
    return [(pool[v], v) for v in sorted(pool)]


def _pad(seed: bytes, e: Node, pi: Sequence[Node]) -> bytes:
    return Query(E.eq(e, e), list(pi), seed).seed


class Session:
    """A metadata store and configuration shared by successive queries."""

    def __init__(self, cfg: Optional[MutationConfig] = None):
        self.cfg = cfg or MutationConfig()
        self.store = MetadataStore()

    def solve(self, q: Query) -> SolverResult:
        return solve(q, self.store, self.cfg)

    def solve_min(self, e: Node, pi: Sequence[Node] = (), seed: bytes = b""):
        return solve_min(e, pi, seed, self.store, self.cfg)

    def solve_max(self, e: Node, pi: Sequence[Node] = (), seed: bytes = b""):
        return solve_max(e, pi, seed, self.store, self.cfg)

    def solve_all(self, e: Node, pi: Sequence[Node] = (), seed: bytes = b""):
        return solve_all(e, pi, seed, self.store, self.cfg)
