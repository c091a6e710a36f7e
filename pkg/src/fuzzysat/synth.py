"""Random query generator for differential tests and synthetic corpora.

Queries follow the concolic contract: the seed satisfies every path
constraint and falsifies the negated branch it came from, so the branch
handed to the solver is false on the seed.
"""

from __future__ import annotations

import random
from pathlib import Path
from typing import List, Optional, Tuple

from fuzzysat import expr as E
from fuzzysat.expr import Node
from fuzzysat.smtlib import dump_query
from fuzzysat.solver import Query

CMP_OPS = ("eq", "ne", "ult", "ule", "ugt", "uge", "slt", "sle", "sgt", "sge")


def _negate(c: Node) -> Node:
    view = E.as_comparison(c)
    if view is None:
        return E.bnot(c)
    op, a, b = view
    return E.build_cmp(E.negate_cmp(op), a, b)


class QueryGenerator:
    """Builds random ``Query`` objects over ``1..max_bytes`` input bytes."""

    def __init__(self, rng: random.Random, max_bytes: int = 4, max_pi: int = 4):
        self.rng = rng
        self.max_bytes = max_bytes
        self.max_pi = max_pi

    def group(self, nbytes: int) -> Node:
        r = self.rng
        k = r.choice([1, 1, 2, 2, 4]) if nbytes >= 2 else 1
        idx = r.sample(range(nbytes), min(k, nbytes))
        parts = [E.input_byte(i) for i in idx]
        g = parts[0] if len(parts) == 1 else E.concat(*parts)
        if g.width < 16 and r.random() < 0.3:
            g = E.zext(g, 8)
        elif g.width == 24:
            g = E.zext(g, 8)
        return g

    def const(self, w: int) -> int:
        r = self.rng
        choice = r.random()
        if choice < 0.3:
            return r.randrange(0, 16)
        if choice < 0.5:
            return (1 << w) - 1 - r.randrange(0, 16)
        return r.getrandbits(w)

    def term(self, nbytes: int, depth: int = 0) -> Node:
        r = self.rng
        g = self.group(nbytes)
        if depth >= 2 or r.random() < 0.35:
            return g
        w = g.width
        op = r.choice(["add", "sub", "mul", "xor", "and", "or", "shl", "lshr", "udiv", "urem",
                       "add2", "neg", "not", "sext", "ite", "extract"])
        c = E.const(self.const(w), w)
        if op == "add":
            return E.add(g, c)
        if op == "sub":
            return E.sub(g, c)
        if op == "mul":
            return E.mul(g, E.const(r.randrange(1, 300) & ((1 << w) - 1), w))
        if op == "xor":
            return E.bvxor(g, c)
        if op == "and":
            return E.bvand(g, c)
        if op == "or":
            return E.bvor(g, c)
        if op == "shl":
            return E.shl(g, E.const(r.randrange(0, w), w))
        if op == "lshr":
            return E.lshr(g, E.const(r.randrange(0, w), w))
        if op == "udiv":
            return E.udiv(g, E.const(r.randrange(0, 20), w))
        if op == "urem":
            return E.urem(g, E.const(r.randrange(0, 20), w))
        if op == "neg":
            return E.neg(g)
        if op == "not":
            return E.bvnot(g)
        if op == "sext" and w <= 32:
            return E.extract(E.sext(g, w), w - 1, 0)
        if op == "extract" and w >= 16:
            return E.zext(E.extract(g, w - 5, 3), 8)
        if op == "ite":
            other = self.term(nbytes, depth + 1)
            if other.width != w:
                return g
            cond = self.comparison(nbytes, depth + 1)
            return E.ite(cond, g, other)
        h = self.term(nbytes, depth + 1)
        if h.width == w:
            return E.add(g, h)
        return g

    def comparison(self, nbytes: int, depth: int = 0) -> Node:
        r = self.rng
        lhs = self.term(nbytes, depth)
        w = lhs.width
        if r.random() < 0.7:
            rhs = E.const(self.const(w), w)
        else:
            rhs = self.term(nbytes, depth + 1)
            if rhs.width != w:
                rhs = E.const(self.const(w), w)
        op = r.choice(CMP_OPS)
        if r.random() < 0.5:
            return E.build_cmp(op, lhs, rhs)
        return E.build_cmp(E.flip_cmp(op), rhs, lhs)

    def query(self, nbytes: Optional[int] = None, n_pi: Optional[int] = None,
              opt: Optional[bool] = None) -> Query:
        r = self.rng
        nbytes = nbytes or r.randint(1, self.max_bytes)
        n_pi = r.randint(0, self.max_pi) if n_pi is None else n_pi
        seed = bytes(r.getrandbits(8) for _ in range(nbytes))
        pi: List[Node] = []
        for _ in range(n_pi):
            c = self.comparison(nbytes)
            if not E.evaluate(c, seed):
                c = _negate(c)
            pi.append(c)
        b = self.comparison(nbytes)
        branch = _negate(b) if E.evaluate(b, seed) else b
        if opt is None:
            opt = r.random() < 0.25
        return Query(branch, pi, seed, opt)


def generate(n: int, seed: int = 0, max_bytes: int = 4, max_pi: int = 4) -> List[Query]:
    gen = QueryGenerator(random.Random(seed), max_bytes, max_pi)
    return [gen.query() for _ in range(n)]


def write_corpus(directory, n: int, seed: int = 0, max_bytes: int = 4,
                 max_pi: int = 4) -> List[Path]:
    """Write ``n`` random queries as ``qNNNNN.smt2`` plus raw ``.seed`` files."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, q in enumerate(generate(n, seed, max_bytes, max_pi)):
        stem = f"q{k:05d}"
        (d / f"{stem}.seed").write_bytes(q.seed)
        p = d / f"{stem}.smt2"
        p.write_text(dump_query(q.pi + [q.branch], seed_path=f"{stem}.seed", opt=q.opt))
        paths.append(p)
    return paths


def large_pi(n_nodes: int = 1000, n_bytes: int = 4, seed: int = 0) -> Tuple[List[Node], bytes]:
    """Path constraints totalling at least ``n_nodes`` distinct DAG nodes, all true on the seed."""
    r = random.Random(seed)
    gen = QueryGenerator(r, n_bytes)
    tc = bytes(r.getrandbits(8) for _ in range(n_bytes))
    pi: List[Node] = []
    seen: set = set()
    while len(seen) < n_nodes:
        c = gen.comparison(n_bytes)
        if not E.evaluate(c, tc):
            c = _negate(c)
        pi.append(c)
        seen.update(n.id for n in E.topo_order([c]))
    return pi, tc
