"""Flatten expression DAGs into linear instruction tapes for the kernels.

A tape lists every node reachable from an ordered tuple of roots in
topological order. Input bytes are renumbered to *columns*: a candidate
batch is a ``(N, C)`` uint8 matrix holding only the bytes the roots read,
which keeps batches small even for large seeds.
"""

from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from fuzzysat import kernels
from fuzzysat.expr import Kind, Node, inputs_of, topo_order


@dataclass(eq=False)
class Tape:
    roots: Tuple[Node, ...]
    columns: np.ndarray        # int64[C], original byte index of each column
    op: np.ndarray             # int32[S]
    width: np.ndarray          # int32[S]
    arg0: np.ndarray           # int32[S]
    arg1: np.ndarray           # int32[S]
    arg2: np.ndarray           # int32[S]
    param: np.ndarray          # uint64[S]
    root_slot: np.ndarray      # int32[R]
    root_end: np.ndarray       # int32[R], slots to run before root r is known

    @property
    def n_slots(self) -> int:
        return int(self.op.shape[0])

    def column_of(self, byte_index: int) -> int:
        pos = int(np.searchsorted(self.columns, byte_index))
        if pos >= self.columns.size or self.columns[pos] != byte_index:
            raise KeyError(byte_index)
        return pos

    def run(self, batch: np.ndarray) -> np.ndarray:
        """Evaluate every root on each row of ``batch``; returns uint64[N, R]."""
        return kernels.eval_batch(self.op, self.width, self.arg0, self.arg1, self.arg2,
                                  self.param, self.root_slot, np.ascontiguousarray(batch))


_cache: "OrderedDict[tuple, Tape]" = OrderedDict()
_CACHE_LIMIT = 4096


def compile_tape(roots: Sequence[Node], columns: Optional[Sequence[int]] = None) -> Tape:
    """Compile ``roots`` (in order) into a tape, memoized on roots and columns."""
    roots = tuple(roots)
    cols_key = None if columns is None else tuple(int(c) for c in columns)
    key = (tuple(r.id for r in roots), cols_key)
    tape = _cache.get(key)
    if tape is not None:
        _cache.move_to_end(key)
        return tape
    tape = _compile(roots, cols_key)
    _cache[key] = tape
    if len(_cache) > _CACHE_LIMIT:
        _cache.popitem(last=False)
    return tape


def _compile(roots: Tuple[Node, ...], columns: Optional[Tuple[int, ...]]) -> Tape:
    needed = set()
    for r in roots:
        needed |= inputs_of(r)
    if columns is None:
        columns = tuple(sorted(needed))
    elif not needed <= set(columns):
        raise ValueError(f"columns miss input bytes {sorted(needed - set(columns))}")
    colpos = {b: i for i, b in enumerate(columns)}

    slot = {}
    order = []
    root_end = []
    for r in roots:
        for node in topo_order([r]):
            if id(node) not in slot:
                slot[id(node)] = len(order)
                order.append(node)
        root_end.append(len(order))

    s = len(order)
    op = np.empty(s, np.int32)
    width = np.empty(s, np.int32)
    arg0 = np.zeros(s, np.int32)
    arg1 = np.zeros(s, np.int32)
    arg2 = np.zeros(s, np.int32)
    param = np.zeros(s, np.uint64)
    for i, node in enumerate(order):
        op[i] = int(node.kind)
        width[i] = node.width
        ch = node.children
        if ch:
            arg0[i] = slot[id(ch[0])]
            if len(ch) > 1:
                arg1[i] = slot[id(ch[1])]
            if len(ch) > 2:
                arg2[i] = slot[id(ch[2])]
        if node.kind in (Kind.CONST, Kind.BCONST):
            param[i] = node.params[0]
        elif node.kind is Kind.INPUT:
            arg0[i] = colpos[node.params[0]]
        elif node.kind is Kind.EXTRACT:
            param[i] = node.params[1]
    return Tape(roots=roots, columns=np.asarray(columns, dtype=np.int64), op=op, width=width,
                arg0=arg0, arg1=arg1, arg2=arg2, param=param,
                root_slot=np.asarray([slot[id(r)] for r in roots], np.int32),
                root_end=np.asarray(root_end, np.int32))
