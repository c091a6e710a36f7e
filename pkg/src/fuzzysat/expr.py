"""Hash-consed bitvector/boolean expression DAG.

Every node is created through :func:`intern`, so structurally equal terms
share one object and identity comparison is structural comparison.
Booleans are a separate sort with width 0.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Dict, Iterable, Optional, Sequence, Tuple, Union

MAX_WIDTH = 64


class Kind(IntEnum):
    # values double as tape opcodes, keep them stable
    CONST = 0
    INPUT = 1
    CONCAT = 2
    EXTRACT = 3
    ZEXT = 4
    SEXT = 5
    ADD = 6
    SUB = 7
    MUL = 8
    UDIV = 9
    SDIV = 10
    UREM = 11
    SREM = 12
    NEG = 13
    AND = 14
    OR = 15
    XOR = 16
    NOT = 17
    SHL = 18
    LSHR = 19
    ASHR = 20
    EQ = 21
    ULT = 22
    ULE = 23
    SLT = 24
    SLE = 25
    BNOT = 26
    BAND = 27
    BOR = 28
    ITE = 29
    BCONST = 30


BINARY_BV = frozenset({
    Kind.ADD, Kind.SUB, Kind.MUL, Kind.UDIV, Kind.SDIV, Kind.UREM, Kind.SREM,
    Kind.AND, Kind.OR, Kind.XOR, Kind.SHL, Kind.LSHR, Kind.ASHR,
})
UNARY_BV = frozenset({Kind.NEG, Kind.NOT})
COMPARISONS = frozenset({Kind.EQ, Kind.ULT, Kind.ULE, Kind.SLT, Kind.SLE})
BOOL_KINDS = COMPARISONS | {Kind.BNOT, Kind.BAND, Kind.BOR, Kind.BCONST}


class WidthError(ValueError):
    """Raised when a node violates the sort/width rules of its kind."""


class InputIndexError(IndexError):
    """An expression references an input byte the test case does not have."""


class Node:
    """One interned expression node. Never construct directly."""

    __slots__ = ("kind", "children", "params", "width", "id", "_inputs", "__weakref__")

    def __init__(self, kind: Kind, children: Tuple["Node", ...], params: Tuple[int, ...],
                 width: int, ident: int):
        self.kind = kind
        self.children = children
        self.params = params
        self.width = width
        self.id = ident
        self._inputs: Optional[frozenset] = None

    @property
    def is_bool(self) -> bool:
        return self.width == 0

    @property
    def value(self) -> int:
        """Literal value of a CONST/BCONST node."""
        if self.kind not in (Kind.CONST, Kind.BCONST):
            raise TypeError(f"{self.kind.name} node has no literal value")
        return self.params[0]

    def __repr__(self) -> str:
        from fuzzysat.smtlib import format_term
        return format_term(self)

    # identity semantics are exactly what interning guarantees
    __hash__ = object.__hash__

    def __lt__(self, other: "Node") -> bool:
        return self.id < other.id


_table: Dict[tuple, Node] = {}
_next_id = [0]


def _check(kind: Kind, children: Sequence[Node], params: Tuple[int, ...]) -> int:
    """Return the width of a well-formed node, raise WidthError otherwise."""
    n = len(children)
    ws = [c.width for c in children]

    def need(cond: bool, msg: str) -> None:
        if not cond:
            raise WidthError(f"{kind.name}: {msg}")

    if kind is Kind.CONST:
        need(n == 0 and len(params) == 2, "expects (value, width)")
        value, w = params
        need(1 <= w <= MAX_WIDTH, f"width {w} outside 1..{MAX_WIDTH}")
        need(0 <= value < (1 << w), f"value {value:#x} does not fit {w} bits")
        return w
    if kind is Kind.BCONST:
        need(n == 0 and len(params) == 1 and params[0] in (0, 1), "expects 0/1")
        return 0
    if kind is Kind.INPUT:
        need(n == 0 and len(params) == 1 and params[0] >= 0, "expects a byte index")
        return 8
    if kind is Kind.CONCAT:
        need(n == 2 and all(w > 0 for w in ws), "expects two bitvectors")
        need(ws[0] + ws[1] <= MAX_WIDTH, f"result wider than {MAX_WIDTH} bits")
        return ws[0] + ws[1]
    if kind is Kind.EXTRACT:
        need(n == 1 and ws[0] > 0 and len(params) == 2, "expects one bitvector")
        hi, lo = params
        need(0 <= lo <= hi < ws[0], f"bad range [{hi}:{lo}] for width {ws[0]}")
        return hi - lo + 1
    if kind in (Kind.ZEXT, Kind.SEXT):
        need(n == 1 and ws[0] > 0 and len(params) == 1 and params[0] >= 0,
             "expects one bitvector and an extension amount")
        need(ws[0] + params[0] <= MAX_WIDTH, f"result wider than {MAX_WIDTH} bits")
        return ws[0] + params[0]
    if kind in BINARY_BV:
        need(n == 2 and ws[0] > 0 and ws[0] == ws[1], f"operand widths {ws}")
        return ws[0]
    if kind in UNARY_BV:
        need(n == 1 and ws[0] > 0, "expects one bitvector")
        return ws[0]
    if kind is Kind.EQ:
        need(n == 2 and ws[0] == ws[1], f"operand widths {ws}")
        return 0
    if kind in COMPARISONS:
        need(n == 2 and ws[0] > 0 and ws[0] == ws[1], f"operand widths {ws}")
        return 0
    if kind is Kind.BNOT:
        need(n == 1 and ws[0] == 0, "expects a boolean")
        return 0
    if kind in (Kind.BAND, Kind.BOR):
        need(n == 2 and ws == [0, 0], "expects two booleans")
        return 0
    if kind is Kind.ITE:
        need(n == 3 and ws[0] == 0 and ws[1] == ws[2], f"operand widths {ws}")
        return ws[1]
    raise WidthError(f"unknown kind {kind!r}")


def intern(kind: Kind, children: Sequence[Node] = (), params: Sequence[int] = ()) -> Node:
    """Return the canonical node for ``kind(children; params)``."""
    children = tuple(children)
    params = tuple(int(p) for p in params)
    key = (kind, tuple(c.id for c in children), params)
    node = _table.get(key)
    if node is None:
        width = _check(kind, children, params)
        node = Node(kind, children, params, width, _next_id[0])
        _next_id[0] += 1
        _table[key] = node
    return node


# -- builders ---------------------------------------------------------------

def const(value: int, width: int) -> Node:
    return intern(Kind.CONST, (), (value & ((1 << width) - 1), width))


TRUE = intern(Kind.BCONST, (), (1,))
FALSE = intern(Kind.BCONST, (), (0,))


def boolean(b: bool) -> Node:
    return TRUE if b else FALSE


def input_byte(index: int) -> Node:
    return intern(Kind.INPUT, (), (index,))


def concat(*parts: Node) -> Node:
    """Concatenate, most significant part first (SMT-LIB order)."""
    if not parts:
        raise WidthError("CONCAT: needs at least one operand")
    acc = parts[0]
    for p in parts[1:]:
        acc = intern(Kind.CONCAT, (acc, p))
    return acc


def extract(e: Node, hi: int, lo: int) -> Node:
    return intern(Kind.EXTRACT, (e,), (hi, lo))


def zext(e: Node, extra: int) -> Node:
    return intern(Kind.ZEXT, (e,), (extra,))


def sext(e: Node, extra: int) -> Node:
    return intern(Kind.SEXT, (e,), (extra,))


def _bin(kind: Kind):
    def build(a: Node, b: Union[Node, int]) -> Node:
        if isinstance(b, int):
            b = const(b, a.width)
        return intern(kind, (a, b))
    build.__name__ = kind.name.lower()
    return build


add = _bin(Kind.ADD)
sub = _bin(Kind.SUB)
mul = _bin(Kind.MUL)
udiv = _bin(Kind.UDIV)
sdiv = _bin(Kind.SDIV)
urem = _bin(Kind.UREM)
srem = _bin(Kind.SREM)
bvand = _bin(Kind.AND)
bvor = _bin(Kind.OR)
bvxor = _bin(Kind.XOR)
shl = _bin(Kind.SHL)
lshr = _bin(Kind.LSHR)
ashr = _bin(Kind.ASHR)
eq = _bin(Kind.EQ)
ult = _bin(Kind.ULT)
ule = _bin(Kind.ULE)
slt = _bin(Kind.SLT)
sle = _bin(Kind.SLE)


def neg(e: Node) -> Node:
    return intern(Kind.NEG, (e,))


def bvnot(e: Node) -> Node:
    return intern(Kind.NOT, (e,))


def ugt(a: Node, b: Union[Node, int]) -> Node:
    if isinstance(b, int):
        b = const(b, a.width)
    return intern(Kind.ULT, (b, a))


def uge(a: Node, b: Union[Node, int]) -> Node:
    if isinstance(b, int):
        b = const(b, a.width)
    return intern(Kind.ULE, (b, a))


def sgt(a: Node, b: Union[Node, int]) -> Node:
    if isinstance(b, int):
        b = const(b, a.width)
    return intern(Kind.SLT, (b, a))


def sge(a: Node, b: Union[Node, int]) -> Node:
    if isinstance(b, int):
        b = const(b, a.width)
    return intern(Kind.SLE, (b, a))


def ne(a: Node, b: Union[Node, int]) -> Node:
    return bnot(eq(a, b))


def bnot(e: Node) -> Node:
    return intern(Kind.BNOT, (e,))


def band(*args: Node) -> Node:
    if not args:
        return TRUE
    acc = args[0]
    for a in args[1:]:
        acc = intern(Kind.BAND, (acc, a))
    return acc


def bor(*args: Node) -> Node:
    if not args:
        return FALSE
    acc = args[0]
    for a in args[1:]:
        acc = intern(Kind.BOR, (acc, a))
    return acc


def ite(c: Node, t: Node, f: Node) -> Node:
    return intern(Kind.ITE, (c, t, f))


# -- queries over the DAG ---------------------------------------------------

def topo_order(roots: Iterable[Node]) -> list:
    """Nodes reachable from ``roots``, children before parents, each once."""
    seen = set()
    order = []
    for root in roots:
        if id(root) in seen:
            continue
        stack = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for c in reversed(node.children):
                if id(c) not in seen:
                    stack.append((c, False))
    return order


def inputs_of(e: Node) -> frozenset:
    """Input byte indices reachable from ``e`` (memoized on the node)."""
    if e._inputs is not None:
        return e._inputs
    for node in topo_order([e]):
        if node._inputs is None:
            if node.kind is Kind.INPUT:
                node._inputs = frozenset(node.params)
            elif not node.children:
                node._inputs = frozenset()
            elif len(node.children) == 1:
                node._inputs = node.children[0]._inputs
            else:
                acc = frozenset()
                for c in node.children:
                    acc = acc | c._inputs
                node._inputs = acc
    return e._inputs


def size(e: Node) -> int:
    """Number of distinct DAG nodes under ``e``."""
    return len(topo_order([e]))


_NEGATE = {"eq": "ne", "ne": "eq", "ult": "uge", "uge": "ult", "ule": "ugt", "ugt": "ule",
           "slt": "sge", "sge": "slt", "sle": "sgt", "sgt": "sle"}
_FLIP = {"eq": "eq", "ne": "ne", "ult": "ugt", "ugt": "ult", "ule": "uge", "uge": "ule",
         "slt": "sgt", "sgt": "slt", "sle": "sge", "sge": "sle"}
_KIND_CMP = {Kind.EQ: "eq", Kind.ULT: "ult", Kind.ULE: "ule", Kind.SLT: "slt", Kind.SLE: "sle"}


def negate_cmp(op: str) -> str:
    return _NEGATE[op]


def flip_cmp(op: str) -> str:
    """Operator to use when the two operands swap sides."""
    return _FLIP[op]


def as_comparison(e: Node) -> Optional[Tuple[str, Node, Node]]:
    """View ``e`` as ``lhs op rhs`` over bitvectors, folding boolean negations.

    Returns None when ``e`` is not a (negated) bitvector comparison.
    """
    negated = False
    while e.kind is Kind.BNOT:
        negated = not negated
        e = e.children[0]
    op = _KIND_CMP.get(e.kind)
    if op is None or e.children[0].is_bool:
        return None
    if negated:
        op = _NEGATE[op]
    return op, e.children[0], e.children[1]


def build_cmp(op: str, a: Node, b: Node) -> Node:
    """Inverse of :func:`as_comparison`."""
    table = {"eq": eq, "ne": ne, "ult": ult, "ule": ule, "ugt": ugt, "uge": uge,
             "slt": slt, "sle": sle, "sgt": sgt, "sge": sge}
    return table[op](a, b)


def to_signed(value: int, width: int) -> int:
    if value >> (width - 1) & 1:
        return value - (1 << width)
    return value


# -- concrete evaluation ----------------------------------------------------

def evaluate(e: Node, tc) -> Union[int, bool]:
    """Value of ``e`` on test case ``tc`` (bytes-like or uint8 array).

    Bitvectors come back as unsigned ints, booleans as bool.
    """
    from fuzzysat.tape import compile_tape
    import numpy as np

    tape = compile_tape((e,))
    buf = np.frombuffer(bytes(tc), dtype=np.uint8) if not isinstance(tc, np.ndarray) else tc
    if tape.columns.size and int(tape.columns[-1]) >= buf.shape[-1]:
        raise InputIndexError(
            f"expression reads byte {int(tape.columns[-1])} of a {buf.shape[-1]}-byte test case")
    value = int(tape.run(buf[tape.columns][None, :])[0, 0])
    return bool(value) if e.is_bool else value


Assignment = Dict[int, int]


def apply(assignment: Assignment, tc) -> bytes:
    """Patch the bytes named by ``assignment`` into a copy of ``tc``."""
    out = bytearray(tc)
    for idx, val in assignment.items():
        if not 0 <= idx < len(out):
            raise InputIndexError(f"assignment index {idx} outside {len(out)}-byte test case")
        out[idx] = val & 0xFF
    return bytes(out)
