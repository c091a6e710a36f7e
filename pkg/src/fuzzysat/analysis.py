"""Expression analyses and the metadata store they feed.

Per-expression facts (input bytes, input groups, input-to-state shape,
interesting constants, range constraints) are computed once per node and
cached. Facts coming from path constraints are merged into global maps
when a constraint is admitted to the path condition.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from fuzzysat import expr as E
from fuzzysat.expr import Kind, Node
from fuzzysat.interval import WrappedInterval, from_comparison, intersect, reflect, shift

Slot = Tuple[str, int]   # ("in", byte) | ("c", value) | ("sx", byte)

CONSTANT_CAP = 64


@dataclass(frozen=True)
class InputGroup:
    """Value assembled from byte slots, lowest byte first."""

    slots: Tuple[Slot, ...]

    @property
    def width(self) -> int:
        return 8 * len(self.slots)

    @property
    def inputs(self) -> frozenset:
        return frozenset(i for k, i in self.slots if k == "in")

    @property
    def low_byte(self) -> int:
        return min(self.inputs)

    @property
    def n_inputs(self) -> int:
        return len(self.inputs)

    def canonical(self) -> "InputGroup":
        """Drop high constant-zero lanes (zero extension)."""
        s = list(self.slots)
        while len(s) > 1 and s[-1] == ("c", 0) and any(k == "in" for k, _ in s[:-1]):
            s.pop()
        return self if len(s) == len(self.slots) else InputGroup(tuple(s))

    def node(self) -> Node:
        parts = []
        for kind, v in reversed(self.slots):
            if kind == "in":
                parts.append(E.input_byte(v))
            elif kind == "c":
                parts.append(E.const(v, 8))
            else:
                parts.append(E.extract(E.sext(E.input_byte(v), 8), 15, 8))
        return parts[0] if len(parts) == 1 else E.concat(*parts)

    def decode(self, tc) -> int:
        v = 0
        for j, (kind, x) in enumerate(self.slots):
            if kind == "in":
                b = tc[x]
            elif kind == "c":
                b = x
            else:
                b = 0xFF if tc[x] & 0x80 else 0
            v |= b << (8 * j)
        return v

    def encode(self, value: int, big_endian: bool = False,
               base: Optional[Mapping[int, int]] = None) -> Optional[Dict[int, int]]:
        """Byte assignment making the group equal ``value``; None if impossible.

        ``base`` supplies bytes referenced by sign-extension slots that are not
        themselves lanes of the group.
        """
        n = len(self.slots)
        if value < 0 or value >> (8 * n):
            return None
        lanes = [(value >> (8 * j)) & 0xFF for j in range(n)]
        if big_endian:
            lanes.reverse()
        out: Dict[int, int] = {}
        for (kind, x), b in zip(self.slots, lanes):
            if kind == "c":
                if b != x:
                    return None
            elif kind == "in":
                if out.setdefault(x, b) != b:
                    return None
        for (kind, x), b in zip(self.slots, lanes):
            if kind == "sx":
                src = out.get(x, None if base is None else base.get(x))
                if src is None or b != (0xFF if src & 0x80 else 0):
                    return None
        return out

    def __repr__(self) -> str:
        parts = []
        for kind, x in reversed(self.slots):
            parts.append(f"i{x}" if kind == "in" else (f"{x:#04x}" if kind == "c" else f"sx(i{x})"))
        return "G(" + "++".join(parts) + ")"


# -- group detection ---------------------------------------------------------

_lanes_memo: Dict[int, Optional[Tuple[Slot, ...]]] = {}


def _const_lanes(v: int, w: int) -> Tuple[Slot, ...]:
    return tuple(("c", (v >> (8 * j)) & 0xFF) for j in range(w // 8))


def _lanes(e: Node) -> Optional[Tuple[Slot, ...]]:
    """Byte lanes of ``e`` (low first) if it never mixes bits across lanes."""
    if e.is_bool or e.width % 8:
        return None
    hit = _lanes_memo.get(e.id, False)
    if hit is not False:
        return hit
    out = None
    k = e.kind
    c = e.children
    if k is Kind.INPUT:
        out = (("in", e.params[0]),)
    elif k is Kind.CONST:
        out = _const_lanes(e.params[0], e.width)
    elif k is Kind.CONCAT:
        hi, lo = _lanes(c[0]), _lanes(c[1])
        if hi is not None and lo is not None:
            out = lo + hi
    elif k is Kind.ZEXT:
        x = _lanes(c[0])
        if x is not None and e.params[0] % 8 == 0:
            out = x + (("c", 0),) * (e.params[0] // 8)
    elif k is Kind.SEXT:
        x = _lanes(c[0])
        if x is not None and e.params[0] % 8 == 0:
            top_kind, top = x[-1]
            if top_kind == "c":
                fill = ("c", 0xFF if top & 0x80 else 0)
            else:
                fill = ("sx", top)
            out = x + (fill,) * (e.params[0] // 8)
    elif k is Kind.EXTRACT:
        hi, lo = e.params
        x = _lanes(c[0])
        if x is not None and lo % 8 == 0 and (hi + 1) % 8 == 0:
            out = x[lo // 8:(hi + 1) // 8]
    elif k in (Kind.SHL, Kind.LSHR) and c[1].kind is Kind.CONST:
        x = _lanes(c[0])
        sh = c[1].params[0]
        if x is not None and sh % 8 == 0:
            n = len(x)
            s = min(sh // 8, n)
            zero = (("c", 0),) * s
            out = zero + x[:n - s] if k is Kind.SHL else x[s:] + zero
    elif k in (Kind.OR, Kind.ADD, Kind.XOR, Kind.AND):
        a, b = _lanes(c[0]), _lanes(c[1])
        if a is not None and b is not None:
            merged = []
            for la, lb in zip(a, b):
                m = _merge_lane(k, la, lb)
                if m is None:
                    merged = None
                    break
                merged.append(m)
            if merged is not None:
                out = tuple(merged)
    _lanes_memo[e.id] = out
    return out


def _merge_lane(k: Kind, a: Slot, b: Slot) -> Optional[Slot]:
    if a[0] == "c" and b[0] == "c":
        if k is Kind.ADD:
            # a carry could leak into the next lane
            return ("c", a[1] + b[1]) if a[1] + b[1] <= 0xFF else None
        op = {Kind.OR: int.__or__, Kind.XOR: int.__xor__, Kind.AND: int.__and__}[k]
        return ("c", op(a[1], b[1]))
    if k is Kind.AND:
        for x, y in ((a, b), (b, a)):
            if x == ("c", 0xFF):
                return y
            if x == ("c", 0):
                return ("c", 0)
        return None
    for x, y in ((a, b), (b, a)):
        if x == ("c", 0):
            return y
    return None


def detect_group(e: Node) -> Optional[InputGroup]:
    lanes = _lanes(e)
    if lanes is None or not any(k == "in" for k, _ in lanes):
        return None
    return InputGroup(lanes)


def _sort_groups(groups: Iterable[InputGroup]) -> List[InputGroup]:
    return sorted(set(groups), key=lambda g: (-g.width, g.low_byte, g.slots))


def contained_groups(e: Node) -> List[InputGroup]:
    """Maximal (canonical) input groups found top-down in ``e``."""
    found = []
    seen = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if n.id in seen:
            continue
        seen.add(n.id)
        g = detect_group(n)
        if g is not None:
            found.append(g.canonical())
            continue
        stack.extend(n.children)
    found = _sort_groups(found)
    keep = []
    for g in found:
        if any(g.inputs < h.inputs for h in found):
            continue
        keep.append(g)
    return keep


# -- input-to-state ----------------------------------------------------------

@dataclass(frozen=True)
class I2S:
    group: InputGroup      # exact group of the operand (not canonicalized)
    op: str                # comparison with the group on the left
    operand: Node


def detect_i2s(e: Node) -> Optional[I2S]:
    cmp = E.as_comparison(e)
    if cmp is None:
        return None
    op, lhs, rhs = cmp
    g = detect_group(lhs)
    if g is not None:
        return I2S(g, op, rhs)
    g = detect_group(rhs)
    if g is not None:
        return I2S(g, E.flip_cmp(op), lhs)
    return None


# -- ranges ------------------------------------------------------------------

def _project(g: InputGroup, iv: WrappedInterval) -> Tuple[InputGroup, WrappedInterval]:
    """Move an interval over a zero-extended group onto its canonical group."""
    cg = g.canonical()
    if cg is g:
        return g, iv
    w = cg.width
    cap = WrappedInterval.segment(0, (1 << w) - 1, g.width)
    x = intersect(iv, cap)
    if x.is_bottom:
        return cg, WrappedInterval.bottom(w)
    if x.is_top or x.wraps or x.hi >= 1 << w:
        return cg, WrappedInterval.top(w)
    return cg, WrappedInterval.segment(x.lo, x.hi, w)


def _const_side(x: Node) -> Optional[int]:
    return x.params[0] if x.kind is Kind.CONST else None


def _solve_side(x: Node, iv: WrappedInterval) -> Optional[Tuple[InputGroup, WrappedInterval]]:
    """Peel invertible ±c / c−x / −x / ~x / ⊕c layers off ``x`` ∈ iv."""
    full = (1 << x.width) - 1
    while True:
        g = detect_group(x)
        if g is not None:
            return _project(g, iv)
        k = x.kind
        if k in (Kind.ADD, Kind.SUB, Kind.XOR):
            a, b = x.children
            ca, cb = _const_side(a), _const_side(b)
            if k is Kind.ADD and (ca is not None or cb is not None):
                c, x = (ca, b) if ca is not None else (cb, a)
                iv = shift(iv, -c)
            elif k is Kind.SUB and cb is not None:
                iv = shift(iv, cb)
                x = a
            elif k is Kind.SUB and ca is not None:
                iv = reflect(iv, ca)
                x = b
            elif k is Kind.XOR and (ca is not None or cb is not None):
                c, x = (ca, b) if ca is not None else (cb, a)
                n = iv.size()
                if n == 1:
                    iv = WrappedInterval.singleton(iv.lo ^ c, iv.width)
                elif n == full:
                    v = (iv.hi + 1) ^ c
                    iv = WrappedInterval.segment(v + 1, v - 1, iv.width)
                elif not iv.is_top:
                    return None
            else:
                return None
        elif k is Kind.NEG:
            iv = reflect(iv, 0)
            x = x.children[0]
        elif k is Kind.NOT:
            iv = reflect(iv, full)
            x = x.children[0]
        else:
            return None


def _conjuncts(e: Node) -> List[Node]:
    out, stack = [], [e]
    while stack:
        n = stack.pop()
        if n.kind is Kind.BAND:
            stack.extend(reversed(n.children))
        else:
            out.append(n)
    return out


def detect_range(e: Node) -> Optional[Tuple[InputGroup, WrappedInterval]]:
    """``(group, interval)`` if ``e`` bounds a single input group."""
    cmp = E.as_comparison(e)
    if cmp is None:
        return None
    op, lhs, rhs = cmp
    if rhs.kind is Kind.CONST and lhs.kind is not Kind.CONST:
        x, k = lhs, rhs.params[0]
    elif lhs.kind is Kind.CONST and rhs.kind is not Kind.CONST:
        x, k, op = rhs, lhs.params[0], E.flip_cmp(op)
    else:
        return None
    return _solve_side(x, from_comparison(op, k, x.width))


def detect_ranges(e: Node) -> List[Tuple[InputGroup, WrappedInterval]]:
    """Ranges implied by every conjunct of ``e``."""
    out = []
    for c in _conjuncts(e):
        r = detect_range(c)
        if r is not None:
            out.append(r)
    return out


# -- interesting constants -----------------------------------------------------

_BITWISE = {Kind.AND, Kind.OR, Kind.XOR, Kind.NOT, Kind.SHL, Kind.LSHR, Kind.ASHR,
            Kind.CONCAT, Kind.EXTRACT}


def _variants(x: Node, k: int) -> List[int]:
    """Walk ``x == k`` through invertible layers, yielding each implied value."""
    out = []
    w = x.width
    m = (1 << w) - 1
    while x.kind in (Kind.ADD, Kind.SUB, Kind.XOR, Kind.MUL, Kind.UDIV, Kind.OR, Kind.AND,
                     Kind.SHL, Kind.LSHR, Kind.ZEXT):
        if x.kind is Kind.ZEXT:
            x = x.children[0]
            continue
        a, b = x.children
        ca, cb = _const_side(a), _const_side(b)
        if ca is None and cb is None:
            break
        c, y = (cb, a) if cb is not None else (ca, b)
        kind = x.kind
        if kind is Kind.ADD:
            k = (k - c) & m
        elif kind is Kind.SUB:
            k = (k + c) & m if cb is not None else (c - k) & m
        elif kind is Kind.XOR:
            k = k ^ c
        elif kind is Kind.MUL:
            if c == 0 or k % c:
                break
            k = k // c
        elif kind is Kind.UDIV and cb is not None:
            k = (k * c) & m
        elif kind is Kind.SHL and cb is not None:
            k = k >> c
        elif kind is Kind.LSHR and cb is not None:
            k = (k << c) & m
        elif kind in (Kind.OR, Kind.AND):
            pass
        else:
            break
        out.append(k)
        x = y
    return out


def collect_constants(e: Node, cap: int = CONSTANT_CAP) -> Dict[int, str]:
    """Interesting constants of ``e`` mapped to provenance, in priority order.

    Provenance is ``semantic`` (implied through an operator), ``literal``,
    or ``neighbor`` (±1 around an arithmetic literal).
    """
    semantic: List[int] = []
    literal: List[int] = []
    arith: set = set()
    for n in E.topo_order([e]):
        if n.kind is Kind.CONST:
            continue
        cmp = E.as_comparison(n) if n.kind in E.COMPARISONS else None
        if cmp is not None:
            _, l, r = cmp
            for side, other in ((l, r), (r, l)):
                if side.kind is Kind.CONST:
                    semantic.extend(_variants(other, side.params[0]))
                    if other.kind not in _BITWISE:
                        arith.add(side.params[0])
        for ch in n.children:
            if ch.kind is Kind.CONST:
                literal.append(ch.params[0])
                if n.kind not in _BITWISE and n.kind not in E.COMPARISONS:
                    arith.add(ch.params[0])
    out: Dict[int, str] = {}
    for v in semantic:
        out.setdefault(v, "semantic")
    for v in literal:
        out.setdefault(v, "literal")
    for v in literal:
        if v in arith:
            for d in (-1, 1):
                if v + d >= 0:
                    out.setdefault(v + d, "neighbor")
    if len(out) > cap:
        out = dict(list(out.items())[:cap])
    return out


# -- facts and store ---------------------------------------------------------

@dataclass
class ExprFacts:
    node: Node
    inputs: frozenset
    is_group: Optional[InputGroup]
    groups: List[InputGroup]
    i2s: Optional[I2S]
    constants: Dict[int, str]
    ranges: List[Tuple[InputGroup, WrappedInterval]]
    uniquely_defines: Optional[Tuple[InputGroup, int]]
    comparison: Optional[Tuple[str, Node, Node]]

    @property
    def range(self) -> Optional[Tuple[InputGroup, WrappedInterval]]:
        return self.ranges[0] if self.ranges else None

    def record(self) -> str:
        parts = [f"expr={self.node.id}", f"inputs={sorted(self.inputs)}"]
        if self.is_group is not None:
            parts.append(f"group={self.is_group!r}")
        parts.append(f"groups={self.groups!r}")
        if self.i2s is not None:
            parts.append(f"i2s=({self.i2s.group!r} {self.i2s.op} #{self.i2s.operand.id})")
        if self.constants:
            parts.append("constants=[" + ",".join(f"{v:#x}" for v in self.constants) + "]")
        for g, iv in self.ranges:
            parts.append(f"range={g!r}:{iv!r}")
        if self.uniquely_defines is not None:
            g, v = self.uniquely_defines
            parts.append(f"unique={g!r}={v:#x}")
        return " ".join(parts)


def compute_facts(e: Node) -> ExprFacts:
    ranges = detect_ranges(e)
    unique = None
    if E.as_comparison(e) is not None:
        r = detect_range(e)
        if r is not None and r[1].size() == 1:
            unique = (r[0], r[1].lo)
    return ExprFacts(
        node=e,
        inputs=E.inputs_of(e),
        is_group=detect_group(e),
        groups=contained_groups(e),
        i2s=detect_i2s(e),
        constants=collect_constants(e),
        ranges=ranges,
        uniquely_defines=unique,
        comparison=E.as_comparison(e),
    )


class MetadataStore:
    """Facts cache plus the maps derived from the admitted path condition.

    ``locked`` holds bytes pinned by :meth:`fix_input_bytes`; it is only ever
    non-empty on scoped copies.
    """

    def __init__(self) -> None:
        self.facts: Dict[int, ExprFacts] = {}
        self.analyze_calls = 0
        self.detector_runs = 0
        self._reset_pi()
        self.locked: Dict[int, int] = {}

    def _reset_pi(self) -> None:
        self.pi: List[Node] = []
        self.ranges: Dict[InputGroup, WrappedInterval] = {}
        self.unique: Dict[int, int] = {}
        self.conflict_index: Dict[int, List[Node]] = {}
        self.position: Dict[int, int] = {}
        self.contradiction = False

    # analysis
    def analyze(self, e: Node) -> ExprFacts:
        self.analyze_calls += 1
        f = self.facts.get(e.id)
        if f is None:
            self.detector_runs += 1
            f = compute_facts(e)
            self.facts[e.id] = f
        return f

    def admit_to_pi(self, e: Node) -> None:
        if e.id in self.position:
            return
        f = self.analyze(e)
        self.position[e.id] = len(self.pi)
        self.pi.append(e)
        for b in f.inputs:
            self.conflict_index.setdefault(b, []).append(e)
        if e.kind is Kind.BCONST and not e.params[0]:
            self.contradiction = True
        for g, iv in f.ranges:
            cur = self.ranges.get(g)
            new = iv if cur is None else intersect(cur, iv)
            self.ranges[g] = new
            if new.is_bottom:
                self.contradiction = True
            elif new.size() == 1:
                enc = g.encode(new.lo)
                if enc is None:
                    if not any(k == "sx" for k, _ in g.slots):
                        self.contradiction = True
                    continue
                for b, v in enc.items():
                    if self.unique.setdefault(b, v) != v:
                        self.contradiction = True

    def sync_pi(self, pi: Sequence[Node]) -> None:
        """Make the admitted path condition equal ``pi``.

        Extending the current prefix only admits the new members; any other
        path condition rebuilds the derived maps (the facts cache survives).
        """
        pi = list(pi)
        n = len(self.pi)
        if len(pi) < n or any(a is not b for a, b in zip(self.pi, pi)):
            self._reset_pi()
            n = 0
        for e in pi[n:]:
            self.admit_to_pi(e)

    # queries
    def range_of(self, g: InputGroup) -> WrappedInterval:
        return self.ranges.get(g.canonical(), WrappedInterval.top(g.canonical().width))

    def fixed_bytes(self, include_unique: bool = True) -> Dict[int, int]:
        out = dict(self.unique) if include_unique else {}
        out.update(self.locked)
        return out

    def conflicting(self, e: Node, exclude_fixed: bool = True) -> List[Node]:
        """Admitted constraints sharing a byte with ``e``, in admission order.

        With ``exclude_fixed`` the bytes pinned in this scope do not count.
        """
        inputs = set(E.inputs_of(e))
        if exclude_fixed:
            inputs -= set(self.locked)
        hits = {}
        for b in inputs:
            for p in self.conflict_index.get(b, ()):
                hits[p.id] = p
        return sorted(hits.values(), key=lambda p: self.position[p.id])

    def fix_input_bytes(self, a: Mapping[int, int]) -> "MetadataStore":
        """Scoped copy with the bytes of ``a`` locked; this store is untouched."""
        m = MetadataStore.__new__(MetadataStore)
        m.facts = self.facts
        m.analyze_calls = 0
        m.detector_runs = 0
        m.pi = list(self.pi)
        m.ranges = dict(self.ranges)
        m.unique = dict(self.unique)
        m.conflict_index = {k: list(v) for k, v in self.conflict_index.items()}
        m.position = dict(self.position)
        m.contradiction = self.contradiction
        m.locked = dict(self.locked)
        m.locked.update({int(k): int(v) & 0xFF for k, v in a.items()})
        return m

    def dump(self, nodes: Optional[Iterable[Node]] = None) -> str:
        """One text record per analyzed expression, then the derived maps."""
        if nodes is None:
            facts = list(self.facts.values())
        else:
            facts = [self.analyze(n) for n in nodes]
        lines = [f.record() for f in facts]
        for g, iv in sorted(self.ranges.items(), key=lambda t: t[0].slots):
            lines.append(f"pi-range {g!r} {iv!r}")
        for b in sorted(self.unique):
            lines.append(f"pi-unique i{b}={self.unique[b]:#04x}")
        for b in sorted(self.locked):
            lines.append(f"locked i{b}={self.locked[b]:#04x}")
        return "\n".join(lines)


def analyze(e: Node, m: MetadataStore) -> MetadataStore:
    m.analyze(e)
    return m


def fix_input_bytes(a: Mapping[int, int], m: MetadataStore) -> MetadataStore:
    return m.fix_input_bytes(a)


def conflicting(e: Node, m: MetadataStore) -> List[Node]:
    return m.conflicting(e)
