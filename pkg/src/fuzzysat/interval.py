"""Wrapped (circular) intervals over w-bit values.

A segment ``[lo, hi]`` is the clockwise walk from lo to hi on the circle
0 .. 2^w-1, so ``[0xFFF0, 0x000F]`` holds 32 values. Signed bounds are just
segments that cross the 0x7F..F / 0x80..0 boundary, which lets one domain
serve signed and unsigned comparisons alike.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

_SEG, _TOP, _BOT = 0, 1, 2


@dataclass(frozen=True)
class WrappedInterval:
    width: int
    lo: int = 0
    hi: int = 0
    tag: int = _SEG

    # constructors
    @staticmethod
    def top(width: int) -> "WrappedInterval":
        return WrappedInterval(width, 0, (1 << width) - 1, _TOP)

    @staticmethod
    def bottom(width: int) -> "WrappedInterval":
        return WrappedInterval(width, 0, 0, _BOT)

    @staticmethod
    def segment(lo: int, hi: int, width: int) -> "WrappedInterval":
        m = (1 << width) - 1
        lo &= m
        hi &= m
        if ((hi - lo) & m) == m:
            return WrappedInterval.top(width)
        return WrappedInterval(width, lo, hi, _SEG)

    @staticmethod
    def singleton(v: int, width: int) -> "WrappedInterval":
        return WrappedInterval.segment(v, v, width)

    # queries
    @property
    def mask(self) -> int:
        return (1 << self.width) - 1

    @property
    def is_top(self) -> bool:
        return self.tag == _TOP

    @property
    def is_bottom(self) -> bool:
        return self.tag == _BOT

    @property
    def wraps(self) -> bool:
        return self.tag == _SEG and self.lo > self.hi

    def size(self) -> int:
        if self.tag == _TOP:
            return 1 << self.width
        if self.tag == _BOT:
            return 0
        return ((self.hi - self.lo) & self.mask) + 1

    def __len__(self) -> int:
        return self.size()

    def contains(self, v: int) -> bool:
        if self.tag == _TOP:
            return True
        if self.tag == _BOT:
            return False
        m = self.mask
        return ((v - self.lo) & m) <= ((self.hi - self.lo) & m)

    __contains__ = contains

    def min_unsigned(self) -> int:
        if self.tag == _BOT:
            raise ValueError("empty interval has no minimum")
        return 0 if (self.tag == _TOP or self.wraps) else self.lo

    def max_unsigned(self) -> int:
        if self.tag == _BOT:
            raise ValueError("empty interval has no maximum")
        return self.mask if (self.tag == _TOP or self.wraps) else self.hi

    def enumerate(self, cap: Optional[int] = None) -> Iterator[int]:
        """Values in clockwise order starting at lo."""
        n = self.size()
        if cap is not None and n > cap:
            raise ValueError(f"interval of size {n} exceeds enumeration cap {cap}")
        m = self.mask
        for d in range(n):
            yield (self.lo + d) & m

    def screen(self) -> Tuple[int, int, int]:
        """(lo, span, mask) triple for the kernel test ``((v-lo)&mask) <= span``.

        Bottom maps to an unsatisfiable triple only when the caller checks
        ``is_bottom`` first; Top maps to a test that always passes.
        """
        if self.tag == _TOP:
            return 0, self.mask, self.mask
        return self.lo, (self.hi - self.lo) & self.mask, self.mask

    def pieces(self) -> List[Tuple[int, int]]:
        """Linear (non-wrapping) pieces, ascending."""
        if self.tag == _BOT:
            return []
        if self.tag == _TOP:
            return [(0, self.mask)]
        if self.wraps:
            return [(0, self.hi), (self.lo, self.mask)]
        return [(self.lo, self.hi)]

    def __repr__(self) -> str:
        if self.tag == _TOP:
            return f"Top/{self.width}"
        if self.tag == _BOT:
            return f"Bottom/{self.width}"
        d = max(1, (self.width + 3) // 4)
        return f"[{self.lo:#0{d + 2}x}, {self.hi:#0{d + 2}x}]/{self.width}"


TOP = WrappedInterval.top
BOTTOM = WrappedInterval.bottom


def from_comparison(op: str, k: int, width: int, group_left: bool = True) -> WrappedInterval:
    """Exact solution set of ``g op k`` (or ``k op g`` when group_left is False)."""
    from fuzzysat.expr import flip_cmp

    if not group_left:
        op = flip_cmp(op)
    m = (1 << width) - 1
    k &= m
    smin = 1 << (width - 1)
    smax = smin - 1
    seg = WrappedInterval.segment
    if op == "eq":
        return seg(k, k, width)
    if op == "ne":
        return seg(k + 1, k - 1, width)
    if op == "ult":
        return BOTTOM(width) if k == 0 else seg(0, k - 1, width)
    if op == "ule":
        return seg(0, k, width)
    if op == "ugt":
        return BOTTOM(width) if k == m else seg(k + 1, m, width)
    if op == "uge":
        return seg(k, m, width)
    if op == "slt":
        return BOTTOM(width) if k == smin else seg(smin, k - 1, width)
    if op == "sle":
        return seg(smin, k, width)
    if op == "sgt":
        return BOTTOM(width) if k == smax else seg(k + 1, smax, width)
    if op == "sge":
        return seg(k, smax, width)
    raise ValueError(f"unknown comparison {op}")


def shift(iv: WrappedInterval, delta: int) -> WrappedInterval:
    """Translate every member by ``delta`` on the circle."""
    if iv.tag != _SEG:
        return iv
    return WrappedInterval.segment(iv.lo + delta, iv.hi + delta, iv.width)


def shift_by_addend(iv: WrappedInterval, c: int) -> WrappedInterval:
    """``iv`` bounds ``g + c``; return the matching bound on ``g``."""
    return shift(iv, -c)


def reflect(iv: WrappedInterval, c: int) -> WrappedInterval:
    """``iv`` bounds ``c - g``; return the matching bound on ``g``."""
    if iv.tag != _SEG:
        return iv
    return WrappedInterval.segment(c - iv.hi, c - iv.lo, iv.width)


def _cover(pieces: List[Tuple[int, int]], width: int) -> WrappedInterval:
    """Smallest single arc covering sorted, disjoint linear pieces."""
    m = (1 << width) - 1
    # merge touching pieces
    merged: List[Tuple[int, int]] = []
    for a, b in pieces:
        if merged and a <= merged[-1][1] + 1:
            merged[-1] = (merged[-1][0], max(b, merged[-1][1]))
        else:
            merged.append((a, b))
    if not merged:
        return BOTTOM(width)
    if len(merged) == 1:
        return WrappedInterval.segment(merged[0][0], merged[0][1], width)
    # the gap we leave out is the largest one, counting the wrap gap
    n = len(merged)
    best_gap, best_i = -1, 0
    for i in range(n):
        end = merged[i][1]
        nxt = merged[(i + 1) % n][0]
        gap = ((nxt - end) & m) - 1
        if i == n - 1 and merged[0][0] == 0 and merged[-1][1] == m:
            gap = -1
        if gap > best_gap:
            best_gap, best_i = gap, i
    lo = merged[(best_i + 1) % n][0]
    hi = merged[best_i][1]
    return WrappedInterval.segment(lo, hi, width)


def intersect(a: WrappedInterval, b: WrappedInterval) -> WrappedInterval:
    """Sound single-arc over-approximation of ``a ∩ b``; exact when possible."""
    if a.width != b.width:
        raise ValueError(f"width mismatch: {a.width} vs {b.width}")
    if a.is_bottom or b.is_bottom:
        return BOTTOM(a.width)
    if a.is_top:
        return b
    if b.is_top:
        return a
    out = []
    for x0, x1 in a.pieces():
        for y0, y1 in b.pieces():
            lo, hi = max(x0, y0), min(x1, y1)
            if lo <= hi:
                out.append((lo, hi))
    out.sort()
    res = _cover(out, a.width)
    # never wider than either operand
    for cand in (a, b):
        if cand.size() < res.size():
            res = cand
    return res


def intersect_all(ivs, width: int) -> WrappedInterval:
    acc = TOP(width)
    for iv in ivs:
        acc = intersect(acc, iv)
    return acc
