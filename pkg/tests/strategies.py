"""Hypothesis strategies for random expressions over a few input bytes."""

from hypothesis import strategies as st

from fuzzysat import expr as E

BIN = [E.add, E.sub, E.mul, E.udiv, E.sdiv, E.urem, E.srem, E.bvand, E.bvor, E.bvxor,
       E.shl, E.lshr, E.ashr]
CMP = ["eq", "ne", "ult", "ule", "ugt", "uge", "slt", "sle", "sgt", "sge"]
WIDTHS = [8, 16, 32]


def _fit(e, w):
    """Resize a bitvector to ``w`` bits by extension or extraction."""
    if e.width == w:
        return e
    if e.width < w:
        return E.zext(e, w - e.width)
    return E.extract(e, w - 1, 0)


@st.composite
def bitvectors(draw, n_bytes=3, depth=3, width=None):
    w = width or draw(st.sampled_from(WIDTHS))
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        if draw(st.booleans()):
            return E.const(draw(st.integers(0, (1 << w) - 1)), w)
        k = w // 8
        idx = draw(st.lists(st.integers(0, n_bytes - 1), min_size=k, max_size=k))
        parts = [E.input_byte(i) for i in idx]
        return parts[0] if k == 1 else E.concat(*parts)
    kind = draw(st.integers(0, 5))
    sub = lambda ww=w: draw(bitvectors(n_bytes, depth - 1, ww))
    if kind <= 2:
        return draw(st.sampled_from(BIN))(sub(), sub())
    if kind == 3:
        return draw(st.sampled_from([E.neg, E.bvnot]))(sub())
    if kind == 4:
        inner = sub(draw(st.sampled_from(WIDTHS)))
        if draw(st.booleans()) and inner.width < w:
            return E.sext(inner, w - inner.width)
        return _fit(inner, w)
    return E.ite(draw(booleans(n_bytes, depth - 1)), sub(), sub())


@st.composite
def booleans(draw, n_bytes=3, depth=3):
    kind = draw(st.integers(0, 4))
    if depth > 0 and kind == 0:
        return E.bnot(draw(booleans(n_bytes, depth - 1)))
    if depth > 0 and kind == 1:
        f = draw(st.sampled_from([E.band, E.bor]))
        return f(draw(booleans(n_bytes, depth - 1)), draw(booleans(n_bytes, depth - 1)))
    a = draw(bitvectors(n_bytes, max(depth - 1, 0)))
    b = draw(bitvectors(n_bytes, max(depth - 1, 0), a.width))
    return E.build_cmp(draw(st.sampled_from(CMP)), a, b)


def byte_strings(n_bytes=3):
    return st.binary(min_size=n_bytes, max_size=n_bytes)
