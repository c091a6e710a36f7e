"""Scalar-loop kernels compiled with numba.

All bitvector arithmetic stays in uint64; mixing signed and unsigned
integers in numba silently promotes to float64, hence the explicit casts.
"""

import numpy as np
from numba import njit

from fuzzysat.kernels._ops import (
    ADD, AND, ASHR, BAND, BCONST, BNOT, BOR, CONCAT, CONST, EQ, EXTRACT, FAIL_TARGET, FULL,
    H_ADD, H_BITFLIP, H_GROUP_ADD, H_GROUP_INTERESTING, H_GROUP_SUB, H_INTERESTING8, H_RANDOM,
    H_SUB, INPUT, ITE, LSHR, MUL, NEG, NOT, OR, PARTIAL, SCREENED, SDIV, SEXT, SHL, SLE, SLT,
    SREM, SUB, UDIV, ULE, ULT, UREM, XOR, ZEXT,
)

U0 = np.uint64(0)
U1 = np.uint64(1)
ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, inline="always")
def _mask(w):
    if w >= 64:
        return ALL
    return (U1 << np.uint64(w)) - U1


@njit(cache=True, inline="always")
def _neg(x, m):
    return ((~x) + U1) & m


@njit(cache=True)
def _eval_range(s0, s1, op, width, a0, a1, a2, param, vals, row):
    """Evaluate tape slots ``s0 .. s1-1`` for one candidate row into ``vals``.

    One call covers many slots: a per-slot helper call costs more than the
    operation itself.
    """
    for s in range(s0, s1):
        o = op[s]
        w = width[s]
        m = _mask(w)
        if o == CONST or o == BCONST:
            vals[s] = param[s]
            continue
        if o == INPUT:
            vals[s] = np.uint64(row[a0[s]])
            continue
        x = vals[a0[s]]
        if o == ZEXT:
            r = x
        elif o == EXTRACT:
            r = (x >> param[s]) & m
        elif o == SEXT:
            cw = width[a0[s]]
            r = x
            if (x >> np.uint64(cw - 1)) & U1:
                r = x | (m ^ _mask(cw))
        elif o == NOT:
            r = (~x) & m
        elif o == NEG:
            r = _neg(x, m)
        elif o == BNOT:
            r = U1 - x
        elif o == ITE:
            r = vals[a1[s]] if x != U0 else vals[a2[s]]
        else:
            y = vals[a1[s]]
            if o == CONCAT:
                r = (x << np.uint64(width[a1[s]])) | y
            elif o == EQ:
                r = U1 if x == y else U0
            elif o == BAND:
                r = x & y
            elif o == BOR:
                r = x | y
            elif o == ULT or o == ULE or o == SLT or o == SLE:
                if o == SLT or o == SLE:
                    sb = U1 << np.uint64(width[a0[s]] - 1)
                    x = x ^ sb
                    y = y ^ sb
                if o == ULT or o == SLT:
                    r = U1 if x < y else U0
                else:
                    r = U1 if x <= y else U0
            elif o == ADD:
                r = (x + y) & m
            elif o == SUB:
                r = (x - y) & m
            elif o == MUL:
                r = (x * y) & m
            elif o == AND:
                r = x & y
            elif o == OR:
                r = x | y
            elif o == XOR:
                r = x ^ y
            elif o == UDIV:
                r = m if y == U0 else x // y
            elif o == UREM:
                r = x if y == U0 else x % y
            elif o == SDIV or o == SREM:
                top = np.uint64(w - 1)
                sx = (x >> top) & U1
                sy = (y >> top) & U1
                ax = _neg(x, m) if sx else x
                ay = _neg(y, m) if sy else y
                if o == SDIV:
                    q = m if ay == U0 else ax // ay
                    r = _neg(q, m) if sx != sy else q
                else:
                    rr = ax if ay == U0 else ax % ay
                    r = _neg(rr, m) if sx else rr
            elif o == SHL:
                r = U0 if y >= np.uint64(w) else (x << y) & m
            elif o == LSHR:
                r = U0 if y >= np.uint64(w) else x >> y
            elif o == ASHR:
                sign = (x >> np.uint64(w - 1)) & U1
                if y >= np.uint64(w):
                    r = m if sign else U0
                else:
                    r = x >> y
                    if sign:
                        r = r | (m & ~(m >> y))
            else:
                r = U0
        vals[s] = r


@njit(cache=True)
def eval_batch(op, width, a0, a1, a2, param, root_slot, batch):
    n = batch.shape[0]
    r = root_slot.shape[0]
    s_total = op.shape[0]
    out = np.empty((n, r), np.uint64)
    vals = np.empty(s_total, np.uint64)
    for i in range(n):
        _eval_range(0, s_total, op, width, a0, a1, a2, param, vals, batch[i])
        for j in range(r):
            out[i, j] = vals[root_slot[j]]
    return out


@njit(cache=True)
def check_batch(op, width, a0, a1, a2, param, root_slot, root_end, batch,
                n_screen, screen_lo, screen_span, screen_mask):
    """Classify candidates: target false / screened / partial / full.

    Root 0 is the target, roots 1..n_screen are range-screened groups, the
    rest are path constraints. Evaluation stops as early as the verdict is
    known; path constraints are all evaluated for target-satisfying,
    screen-passing rows so that their satisfaction count is exact.
    """
    n = batch.shape[0]
    r = root_slot.shape[0]
    status = np.empty(n, np.int8)
    pisat = np.zeros(n, np.int32)
    vals = np.empty(op.shape[0], np.uint64)
    pi_evals = 0
    for i in range(n):
        row = batch[i]
        done = 0
        st = FULL
        for j in range(r):
            end = root_end[j]
            if end > done:
                _eval_range(done, end, op, width, a0, a1, a2, param, vals, row)
                done = end
            v = vals[root_slot[j]]
            if j == 0:
                if v == U0:
                    st = FAIL_TARGET
                    break
            elif j <= n_screen:
                k = j - 1
                if ((v - screen_lo[k]) & screen_mask[k]) > screen_span[k]:
                    st = SCREENED
                    break
            else:
                pi_evals += 1
                if v != U0:
                    pisat[i] += 1
                else:
                    st = PARTIAL
        status[i] = st
    return status, pisat, pi_evals


@njit(cache=True)
def _group_read(out, i, lanes, glen, be):
    v = U0
    for j in range(glen):
        c = lanes[j]
        if c >= 0:
            sh = (glen - 1 - j) if be else j
            v |= np.uint64(out[i, c]) << np.uint64(8 * sh)
    return v


@njit(cache=True)
def _group_write(out, i, lanes, glen, be, v):
    for j in range(glen):
        c = lanes[j]
        if c >= 0:
            sh = (glen - 1 - j) if be else j
            out[i, c] = np.uint8((v >> np.uint64(8 * sh)) & np.uint64(0xFF))


@njit(cache=True)
def havoc_apply(base, free_cols, group_lanes, group_len, stack_len, ops, pos, val,
                interesting8, interesting_all, arith_max):
    k = stack_len.shape[0]
    out = np.empty((k, base.shape[0]), np.uint8)
    nf = free_cols.shape[0]
    ng = group_len.shape[0]
    n8 = interesting8.shape[0]
    nall = interesting_all.shape[0]
    t = 0
    for i in range(k):
        out[i, :] = base
        for _ in range(stack_len[i]):
            o = ops[t]
            p = pos[t]
            v = val[t]
            t += 1
            if o < H_GROUP_INTERESTING:
                c = free_cols[p % nf]
                b = np.uint64(out[i, c])
                if o == H_BITFLIP:
                    b = b ^ (U1 << (v & np.uint64(7)))
                elif o == H_INTERESTING8:
                    b = interesting8[v % np.uint64(n8)]
                elif o == H_ADD:
                    b = b + U1 + v % np.uint64(arith_max)
                elif o == H_SUB:
                    b = b - U1 - v % np.uint64(arith_max)
                elif o == H_RANDOM:
                    b = b ^ (U1 + v % np.uint64(255))
                out[i, c] = np.uint8(b & np.uint64(0xFF))
            else:
                g = p % ng
                glen = group_len[g]
                lanes = group_lanes[g]
                be = (v >> np.uint64(32)) & U1
                m = _mask(8 * glen)
                if o == H_GROUP_INTERESTING:
                    x = interesting_all[(v & np.uint64(0xFFFF)) % np.uint64(nall)] & m
                else:
                    x = _group_read(out, i, lanes, glen, be)
                    d = U1 + (v & np.uint64(0xFFFF)) % np.uint64(arith_max)
                    if o == H_GROUP_ADD:
                        x = (x + d) & m
                    else:
                        x = (x - d) & m
                _group_write(out, i, lanes, glen, be, x)
    return out
