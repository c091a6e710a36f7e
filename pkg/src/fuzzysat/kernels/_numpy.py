"""Pure-numpy kernels: vectorized over the candidate axis.

Same signatures and results as the numba kernels. Slower per call but
without a JIT warm-up, and used whenever ``FUZZYSAT_DISABLE_JIT`` is set.
"""

import numpy as np

from fuzzysat.kernels._ops import (
    ADD, AND, ASHR, BAND, BCONST, BNOT, BOR, CONCAT, CONST, EQ, EXTRACT, FAIL_TARGET, FULL,
    H_ADD, H_BITFLIP, H_GROUP_ADD, H_GROUP_INTERESTING, H_GROUP_SUB, H_INTERESTING8, H_RANDOM,
    H_SUB, INPUT, ITE, LSHR, MUL, NEG, NOT, OR, PARTIAL, SCREENED, SDIV, SEXT, SHL, SLE, SLT,
    SREM, SUB, UDIV, ULE, ULT, UREM, XOR, ZEXT,
)

U0 = np.uint64(0)
U1 = np.uint64(1)
U63 = np.uint64(63)


def _mask(w):
    return np.uint64(0xFFFFFFFFFFFFFFFF) if w >= 64 else np.uint64((1 << w) - 1)


def _neg(x, m):
    return ((~x) + U1) & m


def _slots(op, width, a0, a1, a2, param, batch, stop):
    n = batch.shape[0]
    vals = [None] * stop
    for s in range(stop):
        o = int(op[s])
        w = int(width[s])
        if o == CONST or o == BCONST:
            vals[s] = np.full(n, param[s], np.uint64)
            continue
        if o == INPUT:
            vals[s] = batch[:, a0[s]].astype(np.uint64)
            continue
        x = vals[a0[s]]
        if o == ZEXT:
            v = x
        elif o == EXTRACT:
            v = (x >> param[s]) & _mask(w)
        elif o == SEXT:
            cw = int(width[a0[s]])
            neg = ((x >> np.uint64(cw - 1)) & U1).astype(bool)
            v = np.where(neg, x | (_mask(w) ^ _mask(cw)), x)
        elif o == NOT:
            v = (~x) & _mask(w)
        elif o == NEG:
            v = _neg(x, _mask(w))
        elif o == BNOT:
            v = U1 - x
        elif o == ITE:
            v = np.where(x != U0, vals[a1[s]], vals[a2[s]])
        else:
            y = vals[a1[s]]
            m = _mask(w)
            if o == CONCAT:
                v = (x << np.uint64(width[a1[s]])) | y
            elif o == EQ:
                v = (x == y).astype(np.uint64)
            elif o == BAND:
                v = x & y
            elif o == BOR:
                v = x | y
            elif o in (ULT, ULE, SLT, SLE):
                if o in (SLT, SLE):
                    sb = np.uint64(1 << (int(width[a0[s]]) - 1))
                    x = x ^ sb
                    y = y ^ sb
                v = ((x < y) if o in (ULT, SLT) else (x <= y)).astype(np.uint64)
            elif o == ADD:
                v = (x + y) & m
            elif o == SUB:
                v = (x - y) & m
            elif o == MUL:
                v = (x * y) & m
            elif o == AND:
                v = x & y
            elif o == OR:
                v = x | y
            elif o == XOR:
                v = x ^ y
            elif o == UDIV:
                v = np.where(y == U0, m, x // np.where(y == U0, U1, y))
            elif o == UREM:
                v = np.where(y == U0, x, x % np.where(y == U0, U1, y))
            elif o in (SDIV, SREM):
                top = np.uint64(w - 1)
                sx = ((x >> top) & U1).astype(bool)
                sy = ((y >> top) & U1).astype(bool)
                ax = np.where(sx, _neg(x, m), x)
                ay = np.where(sy, _neg(y, m), y)
                zero = ay == U0
                safe = np.where(zero, U1, ay)
                if o == SDIV:
                    q = np.where(zero, m, ax // safe)
                    v = np.where(sx != sy, _neg(q, m), q)
                else:
                    r = np.where(zero, ax, ax % safe)
                    v = np.where(sx, _neg(r, m), r)
            elif o in (SHL, LSHR, ASHR):
                big = y >= np.uint64(w)
                sh = np.minimum(y, U63)
                if o == SHL:
                    v = np.where(big, U0, (x << sh) & m)
                elif o == LSHR:
                    v = np.where(big, U0, x >> sh)
                else:
                    sign = ((x >> np.uint64(w - 1)) & U1).astype(bool)
                    fill = np.where(sign, m & ~(m >> sh), U0)
                    v = np.where(big, np.where(sign, m, U0), (x >> sh) | fill)
            else:
                raise ValueError(f"unknown opcode {o}")
        vals[s] = v
    return vals


def eval_batch(op, width, a0, a1, a2, param, root_slot, batch):
    n = batch.shape[0]
    out = np.empty((n, root_slot.shape[0]), np.uint64)
    if n == 0:
        return out
    vals = _slots(op, width, a0, a1, a2, param, batch, op.shape[0])
    for j, s in enumerate(root_slot):
        out[:, j] = vals[s]
    return out


def check_batch(op, width, a0, a1, a2, param, root_slot, root_end, batch,
                n_screen, screen_lo, screen_span, screen_mask):
    n = batch.shape[0]
    status = np.full(n, FULL, np.int8)
    pisat = np.zeros(n, np.int32)
    if n == 0:
        return status, pisat, 0
    vals = _slots(op, width, a0, a1, a2, param, batch, op.shape[0])
    alive = vals[root_slot[0]] != U0
    status[~alive] = FAIL_TARGET
    for k in range(n_screen):
        v = vals[root_slot[1 + k]]
        bad = alive & (((v - screen_lo[k]) & screen_mask[k]) > screen_span[k])
        status[bad] = SCREENED
        alive &= ~bad
    pi_evals = 0
    for j in range(1 + n_screen, root_slot.shape[0]):
        ok = vals[root_slot[j]] != U0
        pi_evals += int(alive.sum())
        pisat += (alive & ok).astype(np.int32)
        status[alive & ~ok] = PARTIAL
    return status, pisat, pi_evals


def _group_io(out, rows, lanes, glen, be, value=None):
    """Read (value None) or write the group value for each row in ``rows``."""
    acc = np.zeros(rows.shape[0], np.uint64)
    for j in range(lanes.shape[1]):
        col = lanes[:, j]
        live = (j < glen) & (col >= 0)
        if not live.any():
            continue
        sh = np.where(be, glen - 1 - j, j).astype(np.uint64) * np.uint64(8)
        r = rows[live]
        c = col[live]
        if value is None:
            acc[live] |= out[r, c].astype(np.uint64) << sh[live]
        else:
            out[r, c] = ((value[live] >> sh[live]) & np.uint64(0xFF)).astype(np.uint8)
    return acc


def havoc_apply(base, free_cols, group_lanes, group_len, stack_len, ops, pos, val,
                interesting8, interesting_all, arith_max):
    k = stack_len.shape[0]
    out = np.tile(base, (k, 1))
    if k == 0:
        return out
    offsets = np.concatenate(([0], np.cumsum(stack_len)[:-1])).astype(np.int64)
    nf = free_cols.shape[0]
    ng = group_len.shape[0]
    amax = np.uint64(arith_max)
    for t in range(int(stack_len.max())):
        rows = np.nonzero(stack_len > t)[0]
        idx = offsets[rows] + t
        o = ops[idx]
        p = pos[idx]
        v = val[idx]
        byte_op = o < H_GROUP_INTERESTING
        if byte_op.any():
            r = rows[byte_op]
            ob = o[byte_op]
            vb = v[byte_op]
            c = free_cols[p[byte_op] % nf]
            b = out[r, c].astype(np.uint64)
            nb = np.select(
                [ob == H_BITFLIP, ob == H_INTERESTING8, ob == H_ADD, ob == H_SUB, ob == H_RANDOM],
                [b ^ (U1 << (vb & np.uint64(7))),
                 interesting8[vb % np.uint64(interesting8.shape[0])],
                 b + U1 + vb % amax,
                 b - U1 - vb % amax,
                 b ^ (U1 + vb % np.uint64(255))], b)
            out[r, c] = (nb & np.uint64(0xFF)).astype(np.uint8)
        if (~byte_op).any():
            r = rows[~byte_op]
            og = o[~byte_op]
            vg = v[~byte_op]
            g = p[~byte_op] % ng
            glen = group_len[g]
            lanes = group_lanes[g]
            be = ((vg >> np.uint64(32)) & U1).astype(bool)
            bits = glen.astype(np.uint64) * np.uint64(8)
            m = np.where(bits >= 64, np.uint64(0xFFFFFFFFFFFFFFFF),
                         (U1 << np.minimum(bits, U63)) - U1)
            cur = _group_io(out, r, lanes, glen, be)
            d = U1 + (vg & np.uint64(0xFFFF)) % amax
            pick = interesting_all[(vg & np.uint64(0xFFFF)) % np.uint64(interesting_all.shape[0])]
            x = np.select([og == H_GROUP_INTERESTING, og == H_GROUP_ADD, og == H_GROUP_SUB],
                          [pick, cur + d, cur - d], cur) & m
            _group_io(out, r, lanes, glen, be, x)
    return out
