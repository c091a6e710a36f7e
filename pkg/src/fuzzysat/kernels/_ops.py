"""Opcode and table constants shared by both kernel backends."""

import numpy as np

from fuzzysat.expr import Kind

CONST = int(Kind.CONST)
INPUT = int(Kind.INPUT)
CONCAT = int(Kind.CONCAT)
EXTRACT = int(Kind.EXTRACT)
ZEXT = int(Kind.ZEXT)
SEXT = int(Kind.SEXT)
ADD = int(Kind.ADD)
SUB = int(Kind.SUB)
MUL = int(Kind.MUL)
UDIV = int(Kind.UDIV)
SDIV = int(Kind.SDIV)
UREM = int(Kind.UREM)
SREM = int(Kind.SREM)
NEG = int(Kind.NEG)
AND = int(Kind.AND)
OR = int(Kind.OR)
XOR = int(Kind.XOR)
NOT = int(Kind.NOT)
SHL = int(Kind.SHL)
LSHR = int(Kind.LSHR)
ASHR = int(Kind.ASHR)
EQ = int(Kind.EQ)
ULT = int(Kind.ULT)
ULE = int(Kind.ULE)
SLT = int(Kind.SLT)
SLE = int(Kind.SLE)
BNOT = int(Kind.BNOT)
BAND = int(Kind.BAND)
BOR = int(Kind.BOR)
ITE = int(Kind.ITE)
BCONST = int(Kind.BCONST)

# check_batch status codes
FAIL_TARGET = 0
SCREENED = 1
PARTIAL = 2
FULL = 3

# havoc primitive codes
H_BITFLIP = 0
H_INTERESTING8 = 1
H_ADD = 2
H_SUB = 3
H_RANDOM = 4
H_GROUP_INTERESTING = 5
H_GROUP_ADD = 6
H_GROUP_SUB = 7
N_BYTE_OPS = 5
N_ALL_OPS = 8

ARITH_MAX = 35

# AFL's interesting values
INTERESTING_8 = (-128, -1, 0, 1, 16, 32, 64, 100, 127)
INTERESTING_16 = (-32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767)
INTERESTING_32 = (-2147483648, -100663046, -32769, 32768, 65535, 65536, 100663045, 2147483647)

INTERESTING_8_U = np.array([v & 0xFF for v in INTERESTING_8], dtype=np.uint64)
INTERESTING_ALL_U = np.array(
    [v & 0xFFFFFFFFFFFFFFFF for v in INTERESTING_8 + INTERESTING_16 + INTERESTING_32],
    dtype=np.uint64)
