import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzysat import expr as E
from fuzzysat import oracle
from fuzzysat.analysis import InputGroup, MetadataStore
from fuzzysat.mutate import (
    FAMILIES, MutationConfig, NotAComparison, _encodings, mutate, mutate_opt, new_search,
    stack_size, to_minimization,
)
from strategies import booleans

i = E.input_byte
g = E.concat(i(1), i(0))
C = lambda v, w=16: E.const(v, w)


def run(e, pi=(), seed=b"", cfg=None, **kw):
    m = MetadataStore()
    m.sync_pi(pi)
    seed = seed or bytes(max(E.inputs_of(e) | {b for p in pi for b in E.inputs_of(p)}) + 1)
    return mutate(e, list(pi), seed, m, cfg or MutationConfig(), **kw)


def only(*fams):
    return MutationConfig(families=fams)


# -- I2S ---------------------------------------------------------------------

def test_i2s_solves_equality():
    out = run(E.eq(g, C(0xABCD)))
    assert out.solved and out.tag == "I2S"
    assert out.assignment == {0: 0xCD, 1: 0xAB}


def test_i2s_conflicting_range_is_proven_unsat_and_kept_in_sa():
    pi = [E.uge(i(0), C(0xDD, 8))]
    out = run(E.eq(g, C(0xABCD)), pi, bytes([0xDD, 0]))
    assert out.proven_unsat and out.tag == "I2S"
    assert any(c.assignment == {0: 0xCD, 1: 0xAB} for c in out.sa)


def test_i2s_inequality_boundary_candidates():
    seed = (500).to_bytes(2, "little")
    s = new_search(E.ule(g, C(10)), [], seed, MetadataStore(), only("I2S"))
    assert s.facts.i2s.op == "ule"
    out = run(E.ule(g, C(10)), seed=seed, cfg=only("I2S"))
    # 10 is tried first and already satisfies g <= 10
    assert out.solved and out.assignment == {0: 10, 1: 0}
    assert out.stats["I2S"].attempts == 3


def test_i2s_uses_concrete_operand_value():
    # g == i2 + 1, with i2 = 0x41 on the seed
    e = E.eq(i(0), E.add(i(2), C(1, 8)))
    out = run(e, seed=bytes([0, 0, 0x41]), cfg=only("I2S"))
    assert out.solved and out.assignment[0] == 0x42


# -- brute force -----------------------------------------------------------------

def test_bruteforce_box_proven_unsat():
    pi = [E.uge(g, C(1)), E.ule(g, C(9))]
    e = E.eq(E.mul(g, C(0xABCD)), C(0xCAFE))
    assert not oracle.exhaustive_solve(e, pi).sat
    out = run(e, pi, bytes([1, 0]))
    assert out.proven_unsat and out.tag == "BF"
    # nine values, minus g=1 which is the seed and was already tried
    assert out.stats["BF"].attempts == 8


def test_bruteforce_square_in_range():
    pi = [E.ugt(g, C(10)), E.ule(g, C(30))]
    e = E.eq(E.mul(g, g), C(400))
    out = run(e, pi, bytes([11, 0]), cfg=only("BF"))
    assert out.solved and out.assignment == {0: 20, 1: 0}


def test_bruteforce_top_interval_tries_extremes_only():
    e = E.eq(E.mul(g, g), C(0x1234))
    out = run(e, seed=b"\x05\x00", cfg=only("BF"))
    assert out.stats["BF"].attempts == 2


# -- interesting constants ---------------------------------------------------------

def test_constants_box():
    out = run(E.eq(E.mul(g, C(100)), C(200)), cfg=only("IC"))
    assert out.solved and out.tag == "IC" and out.assignment == {0: 2, 1: 0}


def test_no_constants_no_candidates():
    out = run(E.eq(E.mul(i(0), i(1)), E.add(i(0), i(1))), seed=b"\x01\x02", cfg=only("IC"))
    assert out.stats["IC"].attempts == 0


def test_encodings():
    encs = _encodings(0xABCD, 16)
    assert (0xABCD, True) in encs and (0xABCD, False) in encs
    assert InputGroup((("in", 0), ("in", 1))).encode(0xABCD, big_endian=True) == {0: 0xAB, 1: 0xCD}
    assert (0x3412, False) in _encodings(0x1234, 32)


# -- gradient descent --------------------------------------------------------------------

def test_to_minimization_of_gradient_box():
    a = E.sub(E.concat(i(0), i(1)), C(10))
    b = E.sub(E.concat(i(2), i(3)), C(5))
    obj = to_minimization(E.sgt(a, b))
    assert obj.f is E.sub(b, a)
    assert obj.success == "f < 0" and obj.signed
    x = E.concat(i(0), i(1))
    assert to_minimization(E.eq(x, x)).loss(np.array([3]), np.array([3]))[0] == 0
    with pytest.raises(NotAComparison):
        to_minimization(E.band(E.eq(i(0), i(1)), E.TRUE))


def test_gradient_box_from_zero_seed():
    a = E.sub(E.concat(i(0), i(1)), C(10))
    b = E.sub(E.concat(i(2), i(3)), C(5))
    e = E.sgt(a, b)
    out = run(e, seed=bytes(4), cfg=only("GD"))
    assert out.solved and out.tag == "GD"
    assert E.evaluate(e, E.apply(out.assignment, bytes(4)))


def test_gradient_flat_objective_reports_local_minimum():
    e = E.ult(E.bvand(i(0), C(0, 8)), C(0, 8))   # never true, zero gradient
    out = run(e, cfg=only("GD"))
    assert not out.solved and out.stats["GD"].note == "local-minimum"


@pytest.mark.parametrize("op", ["ult", "ule", "ugt", "uge", "eq", "slt", "sgt"])
def test_gradient_linear_objectives_exhaustive(op):
    # linear f over one 16-bit group; every satisfiable constant is reached
    for k in (1, 3, 0x1234, 0x7FF0, 0x8001, 0xFFF0):
        e = E.build_cmp(op, E.add(g, C(0x0101)), C(k))
        seed = bytes([0x55, 0x99])
        if E.evaluate(e, seed) or not oracle.exhaustive_solve(e, seed=seed).sat:
            continue
        out = run(e, seed=seed, cfg=MutationConfig(families=("GD",), gd_max_iterations=64))
        assert out.solved, (op, k)


# -- deterministic and havoc ---------------------------------------------------------------

def test_deterministic_bitflip_and_constant():
    assert run(E.eq(E.bvxor(i(0), C(1, 8)), C(0, 8)), cfg=only("DET")).solved
    out = run(E.eq(i(0), C(0x7F, 8)), cfg=only("DET"))
    assert out.solved and out.tag == "D+ND"


def test_mutations_confined_to_expression_bytes():
    e = E.eq(E.mul(i(3), i(3)), C(0x31, 8))
    seed = bytes(6)
    for fam in FAMILIES:
        out = run(e, seed=seed, cfg=only(fam))
        for c in out.sa:
            assert set(c.assignment) <= {3}
        if out.solved:
            assert set(out.assignment) <= {3}


def test_havoc_k_and_stack_size():
    cfg = MutationConfig()
    assert cfg.havoc_k(3) == 100 and cfg.havoc_k(10) == 200
    assert stack_size(4, cfg) == 32
    assert list(stack_size(np.array([0, 7]), cfg)) == [2, 256]


def test_havoc_is_reproducible():
    e = E.eq(E.mul(E.concat(i(0), i(1)), E.concat(i(2), i(3))), C(0x1DF3))
    a = run(e, seed=bytes(4), cfg=MutationConfig(families=("HAVOC",), rng_seed=7))
    b = run(e, seed=bytes(4), cfg=MutationConfig(families=("HAVOC",), rng_seed=7))
    assert a.status == b.status and a.assignment == b.assignment
    assert [c.assignment for c in a.sa] == [c.assignment for c in b.sa]


# -- config, seed, optimistic -------------------------------------------------------------

@pytest.mark.parametrize("kw", [{"bruteforce_full_cap": 0}, {"families": ("XYZ",)},
                                {"havoc_stack_exponent_range": (3, 2)}])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        MutationConfig(**kw)


def test_seed_already_satisfies():
    out = run(E.eq(i(0), C(0, 8)))
    assert out.solved and out.assignment == {0: 0} and out.stats["I2S"].attempts == 0


def test_mutate_opt():
    pi = [E.uge(i(0), C(0xDD, 8))]
    m = MetadataStore()
    m.sync_pi(pi)
    assert mutate_opt(E.eq(g, C(0xABCD)), pi, bytes([0xDD, 0]), m) == {0: 0xCD, 1: 0xAB}
    assert mutate_opt(E.ult(g, C(0)), [], bytes(2), MetadataStore()) is None


def test_budget_is_respected():
    e = E.eq(E.mul(E.concat(i(0), i(1)), E.concat(i(2), i(3))), C(0x1DF3))
    out = run(e, seed=bytes(4), cfg=MutationConfig(per_query_attempt_budget=50))
    assert out.attempts <= 50 and out.budget_exhausted


def test_locked_and_unique_bytes_never_change():
    pi = [E.eq(i(1), C(0x22, 8))]
    m = MetadataStore()
    m.sync_pi(pi)
    m2 = m.fix_input_bytes({2: 0x33})
    e = E.ugt(E.add(E.add(i(0), i(1)), i(2)), C(0xF0, 8))
    out = mutate(e, pi, bytes([0, 0x22, 0x33]), m2, MutationConfig())
    for c in out.sa:
        assert c.assignment.get(1, 0x22) == 0x22 and c.assignment.get(2, 0x33) == 0x33


@settings(max_examples=60)
@given(booleans(n_bytes=2, depth=2), st.lists(booleans(n_bytes=2, depth=1), max_size=2),
       st.binary(min_size=2, max_size=2))
def test_proven_unsat_and_solutions_sound(e, pi, seed):
    m = MetadataStore()
    m.sync_pi(pi)
    out = mutate(e, pi, seed, m, MutationConfig())
    if out.solved:
        tc = E.apply(out.assignment, seed)
        assert E.evaluate(e, tc) and all(E.evaluate(p, tc) for p in pi)
    if out.proven_unsat:
        assert not oracle.exhaustive_solve(e, pi, seed=seed).sat
