import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fuzzysat import expr as E
from fuzzysat.smtlib import ParseError, UnsupportedError, dump_query, format_term, parse_text
from strategies import bitvectors, booleans

HEAD = "(declare-const i0 (_ BitVec 8))\n(declare-const i1 (_ BitVec 8))\n"


def test_concat_equality():
    q = parse_text(HEAD + "(assert (= (concat i1 i0) #xABCD))")
    assert q.branch is E.eq(E.concat(E.input_byte(1), E.input_byte(0)), E.const(0xABCD, 16))
    assert q.pi == [] and q.max_input == 1 and q.primitive == "solve"


def test_last_assertion_is_branch():
    q = parse_text(HEAD + "(assert (bvult i0 #x10))\n(assert (= i1 #b00000011))")
    assert q.pi == [E.ult(E.input_byte(0), E.const(0x10, 8))]
    assert q.branch is E.eq(E.input_byte(1), E.const(3, 8))


def test_define_fun_and_let():
    q = parse_text(HEAD + "(define-fun s () (_ BitVec 8) (bvadd i0 i1))\n"
                          "(assert (let ((t (bvmul s #x02))) (bvugt t s)))")
    s = E.add(E.input_byte(0), E.input_byte(1))
    assert q.branch is E.ugt(E.mul(s, E.const(2, 8)), s)


def test_options_and_primitives():
    q = parse_text('(set-option :fuzzysat-seed "x.seed")\n(set-option :fuzzysat-opt true)\n'
                   + HEAD + "(assert (= i0 i1))")
    assert q.seed_path == "x.seed" and q.opt
    m = parse_text(HEAD + "(assert (bvule i0 #x1e))\n(maximize (concat i1 i0))")
    assert m.primitive == "max" and m.branch is None and len(m.pi) == 1
    assert m.target.width == 16
    a = parse_text(HEAD + "(set-option :fuzzysat-primitive all)\n(enumerate i0)")
    assert a.primitive == "all"


@pytest.mark.parametrize("text", [
    "(declare-const f (_ FloatingPoint 8 24))\n(assert true)",
    "(declare-fun f ((_ BitVec 8)) (_ BitVec 8))\n(assert true)",
    "(push 1)",
])
def test_unsupported(text):
    with pytest.raises(UnsupportedError):
        parse_text(text)


def test_malformed_reports_location():
    with pytest.raises(ParseError) as ei:
        parse_text("(assert\n  (= i0 ", path="bad.smt2")
    msg = str(ei.value)
    assert msg.startswith("bad.smt2:") and msg.count("bad.smt2") == 1
    with pytest.raises(ParseError) as ei:
        parse_text(HEAD + "(assert (bvadd i0 i1))")
    assert "boolean" in str(ei.value) and ei.value.line == 3
    with pytest.raises(ParseError):
        parse_text(HEAD + "(assert (= i0 undefined_name))")
    with pytest.raises(ParseError):
        parse_text("(declare-const x (_ BitVec 16))\n(assert true)")
    with pytest.raises(ParseError):
        parse_text(HEAD)


def test_signed_division_helpers_match_reference():
    q = parse_text(HEAD + "(assert (= (bvsmod i0 i1) (bvsrem i0 i1)))")
    for a, b in [(0x85, 0x07), (0x05, 0xF9), (0x80, 0xFF), (0x11, 0x00)]:
        v = E.evaluate(q.branch, bytes([a, b]))
        sa, sb = a - 256 * (a >> 7), b - 256 * (b >> 7)
        if sb == 0:
            want = True
        else:
            rem = abs(sa) % abs(sb) * (1 if sa >= 0 else -1)
            mod = rem if rem == 0 or (rem > 0) == (sb > 0) else rem + sb
            want = rem == mod
        assert v == want


@settings(max_examples=120)
@given(st.lists(booleans(n_bytes=3, depth=3), min_size=1, max_size=3), st.booleans())
def test_round_trip(assertions, opt):
    text = dump_query(assertions, opt=opt, seed_path="s.seed")
    q = parse_text(text)
    assert q.assertions == assertions and q.opt == opt and q.seed_path == "s.seed"


@settings(max_examples=60)
@given(booleans(n_bytes=2, depth=2), bitvectors(n_bytes=2, depth=2),
       st.sampled_from(["min", "max", "all"]))
def test_round_trip_with_target(pi, target, prim):
    q = parse_text(dump_query([pi], target=target, primitive=prim))
    assert q.target is target and q.primitive == prim and q.pi == [pi]


def test_format_term():
    t = E.ult(E.zext(E.input_byte(2), 8), E.const(5, 16))
    assert format_term(t) == "(bvult ((_ zero_extend 8) i2) #x0005)"
