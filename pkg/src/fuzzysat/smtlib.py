"""SMT-LIB v2 (QF_BV subset) reader and writer for query files.

A query file declares 8-bit input constants whose names end in their byte
index (``i0``, ``in_12`` ...), then asserts formulas: the last assertion is
the branch condition, every earlier one a path constraint in order.
Options understood on top of plain SMT-LIB::

    (set-option :fuzzysat-seed "seed.bin")    ; raw seed, relative to the file
    (set-option :fuzzysat-opt true)           ; optimistic solving
    (set-option :fuzzysat-primitive max)      ; solve | min | max | all
    (minimize t) (maximize t) (enumerate t)   ; target term for min/max/all

With a target command every assertion is a path constraint.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from fuzzysat import expr as E
from fuzzysat.expr import Kind, Node, WidthError

PRIMITIVES = ("solve", "min", "max", "all")


class ParseError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0, path: str = ""):
        self.msg = msg
        self.line = line
        self.col = col
        self.path = path
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{col}: {msg}")


class UnsupportedError(ParseError):
    """Well-formed SMT-LIB that is outside the supported fragment."""


@dataclass
class Tok:
    text: str
    line: int
    col: int
    quoted: bool = False


_TOKEN = re.compile(r"""\s+|;[^\n]*|(\()|(\))|"((?:[^"]|"")*)"|\|([^|]*)\||([^\s()";|]+)""")


def tokenize(text: str) -> List[Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        col = pos - line_start + 1
        if m.group(1) or m.group(2):
            toks.append(Tok(m.group(0), line, col))
        elif m.group(3) is not None:
            toks.append(Tok(m.group(3).replace('""', '"'), line, col, quoted=True))
        elif m.group(4) is not None:
            toks.append(Tok(m.group(4), line, col))
        elif m.group(5) is not None:
            toks.append(Tok(m.group(5), line, col))
        chunk = m.group(0)
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return toks


def read_sexprs(toks: List[Tok]) -> list:
    """Group tokens into nested lists; iterative so deep terms are fine."""
    stack: List[list] = [[]]
    opens: List[Tok] = []
    for t in toks:
        if t.text == "(" and not t.quoted:
            lst: list = []
            lst_tok = t
            stack[-1].append((lst_tok, lst))
            stack.append(lst)
            opens.append(t)
        elif t.text == ")" and not t.quoted:
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", t.line, t.col)
            stack.pop()
            opens.pop()
        else:
            stack[-1].append(t)
    if opens:
        raise ParseError("unclosed '('", opens[-1].line, opens[-1].col)
    return stack[0]


def _loc(sx) -> Tuple[int, int]:
    t = sx[0] if isinstance(sx, tuple) else sx
    return t.line, t.col


def _items(sx) -> list:
    return sx[1] if isinstance(sx, tuple) else None


@dataclass
class ParsedQuery:
    inputs: Dict[str, int] = field(default_factory=dict)
    assertions: List[Node] = field(default_factory=list)
    target: Optional[Node] = None
    primitive: str = "solve"
    seed_path: Optional[str] = None
    opt: bool = False
    path: str = ""

    @property
    def branch(self) -> Optional[Node]:
        if self.primitive != "solve" or not self.assertions:
            return None
        return self.assertions[-1]

    @property
    def pi(self) -> List[Node]:
        if self.primitive != "solve":
            return list(self.assertions)
        return list(self.assertions[:-1])

    @property
    def max_input(self) -> int:
        idx = set(self.inputs.values())
        for a in self.assertions + ([self.target] if self.target is not None else []):
            idx |= E.inputs_of(a)
        return max(idx, default=-1)


_INPUT_NAME = re.compile(r"^.*?(\d+)$")
_FP_HINTS = ("FloatingPoint", "Float16", "Float32", "Float64", "Float128", "RoundingMode",
             "Real", "Int", "Array", "String")


class _Translator:
    def __init__(self, path: str):
        self.path = path
        self.q = ParsedQuery(path=path)
        self.env: Dict[str, Node] = {}

    def err(self, msg: str, sx, cls=ParseError):
        line, col = _loc(sx)
        raise cls(msg, line, col, self.path)

    # sorts
    def sort_width(self, sx) -> int:
        if isinstance(sx, Tok):
            if sx.text == "Bool":
                return 0
            if any(h in sx.text for h in _FP_HINTS):
                self.err(f"unsupported sort {sx.text} (floating point and non-bitvector sorts are not handled)",
                         sx, UnsupportedError)
            self.err(f"unknown sort {sx.text}", sx)
        items = _items(sx)
        if (len(items) == 3 and isinstance(items[0], Tok) and items[0].text == "_"
                and isinstance(items[1], Tok) and items[1].text == "BitVec"):
            return int(items[2].text)
        head = items[1].text if len(items) > 1 and isinstance(items[1], Tok) else ""
        if head in _FP_HINTS or (isinstance(items[0], Tok) and items[0].text in _FP_HINTS):
            self.err(f"unsupported sort {head or items[0].text} (floating point is not handled)",
                     sx, UnsupportedError)
        self.err("unsupported sort", sx, UnsupportedError)

    # commands
    def command(self, sx) -> None:
        items = _items(sx)
        if not items or not isinstance(items[0], Tok):
            self.err("expected a command", sx)
        name = items[0].text
        if name in ("set-logic", "set-info", "check-sat", "get-model", "exit", "get-info",
                    "check-sat-assuming", "get-value"):
            return
        if name == "set-option":
            self.option(items, sx)
        elif name in ("declare-fun", "declare-const"):
            self.declare(items, sx)
        elif name == "define-fun":
            if len(items) != 5 or _items(items[2]) != []:
                self.err("only nullary define-fun is supported", sx, UnsupportedError)
            width = self.sort_width(items[3])
            body = self.term(items[4])
            if body.width != width:
                self.err(f"define-fun body has width {body.width}, declared {width}", sx)
            self.env[items[1].text] = body
        elif name == "assert":
            t = self.term(items[1])
            if not t.is_bool:
                self.err("assertion is not boolean", items[1])
            self.q.assertions.append(t)
        elif name in ("minimize", "maximize", "enumerate"):
            t = self.term(items[1])
            if t.is_bool:
                self.err(f"{name} target must be a bitvector", items[1])
            self.q.target = t
            self.q.primitive = {"minimize": "min", "maximize": "max", "enumerate": "all"}[name]
        elif name in ("push", "pop", "declare-sort", "define-sort", "define-fun-rec"):
            self.err(f"{name} is not supported", sx, UnsupportedError)
        else:
            self.err(f"unknown command {name}", sx)

    def option(self, items, sx) -> None:
        key = items[1].text if len(items) > 1 else ""
        val = items[2].text if len(items) > 2 else ""
        if key == ":fuzzysat-seed":
            self.q.seed_path = val
        elif key == ":fuzzysat-opt":
            self.q.opt = val == "true"
        elif key == ":fuzzysat-primitive":
            if val not in PRIMITIVES:
                self.err(f"unknown primitive {val}", sx)
            self.q.primitive = val

    def declare(self, items, sx) -> None:
        name = items[1].text
        sort = items[3] if items[0].text == "declare-fun" else items[2]
        if items[0].text == "declare-fun" and _items(items[2]) != []:
            self.err("uninterpreted functions are not supported", sx, UnsupportedError)
        width = self.sort_width(sort)
        m = _INPUT_NAME.match(name)
        if width != 8 or m is None:
            self.err(f"declaration {name}: inputs must be 8-bit constants named with a trailing byte index",
                     sx)
        idx = int(m.group(1))
        if idx in self.q.inputs.values():
            self.err(f"byte index {idx} declared twice", sx)
        self.q.inputs[name] = idx
        self.env[name] = E.input_byte(idx)

    # terms
    def term(self, sx) -> Node:
        try:
            return self._term(sx)
        except WidthError as exc:
            self.err(str(exc), sx)

    def _term(self, sx) -> Node:
        if isinstance(sx, Tok):
            return self.atom(sx)
        items = _items(sx)
        if not items:
            self.err("empty term", sx)
        head = items[0]
        if isinstance(head, tuple):
            # indexed operator: ((_ extract 7 0) x)
            idx = [t.text for t in _items(head)]
            if idx[0] != "_":
                self.err("expected an indexed operator", head)
            args = [self.term(a) for a in items[1:]]
            return self.indexed(idx[1], [int(i) for i in idx[2:]], args, sx)
        op = head.text
        if op == "_":
            return self.atom_indexed(items, sx)
        if op == "let":
            saved = dict(self.env)
            for b in _items(items[1]):
                bi = _items(b)
                self.env[bi[0].text] = self.term(bi[1])
            try:
                return self.term(items[2])
            finally:
                self.env = saved
        args = [self.term(a) for a in items[1:]]
        return self.apply(op, args, sx)

    def atom(self, t: Tok) -> Node:
        s = t.text
        if s in self.env:
            return self.env[s]
        if s == "true":
            return E.TRUE
        if s == "false":
            return E.FALSE
        if s.startswith("#x"):
            return E.const(int(s[2:], 16), 4 * (len(s) - 2))
        if s.startswith("#b"):
            return E.const(int(s[2:], 2), len(s) - 2)
        if s.startswith("fp") or s in ("RNE", "RNA", "RTP", "RTN", "RTZ"):
            self.err(f"floating-point term {s} is not supported", t, UnsupportedError)
        self.err(f"unknown symbol {s}", t)

    def atom_indexed(self, items, sx) -> Node:
        name = items[1].text
        if name.startswith("bv") and name[2:].isdigit():
            return E.const(int(name[2:]) % (1 << int(items[2].text)), int(items[2].text))
        if name in ("+oo", "-oo", "NaN", "+zero", "-zero"):
            self.err("floating-point literals are not supported", sx, UnsupportedError)
        self.err(f"unknown indexed constant {name}", sx)

    def indexed(self, name: str, idx: List[int], args: List[Node], sx) -> Node:
        x = args[0]
        if name == "extract":
            return E.extract(x, idx[0], idx[1])
        if name == "zero_extend":
            return E.zext(x, idx[0]) if idx[0] else x
        if name == "sign_extend":
            return E.sext(x, idx[0]) if idx[0] else x
        if name in ("rotate_left", "rotate_right"):
            w = x.width
            k = idx[0] % w
            if name == "rotate_right":
                k = (w - k) % w
            if k == 0:
                return x
            return E.concat(E.extract(x, w - 1 - k, 0), E.extract(x, w - 1, w - k))
        if name == "repeat":
            return E.concat(*([x] * idx[0]))
        if name.startswith("to_fp") or name.startswith("fp."):
            self.err(f"floating-point operator {name} is not supported", sx, UnsupportedError)
        self.err(f"unknown indexed operator {name}", sx)

    def apply(self, op: str, a: List[Node], sx) -> Node:
        simple = {
            "bvadd": E.add, "bvsub": E.sub, "bvmul": E.mul, "bvudiv": E.udiv, "bvsdiv": E.sdiv,
            "bvurem": E.urem, "bvsrem": E.srem, "bvand": E.bvand, "bvor": E.bvor,
            "bvxor": E.bvxor, "bvshl": E.shl, "bvlshr": E.lshr, "bvashr": E.ashr,
            "bvult": E.ult, "bvule": E.ule, "bvugt": E.ugt, "bvuge": E.uge,
            "bvslt": E.slt, "bvsle": E.sle, "bvsgt": E.sgt, "bvsge": E.sge,
        }
        if op in simple:
            if op in ("bvadd", "bvmul", "bvand", "bvor", "bvxor") and len(a) > 2:
                acc = a[0]
                for y in a[1:]:
                    acc = simple[op](acc, y)
                return acc
            if len(a) != 2:
                self.err(f"{op} expects 2 arguments, got {len(a)}", sx)
            return simple[op](a[0], a[1])
        if op == "bvneg":
            return E.neg(a[0])
        if op == "bvnot":
            return E.bvnot(a[0])
        if op == "bvnand":
            return E.bvnot(E.bvand(a[0], a[1]))
        if op == "bvnor":
            return E.bvnot(E.bvor(a[0], a[1]))
        if op == "bvxnor":
            return E.bvnot(E.bvxor(a[0], a[1]))
        if op == "bvcomp":
            return E.ite(E.eq(a[0], a[1]), E.const(1, 1), E.const(0, 1))
        if op == "bvsmod":
            return _bvsmod(a[0], a[1])
        if op == "concat":
            return E.concat(*a)
        if op == "not":
            return E.bnot(a[0])
        if op == "and":
            return E.band(*a)
        if op == "or":
            return E.bor(*a)
        if op == "xor":
            acc = a[0]
            for y in a[1:]:
                acc = E.bnot(E.eq(acc, y))
            return acc
        if op == "=>":
            acc = a[-1]
            for y in reversed(a[:-1]):
                acc = E.bor(E.bnot(y), acc)
            return acc
        if op == "=":
            return E.band(*[E.eq(x, y) for x, y in zip(a, a[1:])])
        if op == "distinct":
            return E.band(*[E.ne(a[i], a[j]) for i in range(len(a)) for j in range(i + 1, len(a))])
        if op == "ite":
            return E.ite(a[0], a[1], a[2])
        if op.startswith("fp.") or op.startswith("to_fp"):
            self.err(f"floating-point operator {op} is not supported", sx, UnsupportedError)
        self.err(f"unknown operator {op}", sx)


def _bvsmod(s: Node, t: Node) -> Node:
    w = s.width
    msb_s = E.extract(s, w - 1, w - 1)
    msb_t = E.extract(t, w - 1, w - 1)
    zero1, one1 = E.const(0, 1), E.const(1, 1)
    abs_s = E.ite(E.eq(msb_s, zero1), s, E.neg(s))
    abs_t = E.ite(E.eq(msb_t, zero1), t, E.neg(t))
    u = E.urem(abs_s, abs_t)
    return E.ite(E.eq(u, E.const(0, w)), u,
                 E.ite(E.band(E.eq(msb_s, zero1), E.eq(msb_t, zero1)), u,
                       E.ite(E.band(E.eq(msb_s, one1), E.eq(msb_t, zero1)), E.add(E.neg(u), t),
                             E.ite(E.band(E.eq(msb_s, zero1), E.eq(msb_t, one1)), E.add(u, t),
                                   E.neg(u)))))


def parse_text(text: str, path: str = "") -> ParsedQuery:
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000))
    try:
        tr = _Translator(path)
        for sx in read_sexprs(tokenize(text)):
            if isinstance(sx, Tok):
                raise ParseError(f"stray token {sx.text!r}", sx.line, sx.col, path)
            tr.command(sx)
    except ParseError as exc:
        if path and not exc.path:
            raise type(exc)(exc.msg, exc.line, exc.col, path) from None
        raise
    except (IndexError, ValueError, AttributeError, TypeError) as exc:
        raise ParseError(f"malformed input ({exc})", 0, 0, path) from None
    finally:
        sys.setrecursionlimit(limit)
    q = tr.q
    if q.primitive == "solve" and not q.assertions:
        raise ParseError("no assertion to use as branch condition", 0, 0, path)
    if q.primitive != "solve" and q.target is None:
        raise ParseError(f"primitive {q.primitive} needs a (minimize|maximize|enumerate t) target",
                         0, 0, path)
    return q


def parse_file(path: Union[str, Path]) -> ParsedQuery:
    path = Path(path)
    return parse_text(path.read_text(), str(path))


# -- writer ------------------------------------------------------------------

_OPNAME = {
    Kind.ADD: "bvadd", Kind.SUB: "bvsub", Kind.MUL: "bvmul", Kind.UDIV: "bvudiv",
    Kind.SDIV: "bvsdiv", Kind.UREM: "bvurem", Kind.SREM: "bvsrem", Kind.NEG: "bvneg",
    Kind.AND: "bvand", Kind.OR: "bvor", Kind.XOR: "bvxor", Kind.NOT: "bvnot",
    Kind.SHL: "bvshl", Kind.LSHR: "bvlshr", Kind.ASHR: "bvashr", Kind.EQ: "=",
    Kind.ULT: "bvult", Kind.ULE: "bvule", Kind.SLT: "bvslt", Kind.SLE: "bvsle",
    Kind.BNOT: "not", Kind.BAND: "and", Kind.BOR: "or", Kind.ITE: "ite", Kind.CONCAT: "concat",
}


def _literal(n: Node) -> str:
    if n.kind is Kind.BCONST:
        return "true" if n.params[0] else "false"
    v, w = n.params
    if w % 4 == 0:
        return f"#x{v:0{w // 4}x}"
    return f"#b{v:0{w}b}"


def _render(n: Node, child: Sequence[str]) -> str:
    k = n.kind
    if k in (Kind.CONST, Kind.BCONST):
        return _literal(n)
    if k is Kind.INPUT:
        return f"i{n.params[0]}"
    if k is Kind.EXTRACT:
        return f"((_ extract {n.params[0]} {n.params[1]}) {child[0]})"
    if k is Kind.ZEXT:
        return f"((_ zero_extend {n.params[0]}) {child[0]})"
    if k is Kind.SEXT:
        return f"((_ sign_extend {n.params[0]}) {child[0]})"
    return f"({_OPNAME[k]} {' '.join(child)})"


def format_term(e: Node, limit: int = 2000) -> str:
    """Printable SMT-LIB rendering (tree form, truncated past ``limit`` chars)."""
    text: Dict[int, str] = {}
    for n in E.topo_order([e]):
        s = _render(n, [text[c.id] for c in n.children])
        text[n.id] = s if len(s) <= limit else s[:limit] + "...)"
    return text[e.id]


def dump_query(assertions: Sequence[Node], *, target: Optional[Node] = None, primitive: str = "solve",
               seed_path: Optional[str] = None, opt: bool = False,
               inputs: Optional[Sequence[int]] = None) -> str:
    """Serialize a query; shared subterms become nullary define-funs."""
    roots = list(assertions) + ([target] if target is not None else [])
    order = E.topo_order(roots)
    parents: Dict[int, int] = {}
    for n in order:
        for c in n.children:
            parents[c.id] = parents.get(c.id, 0) + 1
    idx = set(inputs or ())
    for r in roots:
        idx |= E.inputs_of(r)
    lines = ["(set-logic QF_BV)"]
    if seed_path is not None:
        lines.append(f'(set-option :fuzzysat-seed "{seed_path}")')
    if opt:
        lines.append("(set-option :fuzzysat-opt true)")
    if primitive != "solve":
        lines.append(f"(set-option :fuzzysat-primitive {primitive})")
    for i in sorted(idx):
        lines.append(f"(declare-fun i{i} () (_ BitVec 8))")
    text: Dict[int, str] = {}
    for n in order:
        s = _render(n, [text[c.id] for c in n.children])
        if n.children and parents.get(n.id, 0) > 1:
            name = f"_t{len(lines)}"
            sort = "Bool" if n.is_bool else f"(_ BitVec {n.width})"
            lines.append(f"(define-fun {name} () {sort} {s})")
            s = name
        text[n.id] = s
    for a in assertions:
        lines.append(f"(assert {text[a.id]})")
    if target is not None:
        cmd = {"min": "minimize", "max": "maximize", "all": "enumerate"}.get(primitive, "maximize")
        lines.append(f"({cmd} {text[target.id]})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
