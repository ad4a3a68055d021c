"""Expression language for coefficient fields.

Grammar (operators in precedence order, loosest first):

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | power
    power   := atom ('^' factor)?          # right-associative
    atom    := NUMBER | 'x' | 'y' | func '(' expr (',' expr)* ')' | '(' expr ')'

Functions: sin, cos, exp, log, sqrt, abs (unary), min, max (binary).
`**` is accepted as a synonym for `^`.  Unary minus binds tighter than
'*' but looser than '^', so -x^2 means -(x^2).

Parsing produces a small AST; `to_src` prints it with minimal parentheses
such that parse(to_src(ast)) reproduces the AST exactly.  `compile_tape`
flattens the AST into a register program executed by the numeric kernels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import FieldSyntaxError, UnknownIdentifier

# opcode table shared with both kernels (the compiled kernel mirrors these
# values as a C enum; parity is covered by the backend tests)
OP_ADD = 0
OP_SUB = 1
OP_MUL = 2
OP_DIV = 3
OP_POW = 4
OP_NEG = 5
OP_SIN = 6
OP_COS = 7
OP_EXP = 8
OP_LOG = 9
OP_SQRT = 10
OP_ABS = 11
OP_MIN = 12
OP_MAX = 13

_BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV, "^": OP_POW}
_FUNC_OPS = {
    "sin": (OP_SIN, 1),
    "cos": (OP_COS, 1),
    "exp": (OP_EXP, 1),
    "log": (OP_LOG, 1),
    "sqrt": (OP_SQRT, 1),
    "abs": (OP_ABS, 1),
    "min": (OP_MIN, 2),
    "max": (OP_MAX, 2),
}

_PREC = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_PREC = 25


# --- AST -----------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # 'x' or 'y'


@dataclass(frozen=True)
class Unary:
    op: str  # '-'
    a: object


@dataclass(frozen=True)
class Bin:
    op: str
    a: object
    b: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


# --- tokenizer -----------------------------------------------------------


class _Token:
    __slots__ = ("kind", "value", "pos")

    def __init__(self, kind, value, pos):
        self.kind = kind
        self.value = value
        self.pos = pos


def _tokenize(src):
    tokens = []
    i = 0
    n = len(src)
    while i < n:
        c = src[i]
        if c.isspace():
            i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            if j < n and src[j] == ".":
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            try:
                value = float(src[i:j])
            except ValueError:
                raise FieldSyntaxError("bad number literal", i)
            tokens.append(_Token("num", value, i))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            tokens.append(_Token("ident", src[i:j], i))
            i = j
            continue
        if src.startswith("**", i):
            tokens.append(_Token("op", "^", i))
            i += 2
            continue
        if c in "+-*/^":
            tokens.append(_Token("op", c, i))
            i += 1
            continue
        if c == "(":
            tokens.append(_Token("lparen", c, i))
            i += 1
            continue
        if c == ")":
            tokens.append(_Token("rparen", c, i))
            i += 1
            continue
        if c == ",":
            tokens.append(_Token("comma", c, i))
            i += 1
            continue
        raise FieldSyntaxError("unexpected character %r" % c, i)
    tokens.append(_Token("end", None, n))
    return tokens


# --- parser (precedence climbing) ----------------------------------------


class _Parser:
    def __init__(self, src, params):
        self.src = src
        self.params = params
        self.tokens = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok.kind != kind:
            raise FieldSyntaxError(
                "expected %s, found %r" % (kind, tok.value), tok.pos
            )
        return tok

    def parse(self):
        node = self.parse_expr(0)
        tok = self.peek()
        if tok.kind != "end":
            raise FieldSyntaxError("trailing input %r" % tok.value, tok.pos)
        return node

    def parse_expr(self, min_prec):
        left = self.parse_unary()
        while True:
            tok = self.peek()
            if tok.kind != "op" or tok.value not in _PREC:
                return left
            prec = _PREC[tok.value]
            if prec < min_prec:
                return left
            self.next()
            if tok.value == "^":  # right-associative
                right = self.parse_expr(prec)
            else:
                right = self.parse_expr(prec + 1)
            left = Bin(tok.value, left, right)

    def parse_unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.value == "-":
            self.next()
            return Unary("-", self.parse_expr(_UNARY_PREC))
        if tok.kind == "op" and tok.value == "+":
            self.next()
            return self.parse_expr(_UNARY_PREC)
        return self.parse_atom()

    def parse_atom(self):
        tok = self.next()
        if tok.kind == "num":
            return Num(tok.value)
        if tok.kind == "lparen":
            node = self.parse_expr(0)
            self.expect("rparen")
            return node
        if tok.kind == "ident":
            name = tok.value
            if name in ("x", "y"):
                return Var(name)
            if name in _FUNC_OPS:
                self.expect("lparen")
                args = [self.parse_expr(0)]
                while self.peek().kind == "comma":
                    self.next()
                    args.append(self.parse_expr(0))
                self.expect("rparen")
                arity = _FUNC_OPS[name][1]
                if len(args) != arity:
                    raise FieldSyntaxError(
                        "%s takes %d argument(s), got %d"
                        % (name, arity, len(args)),
                        tok.pos,
                    )
                return Call(name, tuple(args))
            if self.params is not None and name in self.params:
                value = float(self.params[name])
                if not math.isfinite(value):
                    raise FieldSyntaxError(
                        "parameter %r is not finite" % name, tok.pos
                    )
                if value < 0:
                    return Unary("-", Num(-value))
                return Num(value)
            raise UnknownIdentifier(name, tok.pos)
        raise FieldSyntaxError("unexpected %r" % (tok.value,), tok.pos)


def parse(src, params=None):
    """Parse an expression string into an AST.

    Bound parameters (a name -> value mapping) are inlined as constants, so
    the resulting AST depends only on x and y.
    """
    return _Parser(src, params).parse()


# --- printing ------------------------------------------------------------


def _node_prec(node):
    if isinstance(node, Bin):
        return _PREC[node.op]
    if isinstance(node, Unary):
        return _UNARY_PREC
    return 100


def to_src(node):
    """Print an AST back to source with minimal parentheses; parsing the
    result reproduces the AST exactly."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        inner = to_src(node.a)
        if _node_prec(node.a) < _UNARY_PREC:
            inner = "(%s)" % inner
        return "-" + inner
    if isinstance(node, Bin):
        prec = _PREC[node.op]
        left = to_src(node.a)
        right = to_src(node.b)
        if node.op == "^":
            # right-associative: parenthesize a left child of equal or
            # lower precedence, keep a right chain bare
            if _node_prec(node.a) <= prec:
                left = "(%s)" % left
            if _node_prec(node.b) < prec:
                right = "(%s)" % right
        else:
            if _node_prec(node.a) < prec:
                left = "(%s)" % left
            if _node_prec(node.b) <= prec:
                right = "(%s)" % right
        return "%s %s %s" % (left, node.op, right)
    if isinstance(node, Call):
        return "%s(%s)" % (node.fn, ", ".join(to_src(a) for a in node.args))
    raise TypeError("not an AST node: %r" % (node,))


# --- tape compilation ----------------------------------------------------


class Tape:
    """Flat register program: code rows are (opcode, a, b, out).

    Registers 0 and 1 hold x and y, the next len(consts) registers are
    preloaded constants, the rest are temporaries.  Kernels execute rows in
    order and read the result from out_reg.
    """

    __slots__ = ("code", "consts", "n_regs", "out_reg")

    def __init__(self, code, consts, n_regs, out_reg):
        self.code = np.ascontiguousarray(code, dtype=np.int32)
        if self.code.size == 0:
            self.code = np.zeros((0, 4), dtype=np.int32)
        self.consts = np.ascontiguousarray(consts, dtype=np.float64)
        self.n_regs = int(n_regs)
        self.out_reg = int(out_reg)


def compile_tape(node):
    # first pass: collect the constant pool so temporaries can be numbered
    # above it in one go
    consts = []
    const_index = {}

    def collect(n):
        if isinstance(n, Num):
            key = repr(float(n.value))
            if key not in const_index:
                const_index[key] = len(consts)
                consts.append(float(n.value))
        elif isinstance(n, Unary):
            collect(n.a)
        elif isinstance(n, Bin):
            collect(n.a)
            collect(n.b)
        elif isinstance(n, Call):
            for a in n.args:
                collect(a)

    collect(node)
    base = 2 + len(consts)
    rows = []
    next_reg = [base]

    def alloc():
        reg = next_reg[0]
        next_reg[0] += 1
        return reg

    def emit(n):
        if isinstance(n, Num):
            return 2 + const_index[repr(float(n.value))]
        if isinstance(n, Var):
            return 0 if n.name == "x" else 1
        if isinstance(n, Unary):
            a = emit(n.a)
            out = alloc()
            rows.append((OP_NEG, a, -1, out))
            return out
        if isinstance(n, Bin):
            a = emit(n.a)
            b = emit(n.b)
            out = alloc()
            rows.append((_BIN_OPS[n.op], a, b, out))
            return out
        if isinstance(n, Call):
            op, arity = _FUNC_OPS[n.fn]
            a = emit(n.args[0])
            b = emit(n.args[1]) if arity == 2 else -1
            out = alloc()
            rows.append((op, a, b, out))
            return out
        raise TypeError("not an AST node: %r" % (n,))

    out_reg = emit(node)
    code = np.array(rows, dtype=np.int32).reshape(-1, 4)
    return Tape(code, consts, next_reg[0], out_reg)
