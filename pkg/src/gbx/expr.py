"""Scalar fields on a chart: parsed expressions and sampled grids.

Expression grammar (EBNF):

    expr   = term {("+"|"-") term}
    term   = factor {("*"|"/") factor}
    factor = ["-"] atom ["^" factor]
    atom   = number | "pi" | "u" | "v"
           | func "(" expr {"," expr} ")" | "(" expr ")"
    func   in {sin, cos, tan, exp, log, sqrt, abs, atan2}

Expressions are parsed into a small tuple AST, symbolically
differentiable, and compiled to a postfix program executed by the
kernel backends. Grid fields interpolate bilinearly over a rectangle.
"""

from __future__ import annotations

import math

import numpy as np

from . import kernels
from .errors import ConfigError, ExprSyntaxError

_FUNCS = {
    "sin": (1, kernels.OP_SIN),
    "cos": (1, kernels.OP_COS),
    "tan": (1, kernels.OP_TAN),
    "exp": (1, kernels.OP_EXP),
    "log": (1, kernels.OP_LOG),
    "sqrt": (1, kernels.OP_SQRT),
    "abs": (1, kernels.OP_ABS),
    "atan2": (2, kernels.OP_ATAN2),
}

_BINOP_CODE = {
    "add": kernels.OP_ADD,
    "sub": kernels.OP_SUB,
    "mul": kernels.OP_MUL,
    "div": kernels.OP_DIV,
    "pow": kernels.OP_POW,
}


# ---------------------------------------------------------------------------
# Tokenizer and recursive-descent parser
# ---------------------------------------------------------------------------


class _Token:
    __slots__ = ("kind", "text", "value", "line", "col")

    def __init__(self, kind, text, line, col, value=0.0):
        self.kind = kind
        self.text = text
        self.value = value
        self.line = line
        self.col = col


def _tokenize(source: str):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch in "+-*/^(),":
            tokens.append(_Token("op", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == ".":
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
            if j < n and source[j] in "eE":
                k = j + 1
                if k < n and source[k] in "+-":
                    k += 1
                if k < n and source[k].isdigit():
                    j = k
                    while j < n and source[j].isdigit():
                        j += 1
            text = source[i:j]
            tokens.append(_Token("number", text, line, col, float(text)))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            tokens.append(_Token("ident", source[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ExprSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_op(self, text):
        tok = self.peek()
        if tok.kind == "op" and tok.text == text:
            return self.advance()
        raise ExprSyntaxError(
            f"expected {text!r}, found {tok.text or 'end of input'!r}",
            tok.line,
            tok.col,
        )

    def parse(self):
        node = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise ExprSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.col)
        return node

    def expr(self):
        node = self.term()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.advance()
                rhs = self.term()
                node = ("add" if tok.text == "+" else "sub", node, rhs)
            else:
                return node

    def term(self):
        node = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.advance()
                rhs = self.factor()
                node = ("mul" if tok.text == "*" else "div", node, rhs)
            else:
                return node

    def factor(self):
        tok = self.peek()
        negate = False
        if tok.kind == "op" and tok.text == "-":
            self.advance()
            negate = True
        node = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text == "^":
            self.advance()
            node = ("pow", node, self.factor())
        if negate:
            node = ("neg", node)
        return node

    def atom(self):
        tok = self.advance()
        if tok.kind == "number":
            return ("num", tok.value)
        if tok.kind == "ident":
            if tok.text == "pi":
                return ("num", math.pi)
            if tok.text in ("u", "v"):
                return ("var", tok.text)
            if tok.text in _FUNCS:
                arity, _ = _FUNCS[tok.text]
                self.expect_op("(")
                args = [self.expr()]
                while True:
                    nxt = self.peek()
                    if nxt.kind == "op" and nxt.text == ",":
                        self.advance()
                        args.append(self.expr())
                    else:
                        break
                self.expect_op(")")
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{tok.text} takes {arity} argument(s), got {len(args)}",
                        tok.line,
                        tok.col,
                    )
                return ("call", tok.text, args)
            raise ExprSyntaxError(f"unknown identifier {tok.text!r}", tok.line, tok.col)
        if tok.kind == "op" and tok.text == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExprSyntaxError(
            f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col
        )


def parse_expression(source: str):
    """Parse `source` into an AST tuple."""
    return _Parser(source).parse()


# ---------------------------------------------------------------------------
# AST utilities: simplification, differentiation, compilation
# ---------------------------------------------------------------------------


def _is_num(node, value=None):
    return node[0] == "num" and (value is None or node[1] == value)


def simplify(node):
    kind = node[0]
    if kind in ("num", "var"):
        return node
    if kind == "neg":
        a = simplify(node[1])
        if _is_num(a):
            return ("num", -a[1])
        if a[0] == "neg":
            return a[1]
        return ("neg", a)
    if kind == "call":
        args = [simplify(a) for a in node[2]]
        if all(_is_num(a) for a in args):
            fn = getattr(math, node[1] if node[1] != "abs" else "fabs")
            try:
                return ("num", fn(*[a[1] for a in args]))
            except ValueError:
                pass
        return ("call", node[1], args)
    a = simplify(node[1])
    b = simplify(node[2])
    if _is_num(a) and _is_num(b):
        x, y = a[1], b[1]
        try:
            if kind == "add":
                return ("num", x + y)
            if kind == "sub":
                return ("num", x - y)
            if kind == "mul":
                return ("num", x * y)
            if kind == "div" and y != 0:
                return ("num", x / y)
            if kind == "pow":
                return ("num", x**y)
        except (OverflowError, ValueError, ZeroDivisionError):
            pass
    if kind == "add":
        if _is_num(a, 0.0):
            return b
        if _is_num(b, 0.0):
            return a
    elif kind == "sub":
        if _is_num(b, 0.0):
            return a
        if _is_num(a, 0.0):
            return simplify(("neg", b))
    elif kind == "mul":
        if _is_num(a, 0.0) or _is_num(b, 0.0):
            return ("num", 0.0)
        if _is_num(a, 1.0):
            return b
        if _is_num(b, 1.0):
            return a
        if _is_num(a, -1.0):
            return simplify(("neg", b))
        if _is_num(b, -1.0):
            return simplify(("neg", a))
    elif kind == "div":
        if _is_num(a, 0.0):
            return ("num", 0.0)
        if _is_num(b, 1.0):
            return a
    elif kind == "pow":
        if _is_num(b, 1.0):
            return a
        if _is_num(b, 0.0):
            return ("num", 1.0)
    return (kind, a, b)


def differentiate(node, var: str):
    """Exact derivative of the AST with respect to 'u' or 'v'."""
    d = _diff(node, var)
    return simplify(d)


def _diff(node, var):
    kind = node[0]
    if kind == "num":
        return ("num", 0.0)
    if kind == "var":
        return ("num", 1.0 if node[1] == var else 0.0)
    if kind == "neg":
        return ("neg", _diff(node[1], var))
    if kind == "add":
        return ("add", _diff(node[1], var), _diff(node[2], var))
    if kind == "sub":
        return ("sub", _diff(node[1], var), _diff(node[2], var))
    if kind == "mul":
        a, b = node[1], node[2]
        return ("add", ("mul", _diff(a, var), b), ("mul", a, _diff(b, var)))
    if kind == "div":
        a, b = node[1], node[2]
        num = ("sub", ("mul", _diff(a, var), b), ("mul", a, _diff(b, var)))
        return ("div", num, ("pow", b, ("num", 2.0)))
    if kind == "pow":
        a, b = node[1], node[2]
        if _is_num(b):
            # d(a^c) = c * a^(c-1) * a'
            return (
                "mul",
                ("mul", b, ("pow", a, ("num", b[1] - 1.0))),
                _diff(a, var),
            )
        if _is_num(a):
            # d(c^b) = c^b * log(c) * b'
            return (
                "mul",
                ("mul", node, ("num", math.log(a[1]))),
                _diff(b, var),
            )
        # general a^b = exp(b log a)
        return (
            "mul",
            node,
            (
                "add",
                ("mul", _diff(b, var), ("call", "log", [a])),
                ("div", ("mul", b, _diff(a, var)), a),
            ),
        )
    if kind == "call":
        name, args = node[1], node[2]
        if name == "atan2":
            y, x = args
            num = ("sub", ("mul", x, _diff(y, var)), ("mul", y, _diff(x, var)))
            den = ("add", ("pow", x, ("num", 2.0)), ("pow", y, ("num", 2.0)))
            return ("div", num, den)
        (a,) = args
        da = _diff(a, var)
        if name == "sin":
            return ("mul", ("call", "cos", [a]), da)
        if name == "cos":
            return ("neg", ("mul", ("call", "sin", [a]), da))
        if name == "tan":
            sec2 = ("div", ("num", 1.0), ("pow", ("call", "cos", [a]), ("num", 2.0)))
            return ("mul", sec2, da)
        if name == "exp":
            return ("mul", node, da)
        if name == "log":
            return ("div", da, a)
        if name == "sqrt":
            return ("div", da, ("mul", ("num", 2.0), node))
        if name == "abs":
            return ("mul", ("div", a, node), da)
    raise ValueError(f"cannot differentiate node {node!r}")


def compile_ast(node):
    """Flatten an AST to (code, args, consts, max_stack) arrays."""
    code: list[int] = []
    args: list[int] = []
    consts: list[float] = []

    def emit(op, arg=-1):
        code.append(op)
        args.append(arg)

    max_stack = 0
    depth = 0

    def bump(delta):
        nonlocal depth, max_stack
        depth += delta
        max_stack = max(max_stack, depth)

    def walk(n):
        kind = n[0]
        if kind == "num":
            try:
                idx = consts.index(n[1])
            except ValueError:
                idx = len(consts)
                consts.append(n[1])
            emit(kernels.OP_CONST, idx)
            bump(1)
        elif kind == "var":
            emit(kernels.OP_U if n[1] == "u" else kernels.OP_V)
            bump(1)
        elif kind == "neg":
            walk(n[1])
            emit(kernels.OP_NEG)
        elif kind == "call":
            for a in n[2]:
                walk(a)
            _, op = _FUNCS[n[1]]
            emit(op)
            if n[1] == "atan2":
                bump(-1)
        else:
            walk(n[1])
            walk(n[2])
            emit(_BINOP_CODE[kind])
            bump(-1)

    walk(node)
    return (
        np.asarray(code, dtype=np.int64),
        np.asarray(args, dtype=np.int64),
        np.asarray(consts if consts else [0.0], dtype=np.float64),
        max(max_stack, 1),
    )


# ---------------------------------------------------------------------------
# Field objects
# ---------------------------------------------------------------------------


def _as_points(u, v):
    us = np.atleast_1d(np.asarray(u, dtype=np.float64)).ravel()
    vs = np.atleast_1d(np.asarray(v, dtype=np.float64)).ravel()
    if us.shape != vs.shape:
        us, vs = np.broadcast_arrays(us, vs)
        us = np.ascontiguousarray(us, dtype=np.float64)
        vs = np.ascontiguousarray(vs, dtype=np.float64)
    return us, vs


class ExprField:
    """Deterministic scalar field defined by an expression over (u, v)."""

    def __init__(self, source):
        if isinstance(source, str):
            self.source = source
            self.ast = parse_expression(source)
        else:
            self.source = None
            self.ast = source
        self._program = None

    def _ensure_compiled(self):
        if self._program is None:
            self._program = compile_ast(simplify(self.ast))
        return self._program

    def eval(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        us, vs = _as_points(u, v)
        code, args, consts, max_stack = self._ensure_compiled()
        out = kernels.eval_program(code, args, consts, us, vs, max_stack)
        return float(out[0]) if scalar else out

    def diff(self, var: str) -> "ExprField":
        return ExprField(differentiate(self.ast, var))

    def __repr__(self):
        return f"ExprField({self.source or self.ast!r})"


class GridField:
    """Uniform grid of samples over a rectangle, bilinearly interpolated."""

    def __init__(self, values, u_range, v_range):
        values = np.asarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] < 2 or values.shape[1] < 2:
            raise ConfigError("grid field needs at least 2 samples per axis")
        if not np.all(np.isfinite(values)):
            raise ConfigError("grid field contains non-finite values")
        self.values = values
        self.u0, self.u1 = float(u_range[0]), float(u_range[1])
        self.v0, self.v1 = float(v_range[0]), float(v_range[1])
        if not (self.u1 > self.u0 and self.v1 > self.v0):
            raise ConfigError("grid field ranges must be increasing")

    def eval(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        us, vs = _as_points(u, v)
        out = kernels.bilinear(self.values, self.u0, self.u1, self.v0, self.v1, us, vs)
        return float(out[0]) if scalar else out


class FuncField:
    """Adapter turning a vectorized callable f(us, vs) into a field."""

    def __init__(self, fn):
        self.fn = fn

    def eval(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        us, vs = _as_points(u, v)
        out = np.asarray(self.fn(us, vs), dtype=np.float64)
        if out.shape != us.shape:
            out = np.broadcast_to(out, us.shape).astype(np.float64)
        return float(out[0]) if scalar else out


def const_field(value: float) -> ExprField:
    return ExprField(("num", float(value)))
