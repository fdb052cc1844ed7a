"""A small operator-expression language (``opexpr-v1``).

Grammar (whitespace-insensitive, left-associative)::

    expr   := term (('+' | '-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' uint)?
    atom   := 'x' | 'p' | number | 'i' | '(' expr ')'
            | 'inv' '(' expr ')' | 'mul' '(' scalar ')' | 'diag' '(' ident ')'

``scalar`` is the same grammar restricted to ``x``, numbers, parentheses and
``+ - * / ^``; it describes a real function of position that ``mul`` turns
into a multiplication operator. ``/`` is only legal inside ``mul(...)``.

    >>> parse("1 + p^2")
    Add(left=Const(value=(1+0j)), right=Pow(base=P(), exponent=2))
    >>> to_source(parse("mul(1+x^2)"))
    'mul(1 + x^2)'
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import operators as ops
from .errors import (
    ExponentOverflowError,
    ExprSyntaxError,
    LoweringError,
    UnknownIdentifierError,
)

VERSION = "opexpr-v1"
MAX_SOURCE = 4096
MAX_DEPTH = 64
MAX_EXPONENT = 64


# AST -----------------------------------------------------------------------

class Node:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Node):
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", complex(self.value))


@dataclass(frozen=True)
class X(Node):
    pass


@dataclass(frozen=True)
class P(Node):
    pass


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Div(Node):
    left: Node
    right: Node


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int


@dataclass(frozen=True)
class Inv(Node):
    arg: Node


@dataclass(frozen=True)
class MulOp(Node):
    func: Node


@dataclass(frozen=True)
class Diag(Node):
    name: str


def depth(node):
    if isinstance(node, (Add, Sub, Mul, Div)):
        return 1 + max(depth(node.left), depth(node.right))
    if isinstance(node, Pow):
        return 1 + depth(node.base)
    if isinstance(node, Inv):
        return 1 + depth(node.arg)
    if isinstance(node, MulOp):
        return 1 + depth(node.func)
    return 1


# tokenizer -----------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/^()])"
)
_KEYWORDS = {"x", "p", "i", "inv", "mul", "diag"}
_ATOM_START = ("x", "p", "i", "number", "(", "inv", "mul", "diag")
_SCALAR_START = ("x", "number", "(")


@dataclass(frozen=True)
class Token:
    kind: str  # 'num', 'ident', 'op', 'end'
    text: str
    start: int  # character index
    end: int


def _tokenize(src):
    pos, out = 0, []
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {src[pos]!r}", _byte(src, pos))
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, m.group(), m.start(), m.end()))
        pos = m.end()
    out.append(Token("end", "", len(src), len(src)))
    return out


def _byte(src, idx):
    return len(src[:idx].encode("utf-8"))


class _Parser:
    def __init__(self, src):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.nesting = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def fail(self, what, expected, tok=None):
        tok = tok or self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExprSyntaxError(f"{what}: found {found}", _byte(self.src, tok.start), expected)

    def eat(self, text):
        if self.tok.kind == "op" and self.tok.text == text:
            self.i += 1
            return
        self.fail("syntax error", (text,))

    def node(self, n, tok):
        if depth(n) > MAX_DEPTH:
            raise ExprSyntaxError(f"expression deeper than {MAX_DEPTH}", _byte(self.src, tok.start))
        return n

    def expr(self, scalar):
        self.nesting += 1
        if self.nesting > MAX_DEPTH:
            self.fail(f"nesting deeper than {MAX_DEPTH}", ())
        try:
            return self._expr(scalar)
        finally:
            self.nesting -= 1

    def _expr(self, scalar):
        left = self.term(scalar)
        while self.tok.kind == "op" and self.tok.text in "+-":
            t = self.tok
            self.i += 1
            right = self.term(scalar)
            left = self.node((Add if t.text == "+" else Sub)(left, right), t)
        return left

    def term(self, scalar):
        left = self.factor(scalar)
        while self.tok.kind == "op" and self.tok.text in ("*/" if scalar else "*"):
            t = self.tok
            self.i += 1
            right = self.factor(scalar)
            left = self.node((Mul if t.text == "*" else Div)(left, right), t)
        if not scalar and self.tok.kind == "op" and self.tok.text == "/":
            self.fail("division is only allowed inside mul(...)", ("*", "+", "-", ")"))
        return left

    def factor(self, scalar):
        base = self.atom(scalar)
        if self.tok.kind == "op" and self.tok.text == "^":
            t = self.tok
            self.i += 1
            e = self.tok
            if e.kind != "num" or not e.text.isdigit():
                self.fail("exponent must be an unsigned integer", ("uint",))
            self.i += 1
            k = int(e.text)
            if k > MAX_EXPONENT:
                raise ExponentOverflowError(
                    f"exponent {k} exceeds {MAX_EXPONENT}", _byte(self.src, e.start))
            return self.node(Pow(base, k), t)
        return base

    def atom(self, scalar):
        t = self.tok
        expected = _SCALAR_START if scalar else _ATOM_START
        if t.kind == "num":
            self.i += 1
            v = float(t.text)
            if not np.isfinite(v):
                raise ExponentOverflowError("numeric literal overflows", _byte(self.src, t.start))
            return Const(v)
        if t.kind == "op" and t.text == "(":
            self.i += 1
            inner = self.expr(scalar)
            self.eat(")")
            return inner
        if t.kind == "ident":
            name = t.text
            if name not in _KEYWORDS:
                raise UnknownIdentifierError(f"unknown identifier {name!r}",
                                             _byte(self.src, t.start), expected)
            if name == "x":
                self.i += 1
                return X()
            if scalar:
                self.fail(f"{name!r} is not allowed inside mul(...)", expected)
            self.i += 1
            if name == "p":
                return P()
            if name == "i":
                return Const(1j)
            self.eat("(")
            if name == "inv":
                arg = self.expr(False)
                self.eat(")")
                return self.node(Inv(arg), t)
            if name == "mul":
                arg = self.expr(True)
                self.eat(")")
                return self.node(MulOp(arg), t)
            ident = self.tok
            if ident.kind != "ident":
                self.fail("diag(...) needs a sequence name", ("identifier",))
            self.i += 1
            self.eat(")")
            return Diag(ident.text)
        self.fail("syntax error", expected)


def parse(src):
    """Parse ``src`` into an AST; errors carry a byte offset and expected tokens."""
    if not isinstance(src, str) or not src.strip():
        raise ExprSyntaxError("empty expression", 0, _ATOM_START)
    if len(src) > MAX_SOURCE:
        raise ExprSyntaxError(f"expression longer than {MAX_SOURCE} characters", MAX_SOURCE)
    p = _Parser(src)
    tree = p.expr(False)
    if p.tok.kind != "end":
        p.fail("unexpected trailing input", ("+", "-", "*", "end of input"))
    return tree


# printer -------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def _num(v):
    if float(v).is_integer() and abs(v) < 1e16:
        return str(int(v))
    return repr(float(v))


def _const(c):
    if c == 1j:
        return "i", 4
    if c.imag == 0 and c.real >= 0:
        return _num(c.real), 4
    re_, im = c.real, c.imag
    parts = []
    if re_ != 0 or im == 0:
        parts.append(_num(abs(re_)))
        if re_ < 0:
            parts[0] = f"0 - {parts[0]}"
    if im != 0:
        term = "i" if abs(im) == 1 else f"{_num(abs(im))}*i"
        if parts:
            parts.append(("- " if im < 0 else "+ ") + term)
        elif im > 0:
            return term, 2
        else:
            parts.append(f"0 - {term}")
    return " ".join(parts), 1


def _show(node, need):
    if isinstance(node, Const):
        text, prec = _const(node.value)
    elif isinstance(node, X):
        text, prec = "x", 4
    elif isinstance(node, P):
        text, prec = "p", 4
    elif isinstance(node, (Add, Sub)):
        sym = "+" if isinstance(node, Add) else "-"
        text, prec = f"{_show(node.left, 1)} {sym} {_show(node.right, 2)}", 1
    elif isinstance(node, (Mul, Div)):
        sym = "*" if isinstance(node, Mul) else "/"
        text, prec = f"{_show(node.left, 2)}{sym}{_show(node.right, 3)}", 2
    elif isinstance(node, Pow):
        text, prec = f"{_show(node.base, 4)}^{node.exponent}", 3
    elif isinstance(node, Inv):
        text, prec = f"inv({_show(node.arg, 0)})", 4
    elif isinstance(node, MulOp):
        text, prec = f"mul({_show(node.func, 0)})", 4
    elif isinstance(node, Diag):
        text, prec = f"diag({node.name})", 4
    else:
        raise TypeError(f"not an expression node: {node!r}")
    return f"({text})" if prec < need else text


def to_source(node):
    """Canonical source text; ``parse(to_source(t)) == t`` for canonical trees."""
    return _show(node, 0)


# scalar evaluation and lowering --------------------------------------------

def eval_scalar(node, x):
    """Evaluate a ``mul(...)`` body pointwise at positions ``x``."""
    x = np.asarray(x, dtype=float)
    if isinstance(node, Const):
        if node.value.imag != 0:
            raise LoweringError("multiplier constants must be real")
        return np.full_like(x, node.value.real)
    if isinstance(node, X):
        return x
    if isinstance(node, Pow):
        return eval_scalar(node.base, x) ** node.exponent
    if isinstance(node, (Add, Sub, Mul, Div)):
        a, b = eval_scalar(node.left, x), eval_scalar(node.right, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            if isinstance(node, Add):
                return a + b
            if isinstance(node, Sub):
                return a - b
            if isinstance(node, Mul):
                return a * b
            return a / b
    raise LoweringError(f"{type(node).__name__} is not a scalar function of x")


def scalar_function(src_or_node):
    """Vectorized callable for a scalar expression (source text or AST)."""
    node = _parse_scalar(src_or_node) if isinstance(src_or_node, str) else src_or_node
    return lambda x: eval_scalar(node, x)


def _parse_scalar(src):
    tree = parse(f"mul({src})")
    return tree.func


def _kernel_routes():
    from .greens import greens_kernel_inverse

    return {parse("1 + p^2"): greens_kernel_inverse, parse("p^2 + 1"): greens_kernel_inverse}


class Lowering:
    """Recursive lowering of an AST to a :class:`TruncatedOperator`."""

    def __init__(self, N, rule=None, sequences=None, inverse_mode="matrix",
                 cond_max=ops.COND_MAX, basis=ops.DEFAULT_BASIS):
        from . import hermite

        if inverse_mode not in ("matrix", "kernel"):
            raise LoweringError(f"inverse_mode must be 'matrix' or 'kernel', got {inverse_mode!r}")
        self.N = N
        self.rule = rule or hermite.gauss_hermite_rule(hermite.default_order(N))
        self.sequences = dict(sequences or {})
        self.inverse_mode = inverse_mode
        self.cond_max = cond_max
        self.basis = basis

    def __call__(self, node):
        N, basis = self.N, self.basis
        if isinstance(node, Const):
            return ops.scale(ops.identity(N, basis), node.value)
        if isinstance(node, X):
            return ops.position_matrix(N, basis)
        if isinstance(node, P):
            return ops.momentum_matrix(N, basis)
        if isinstance(node, Add):
            return ops.add(self(node.left), self(node.right))
        if isinstance(node, Sub):
            return ops.add(self(node.left), ops.scale(self(node.right), -1.0))
        if isinstance(node, Mul):
            return ops.compose(self(node.left), self(node.right))
        if isinstance(node, Div):
            raise LoweringError("division between operators is not defined; use inv(...)")
        if isinstance(node, Pow):
            base = self(node.base)
            out = ops.identity(N, basis)
            for _ in range(node.exponent):
                out = ops.compose(out, base)
            return out
        if isinstance(node, Inv):
            if self.inverse_mode == "kernel":
                route = _kernel_routes().get(node.arg)
                if route is not None:
                    return route(N, self.rule).relabel(basis)
            return ops.inverse(self(node.arg), self.cond_max)
        if isinstance(node, MulOp):
            return ops.multiplication_operator(scalar_function(node.func), N, self.rule, basis)
        if isinstance(node, Diag):
            seq = self.sequences.get(node.name)
            if seq is None:
                from .riesz import builtin_sequence

                try:
                    seq = builtin_sequence(node.name, N)
                except KeyError:
                    raise LoweringError(f"unresolved sequence name {node.name!r}") from None
            values = np.asarray(getattr(seq, "values", seq))
            if values.size < N:
                raise LoweringError(f"sequence {node.name!r} has {values.size} values, need {N}")
            return ops.diagonal(values[:N], basis)
        raise LoweringError(f"cannot lower {node!r}")


def lower(expr, N, rule=None, sequences=None, inverse_mode="matrix",
          cond_max=ops.COND_MAX, basis=ops.DEFAULT_BASIS):
    """Lower an expression (AST or source) to a truncated N x N operator."""
    if isinstance(expr, str):
        expr = parse(expr)
    return Lowering(N, rule, sequences, inverse_mode, cond_max, basis)(expr)
