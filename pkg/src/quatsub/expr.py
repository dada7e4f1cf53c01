"""Expression language for coordinate formulas.

Sources are comma-separated lists of expressions in the variables
``x1 .. xN`` built from decimal literals, ``+ - * / ^`` (integer exponents
only), parentheses and the functions ``sqrt exp log sin cos``.  Parsed
expressions are immutable trees; structurally identical sources produce
equal trees.

Derivatives are obtained by pushing second-order jets (value, gradient,
Hessian) through the tree.  Evaluation is batched over points: every array
carries a leading batch axis so a sweep over sample points walks the tree
once.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ParseError

FUNCTIONS = ("sqrt", "exp", "log", "sin", "cos")


class Expr:
    """Base class of expression nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return to_source(self)


@dataclass(frozen=True)
class Num(Expr):
    value: float


@dataclass(frozen=True)
class Var(Expr):
    index: int  # zero-based; printed as x{index+1}


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Call(Expr):
    func: str
    arg: Expr


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        text = m.group()
        if kind == "ws":
            for offset, ch in enumerate(text):
                if ch == "\n":
                    line += 1
                    line_start = pos + offset + 1
        else:
            tokens.append(_Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(_Token("end", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, source: str, dim: int | None):
        self.tokens = _tokenize(source)
        self.pos = 0
        self.dim = dim

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def advance(self) -> _Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.tok.text != text or self.tok.kind == "end":
            found = "end of input" if self.tok.kind == "end" else repr(self.tok.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.advance()

    def parse_list(self) -> list[Expr]:
        items = [self.parse_expr()]
        while self.tok.text == ",":
            self.advance()
            items.append(self.parse_expr())
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return items

    def parse_single(self) -> Expr:
        expr = self.parse_expr()
        if self.tok.kind != "end":
            raise self.error(f"unexpected {self.tok.text!r}")
        return expr

    def parse_expr(self) -> Expr:
        node = self.parse_term()
        while self.tok.text in ("+", "-") and self.tok.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.parse_term())
        return node

    def parse_term(self) -> Expr:
        node = self.parse_unary()
        while self.tok.text in ("*", "/") and self.tok.kind == "op":
            op = self.advance().text
            node = BinOp(op, node, self.parse_unary())
        return node

    def parse_unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.advance()
            return Neg(self.parse_unary())
        if self.tok.kind == "op" and self.tok.text == "+":
            self.advance()
            return self.parse_unary()
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_atom()
        if self.tok.kind == "op" and self.tok.text == "^":
            caret = self.advance()
            exponent = self.parse_exponent(caret)
            return Pow(base, exponent)
        return base

    def parse_exponent(self, caret: _Token) -> int:
        start = self.tok
        node = self.parse_unary()
        sign = 1
        while isinstance(node, Neg):
            sign, node = -sign, node.arg
        if isinstance(node, Num) and float(node.value).is_integer():
            return sign * int(node.value)
        raise self.error("exponent must be an integer literal", start)

    def parse_atom(self) -> Expr:
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.advance()
            if tok.text in FUNCTIONS:
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return Call(tok.text, arg)
            m = re.fullmatch(r"x(\d+)", tok.text)
            if m is None:
                raise self.error(f"unknown identifier {tok.text!r}", tok)
            index = int(m.group(1))
            if index < 1 or (self.dim is not None and index > self.dim):
                raise self.error(
                    f"variable index out of range: {tok.text} "
                    f"(domain dimension {self.dim})",
                    tok,
                )
            return Var(index - 1)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            node = self.parse_expr()
            self.expect(")")
            return node
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise self.error(f"unexpected {found}")


def parse_expr(source: str, dim: int | None = None) -> Expr:
    """Parse a single expression; ``dim`` bounds the admissible variable indices."""
    return _Parser(source, dim).parse_single()


def parse_list(source: str, dim: int | None = None) -> list[Expr]:
    return _Parser(source, dim).parse_list()


def to_source(expr: Expr) -> str:
    """Fully parenthesised source text that parses back to an equal tree."""
    if isinstance(expr, Num):
        return repr(float(expr.value))
    if isinstance(expr, Var):
        return f"x{expr.index + 1}"
    if isinstance(expr, Neg):
        return f"(-{to_source(expr.arg)})"
    if isinstance(expr, BinOp):
        return f"({to_source(expr.left)} {expr.op} {to_source(expr.right)})"
    if isinstance(expr, Pow):
        exp = str(expr.exponent) if expr.exponent >= 0 else f"({expr.exponent})"
        return f"({to_source(expr.base)}^{exp})"
    if isinstance(expr, Call):
        return f"{expr.func}({to_source(expr.arg)})"
    raise TypeError(f"not an expression node: {expr!r}")


def max_var_index(expr: Expr) -> int:
    """Largest zero-based variable index used, or -1 for constants."""
    if isinstance(expr, Var):
        return expr.index
    if isinstance(expr, (Neg, Call)):
        return max_var_index(expr.arg)
    if isinstance(expr, Pow):
        return max_var_index(expr.base)
    if isinstance(expr, BinOp):
        return max(max_var_index(expr.left), max_var_index(expr.right))
    return -1


def is_constant(expr: Expr) -> bool:
    return max_var_index(expr) < 0


# --------------------------------------------------------------------------
# Plain evaluation (generic over a math namespace, e.g. math or mpmath)
# --------------------------------------------------------------------------

def evaluate(expr: Expr, point: Sequence, lib=math):
    """Evaluate ``expr`` at ``point`` using the functions of ``lib``.

    ``lib`` may be :mod:`math`, :mod:`mpmath` or :mod:`numpy`; the finite
    difference oracles use mpmath so their rounding error is negligible.
    """
    if isinstance(expr, Num):
        return lib.mpf(expr.value) if hasattr(lib, "mpf") else expr.value
    if isinstance(expr, Var):
        return point[expr.index]
    if isinstance(expr, Neg):
        return -evaluate(expr.arg, point, lib)
    if isinstance(expr, BinOp):
        a = evaluate(expr.left, point, lib)
        b = evaluate(expr.right, point, lib)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        return a / b
    if isinstance(expr, Pow):
        return evaluate(expr.base, point, lib) ** expr.exponent
    if isinstance(expr, Call):
        return getattr(lib, expr.func)(evaluate(expr.arg, point, lib))
    raise TypeError(f"not an expression node: {expr!r}")


# --------------------------------------------------------------------------
# Second-order jets
# --------------------------------------------------------------------------

class Jet2:
    """Value, gradient and Hessian of a scalar function.

    Arrays may carry leading batch axes: ``value`` has shape ``B``,
    ``grad`` shape ``B + (n,)`` and ``hess`` shape ``B + (n, n)``.
    """

    __slots__ = ("value", "grad", "hess")

    def __init__(self, value, grad, hess):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = np.asarray(hess, dtype=float)

    @classmethod
    def constant(cls, c: float, n: int, batch: tuple = ()) -> "Jet2":
        return cls(np.full(batch, float(c)), np.zeros(batch + (n,)), np.zeros(batch + (n, n)))

    @classmethod
    def variable(cls, values, index: int, n: int) -> "Jet2":
        values = np.asarray(values, dtype=float)
        grad = np.zeros(values.shape + (n,))
        grad[..., index] = 1.0
        return cls(values, grad, np.zeros(values.shape + (n, n)))

    def __repr__(self) -> str:
        return f"Jet2(value={self.value!r}, grad={self.grad!r}, hess={self.hess!r})"

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.grad, -self.hess)

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value + other.value, self.grad + other.grad, self.hess + other.hess)

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(self.value - other.value, self.grad - other.grad, self.hess - other.hess)

    def __mul__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        cross = a.grad[..., :, None] * b.grad[..., None, :]
        return Jet2(
            a.value * b.value,
            a.grad * b.value[..., None] + b.grad * a.value[..., None],
            a.hess * b.value[..., None, None]
            + b.hess * a.value[..., None, None]
            + cross
            + np.swapaxes(cross, -1, -2),
        )

    def __truediv__(self, other: "Jet2") -> "Jet2":
        return self * other.reciprocal()

    def chain(self, f, df, d2f) -> "Jet2":
        """Compose with a scalar function given its value and two derivatives."""
        g = self.grad
        return Jet2(
            f,
            df[..., None] * g,
            df[..., None, None] * self.hess + d2f[..., None, None] * (g[..., :, None] * g[..., None, :]),
        )

    def reciprocal(self) -> "Jet2":
        v = self.value
        if np.any(v == 0.0):
            raise DomainError("division by zero")
        inv = 1.0 / v
        return self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def ipow(self, k: int) -> "Jet2":
        v = self.value
        if k == 0:
            return Jet2.constant(1.0, self.grad.shape[-1], v.shape)
        if k < 0 and np.any(v == 0.0):
            raise DomainError("negative power of zero")
        f = v ** k
        df = k * v ** (k - 1) if k != 1 else np.ones_like(v)
        if k == 1:
            d2f = np.zeros_like(v)
        elif k == 2:
            d2f = np.full_like(v, 2.0)
        else:
            d2f = k * (k - 1) * v ** (k - 2)
        return self.chain(f, df, d2f)

    def apply(self, func: str) -> "Jet2":
        v = self.value
        if func == "sqrt":
            if np.any(v <= 0.0):
                raise DomainError("sqrt of a non-positive value")
            s = np.sqrt(v)
            return self.chain(s, 0.5 / s, -0.25 / (s * v))
        if func == "exp":
            e = np.exp(v)
            return self.chain(e, e, e)
        if func == "log":
            if np.any(v <= 0.0):
                raise DomainError("log of a non-positive value")
            return self.chain(np.log(v), 1.0 / v, -1.0 / (v * v))
        if func == "sin":
            s, c = np.sin(v), np.cos(v)
            return self.chain(s, c, -s)
        if func == "cos":
            s, c = np.sin(v), np.cos(v)
            return self.chain(c, -s, -c)
        raise ValueError(f"unknown function {func!r}")


def jet2(expr: Expr, points, cache: dict | None = None) -> Jet2:
    """Second-order jet of ``expr`` at a batch of points of shape ``(B, n)``.

    ``cache`` (keyed by node identity) lets callers evaluating a grid of
    expressions that share subtrees compute each shared subtree once.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must have shape (batch, n)")
    if cache is None:
        cache = {}
    n = points.shape[1]
    batch = points.shape[:1]

    def walk(node: Expr) -> Jet2:
        key = id(node)
        hit = cache.get(key)
        if hit is not None and hit[0] is node:
            return hit[1]
        if isinstance(node, Num):
            out = Jet2.constant(node.value, n, batch)
        elif isinstance(node, Var):
            if node.index >= n:
                raise DomainError(f"variable x{node.index + 1} outside a {n}-dimensional point")
            out = Jet2.variable(points[:, node.index], node.index, n)
        elif isinstance(node, Neg):
            out = -walk(node.arg)
        elif isinstance(node, BinOp):
            a, b = walk(node.left), walk(node.right)
            if node.op == "+":
                out = a + b
            elif node.op == "-":
                out = a - b
            elif node.op == "*":
                out = a * b
            else:
                out = a / b
        elif isinstance(node, Pow):
            out = walk(node.base).ipow(node.exponent)
        elif isinstance(node, Call):
            out = walk(node.arg).apply(node.func)
        else:
            raise TypeError(f"not an expression node: {node!r}")
        cache[key] = (node, out)
        return out

    try:
        return walk(expr)
    except DomainError as exc:
        raise DomainError(f"{exc} while evaluating {to_source(expr)}") from None


# --------------------------------------------------------------------------
# Smooth maps
# --------------------------------------------------------------------------

Box = tuple[tuple[float, float], ...]


def _normalise_box(box, dim: int) -> Box:
    if box is None:
        return tuple((-math.inf, math.inf) for _ in range(dim))
    box = tuple((float(lo), float(hi)) for lo, hi in box)
    if len(box) != dim:
        raise ValueError(f"domain box has {len(box)} intervals, expected {dim}")
    for lo, hi in box:
        if not lo <= hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
    return box


def in_box(point, box: Box, slack: float = 0.0) -> bool:
    return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(point, box))


@dataclass(frozen=True)
class SmoothMapSpec:
    domain_dim: int
    codomain_dim: int
    components: tuple[Expr, ...]
    domain_box: Box

    def __post_init__(self):
        if len(self.components) != self.codomain_dim:
            raise ValueError(
                f"{len(self.components)} components for codomain dimension {self.codomain_dim}"
            )
        for comp in self.components:
            if max_var_index(comp) >= self.domain_dim:
                raise ValueError("component uses a variable beyond the domain dimension")
        object.__setattr__(self, "domain_box", _normalise_box(self.domain_box, self.domain_dim))

    def source(self) -> str:
        return ", ".join(to_source(c) for c in self.components)

    def __call__(self, point) -> np.ndarray:
        return np.array([evaluate(c, point) for c in self.components], dtype=float)

    def jets(self, points):
        """Batched values ``(B, k)``, Jacobians ``(B, k, n)`` and Hessians ``(B, k, n, n)``."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        cache: dict = {}
        js = [jet2(c, points, cache) for c in self.components]
        return (
            np.stack([j.value for j in js], axis=1),
            np.stack([j.grad for j in js], axis=1),
            np.stack([j.hess for j in js], axis=1),
        )


def parse_map(source: str | Iterable[str], domain_dim: int, domain_box=None) -> SmoothMapSpec:
    """Parse a comma-separated component list (or a list of component sources)."""
    if isinstance(source, str):
        components = parse_list(source, domain_dim)
    else:
        components = [parse_expr(s, domain_dim) for s in source]
    return SmoothMapSpec(domain_dim, len(components), tuple(components), domain_box)


def eval_jet2(smooth_map: SmoothMapSpec, p) -> list[Jet2]:
    """Per-component jets at a single point inside the domain box."""
    p = np.asarray(p, dtype=float)
    if p.shape != (smooth_map.domain_dim,):
        raise ValueError(f"point has shape {p.shape}, expected ({smooth_map.domain_dim},)")
    if not in_box(p, smooth_map.domain_box):
        raise DomainError(f"point {p.tolist()} lies outside the domain box")
    cache: dict = {}
    out = []
    for comp in smooth_map.components:
        j = jet2(comp, p[None, :], cache)
        out.append(Jet2(j.value[0], j.grad[0], j.hess[0]))
    return out
