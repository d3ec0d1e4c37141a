"""Scalar expression DSL: parser, canonical printer and second-order jets.

Grammar (lowest to highest precedence)::

    expr     := term (("+" | "-") term)*
    term     := unary (("*" | "/") unary)*
    unary    := "-" unary | power
    power    := atom ("^" exponent)?
    exponent := "-" exponent | atom ("^" exponent)?
    atom     := NUMBER | NAME | NAME "(" expr ")" | "(" expr ")"

``^`` binds tighter than unary minus (``-u^2`` is ``-(u^2)``) and is right
associative. Exponents must be variable free; they are folded to a float at
parse time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ArityError, DomainError, ParseError, UnknownIdentifierError

__all__ = [
    "Add",
    "Call",
    "Const",
    "Div",
    "Expression",
    "Jet2",
    "Mul",
    "Neg",
    "Pow",
    "Sub",
    "Var",
    "eval_jet2",
    "evaluate",
    "parse",
    "to_string",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "tanh")
CONSTANTS = {"pi": math.pi, "e": math.e}
RESERVED = frozenset(FUNCTIONS) | frozenset(CONSTANTS)


# ---------------------------------------------------------------------------
# Tree
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float
    name: str | None = None


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Sub:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Div:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: float


Node = Union[Const, Var, Neg, Call, Add, Sub, Mul, Div, Pow]


@dataclass(frozen=True)
class Expression:
    """A parsed expression together with its ordered variable list."""

    root: Node
    variables: tuple[str, ...]

    def __str__(self) -> str:
        return to_string(self.root)

    def evaluate(self, bindings: Sequence[float]) -> float:
        return evaluate(self, bindings)

    def jet(self, bindings: Sequence[float]) -> "Jet2":
        return eval_jet2(self, bindings)

    def free_variables(self) -> set[str]:
        return _free(self.root)


def _free(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Const):
        return set()
    if isinstance(node, (Neg,)):
        return _free(node.operand)
    if isinstance(node, Call):
        return _free(node.arg)
    if isinstance(node, Pow):
        return _free(node.base)
    return _free(node.left) | _free(node.right)


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "num", "name", "op", "end"
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind != "ws":
            tokens.append(Token(kind, m.group(), line, col))
        pos = m.end()
    tokens.append(Token("end", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_ATOM_START = ("number", "identifier", "'('", "'-'")


class _Parser:
    def __init__(self, source: str, variables: Sequence[str]):
        self.tokens = tokenize(source)
        self.pos = 0
        self.variables = set(variables)

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def fail(self, expected) -> ParseError:
        t = self.tok
        got = "end of input" if t.kind == "end" else repr(t.text)
        return ParseError(f"unexpected {got}", t.line, t.column, expected)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail({repr(text)})
        return self.advance()

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            raise self.fail({"'+'", "'-'", "'*'", "'/'", "'^'", "end of input"})
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            right = self.unary()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def unary(self) -> Node:
        if self.at("-"):
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        base = self.atom()
        if self.at("^"):
            self.advance()
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> float:
        start = self.tok
        sign = 1.0
        while self.at("-"):
            self.advance()
            sign = -sign
        node = self.atom()
        if _free(node):
            raise ParseError(
                "exponent must be a constant expression", start.line, start.column
            )
        try:
            value = evaluate(Expression(node, ()), ())
            if self.at("^"):
                self.advance()
                inner = self.exponent()
                _check_pow_base(value, inner, node)
                value = _fin(value**inner, node)
        except (DomainError, OverflowError) as exc:
            raise ParseError(f"invalid constant exponent: {exc}", start.line, start.column) from None
        return sign * value

    def atom(self) -> Node:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Const(float(t.text))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                nargs = 1
                while self.at(","):
                    self.advance()
                    self.expr()
                    nargs += 1
                if nargs != 1:
                    raise ArityError(t.text, nargs, t.line, t.column)
                self.expect(")")
                return Call(t.text, arg)
            if self.at("("):
                if t.text in self.variables or t.text in CONSTANTS:
                    raise ParseError(f"{t.text!r} is not a function", t.line, t.column)
                raise UnknownIdentifierError(t.text, t.line, t.column)
            if t.text in CONSTANTS:
                return Const(CONSTANTS[t.text], t.text)
            if t.text in self.variables:
                return Var(t.text)
            raise UnknownIdentifierError(t.text, t.line, t.column)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        raise self.fail(_ATOM_START)


def parse(source: str, variables: Sequence[str]) -> Expression:
    """Parse ``source`` over the declared ``variables``.

    Raises ParseError (syntax), UnknownIdentifierError or ArityError.
    """
    variables = tuple(variables)
    if len(set(variables)) != len(variables):
        raise ValueError(f"duplicate variable names in {variables}")
    clash = RESERVED.intersection(variables)
    if clash:
        raise ValueError(f"reserved names cannot be variables: {sorted(clash)}")
    return Expression(_Parser(source, variables).parse(), variables)


# ---------------------------------------------------------------------------
# Canonical printer
# ---------------------------------------------------------------------------


def _prec(node: Node) -> int:
    if isinstance(node, (Add, Sub)):
        return 1
    if isinstance(node, (Mul, Div)):
        return 2
    if isinstance(node, Neg):
        return 3
    if isinstance(node, Pow):
        return 4
    if isinstance(node, Const) and node.name is None and node.value < 0:
        return 0
    return 5


def _number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def to_string(node: Node) -> str:
    """Canonical text with the minimum parentheses needed to re-parse."""
    if isinstance(node, Expression):
        node = node.root
    if isinstance(node, Const):
        return node.name or _number(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({to_string(node.arg)})"
    if isinstance(node, Neg):
        inner = to_string(node.operand)
        return "-" + (inner if _prec(node.operand) >= 3 else f"({inner})")
    if isinstance(node, Pow):
        base = to_string(node.base)
        if _prec(node.base) < 5:
            base = f"({base})"
        p = _number(node.exponent)
        return f"{base}^{p}" if node.exponent >= 0 else f"{base}^({p})"
    level = _prec(node)
    left, right = to_string(node.left), to_string(node.right)
    if _prec(node.left) < level:
        left = f"({left})"
    if _prec(node.right) <= level:
        right = f"({right})"
    sym = {Add: " + ", Sub: " - ", Mul: "*", Div: "/"}[type(node)]
    return left + sym + right


# ---------------------------------------------------------------------------
# Plain float evaluation
# ---------------------------------------------------------------------------


def _check_pow_base(base: float, p: float, node) -> None:
    if not float(p).is_integer() and base <= 0:
        raise DomainError(to_string(node), base, "non-integer power of non-positive base")
    if p < 0 and base == 0:
        raise DomainError(to_string(node), base, "negative power of zero")


def _check_call(func: str, a: float, node) -> None:
    if func == "log" and a <= 0:
        raise DomainError(to_string(node), a, "log of non-positive value")
    if func == "sqrt" and a <= 0:
        # sqrt(0) has no finite derivative; refuse it on both paths
        raise DomainError(to_string(node), a, "sqrt of non-positive value")
    if func == "tan" and math.cos(a) == 0.0:
        raise DomainError(to_string(node), a, "tan at a pole")


def _fin(x: float, node) -> float:
    if not math.isfinite(x):
        raise DomainError(to_string(node), x, "non-finite result")
    return x


def _eval(node: Node, env: dict) -> float:
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return env[node.name]
    if isinstance(node, Neg):
        return -_eval(node.operand, env)
    if isinstance(node, Add):
        return _eval(node.left, env) + _eval(node.right, env)
    if isinstance(node, Sub):
        return _eval(node.left, env) - _eval(node.right, env)
    if isinstance(node, Mul):
        return _fin(_eval(node.left, env) * _eval(node.right, env), node)
    if isinstance(node, Div):
        num, den = _eval(node.left, env), _eval(node.right, env)
        if den == 0:
            raise DomainError(to_string(node), den, "division by zero")
        return _fin(num / den, node)
    if isinstance(node, Pow):
        b = _eval(node.base, env)
        _check_pow_base(b, node.exponent, node)
        try:
            return _fin(b**node.exponent, node)
        except OverflowError:
            raise DomainError(to_string(node), b, "overflow") from None
    if isinstance(node, Call):
        a = _eval(node.arg, env)
        _check_call(node.func, a, node)
        try:
            return _fin(getattr(math, node.func)(a), node)
        except OverflowError:
            raise DomainError(to_string(node), a, "overflow") from None
    raise TypeError(f"not an expression node: {node!r}")


def evaluate(expr: Expression, bindings: Sequence[float]) -> float:
    """Value of ``expr`` at ``bindings`` (no derivatives)."""
    if len(bindings) != len(expr.variables):
        raise ValueError(
            f"expected {len(expr.variables)} bindings, got {len(bindings)}"
        )
    return _eval(expr.root, dict(zip(expr.variables, map(float, bindings))))


# ---------------------------------------------------------------------------
# Second-order jets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet2:
    """Value, gradient and Hessian of a scalar at a point.

    All arithmetic keeps the Hessian exactly symmetric: cross terms always
    appear as ``outer(a, b) + outer(b, a)`` which is symmetric in floating
    point because addition commutes.
    """

    value: float
    gradient: np.ndarray
    hessian: np.ndarray

    @classmethod
    def constant(cls, value: float, n: int) -> "Jet2":
        return cls(float(value), np.zeros(n), np.zeros((n, n)))

    @classmethod
    def variable(cls, value: float, index: int, n: int) -> "Jet2":
        g = np.zeros(n)
        g[index] = 1.0
        return cls(float(value), g, np.zeros((n, n)))

    def __neg__(self) -> "Jet2":
        return Jet2(-self.value, -self.gradient, -self.hessian)

    def __add__(self, other: "Jet2") -> "Jet2":
        return Jet2(
            self.value + other.value,
            self.gradient + other.gradient,
            self.hessian + other.hessian,
        )

    def __sub__(self, other: "Jet2") -> "Jet2":
        return Jet2(
            self.value - other.value,
            self.gradient - other.gradient,
            self.hessian - other.hessian,
        )

    def __mul__(self, other: "Jet2") -> "Jet2":
        a, b = self, other
        cross = np.outer(a.gradient, b.gradient)
        return Jet2(
            a.value * b.value,
            a.gradient * b.value + b.gradient * a.value,
            a.hessian * b.value + b.hessian * a.value + (cross + cross.T),
        )

    def chain(self, f0: float, f1: float, f2: float) -> "Jet2":
        """Compose with a scalar function with value/derivatives f0, f1, f2."""
        g = self.gradient
        return Jet2(f0, f1 * g, f1 * self.hessian + f2 * np.outer(g, g))


def _unary_derivs(func: str, a: float) -> tuple[float, float, float]:
    if func == "sin":
        s, c = math.sin(a), math.cos(a)
        return s, c, -s
    if func == "cos":
        s, c = math.sin(a), math.cos(a)
        return c, -s, -c
    if func == "tan":
        t = math.tan(a)
        sec2 = 1.0 + t * t
        return t, sec2, 2.0 * t * sec2
    if func == "exp":
        v = math.exp(a)
        return v, v, v
    if func == "log":
        return math.log(a), 1.0 / a, -1.0 / (a * a)
    if func == "sqrt":
        r = math.sqrt(a)
        return r, 0.5 / r, -0.25 / (r * a)
    if func == "sinh":
        s, c = math.sinh(a), math.cosh(a)
        return s, c, s
    if func == "cosh":
        s, c = math.sinh(a), math.cosh(a)
        return c, s, c
    if func == "tanh":
        t = math.tanh(a)
        d = 1.0 - t * t
        return t, d, -2.0 * t * d
    raise ValueError(f"unknown function {func!r}")


def _ipow(b: float, q: float) -> float:
    return 1.0 if q == 0 else b**q


def _jet(node: Node, env: dict, n: int) -> Jet2:
    if isinstance(node, Const):
        return Jet2.constant(node.value, n)
    if isinstance(node, Var):
        value, index = env[node.name]
        return Jet2.variable(value, index, n)
    if isinstance(node, Neg):
        return -_jet(node.operand, env, n)
    if isinstance(node, Add):
        return _jet(node.left, env, n) + _jet(node.right, env, n)
    if isinstance(node, Sub):
        return _jet(node.left, env, n) - _jet(node.right, env, n)
    if isinstance(node, Mul):
        out = _jet(node.left, env, n) * _jet(node.right, env, n)
        _fin(out.value, node)
        return out
    if isinstance(node, Div):
        den = _jet(node.right, env, n)
        b = den.value
        if b == 0:
            raise DomainError(to_string(node), b, "division by zero")
        inv = 1.0 / b
        out = _jet(node.left, env, n) * den.chain(inv, -inv * inv, 2.0 * inv * inv * inv)
        _fin(out.value, node)
        return out
    if isinstance(node, Pow):
        base = _jet(node.base, env, n)
        b, p = base.value, node.exponent
        _check_pow_base(b, p, node)
        try:
            f0 = _ipow(b, p)
            f1 = 0.0 if p == 0 else p * _ipow(b, p - 1)
            f2 = 0.0 if p in (0.0, 1.0) else p * (p - 1) * _ipow(b, p - 2)
        except (OverflowError, ZeroDivisionError):
            raise DomainError(to_string(node), b, "power out of range") from None
        _fin(f0, node)
        return base.chain(f0, f1, f2)
    if isinstance(node, Call):
        arg = _jet(node.arg, env, n)
        _check_call(node.func, arg.value, node)
        try:
            f0, f1, f2 = _unary_derivs(node.func, arg.value)
        except OverflowError:
            raise DomainError(to_string(node), arg.value, "overflow") from None
        _fin(f0, node)
        return arg.chain(f0, f1, f2)
    raise TypeError(f"not an expression node: {node!r}")


def eval_jet2(expr: Expression, bindings: Sequence[float]) -> Jet2:
    """Value, gradient and Hessian of ``expr`` by forward-mode jet arithmetic."""
    n = len(expr.variables)
    if len(bindings) != n:
        raise ValueError(f"expected {n} bindings, got {len(bindings)}")
    env = {name: (float(x), i) for i, (name, x) in enumerate(zip(expr.variables, bindings))}
    return _jet(expr.root, env, n)
