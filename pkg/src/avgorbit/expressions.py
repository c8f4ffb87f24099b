"""A small expression language for time-dependent pendulum forcing terms.

Config files describe the forcing as text such as ``"sin(t)"`` or
``"0.3*theta + thetadot^2"``.  This module turns that text into an immutable
expression tree and evaluates it.

Grammar, lowest precedence first::

    sum     := product (("+" | "-") product)*
    product := unary (("*" | "/") unary)*
    unary   := "-" unary | power
    power   := atom ("^" unary)?          # right associative
    atom    := NUMBER | "pi" | "e" | "t" | "theta" | "thetadot"
             | FUNC "(" sum ")" | "(" sum ")"

``^`` binds tighter than unary minus, so ``-2^2`` is ``-(2^2)``.  There is no
unary plus and no implicit multiplication.  Evaluation is real-valued only:
domain faults (division by zero, log of a nonpositive value, fractional
powers of negative bases) raise instead of returning NaN or infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BinOp",
    "Call",
    "Const",
    "EvaluationFault",
    "Expr",
    "ExpressionError",
    "LexicalError",
    "Neg",
    "ParseError",
    "Var",
    "evaluate",
    "free_variables",
    "parse",
    "print_canonical",
]

VARIABLES = ("t", "theta", "thetadot")
CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs")

_FUNCTION_TABLE = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
    "abs": abs,
}


class ExpressionError(ValueError):
    """Base class for every failure this module reports."""


class LexicalError(ExpressionError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class ParseError(ExpressionError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


class EvaluationFault(ExpressionError):
    """A domain fault, reported with the offending subexpression."""

    def __init__(self, message: str, node: "Expr"):
        text = node.canonical()
        super().__init__(f"{message} in {text}")
        self.subexpression = text


class Expr:
    """Immutable expression tree node, callable as ``expr(t, theta, thetadot)``.

    The trailing arguments default to zero so an expression in ``t`` alone
    works directly as a coefficient function of time.
    """

    __slots__ = ()

    def __call__(self, t: float, theta: float = 0.0, thetadot: float = 0.0) -> float:
        return self.evaluate(t, theta, thetadot)

    def evaluate(self, t: float, theta: float, thetadot: float) -> float:
        raise NotImplementedError

    def canonical(self) -> str:
        """Fully parenthesized source text that reparses to an equivalent tree."""
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float

    def evaluate(self, t, theta, thetadot):
        return self.value

    def canonical(self):
        if float(self.value).is_integer() and abs(self.value) < 1e16:
            text = str(int(self.value))
        else:
            text = repr(float(self.value))
        # a negative literal reparses as a unary minus, which binds looser
        # than ^, so it needs its own parentheses
        return f"({text})" if self.value < 0 else text


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str

    def __post_init__(self):
        if self.name not in VARIABLES:
            raise ValueError(f"unknown variable {self.name!r}")

    def evaluate(self, t, theta, thetadot):
        if self.name == "t":
            return t
        if self.name == "theta":
            return theta
        return thetadot

    def canonical(self):
        return self.name


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    operand: Expr

    def evaluate(self, t, theta, thetadot):
        return -self.operand.evaluate(t, theta, thetadot)

    def canonical(self):
        return f"(-{self.operand.canonical()})"


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def __post_init__(self):
        if self.op not in ("+", "-", "*", "/", "^"):
            raise ValueError(f"unknown operator {self.op!r}")

    def evaluate(self, t, theta, thetadot):
        lhs = self.left.evaluate(t, theta, thetadot)
        rhs = self.right.evaluate(t, theta, thetadot)
        if self.op == "+":
            out = lhs + rhs
        elif self.op == "-":
            out = lhs - rhs
        elif self.op == "*":
            out = lhs * rhs
        elif self.op == "/":
            if rhs == 0.0:
                raise EvaluationFault("division by zero", self)
            out = lhs / rhs
        else:
            out = self._power(lhs, rhs)
        if not math.isfinite(out):
            raise EvaluationFault("non-finite result", self)
        return out

    def _power(self, base: float, exponent: float) -> float:
        if base < 0.0 and not float(exponent).is_integer():
            raise EvaluationFault("fractional power of a negative base", self)
        if base == 0.0 and exponent < 0.0:
            raise EvaluationFault("zero raised to a negative power", self)
        try:
            return base ** exponent
        except OverflowError:
            raise EvaluationFault("overflow", self) from None

    def canonical(self):
        return f"({self.left.canonical()} {self.op} {self.right.canonical()})"


@dataclass(frozen=True, slots=True)
class Call(Expr):
    func: str
    arg: Expr

    def __post_init__(self):
        if self.func not in FUNCTIONS:
            raise ValueError(f"unknown function {self.func!r}")

    def evaluate(self, t, theta, thetadot):
        x = self.arg.evaluate(t, theta, thetadot)
        if self.func == "log" and x <= 0.0:
            raise EvaluationFault("log of a nonpositive value", self)
        if self.func == "sqrt" and x < 0.0:
            raise EvaluationFault("square root of a negative value", self)
        try:
            out = _FUNCTION_TABLE[self.func](x)
        except ValueError:
            raise EvaluationFault(f"domain fault in {self.func}", self) from None
        except OverflowError:
            raise EvaluationFault("overflow", self) from None
        if not math.isfinite(out):
            raise EvaluationFault("non-finite result", self)
        return out

    def canonical(self):
        return f"{self.func}({self.arg.canonical()})"


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str  # "number", "ident", "op", "lparen", "rparen", "end"
    text: str
    offset: int
    value: float = 0.0


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
        elif ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            # exponent part only if digits actually follow, so "2*e" still lexes
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            text = source[start:i]
            tokens.append(_Token("number", text, start, float(text)))
        elif ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(_Token("ident", source[start:i], start))
        elif ch in "+-*/^":
            tokens.append(_Token("op", ch, i))
            i += 1
        elif ch == "(":
            tokens.append(_Token("lparen", ch, i))
            i += 1
        elif ch == ")":
            tokens.append(_Token("rparen", ch, i))
            i += 1
        else:
            raise LexicalError(f"unknown character {ch!r}", i)
    tokens.append(_Token("end", "", n))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    @property
    def _current(self) -> _Token:
        return self._tokens[self._pos]

    def _advance(self) -> _Token:
        tok = self._tokens[self._pos]
        self._pos += 1
        return tok

    def _fail(self, expected: str) -> None:
        tok = self._current
        shown = repr(tok.text) if tok.kind != "end" else "end of input"
        raise ParseError(f"expected {expected}, found {shown}", tok.offset)

    def parse(self) -> Expr:
        expr = self._sum()
        if self._current.kind != "end":
            self._fail("end of input")
        return expr

    def _sum(self) -> Expr:
        node = self._product()
        while self._current.kind == "op" and self._current.text in "+-":
            op = self._advance().text
            node = BinOp(op, node, self._product())
        return node

    def _product(self) -> Expr:
        node = self._unary()
        while self._current.kind == "op" and self._current.text in "*/":
            op = self._advance().text
            node = BinOp(op, node, self._unary())
        return node

    def _unary(self) -> Expr:
        if self._current.kind == "op" and self._current.text == "-":
            self._advance()
            return Neg(self._unary())
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        if self._current.kind == "op" and self._current.text == "^":
            self._advance()
            return BinOp("^", base, self._unary())
        return base

    def _atom(self) -> Expr:
        tok = self._current
        if tok.kind == "number":
            self._advance()
            return Const(tok.value)
        if tok.kind == "lparen":
            self._advance()
            inner = self._sum()
            if self._current.kind != "rparen":
                self._fail("')'")
            self._advance()
            return inner
        if tok.kind == "ident":
            self._advance()
            if tok.text in CONSTANTS:
                return Const(CONSTANTS[tok.text])
            if tok.text in VARIABLES:
                return Var(tok.text)
            if tok.text in FUNCTIONS:
                if self._current.kind != "lparen":
                    self._fail(f"'(' after {tok.text!r}")
                self._advance()
                arg = self._sum()
                if self._current.kind != "rparen":
                    self._fail("')'")
                self._advance()
                return Call(tok.text, arg)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.offset)
        self._fail("a value")


def parse(source: str) -> Expr:
    """Parse source text into an expression tree.

    Raises LexicalError or ParseError, each carrying the character offset.
    """
    return _Parser(_tokenize(source)).parse()


def evaluate(expr: Expr, t: float, theta: float = 0.0, thetadot: float = 0.0) -> float:
    return expr.evaluate(t, theta, thetadot)


def print_canonical(expr: Expr) -> str:
    return expr.canonical()


def free_variables(expr: Expr) -> frozenset[str]:
    """Names of the variables an expression actually reads."""
    if isinstance(expr, Var):
        return frozenset((expr.name,))
    if isinstance(expr, Neg):
        return free_variables(expr.operand)
    if isinstance(expr, BinOp):
        return free_variables(expr.left) | free_variables(expr.right)
    if isinstance(expr, Call):
        return free_variables(expr.arg)
    return frozenset()
