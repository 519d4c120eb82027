"""Tiny scalar expression language for weight factors and nonlinearities.

Grammar (standard precedence, tightest first):

    power   :  unary ^ power            (right associative)
    unary   :  - unary | atom
    term    :  power (('*'|'/') power)*
    sum     :  term (('+'|'-') term)*
    atom    :  number | variable | func '(' sum ')' | '(' sum ')'
            |  piecewise '(' branch (',' branch)* ')'
    branch  :  '(' condition ',' sum ')'
    cond    :  sum cmp sum | 'else'     (cmp in <, <=, >, >=, ==)

Exactly one free variable is allowed per expression (``t`` for weights,
``u`` for nonlinearities); any other identifier is rejected at parse time.
Every ``piecewise`` must end with an ``else`` branch.  Evaluation is plain
IEEE double arithmetic; domain problems (division by zero, log of a
nonpositive number, fractional power of a negative base, overflow) raise
``ExprDomainError`` naming the offending subexpression, never crash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Expr",
    "ExprError",
    "ExprSyntaxError",
    "UnknownIdentifierError",
    "ExprDomainError",
    "parse",
    "to_source",
]

FUNCTIONS = ("sin", "cos", "sinh", "cosh", "sqrt", "abs", "exp", "log")
_COMPARATORS = ("<=", ">=", "==", "<", ">")
# each grammar level spends ~5 interpreter frames; stay well under Python's
# default 1000-frame recursion limit
_MAX_DEPTH = 100


class ExprError(ValueError):
    """Base class for all structured expression errors."""


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ExprDomainError(ExprError):
    """Evaluation fell outside a function's domain."""


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


class Expr:
    """Immutable expression node; subclasses implement _eval/_eval_np."""

    __slots__ = ()

    def eval(self, x: float) -> float:
        """Evaluate at a scalar point."""
        return self._eval(float(x))

    def eval_array(self, x: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; same domain rules as the scalar path."""
        x = np.asarray(x, dtype=float)
        return self._eval_np(x)

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self.eval(float(x))
        return self.eval_array(x)

    def __str__(self) -> str:
        return to_source(self)

    def _eval(self, x: float) -> float:  # pragma: no cover - abstract
        raise NotImplementedError

    def _eval_np(self, x: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


@dataclass(frozen=True, slots=True)
class Num(Expr):
    value: float

    def _eval(self, x):
        return self.value

    def _eval_np(self, x):
        return np.full(x.shape, self.value)


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str

    def _eval(self, x):
        return x

    def _eval_np(self, x):
        return x.copy()


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    operand: Expr

    def _eval(self, x):
        return -self.operand._eval(x)

    def _eval_np(self, x):
        return -self.operand._eval_np(x)


@dataclass(frozen=True, slots=True)
class Bin(Expr):
    op: str  # one of + - * / ^
    lhs: Expr
    rhs: Expr

    def _eval(self, x):
        a = self.lhs._eval(x)
        b = self.rhs._eval(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            if b == 0.0:
                raise ExprDomainError(f"division by zero in '{self}' at x={x!r}")
            return a / b
        return _power(a, b, self, x)

    def _eval_np(self, x):
        a = self.lhs._eval_np(x)
        b = self.rhs._eval_np(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            bad = b == 0.0
            if bad.any():
                raise ExprDomainError(
                    f"division by zero in '{self}' at x={x[bad][0]!r}"
                )
            return a / b
        return _power_np(a, b, self, x)


@dataclass(frozen=True, slots=True)
class Call(Expr):
    func: str
    arg: Expr

    def _eval(self, x):
        v = self.arg._eval(x)
        try:
            if self.func == "sqrt":
                if v < 0.0:
                    raise ValueError
                return math.sqrt(v)
            if self.func == "log":
                if v <= 0.0:
                    raise ValueError
                return math.log(v)
            if self.func == "abs":
                return abs(v)
            return getattr(math, self.func)(v)
        except (ValueError, OverflowError) as exc:
            raise ExprDomainError(
                f"{self.func} undefined or overflowing in '{self}' at x={x!r}"
            ) from exc

    def _eval_np(self, x):
        v = self.arg._eval_np(x)
        if self.func == "sqrt" and (v < 0.0).any():
            raise ExprDomainError(f"sqrt of negative value in '{self}'")
        if self.func == "log" and (v <= 0.0).any():
            raise ExprDomainError(f"log of nonpositive value in '{self}'")
        fn = np.abs if self.func == "abs" else getattr(np, self.func)
        with np.errstate(over="ignore", invalid="ignore"):
            out = fn(v)
        _check_finite(out, v, self)
        return out


@dataclass(frozen=True, slots=True)
class Cond(Expr):
    op: str  # comparator
    lhs: Expr
    rhs: Expr

    def test(self, x: float) -> bool:
        a = self.lhs._eval(x)
        b = self.rhs._eval(x)
        if self.op == "<":
            return a < b
        if self.op == "<=":
            return a <= b
        if self.op == ">":
            return a > b
        if self.op == ">=":
            return a >= b
        return a == b

    def test_np(self, x: np.ndarray) -> np.ndarray:
        a = self.lhs._eval_np(x)
        b = self.rhs._eval_np(x)
        if self.op == "<":
            return a < b
        if self.op == "<=":
            return a <= b
        if self.op == ">":
            return a > b
        if self.op == ">=":
            return a >= b
        return a == b

    def _eval(self, x):  # conditions are not standalone values
        raise ExprDomainError("comparison used as a value")

    def _eval_np(self, x):
        raise ExprDomainError("comparison used as a value")


@dataclass(frozen=True, slots=True)
class Piecewise(Expr):
    # branches: ((cond, expr), ..., (None, expr)); trailing None is the else
    branches: tuple

    def _eval(self, x):
        for cond, expr in self.branches:
            if cond is None or cond.test(x):
                return expr._eval(x)
        raise ExprDomainError("piecewise fell through")  # unreachable

    def _eval_np(self, x):
        out = np.empty(x.shape)
        remaining = np.ones(x.shape, dtype=bool)
        for cond, expr in self.branches:
            active = remaining if cond is None else (remaining & cond.test_np(x))
            if active.any():
                out[active] = expr._eval_np(x[active])
            remaining = remaining & ~active
        return out


def _power(a: float, b: float, node: Expr, x) -> float:
    if float(b).is_integer():
        if a == 0.0 and b < 0.0:
            raise ExprDomainError(f"zero raised to negative power in '{node}' at x={x!r}")
        try:
            return math.pow(a, b)
        except OverflowError as exc:
            raise ExprDomainError(f"overflow in '{node}' at x={x!r}") from exc
    if a < 0.0:
        raise ExprDomainError(
            f"negative base with fractional exponent in '{node}' at x={x!r}"
        )
    if a == 0.0:
        if b < 0.0:
            raise ExprDomainError(f"zero raised to negative power in '{node}' at x={x!r}")
        return 0.0
    try:
        return math.exp(b * math.log(a))
    except OverflowError as exc:
        raise ExprDomainError(f"overflow in '{node}' at x={x!r}") from exc


def _power_np(a: np.ndarray, b: np.ndarray, node: Expr, x: np.ndarray) -> np.ndarray:
    int_exp = np.mod(b, 1.0) == 0.0
    bad = ((a < 0.0) & ~int_exp) | ((a == 0.0) & (b < 0.0))
    if bad.any():
        raise ExprDomainError(
            f"invalid base/exponent pair in '{node}' at x={x[bad][0]!r}"
        )
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        out = np.power(a, b)
    _check_finite(out, a, node)
    return out


def _check_finite(out: np.ndarray, inp: np.ndarray, node: Expr) -> None:
    bad = ~np.isfinite(out) & np.isfinite(inp)
    if bad.any():
        raise ExprDomainError(f"overflow or invalid value in '{node}'")


# ---------------------------------------------------------------------------
# Tokenizer / parser
# ---------------------------------------------------------------------------

_NUM_START = set("0123456789.")
_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")


class _Parser:
    def __init__(self, src: str, variable: str):
        if not isinstance(src, str):
            raise ExprSyntaxError("expression source must be text", 0)
        self.src = src
        self.n = len(src)
        self.i = 0
        self.variable = variable
        self.depth = 0

    # -- lexing helpers ----------------------------------------------------
    def _skip_ws(self):
        while self.i < self.n and self.src[self.i] in " \t\r\n":
            self.i += 1

    def _peek(self) -> str:
        return self.src[self.i] if self.i < self.n else ""

    def _match(self, lit: str) -> bool:
        self._skip_ws()
        if self.src.startswith(lit, self.i):
            self.i += len(lit)
            return True
        return False

    def _expect(self, lit: str):
        if not self._match(lit):
            raise ExprSyntaxError(f"expected '{lit}'", self.i)

    def _ident(self) -> str | None:
        self._skip_ws()
        if self._peek() not in _IDENT_START:
            return None
        start = self.i
        while self.i < self.n and self.src[self.i] in _IDENT_CONT:
            self.i += 1
        return self.src[start:self.i]

    def _number(self) -> float:
        start = self.i
        while self.i < self.n and self.src[self.i] in _NUM_START:
            self.i += 1
        if self.i < self.n and self.src[self.i] in "eE":
            j = self.i + 1
            if j < self.n and self.src[j] in "+-":
                j += 1
            if j < self.n and self.src[j].isdigit():
                self.i = j
                while self.i < self.n and self.src[self.i].isdigit():
                    self.i += 1
        text = self.src[start:self.i]
        try:
            return float(text)
        except ValueError:
            raise ExprSyntaxError(f"bad number literal '{text}'", start) from None

    # -- grammar -----------------------------------------------------------
    def parse(self) -> Expr:
        expr = self._sum()
        self._skip_ws()
        if self.i < self.n:
            raise ExprSyntaxError(
                f"unexpected character {self.src[self.i]!r}", self.i
            )
        return expr

    def _enter(self):
        self.depth += 1
        if self.depth > _MAX_DEPTH:
            raise ExprSyntaxError("expression too deeply nested", self.i)

    def _sum(self) -> Expr:
        self._enter()
        try:
            node = self._term()
            while True:
                self._skip_ws()
                c = self._peek()
                if c == "+":
                    self.i += 1
                    node = Bin("+", node, self._term())
                elif c == "-":
                    self.i += 1
                    node = Bin("-", node, self._term())
                else:
                    return node
        finally:
            self.depth -= 1

    def _term(self) -> Expr:
        node = self._unary()
        while True:
            self._skip_ws()
            c = self._peek()
            if c == "*":
                self.i += 1
                node = Bin("*", node, self._unary())
            elif c == "/":
                self.i += 1
                node = Bin("/", node, self._unary())
            else:
                return node

    def _unary(self) -> Expr:
        self._skip_ws()
        if self._peek() == "-":
            self.i += 1
            self._enter()
            try:
                return Neg(self._unary())
            finally:
                self.depth -= 1
        return self._power()

    def _power(self) -> Expr:
        base = self._atom()
        self._skip_ws()
        if self._peek() == "^":
            self.i += 1
            self._enter()
            try:
                # right associative; the exponent binds a unary minus: 2^-3
                return Bin("^", base, self._unary())
            finally:
                self.depth -= 1
        return base

    def _atom(self) -> Expr:
        self._skip_ws()
        c = self._peek()
        if c == "":
            raise ExprSyntaxError("unexpected end of input", self.i)
        if c == "(":
            self.i += 1
            node = self._sum()
            self._expect(")")
            return node
        if c in _NUM_START:
            return Num(self._number())
        name = self._ident()
        if name is None:
            raise ExprSyntaxError(f"unexpected character {c!r}", self.i)
        if name == "piecewise":
            return self._piecewise()
        if name in FUNCTIONS:
            self._expect("(")
            arg = self._sum()
            self._expect(")")
            return Call(name, arg)
        if name == self.variable:
            return Var(name)
        raise UnknownIdentifierError(
            f"unknown identifier '{name}' (free variable is '{self.variable}')",
            self.i - len(name),
        )

    def _piecewise(self) -> Expr:
        self._expect("(")
        branches = []
        saw_else = False
        while True:
            self._expect("(")
            self._skip_ws()
            mark = self.i
            name = self._ident()
            if name == "else":
                cond = None
                saw_else = True
            else:
                self.i = mark  # not 'else': re-parse as a comparison
                cond = self._condition()
            self._expect(",")
            value = self._sum()
            self._expect(")")
            branches.append((cond, value))
            if self._match(","):
                if saw_else:
                    raise ExprSyntaxError("branch after else", self.i)
                continue
            break
        self._expect(")")
        if not saw_else:
            raise ExprSyntaxError("piecewise requires a final else branch", self.i)
        return Piecewise(tuple(branches))

    def _condition(self) -> Cond:
        lhs = self._sum()
        self._skip_ws()
        for op in _COMPARATORS:
            if self.src.startswith(op, self.i):
                self.i += len(op)
                return Cond(op, lhs, self._sum())
        raise ExprSyntaxError("expected a comparison operator", self.i)


def parse(src: str, variable: str = "u") -> Expr:
    """Parse ``src`` into an Expr whose single free variable is ``variable``."""
    return _Parser(src, variable).parse()


# ---------------------------------------------------------------------------
# Pretty printing (canonical form: to_source . parse is a fixed point)
# ---------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "neg": 3, "^": 4}


def to_source(e: Expr) -> str:
    return _render(e, 0)


def _render(e: Expr, parent_prec: int) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({_render(e.arg, 0)})"
    if isinstance(e, Neg):
        text = f"-{_render(e.operand, _PREC['neg'])}"
        return f"({text})" if parent_prec > _PREC["neg"] else text
    if isinstance(e, Bin):
        prec = _PREC[e.op]
        # left-assoc ops parenthesize an equal-precedence right child
        lhs = _render(e.lhs, prec if e.op != "^" else prec + 1)
        rhs = _render(e.rhs, prec + 1 if e.op != "^" else prec)
        text = f"{lhs} {e.op} {rhs}" if e.op in "+-*/" else f"{lhs}{e.op}{rhs}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(e, Cond):
        return f"{_render(e.lhs, 0)} {e.op} {_render(e.rhs, 0)}"
    if isinstance(e, Piecewise):
        parts = []
        for cond, val in e.branches:
            label = "else" if cond is None else _render(cond, 0)
            parts.append(f"({label}, {_render(val, 0)})")
        return "piecewise(" + ", ".join(parts) + ")"
    raise TypeError(f"not an Expr: {e!r}")
