"""Recursive-descent parser and evaluator for scalar expressions in u, v, w.

Grammar (lowest to highest precedence)::

    expr    := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | '+' factor | power
    power   := primary ('^' factor)?          # right associative
    primary := NUMBER | NAME | NAME '(' expr ')' | '(' expr ')'
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Union

from .jets import BiJet2, EvaluationError, Jet3, _JetBase

VARIABLES = frozenset({"u", "v", "w"})
BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTIONS = ("sin", "cos", "tan", "exp", "log", "sqrt", "abs", "sign")


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class UnknownIdentifierError(ExprError):
    def __init__(self, name: str, offset: Optional[int] = None):
        where = "" if offset is None else f" at byte offset {offset}"
        super().__init__(f"unknown identifier {name!r}{where}")
        self.name = name
        self.offset = offset


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "neg" or a function name
    arg: "Node"


@dataclass(frozen=True)
class Binary:
    op: str  # one of + - * / ^
    left: "Node"
    right: "Node"


Node = Union[Num, Var, Const, Unary, Binary]


# --- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),]))"
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExprSyntaxError(f"unexpected character {text[start]!r}", _byte_offset(text, start))
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), _byte_offset(text, start)))
        pos = m.end()
    tokens.append(("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, constants: Optional[frozenset]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.constants = constants

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, off = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise ExprSyntaxError(f"expected {value!r}, found {found}", off)

    def parse(self) -> Node:
        node = self.expr()
        kind, val, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected token {val!r}", off)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = Binary(op, node, self.factor())
        return node

    def factor(self) -> Node:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return Unary("neg", self.factor())
        if kind == "op" and val == "+":
            self.take()
            return self.factor()
        return self.power()

    def power(self) -> Node:
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            return Binary("^", base, self.factor())
        return base

    def primary(self) -> Node:
        kind, val, off = self.take()
        if kind == "num":
            return Num(float(val))
        if kind == "name":
            if self.peek()[0] == "op" and self.peek()[1] == "(":
                if val not in FUNCTIONS:
                    raise UnknownIdentifierError(val, off)
                self.take()
                arg = self.expr()
                self.expect(")")
                return Unary(val, arg)
            if val in FUNCTIONS:
                raise ExprSyntaxError(f"function {val!r} needs an argument", off)
            if val in VARIABLES:
                return Var(val)
            if val in BUILTIN_CONSTANTS or self.constants is None or val in self.constants:
                return Const(val)
            raise UnknownIdentifierError(val, off)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(val)
        raise ExprSyntaxError(f"unexpected {found}", off)


# --- printing ----------------------------------------------------------------


def to_text(node: Node) -> str:
    if isinstance(node, Num):
        s = repr(node.value)
        return f"({s})" if node.value < 0 or s[0] in "-in" else s
    if isinstance(node, (Var, Const)):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            return f"(-{to_text(node.arg)})"
        return f"{node.op}({to_text(node.arg)})"
    return f"({to_text(node.left)} {node.op} {to_text(node.right)})"


# --- compilation ---------------------------------------------------------------

Env = Mapping[str, _JetBase]
_Compiled = Callable[[Env, Mapping[str, float], type], _JetBase]


def _compile(node: Node) -> _Compiled:
    if isinstance(node, Num):
        c = node.value
        return lambda env, consts, cls: cls.constant(c)
    if isinstance(node, Var):
        name = node.name

        def var(env, consts, cls):
            try:
                return env[name]
            except KeyError:
                raise EvaluationError("domain", f"variable {name!r} is not available here") from None

        return var
    if isinstance(node, Const):
        name = node.name

        def const(env, consts, cls):
            if name in consts:
                return cls.constant(float(consts[name]))
            if name in BUILTIN_CONSTANTS:
                return cls.constant(BUILTIN_CONSTANTS[name])
            raise UnknownIdentifierError(name)

        return const
    if isinstance(node, Unary):
        arg = _compile(node.arg)
        if node.op == "neg":
            return lambda env, consts, cls: -arg(env, consts, cls)
        method = node.op
        return lambda env, consts, cls: getattr(arg(env, consts, cls), method)()
    left, right = _compile(node.left), _compile(node.right)
    op = node.op
    if op == "+":
        return lambda env, consts, cls: left(env, consts, cls) + right(env, consts, cls)
    if op == "-":
        return lambda env, consts, cls: left(env, consts, cls) - right(env, consts, cls)
    if op == "*":
        return lambda env, consts, cls: left(env, consts, cls) * right(env, consts, cls)
    if op == "/":
        return lambda env, consts, cls: left(env, consts, cls) / right(env, consts, cls)
    return lambda env, consts, cls: left(env, consts, cls) ** right(env, consts, cls)


def _names(node: Node, kind: type) -> set:
    if isinstance(node, kind) and isinstance(node, (Var, Const)):
        return {node.name}
    if isinstance(node, Unary):
        return _names(node.arg, kind)
    if isinstance(node, Binary):
        return _names(node.left, kind) | _names(node.right, kind)
    return set()


class Expression:
    """Parsed expression: immutable AST plus a compiled evaluator."""

    __slots__ = ("root", "source", "variables", "constant_names", "_fn")

    def __init__(self, root: Node, source: Optional[str] = None):
        self.root = root
        self.source = source if source is not None else to_text(root)
        self.variables = frozenset(_names(root, Var))
        self.constant_names = frozenset(_names(root, Const)) - BUILTIN_CONSTANTS.keys()
        self._fn = _compile(root)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"

    def __str__(self) -> str:
        return to_text(self.root)

    def __eq__(self, other) -> bool:
        return isinstance(other, Expression) and self.root == other.root

    def __hash__(self) -> int:
        return hash(self.root)

    def evaluate_with(self, env: Env, consts: Mapping[str, float], cls: type) -> _JetBase:
        return self._fn(env, consts, cls).check_finite()


def parse(text: str, constants: Optional[Mapping[str, float]] = None) -> Expression:
    """Parse ``text``.  When ``constants`` is given, other free names are rejected."""
    if not text or not text.strip():
        raise ExprSyntaxError("empty expression", 0)
    names = None if constants is None else frozenset(constants)
    return Expression(_Parser(text, names).parse(), text)


def eval_jet3(e: Expression, u: float, bindings: Optional[Mapping[str, float]] = None) -> Jet3:
    """Value and first three u-derivatives of ``e`` at ``u``."""
    if e.variables - {"u"}:
        bad = sorted(e.variables - {"u"})
        raise EvaluationError("domain", f"expression depends on {bad}, only u is allowed")
    return e.evaluate_with({"u": Jet3.variable(float(u))}, bindings or {}, Jet3)


def eval_bijet2(
    e: Expression,
    u: float,
    v: float,
    w: Optional[BiJet2] = None,
    bindings: Optional[Mapping[str, float]] = None,
) -> BiJet2:
    """Value and (u, v)-partials up to order two; ``w`` is a precomputed jet."""
    env = {"u": BiJet2.variable_u(float(u)), "v": BiJet2.variable_v(float(v))}
    if w is not None:
        env["w"] = w
    return e.evaluate_with(env, bindings or {}, BiJet2)


class _Scalar(_JetBase):
    """Value-only stand-in used for plain evaluation."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = value

    @classmethod
    def constant(cls, c: float) -> "_Scalar":
        return cls(c)

    def derivatives(self):
        return ()

    def _chain(self, g0, g1, g2, g3=None):
        return _Scalar(g0)

    def __add__(self, o):
        return _Scalar(self.value + self._lift(o).value)

    def __sub__(self, o):
        return _Scalar(self.value - self._lift(o).value)

    def __mul__(self, o):
        return _Scalar(self.value * self._lift(o).value)

    def __neg__(self):
        return _Scalar(-self.value)


def evaluate(e: Expression, bindings: Optional[Mapping[str, float]] = None, **variables: float) -> float:
    """Plain float evaluation, with the same domain checks as the jet paths."""
    env = {k: _Scalar(float(x)) for k, x in variables.items()}
    return e.evaluate_with(env, bindings or {}, _Scalar).value
