"""Restricted expression language for dependency relationships.

The language is deliberately small: literals, arithmetic, comparisons,
boolean operators, field access rooted at named bindings (``source``,
``target``, ``item``), element selection (``[0]``, ``[*]``), and the
aggregates ``sum``/``avg``/``min``/``max``/``count``/``filter``. Strings
compare lexicographically, which gives correct ordering for ISO-8601
dates. There is no assignment, no loops, no attribute calls: evaluation
can only compute a value, and it stops once the step budget runs out.

``[*]`` fans out over a list; a later field access or arithmetic applies
per element. ``filter(xs, pred)`` and two-argument ``count`` evaluate
*pred* once per element with ``item`` bound to it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Callable

from .errors import ExprBudgetError, ExprParseError, ExprTypeError, ExprUnboundNameError

Value = Any
Deref = Callable[[str], dict | None]

AGGREGATES = ("sum", "avg", "min", "max", "count", "filter")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Name:
    name: str


@dataclass(frozen=True)
class Field:
    base: "Node"
    name: str


@dataclass(frozen=True)
class Element:
    base: "Node"
    index: int | None  # None means [*]


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


Node = Lit | Name | Field | Element | Call | Unary | Binary


def names_used(node: Node) -> set[str]:
    """Top-level binding names an expression reads."""
    if isinstance(node, Name):
        return {node.name}
    if isinstance(node, Field):
        return names_used(node.base)
    if isinstance(node, Element):
        return names_used(node.base)
    if isinstance(node, Call):
        out: set[str] = set()
        for a in node.args:
            out |= names_used(a)
        return out
    if isinstance(node, Unary):
        return names_used(node.operand)
    if isinstance(node, Binary):
        return names_used(node.left) | names_used(node.right)
    return set()


# ---------------------------------------------------------------------------
# lexer / parser

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+\.\d+|\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<string>\"[^\"]*\"|'[^']*')"
    r"|(?P<op>==|!=|<=|>=|\[\*\]|[-+*/<>()\[\].,])"
    r")"
)

_KEYWORDS = {"and", "or", "not", "true", "false", "null"}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens: list[tuple[str, str]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ExprParseError(f"bad character at offset {pos}: {text[pos:pos + 10]!r}")
            break
        if m.group("number"):
            tokens.append(("number", m.group("number")))
        elif m.group("name"):
            name = m.group("name")
            tokens.append(("keyword" if name in _KEYWORDS else "name", name))
        elif m.group("string"):
            tokens.append(("string", m.group("string")[1:-1]))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise ExprParseError(f"unexpected end of expression: {self.text!r}")
        self.pos += 1
        return tok

    def expect(self, value: str) -> None:
        tok = self.take()
        if tok != ("op", value):
            raise ExprParseError(f"expected {value!r}, got {tok[1]!r} in {self.text!r}")

    def at_op(self, *values: str) -> bool:
        tok = self.peek()
        return tok is not None and tok[0] == "op" and tok[1] in values

    def at_keyword(self, value: str) -> bool:
        tok = self.peek()
        return tok == ("keyword", value)

    # grammar, lowest precedence first

    def parse(self) -> Node:
        node = self.or_expr()
        if self.peek() is not None:
            raise ExprParseError(f"trailing input after expression: {self.text!r}")
        return node

    def or_expr(self) -> Node:
        node = self.and_expr()
        while self.at_keyword("or"):
            self.take()
            node = Binary("or", node, self.and_expr())
        return node

    def and_expr(self) -> Node:
        node = self.not_expr()
        while self.at_keyword("and"):
            self.take()
            node = Binary("and", node, self.not_expr())
        return node

    def not_expr(self) -> Node:
        if self.at_keyword("not"):
            self.take()
            return Unary("not", self.not_expr())
        return self.comparison()

    def comparison(self) -> Node:
        node = self.additive()
        if self.at_op("==", "!=", "<", "<=", ">", ">="):
            op = self.take()[1]
            node = Binary(op, node, self.additive())
        return node

    def additive(self) -> Node:
        node = self.multiplicative()
        while self.at_op("+", "-"):
            op = self.take()[1]
            node = Binary(op, node, self.multiplicative())
        return node

    def multiplicative(self) -> Node:
        node = self.unary()
        while self.at_op("*", "/"):
            op = self.take()[1]
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Node:
        if self.at_op("-"):
            self.take()
            return Unary("-", self.unary())
        return self.postfix()

    def postfix(self) -> Node:
        node = self.primary()
        while True:
            if self.at_op("."):
                self.take()
                tok = self.take()
                if tok[0] != "name":
                    raise ExprParseError(f"expected field name after '.', got {tok[1]!r}")
                node = Field(node, tok[1])
            elif self.at_op("[*]"):
                self.take()
                node = Element(node, None)
            elif self.at_op("["):
                self.take()
                tok = self.take()
                if tok[0] != "number" or "." in tok[1]:
                    raise ExprParseError(f"expected integer index, got {tok[1]!r}")
                node = Element(node, int(tok[1]))
                self.expect("]")
            else:
                return node

    def primary(self) -> Node:
        tok = self.take()
        kind, value = tok
        if kind == "number":
            return Lit(float(value) if "." in value else int(value))
        if kind == "string":
            return Lit(value)
        if kind == "keyword":
            if value == "true":
                return Lit(True)
            if value == "false":
                return Lit(False)
            if value == "null":
                return Lit(None)
            raise ExprParseError(f"unexpected keyword {value!r}")
        if kind == "name":
            if self.at_op("("):
                if value not in AGGREGATES:
                    raise ExprParseError(f"unknown function {value!r}")
                self.take()
                args: list[Node] = []
                if not self.at_op(")"):
                    args.append(self.or_expr())
                    while self.at_op(","):
                        self.take()
                        args.append(self.or_expr())
                self.expect(")")
                return Call(value, tuple(args))
            return Name(value)
        if tok == ("op", "("):
            node = self.or_expr()
            self.expect(")")
            return node
        raise ExprParseError(f"unexpected token {value!r} in {self.text!r}")


def parse_expression(text: str) -> Node:
    if not isinstance(text, str) or not text.strip():
        raise ExprParseError("empty expression")
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# evaluation


class _Each(list):
    """A list produced by [*]: later operations map over its elements."""


class _Budget:
    def __init__(self, max_steps: int):
        self.max_steps = max_steps
        self.steps = 0

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise ExprBudgetError(f"expression exceeded {self.max_steps} evaluation steps")


def _is_number(v: Value) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _field(value: Value, name: str, deref: Deref | None, budget: "_Budget") -> Value:
    if isinstance(value, _Each):
        out = _Each()
        for v in value:
            budget.tick()
            out.append(_field(v, name, deref, budget))
        return out
    if isinstance(value, str) and deref is not None:
        resolved = deref(value)
        if resolved is None:
            raise ExprTypeError(f"cannot resolve reference {value!r} for field {name!r}")
        value = resolved
    if value is None:
        return None
    if isinstance(value, dict):
        if name not in value:
            raise ExprTypeError(f"no field {name!r}")
        return value[name]
    raise ExprTypeError(f"cannot access field {name!r} on {type(value).__name__}")


def _numeric_items(values: list, context: str) -> list:
    out = []
    for v in values:
        if v is None:
            continue  # unset cells do not poison aggregates
        if not _is_number(v):
            raise ExprTypeError(f"{context} requires numbers, got {type(v).__name__}")
        out.append(v)
    return out


def _compare(op: str, left: Value, right: Value) -> bool:
    if op == "==":
        return left == right
    if op == "!=":
        return left != right
    both_numbers = _is_number(left) and _is_number(right)
    both_strings = isinstance(left, str) and isinstance(right, str)
    if not (both_numbers or both_strings):
        raise ExprTypeError(f"cannot order {type(left).__name__} and {type(right).__name__}")
    return {"<": left < right, "<=": left <= right, ">": left > right, ">=": left >= right}[op]


def _truthy(value: Value) -> bool:
    if isinstance(value, bool):
        return value
    raise ExprTypeError(f"condition must be boolean, got {type(value).__name__}")


def _eval(node: Node, env: dict[str, Value], budget: _Budget, deref: Deref | None) -> Value:
    budget.tick()
    if isinstance(node, Lit):
        return node.value
    if isinstance(node, Name):
        if node.name not in env:
            raise ExprUnboundNameError(f"unbound name {node.name!r}")
        return env[node.name]
    if isinstance(node, Field):
        return _field(_eval(node.base, env, budget, deref), node.name, deref, budget)
    if isinstance(node, Element):
        base = _eval(node.base, env, budget, deref)
        if not isinstance(base, list):
            raise ExprTypeError(f"cannot index into {type(base).__name__}")
        if node.index is None:
            for _ in base:
                budget.tick()
            return _Each(base)
        if not 0 <= node.index < len(base):
            raise ExprTypeError(f"index {node.index} out of range for array of {len(base)}")
        return base[node.index]
    if isinstance(node, Unary):
        if node.op == "not":
            return not _truthy(_eval(node.operand, env, budget, deref))
        operand = _eval(node.operand, env, budget, deref)
        if not _is_number(operand):
            raise ExprTypeError("unary '-' requires a number")
        return -operand
    if isinstance(node, Binary):
        if node.op in ("and", "or"):
            left = _truthy(_eval(node.left, env, budget, deref))
            if node.op == "and" and not left:
                return False
            if node.op == "or" and left:
                return True
            return _truthy(_eval(node.right, env, budget, deref))
        left = _eval(node.left, env, budget, deref)
        right = _eval(node.right, env, budget, deref)
        if node.op in ("==", "!=", "<", "<=", ">", ">="):
            return _compare(node.op, left, right)
        if isinstance(left, _Each) or isinstance(right, _Each):
            raise ExprTypeError("arithmetic over [*] selections is not defined; aggregate first")
        if node.op == "+" and isinstance(left, str) and isinstance(right, str):
            return left + right
        if not (_is_number(left) and _is_number(right)):
            raise ExprTypeError(f"'{node.op}' requires numbers")
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if right == 0:
            raise ExprTypeError("division by zero")
        return left / right
    if isinstance(node, Call):
        return _call(node, env, budget, deref)
    raise ExprTypeError(f"unknown node {node!r}")


def _call(node: Call, env: dict[str, Value], budget: _Budget, deref: Deref | None) -> Value:
    def array_arg(index: int) -> list:
        value = _eval(node.args[index], env, budget, deref)
        if not isinstance(value, list):
            raise ExprTypeError(f"{node.fn}() requires an array argument")
        for _ in value:
            budget.tick()  # aggregates cost one step per element
        return list(value)

    def filtered(values: list, pred: Node) -> list:
        out = []
        for item in values:
            scoped = dict(env)
            scoped["item"] = item
            if _truthy(_eval(pred, scoped, budget, deref)):
                out.append(item)
        return out

    if node.fn == "filter":
        if len(node.args) != 2:
            raise ExprParseError("filter(array, predicate) takes exactly two arguments")
        return filtered(array_arg(0), node.args[1])
    if node.fn == "count":
        if len(node.args) not in (1, 2):
            raise ExprParseError("count takes one array and an optional predicate")
        values = array_arg(0)
        if len(node.args) == 2:
            values = filtered(values, node.args[1])
        return len(values)
    if len(node.args) != 1:
        raise ExprParseError(f"{node.fn} takes exactly one array argument")
    values = _numeric_items(array_arg(0), node.fn)
    if node.fn == "sum":
        return sum(values) if values else 0
    if not values:
        return None
    if node.fn == "avg":
        return sum(values) / len(values)
    if node.fn == "min":
        return min(values)
    return max(values)


def evaluate_expression(
    expr: Node | str,
    bindings: dict[str, Value],
    max_steps: int = 10_000,
    deref: Deref | None = None,
    stats: dict | None = None,
) -> Value:
    """Evaluate *expr* against *bindings*.

    ``deref`` resolves object-id strings to instance values when a field is
    accessed through a pointer. ``stats``, when given, receives the step
    count under key ``steps``.
    """
    node = parse_expression(expr) if isinstance(expr, str) else expr
    budget = _Budget(max_steps)
    try:
        result = _eval(node, bindings, budget, deref)
        if isinstance(result, _Each):
            result = list(result)
        return result
    finally:
        if stats is not None:
            stats["steps"] = budget.steps
