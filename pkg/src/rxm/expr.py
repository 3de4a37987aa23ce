"""Expression AST and evaluator shared by guards, conditions, and predicates.

Expressions are dynamically typed over model values. Arithmetic is
integer-only (truncating division), comparisons require matching kinds,
and boolean connectives short-circuit. ``active(...)`` queries resolve
through the evaluation scope so the same AST works for same-machine and
cross-machine state tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Union

from .errors import EvalError
from .values import Value, kind_of, value_literal


@dataclass(frozen=True)
class Lit:
    value: Value


@dataclass(frozen=True)
class Name:
    ident: str


@dataclass(frozen=True)
class Attr:
    base: str
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # "!" | "-"
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # == != < <= > >= + - * / % && ||
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


@dataclass(frozen=True)
class ActiveQuery:
    path: tuple[str, ...]


Expr = Union[Lit, Name, Attr, Unary, Binary, Ternary, ActiveQuery]

COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
ARITH_OPS = ("+", "-", "*", "/", "%")
BOOL_OPS = ("&&", "||")


class Scope(Protocol):
    """Name resolution hooks supplied by each evaluation context."""

    def resolve_name(self, ident: str) -> Value: ...

    def resolve_attr(self, base: str, name: str) -> Value: ...

    def resolve_active(self, path: tuple[str, ...]) -> bool: ...


def _require_bool(v: Value, where: str) -> bool:
    if not isinstance(v, bool):
        raise EvalError(f"{where} expects bool, got {kind_of(v)}")
    return v


def _require_int(v: Value, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise EvalError(f"{where} expects int, got {kind_of(v)}")
    return v


def evaluate(expr: Expr, scope: Scope) -> Value:
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Name):
        return scope.resolve_name(expr.ident)
    if isinstance(expr, Attr):
        return scope.resolve_attr(expr.base, expr.name)
    if isinstance(expr, ActiveQuery):
        return scope.resolve_active(expr.path)
    if isinstance(expr, Unary):
        v = evaluate(expr.operand, scope)
        if expr.op == "!":
            return not _require_bool(v, "'!'")
        return -_require_int(v, "unary '-'")
    if isinstance(expr, Ternary):
        return (
            evaluate(expr.then, scope)
            if _require_bool(evaluate(expr.cond, scope), "'?:' condition")
            else evaluate(expr.other, scope)
        )
    if isinstance(expr, Binary):
        if expr.op in BOOL_OPS:
            left = _require_bool(evaluate(expr.left, scope), f"'{expr.op}'")
            if expr.op == "&&":
                return evaluate_bool(expr.right, scope) if left else False
            return True if left else evaluate_bool(expr.right, scope)
        left = evaluate(expr.left, scope)
        right = evaluate(expr.right, scope)
        if expr.op in ("==", "!="):
            if kind_of(left) != kind_of(right):
                raise EvalError(
                    f"cannot compare {kind_of(left)} with {kind_of(right)}"
                )
            eq = left == right
            return eq if expr.op == "==" else not eq
        if expr.op in COMPARE_OPS:
            li = _require_int(left, f"'{expr.op}'")
            ri = _require_int(right, f"'{expr.op}'")
            return {"<": li < ri, "<=": li <= ri, ">": li > ri, ">=": li >= ri}[expr.op]
        li = _require_int(left, f"'{expr.op}'")
        ri = _require_int(right, f"'{expr.op}'")
        if expr.op == "+":
            return li + ri
        if expr.op == "-":
            return li - ri
        if expr.op == "*":
            return li * ri
        if ri == 0:
            raise EvalError("division by zero")
        if expr.op == "/":
            return int(li / ri)  # truncate toward zero
        return li - int(li / ri) * ri
    raise EvalError(f"unknown expression node {expr!r}")


def evaluate_bool(expr: Expr, scope: Scope) -> bool:
    return _require_bool(evaluate(expr, scope), "condition")


def walk(expr: Expr):
    """Yield every node of the expression tree (pre-order)."""
    yield expr
    if isinstance(expr, Unary):
        yield from walk(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk(expr.left)
        yield from walk(expr.right)
    elif isinstance(expr, Ternary):
        yield from walk(expr.cond)
        yield from walk(expr.then)
        yield from walk(expr.other)


_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3,
    "!=": 3,
    "<": 4,
    "<=": 4,
    ">": 4,
    ">=": 4,
    "+": 5,
    "-": 5,
    "*": 6,
    "/": 6,
    "%": 6,
}


def to_source(expr: Expr, parent_prec: int = 0) -> str:
    """Render an expression back to canonical source text."""
    if isinstance(expr, Lit):
        return value_literal(expr.value)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, Attr):
        return f"{expr.base}.{expr.name}"
    if isinstance(expr, ActiveQuery):
        return f"active({'.'.join(expr.path)})"
    if isinstance(expr, Unary):
        return f"{expr.op}{to_source(expr.operand, 7)}"
    if isinstance(expr, Ternary):
        text = (
            f"{to_source(expr.cond, 1)} ? {to_source(expr.then)}"
            f" : {to_source(expr.other)}"
        )
        return f"({text})" if parent_prec > 0 else text
    if isinstance(expr, Binary):
        prec = _PRECEDENCE[expr.op]
        text = (
            f"{to_source(expr.left, prec)} {expr.op} {to_source(expr.right, prec + 1)}"
        )
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"unknown expression node {expr!r}")


class MapScope:
    """Simple scope over plain dicts; handy for predicates and tests."""

    def __init__(self, names=None, attrs=None, active=None):
        self._names = names or {}
        self._attrs = attrs or {}
        self._active = active or (lambda path: False)

    def resolve_name(self, ident: str) -> Value:
        try:
            return self._names[ident]
        except KeyError:
            raise EvalError(f"unknown name '{ident}'") from None

    def resolve_attr(self, base: str, name: str) -> Value:
        try:
            return self._attrs[(base, name)]
        except KeyError:
            raise EvalError(f"unknown attribute '{base}.{name}'") from None

    def resolve_active(self, path: tuple[str, ...]) -> bool:
        return self._active(path)


__all__ = [
    "Lit",
    "Name",
    "Attr",
    "Unary",
    "Binary",
    "Ternary",
    "ActiveQuery",
    "Expr",
    "Scope",
    "MapScope",
    "evaluate",
    "evaluate_bool",
    "walk",
    "to_source",
]
