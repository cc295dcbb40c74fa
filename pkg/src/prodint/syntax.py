"""AST of the analyzed language and small helpers over it.

Source positions are carried on every node but excluded from equality, so
two programs that differ only in layout compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

Pos = tuple[int, int]
NOPOS: Pos = (0, 0)

REL_OPS = ("<", "<=", ">", ">=", "=", "!=")
NEGATED = {"<": ">=", "<=": ">", ">": "<=", ">=": "<", "=": "!=", "!=": "="}
SWAPPED = {"<": ">", "<=": ">=", ">": "<", ">=": "<=", "=": "=", "!=": "!="}


@dataclass(frozen=True)
class Num:
    value: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str  # "arr.length" for the length of array arr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str  # "+" or "-"
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


Expr = Union[Num, Var, BinOp]


@dataclass(frozen=True)
class Rel:
    op: str
    left: Expr
    right: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class BoolVar:
    name: str
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class BoolConst:
    value: bool
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    cond: "Cond"
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


Cond = Union[Rel, BoolVar, BoolConst, Not]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class BoolAssign:
    target: str
    cond: Cond  # BoolConst for `true` / `false`
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Alloc:
    target: str
    length: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Store:
    array: str
    index: Expr
    value: Expr
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Cond
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: Cond
    body: tuple["Stmt", ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class For:
    init: Assign
    cond: Cond
    step: Assign
    body: tuple["Stmt", ...]
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Assert:
    cond: Cond
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


Stmt = Union[Assign, BoolAssign, Alloc, Store, If, While, For, Assert]


@dataclass(frozen=True)
class Input:
    name: str
    lo: int
    hi: int
    pos: Pos = field(default=NOPOS, compare=False, repr=False)


@dataclass(frozen=True)
class Program:
    decls: tuple[Input, ...] = ()
    body: tuple[Stmt, ...] = ()


def length_var(array: str) -> str:
    return f"{array}.length"


def negate(c: Cond) -> Cond:
    """Push one negation inward; relations flip their operator."""
    if isinstance(c, Not):
        return c.cond
    if isinstance(c, Rel):
        return Rel(NEGATED[c.op], c.left, c.right, c.pos)
    if isinstance(c, BoolConst):
        return BoolConst(not c.value, c.pos)
    return Not(c, c.pos)


def normalize(c: Cond) -> Cond:
    """Remove double negations and negated relations."""
    if isinstance(c, Not):
        inner = normalize(c.cond)
        if isinstance(inner, (Rel, BoolConst, Not)):
            return normalize(negate(inner))
        return Not(inner, c.pos)
    return c


def linear(e: Expr) -> tuple[str | None, int] | None:
    """Return ``(var, k)`` when ``e`` is ``var + k`` or the constant ``k``."""
    if isinstance(e, Num):
        return None, e.value
    if isinstance(e, Var):
        return e.name, 0
    if isinstance(e, BinOp):
        left, right = linear(e.left), linear(e.right)
        if left is None or right is None:
            return None
        if e.op == "+":
            if left[0] and right[0]:
                return None
            return left[0] or right[0], left[1] + right[1]
        if right[0] is not None:
            return None
        return left[0], left[1] - right[1]
    raise TypeError(f"not an expression: {e!r}")


def expr_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    return set()


def cond_vars(c: Cond) -> set[str]:
    if isinstance(c, Rel):
        return expr_vars(c.left) | expr_vars(c.right)
    if isinstance(c, BoolVar):
        return {c.name}
    if isinstance(c, Not):
        return cond_vars(c.cond)
    return set()


def eval_expr(e: Expr, store: dict) -> int:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return store[e.name]
    left, right = eval_expr(e.left, store), eval_expr(e.right, store)
    return left + right if e.op == "+" else left - right


_CMP = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def compare(op: str, a: int, b: int) -> bool:
    return _CMP[op](a, b)


def eval_cond(c: Cond, store: dict) -> bool:
    if isinstance(c, Rel):
        return compare(c.op, eval_expr(c.left, store), eval_expr(c.right, store))
    if isinstance(c, BoolVar):
        return bool(store[c.name])
    if isinstance(c, BoolConst):
        return c.value
    return not eval_cond(c.cond, store)


def show_expr(e: Expr) -> str:
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    return f"{show_expr(e.left)} {e.op} {show_expr(e.right)}"


def show_cond(c: Cond) -> str:
    if isinstance(c, Rel):
        return f"{show_expr(c.left)} {c.op} {show_expr(c.right)}"
    if isinstance(c, BoolVar):
        return c.name
    if isinstance(c, BoolConst):
        return "true" if c.value else "false"
    return f"!{show_cond(c.cond)}"
