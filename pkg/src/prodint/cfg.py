"""Control-flow graphs with array-bounds and assertion proof obligations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .syntax import (
    Alloc,
    Assert,
    Assign,
    BoolAssign,
    Cond,
    For,
    If,
    Input,
    Num,
    Program,
    Rel,
    Stmt,
    Store,
    Var,
    While,
    length_var,
    negate,
    show_cond,
    show_expr,
)

Atomic = Union[Assign, BoolAssign, Alloc, Store]


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: str  # "stmt", "guard", "assert" or "skip"
    payload: Atomic | Cond | None = None
    line: int = field(default=0, compare=False)

    def label(self) -> str:
        if self.kind == "skip":
            return "skip"
        if self.kind in ("guard", "assert"):
            return f"{self.kind}({show_cond(self.payload)})"
        s = self.payload
        if isinstance(s, Assign):
            return f"{s.target} := {show_expr(s.expr)}"
        if isinstance(s, BoolAssign):
            return f"{s.target} := ({show_cond(s.cond)})"
        if isinstance(s, Alloc):
            return f"{s.target} := new Int[{show_expr(s.length)}]"
        return f"{s.array}[{show_expr(s.index)}] := {show_expr(s.value)}"


@dataclass(frozen=True)
class Obligation:
    node: int
    line: int
    col: int
    kind: str  # "lower", "upper" or "assert"
    cond: Cond

    def describe(self) -> str:
        return f"{self.line}:{self.col} {self.kind} {show_cond(self.cond)}"


@dataclass
class CFG:
    inputs: tuple[Input, ...]
    nodes: list[int]
    edges: list[Edge]
    entry: int
    exit: int
    loop_heads: frozenset[int]
    obligations: list[Obligation]
    before: dict[int, int]  # line -> node where the first statement on that line starts
    after: dict[int, int]  # line -> node reached once the last atomic statement on it ran
    heads_by_line: dict[int, int]

    def succ(self, n: int) -> list[Edge]:
        return [e for e in self.edges if e.src == n]

    def pred(self, n: int) -> list[Edge]:
        return [e for e in self.edges if e.dst == n]

    def rpo(self) -> list[int]:
        """Reverse post-order from the entry; unreachable nodes follow in index order."""
        seen: set[int] = set()
        order: list[int] = []
        out = {n: [e.dst for e in self.succ(n)] for n in self.nodes}

        stack = [(self.entry, iter(out[self.entry]))]
        seen.add(self.entry)
        while stack:
            n, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                stack.pop()
                order.append(n)
            elif nxt not in seen:
                seen.add(nxt)
                stack.append((nxt, iter(out[nxt])))
        order.reverse()
        return order + [n for n in self.nodes if n not in seen]

    def point_after(self, line: int) -> int:
        return self.after[line]

    def point_before(self, line: int) -> int:
        return self.before[line]

    def loop_head(self, line: int) -> int:
        return self.heads_by_line[line]

    def structure(self) -> tuple:
        """Shape of the graph without source positions."""
        return (
            tuple(self.nodes),
            tuple(self.edges),
            self.entry,
            self.exit,
            self.loop_heads,
            tuple((o.node, o.kind, o.cond) for o in self.obligations),
        )


class _Builder:
    def __init__(self) -> None:
        self.count = 0
        self.edges: list[Edge] = []
        self.heads: set[int] = set()
        self.obligations: list[Obligation] = []
        self.before: dict[int, int] = {}
        self.after: dict[int, int] = {}
        self.heads_by_line: dict[int, int] = {}

    def node(self) -> int:
        self.count += 1
        return self.count - 1

    def edge(self, src: int, dst: int, kind: str, payload=None, line: int = 0) -> None:
        self.edges.append(Edge(src, dst, kind, payload, line))

    def block(self, stmts, cur: int) -> int:
        for s in stmts:
            cur = self.stmt(s, cur)
        return cur

    def stmt(self, s: Stmt, cur: int) -> int:
        line, col = s.pos
        self.before.setdefault(line, cur)
        if isinstance(s, For):
            return self.stmt(While(s.cond, s.body + (s.step,), s.pos), self.stmt(s.init, cur))
        if isinstance(s, If):
            t, f = self.node(), self.node()
            self.edge(cur, t, "guard", s.cond, line)
            self.edge(cur, f, "guard", negate(s.cond), line)
            te, fe = self.block(s.then, t), self.block(s.orelse, f)
            j = self.node()
            self.edge(te, j, "skip", None, line)
            self.edge(fe, j, "skip", None, line)
            return j
        if isinstance(s, While):
            h = self.node()
            self.heads.add(h)
            self.heads_by_line.setdefault(line, h)
            self.edge(cur, h, "skip", None, line)
            b = self.node()
            self.edge(h, b, "guard", s.cond, line)
            end = self.block(s.body, b)
            self.edge(end, h, "skip", None, line)
            x = self.node()
            self.edge(h, x, "guard", negate(s.cond), line)
            return x
        nxt = self.node()
        if isinstance(s, Assert):
            self.obligations.append(Obligation(cur, line, col, "assert", s.cond))
            self.edge(cur, nxt, "assert", s.cond, line)
        else:
            if isinstance(s, Store):
                size = Var(length_var(s.array))
                self.obligations.append(Obligation(cur, line, col, "lower", Rel(">=", s.index, Num(0))))
                self.obligations.append(Obligation(cur, line, col, "upper", Rel("<", s.index, size)))
            self.edge(cur, nxt, "stmt", s, line)
        self.after[line] = nxt
        return nxt


def build_cfg(p: Program) -> CFG:
    b = _Builder()
    entry = b.node()
    exit_ = b.block(p.body, entry)
    return CFG(
        inputs=p.decls,
        nodes=list(range(b.count)),
        edges=b.edges,
        entry=entry,
        exit=exit_,
        loop_heads=frozenset(b.heads),
        obligations=b.obligations,
        before=b.before,
        after=b.after,
        heads_by_line=b.heads_by_line,
    )
