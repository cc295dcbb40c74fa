"""Strict difference constraints ``x < y + c`` over integer variables.

On integers ``x < y + c`` is ``x <= y + (c - 1)``, so chaining
``x < y + c1`` with ``y < z + c2`` gives ``x < z + (c1 + c2 - 1)``. Stores are
kept closed: one tightest constant per ordered pair, no trivial
self-constraints, and an infeasible cycle is the distinguished bottom.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .lattice import Domain, FiniteUniverse
from .numeric import INF, Interval, ITOP, Parity
from .syntax import (
    BoolConst,
    Cond,
    Expr,
    Rel,
    compare,
    linear,
    normalize,
)

Constraint = tuple[str, str, int]


@dataclass(frozen=True)
class DiffStore:
    constraints: tuple[Constraint, ...] = ()
    is_bottom: bool = False

    @cached_property
    def table(self) -> dict[tuple[str, str], int]:
        return {(x, y): c for x, y, c in self.constraints}

    def bound(self, x: str, y: str) -> int | None:
        return self.table.get((x, y))

    def variables(self) -> set[str]:
        return {v for x, y, _ in self.constraints for v in (x, y)}

    def __str__(self) -> str:
        if self.is_bottom:
            return "⊥"
        return "{" + ", ".join(show_constraint(*k) for k in self.constraints) + "}"


def show_constraint(x: str, y: str, c: int) -> str:
    return f"{x} < {y} + {c}" if c >= 0 else f"{x} < {y} - {-c}"


DIFF_BOTTOM = DiffStore((), True)
DIFF_TOP = DiffStore()


def _close_table(table: dict[tuple[str, str], int]) -> dict[tuple[str, str], int] | None:
    """Floyd-Warshall on weights ``c - 1``; None on a negative cycle."""
    w = {k: c - 1 for k, c in table.items()}
    vs = sorted({v for k in w for v in k})
    for k in vs:
        for i in vs:
            ik = w.get((i, k))
            if ik is None:
                continue
            for j in vs:
                kj = w.get((k, j))
                if kj is None:
                    continue
                cand = ik + kj
                cur = w.get((i, j))
                if cur is None or cand < cur:
                    w[(i, j)] = cand
    out = {}
    for (i, j), wij in w.items():
        if i == j:
            if wij < 0:
                return None
            continue
        out[(i, j)] = wij + 1
    return out


def make_store(constraints: Iterable[Constraint]) -> DiffStore:
    """Build the closed store for a conjunction of constraints."""
    table: dict[tuple[str, str], int] = {}
    for x, y, c in constraints:
        if x == y:
            if c <= 0:
                return DIFF_BOTTOM
            continue
        if (x, y) not in table or c < table[(x, y)]:
            table[(x, y)] = c
    closed = _close_table(table)
    if closed is None:
        return DIFF_BOTTOM
    return DiffStore(tuple(sorted((x, y, c) for (x, y), c in closed.items())))


def diff_close(s: DiffStore) -> DiffStore:
    if s.is_bottom:
        return s
    return make_store(s.constraints)


def diff_join(s1: DiffStore, s2: DiffStore) -> DiffStore:
    if s1.is_bottom:
        return s2
    if s2.is_bottom:
        return s1
    t1, t2 = diff_close(s1).table, diff_close(s2).table
    return make_store((x, y, max(c, t2[(x, y)])) for (x, y), c in t1.items() if (x, y) in t2)


def diff_meet(s1: DiffStore, s2: DiffStore) -> DiffStore:
    if s1.is_bottom or s2.is_bottom:
        return DIFF_BOTTOM
    return make_store(s1.constraints + s2.constraints)


def diff_leq(s1: DiffStore, s2: DiffStore) -> bool:
    if s1.is_bottom:
        return True
    if s2.is_bottom:
        return False
    t1 = diff_close(s1).table
    return all((x, y) in t1 and t1[(x, y)] <= c for x, y, c in s2.constraints)


def diff_widen(s1: DiffStore, s2: DiffStore) -> DiffStore:
    """Keep the constraints of ``s1`` that ``s2`` still entails."""
    if s1.is_bottom:
        return s2
    if s2.is_bottom:
        return s1
    t2 = diff_close(s2).table
    return make_store(
        (x, y, c) for x, y, c in s1.constraints if (x, y) in t2 and t2[(x, y)] <= c
    )


def diff_entails(s: DiffStore, x: str, y: str, k: int) -> bool:
    """Does ``s`` entail ``x < y + k``?"""
    if s.is_bottom:
        return True
    if x == y:
        return k > 0
    c = diff_close(s).bound(x, y)
    return c is not None and c <= k


def _kill(s: DiffStore, x: str) -> list[Constraint]:
    return [k for k in diff_close(s).constraints if x not in (k[0], k[1])]


def _strict_forms(c: Rel) -> list[tuple[str, str, int]] | None:
    """Translate a relation between ``var + k`` terms into strict constraints.

    Returns None when the relation is not of that shape or mentions a constant side.
    """
    ll, lr = linear(c.left), linear(c.right)
    if ll is None or lr is None or ll[0] is None or lr[0] is None:
        return None
    (x, a), (y, b) = ll, lr
    d = b - a  # x op y + d
    op = c.op
    if op == "<":
        return [(x, y, d)]
    if op == "<=":
        return [(x, y, d + 1)]
    if op == ">":
        return [(y, x, -d)]
    if op == ">=":
        return [(y, x, 1 - d)]
    if op == "=":
        return [(x, y, d + 1), (y, x, 1 - d)]
    return None


def diff_assume(c: Cond, s: DiffStore) -> DiffStore:
    if s.is_bottom:
        return s
    c = normalize(c)
    if isinstance(c, BoolConst):
        return s if c.value else DIFF_BOTTOM
    if not isinstance(c, Rel):
        return s
    ll, lr = linear(c.left), linear(c.right)
    if ll is not None and lr is not None and (ll[0] == lr[0]):
        return s if compare(c.op, ll[1], lr[1]) else DIFF_BOTTOM
    forms = _strict_forms(c)
    if not forms:
        return s
    return make_store(s.constraints + tuple(forms))


def diff_assign(x: str, e: Expr, s: DiffStore) -> DiffStore:
    if s.is_bottom:
        return s
    lin = linear(e)
    if lin is not None and lin[0] == x:
        k = lin[1]
        shifted = []
        for a, b, c in diff_close(s).constraints:
            if a == x:
                shifted.append((a, b, c + k))
            elif b == x:
                shifted.append((a, b, c - k))
            else:
                shifted.append((a, b, c))
        return make_store(shifted)
    kept = _kill(s, x)
    if lin is not None and lin[0] is not None:
        y, k = lin
        kept += [(x, y, k + 1), (y, x, 1 - k)]
    return make_store(kept)


def diff_forget(x: str, s: DiffStore) -> DiffStore:
    if s.is_bottom:
        return s
    return make_store(_kill(s, x))


def rho_intervals_to_diff(ienv: Mapping[str, Interval], s: DiffStore) -> DiffStore:
    """Add ``x < y + (b - c + 1)`` for every ``x in [a..b]``, ``y in [c..d]`` with finite b, c."""
    if s.is_bottom:
        return s
    items = sorted(ienv.items())
    extra = []
    for x, ix in items:
        if ix.hi == INF or ix.is_bottom:
            continue
        for y, iy in items:
            if y == x or iy.lo == -INF:
                continue
            extra.append((x, y, int(ix.hi - iy.lo + 1)))
    if not extra:
        return s
    return make_store(s.constraints + tuple(extra))


def rho_diff_to_intervals(ienv: Mapping[str, Interval], s: DiffStore) -> dict[str, Interval]:
    """Back-flow: tighten intervals through the constraints (not installed by default)."""
    out = dict(ienv)
    if s.is_bottom:
        return {x: Interval(INF, -INF) for x in out}
    for x, y, c in diff_close(s).constraints:
        ix, iy = out.get(x, ITOP), out.get(y, ITOP)
        # x <= y + c - 1
        nx = Interval(ix.lo, min(ix.hi, iy.hi + c - 1))
        ny = Interval(max(iy.lo, ix.lo - c + 1), iy.hi)
        if nx != ITOP:
            out[x] = nx
        if ny != ITOP:
            out[y] = ny
    return out


@lru_cache(maxsize=8)
def _grid(lo: int, hi: int, n: int) -> np.ndarray:
    grid = np.array(list(FiniteUniverse(lo, hi).tuples(n)), dtype=np.int64).reshape(-1, n)
    grid.flags.writeable = False
    return grid


class DiffDomain(Domain):
    """Lattice of difference stores.

    ``variables`` fixes the concrete points used by ``gamma_enum``: tuples of
    values aligned with that variable order. Stores (mappings) are accepted by
    ``contains`` as well, which is what the soundness checker passes.
    """

    name = "diff"
    value_type = DiffStore

    def __init__(self, variables: Sequence[str] = ()) -> None:
        self.variables = tuple(variables)

    def __repr__(self) -> str:
        return f"DiffDomain({self.variables})"

    def bottom(self) -> DiffStore:
        return DIFF_BOTTOM

    def top(self) -> DiffStore:
        return DIFF_TOP

    def is_bottom(self, a: DiffStore) -> bool:
        return a.is_bottom

    def leq(self, a, b) -> bool:
        self._own(a, b)
        return diff_leq(a, b)

    def join(self, a, b):
        self._own(a, b)
        return diff_join(a, b)

    def meet(self, a, b):
        self._own(a, b)
        return diff_meet(a, b)

    def widen(self, a, b):
        self._own(a, b)
        return diff_widen(a, b)

    def contains(self, a: DiffStore, point: Any) -> bool:
        if a.is_bottom:
            return False
        store = point if isinstance(point, Mapping) else dict(zip(self.variables, point))
        for x, y, c in a.constraints:
            if x in store and y in store and not store[x] < store[y] + c:
                return False
        return True

    def points(self, u: FiniteUniverse):
        return u.tuples(len(self.variables))

    def gamma_mask(self, a: DiffStore, u: FiniteUniverse) -> np.ndarray:
        n = len(self.variables)
        grid = _grid(u.lo, u.hi, n)
        if a.is_bottom:
            return np.zeros(len(grid), dtype=bool)
        idx = {v: i for i, v in enumerate(self.variables)}
        mask = np.ones(len(grid), dtype=bool)
        for x, y, c in a.constraints:
            if x in idx and y in idx:
                mask &= grid[:, idx[x]] < grid[:, idx[y]] + c
        return mask

    def render(self, a: DiffStore) -> str:
        return str(a)

    # engine transfer protocol
    def init(self, inputs) -> DiffStore:
        return DIFF_TOP

    def assign(self, x: str, e: Expr, s: DiffStore) -> DiffStore:
        return diff_assign(x, e, s)

    def bool_assign(self, x: str, c: Cond, s: DiffStore) -> DiffStore:
        return s

    def alloc(self, arr: str, length_var: str, e: Expr, s: DiffStore) -> DiffStore:
        return diff_assign(length_var, e, s)

    def store(self, arr: str, index: Expr, value: Expr, s: DiffStore) -> DiffStore:
        return s

    def assume(self, c: Cond, s: DiffStore) -> DiffStore:
        return diff_assume(c, s)

    def refine(self, c: Cond, s: DiffStore) -> DiffStore:
        return diff_assume(c, s)

    def restrict(self, var: str, value: Any, s: DiffStore) -> DiffStore:
        return s

    def entails(self, c: Cond, s: DiffStore) -> bool:
        if s.is_bottom:
            return True
        c = normalize(c)
        if not isinstance(c, Rel):
            return False
        forms = _strict_forms(c)
        if forms is None:
            ll, lr = linear(c.left), linear(c.right)
            if ll is not None and lr is not None and ll[0] == lr[0]:
                return compare(c.op, ll[1], lr[1])
            return False
        return all(diff_entails(s, x, y, k) for x, y, k in forms)

    def interval_of(self, e: Expr, s: DiffStore) -> Interval:
        return ITOP

    def parity_of(self, e: Expr, s: DiffStore) -> Parity:
        return Parity.TOP


DIFF = DiffDomain()
