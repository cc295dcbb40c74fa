"""Abstract array contents layered over a scalar state domain.

Each array gets one cell: a single Interval summary, or a Parity-keyed power
of Intervals partitioned by the parity of the stored value or of the index.
Fresh arrays start with every cell at bottom and stores are weak updates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

from .lattice import Domain
from .numeric import INTERVAL, PARITY, Interval, Parity
from .products import CardinalPower, PairValue, PowerValue, rho_interval_parity
from .syntax import Cond, Expr

ARRAY_MODES = ("summary", "value-parity", "index-parity")
PARITY_ATOMS = (Parity.ODD, Parity.EVEN)


@dataclass(frozen=True)
class ArrayState:
    scalars: Any
    cells: tuple[tuple[str, Any], ...] = ()

    def cell(self, arr: str) -> Any:
        return dict(self.cells)[arr]


class WithArrays(Domain):
    value_type = ArrayState

    def __init__(self, inner: Domain, mode: str = "summary") -> None:
        if mode not in ARRAY_MODES:
            raise ValueError(f"unknown array mode {mode!r}")
        self.inner, self.mode = inner, mode
        self.cell_domain: Domain = INTERVAL if mode == "summary" else CardinalPower(INTERVAL, PARITY, PARITY_ATOMS)
        self.name = f"{inner.name}+arrays({mode})"
        self.has_finite_height = False
        self._split = rho_interval_parity().rho1

    def _make(self, scalars: Any, cells: Mapping[str, Any]) -> ArrayState:
        if self.inner.is_bottom(scalars):
            return self.bottom()
        return ArrayState(scalars, tuple(sorted(cells.items())))

    def _combine(self, op: str, a: ArrayState, b: ArrayState) -> ArrayState:
        ca, cb = dict(a.cells), dict(b.cells)
        cells = {}
        for arr in ca.keys() | cb.keys():
            x = ca.get(arr, self.cell_domain.bottom())
            y = cb.get(arr, self.cell_domain.bottom())
            cells[arr] = getattr(self.cell_domain, op)(x, y)
        return self._make(getattr(self.inner, op)(a.scalars, b.scalars), cells)

    def bottom(self) -> ArrayState:
        return ArrayState(self.inner.bottom())

    def top(self) -> ArrayState:
        return ArrayState(self.inner.top())

    def is_bottom(self, a: ArrayState) -> bool:
        return self.inner.is_bottom(a.scalars)

    def leq(self, a: ArrayState, b: ArrayState) -> bool:
        if self.is_bottom(a):
            return True
        if not self.inner.leq(a.scalars, b.scalars):
            return False
        cb = dict(b.cells)
        return all(
            self.cell_domain.leq(v, cb.get(arr, self.cell_domain.bottom())) for arr, v in a.cells
        )

    def join(self, a, b):
        if self.is_bottom(a):
            return b
        if self.is_bottom(b):
            return a
        return self._combine("join", a, b)

    def meet(self, a, b):
        return self._combine("meet", a, b)

    def widen(self, a, b):
        if self.is_bottom(a):
            return b
        if self.is_bottom(b):
            return a
        return self._combine("widen", a, b)

    def contains(self, a: ArrayState, store: Mapping[str, Any]) -> bool:
        if not self.inner.contains(a.scalars, store):
            return False
        for arr, cell in a.cells:
            content = store.get(arr)
            if content is None:
                continue
            for idx, v in enumerate(content):
                if v is None:
                    continue
                if self.mode == "index-parity":
                    ok = all(
                        INTERVAL.contains(iv, v)
                        for atom, iv in zip(cell.atoms, cell.table)
                        if PARITY.contains(atom, idx)
                    )
                else:
                    ok = self.cell_domain.contains(cell, v)
                if not ok:
                    return False
        return True

    def render(self, a: ArrayState) -> str:
        text = self.inner.render(a.scalars)
        if self.is_bottom(a) or not a.cells:
            return text
        cells = ", ".join(f"{arr}: {self.cell_domain.render(v)}" for arr, v in a.cells)
        return f"{text} [{cells}]"

    # transfer
    def init(self, inputs) -> ArrayState:
        return self._make(self.inner.init(inputs), {})

    def _lift(self, a: ArrayState, scalars: Any) -> ArrayState:
        return self._make(scalars, dict(a.cells))

    def assign(self, x: str, e: Expr, a: ArrayState) -> ArrayState:
        return self._lift(a, self.inner.assign(x, e, a.scalars))

    def bool_assign(self, x: str, c: Cond, a: ArrayState) -> ArrayState:
        return self._lift(a, self.inner.bool_assign(x, c, a.scalars))

    def alloc(self, arr: str, length_var: str, e: Expr, a: ArrayState) -> ArrayState:
        cells = dict(a.cells)
        cells[arr] = self.cell_domain.bottom()
        return self._make(self.inner.alloc(arr, length_var, e, a.scalars), cells)

    def store(self, arr: str, index: Expr, value: Expr, a: ArrayState) -> ArrayState:
        if self.is_bottom(a):
            return a
        scalars = self.inner.store(arr, index, value, a.scalars)
        v = self.inner.interval_of(value, a.scalars)
        cells = dict(a.cells)
        cell = cells.get(arr, self.cell_domain.bottom())
        if self.mode == "summary":
            cell = INTERVAL.join(cell, v)
        elif self.mode == "value-parity":
            cell = PowerValue(
                cell.atoms,
                tuple(
                    INTERVAL.join(iv, self._split(PairValue(v, atom)))
                    for atom, iv in zip(cell.atoms, cell.table)
                ),
            )
        else:
            p = self.inner.parity_of(index, a.scalars)
            cell = PowerValue(
                cell.atoms,
                tuple(
                    iv if PARITY.is_bottom(PARITY.meet(p, atom)) else INTERVAL.join(iv, v)
                    for atom, iv in zip(cell.atoms, cell.table)
                ),
            )
        cells[arr] = cell
        return self._make(scalars, cells)

    def assume(self, c: Cond, a: ArrayState) -> ArrayState:
        return self._lift(a, self.inner.assume(c, a.scalars))

    def refine(self, c: Cond, a: ArrayState) -> ArrayState:
        return self._lift(a, self.inner.refine(c, a.scalars))

    def restrict(self, var: str, value: Any, a: ArrayState) -> ArrayState:
        return self._lift(a, self.inner.restrict(var, value, a.scalars))

    def entails(self, c: Cond, a: ArrayState) -> bool:
        return self.inner.entails(c, a.scalars)

    def interval_of(self, e: Expr, a: ArrayState) -> Interval:
        return self.inner.interval_of(e, a.scalars)

    def parity_of(self, e: Expr, a: ArrayState) -> Parity:
        return self.inner.parity_of(e, a.scalars)
