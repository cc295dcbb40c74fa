"""Domain combinators: Cartesian product, reduced product and reduced cardinal power.

The combinators are generic: they work on value domains (an Interval paired
with a Parity) and equally on the environment and store domains the engine
runs on, since they only call the component operations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from .diff import DIFF_BOTTOM, DiffStore, rho_diff_to_intervals, rho_intervals_to_diff
from .lattice import Counting, Domain, DomainMismatch, FiniteUniverse
from .nonrel import ENV_BOTTOM, BoolEnvDomain, Env, NumEnvDomain, make_env
from .numeric import (
    BOOL,
    CBOT,
    IBOT,
    INF,
    INTERVAL,
    PARITY,
    Congruence,
    Interval,
    Parity,
)
from .syntax import Cond, Expr, cond_vars, negate


@dataclass(frozen=True)
class PairValue:
    left: Any
    right: Any
    _hash: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_hash", hash((self.left, self.right)))

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return f"({self.left}, {self.right})"


class Cartesian(Domain):
    """Component-wise product; with ``smash`` a bottom component makes the pair bottom."""

    def __init__(self, left: Domain, right: Domain, smash: bool = False) -> None:
        self.left, self.right, self.smash = left, right, smash
        self.name = f"{left.name}*{right.name}"
        self.has_finite_height = left.has_finite_height and right.has_finite_height
        self.widening_is_join = left.widening_is_join and right.widening_is_join

    value_type = PairValue

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.left!r}, {self.right!r})"

    def _norm(self, p: PairValue) -> PairValue:
        if self.smash and (self.left.is_bottom(p.left) or self.right.is_bottom(p.right)):
            return self.bottom()
        return p

    def _both(self, f: str, *args: Any, pair: PairValue) -> PairValue:
        return self._norm(
            PairValue(
                getattr(self.left, f)(*args, pair.left),
                getattr(self.right, f)(*args, pair.right),
            )
        )

    def bottom(self) -> PairValue:
        return PairValue(self.left.bottom(), self.right.bottom())

    def top(self) -> PairValue:
        return PairValue(self.left.top(), self.right.top())

    def is_bottom(self, p: PairValue) -> bool:
        lb, rb = self.left.is_bottom(p.left), self.right.is_bottom(p.right)
        return (lb or rb) if self.smash else (lb and rb)

    def leq(self, p: PairValue, q: PairValue) -> bool:
        self._own(p, q)
        # both sides are always evaluated so each operation costs one call per component
        left_ok = self.left.leq(p.left, q.left)
        right_ok = self.right.leq(p.right, q.right)
        return left_ok and right_ok

    def join(self, p: PairValue, q: PairValue) -> PairValue:
        self._own(p, q)
        return self._norm(PairValue(self.left.join(p.left, q.left), self.right.join(p.right, q.right)))

    def meet(self, p: PairValue, q: PairValue) -> PairValue:
        self._own(p, q)
        return self._norm(PairValue(self.left.meet(p.left, q.left), self.right.meet(p.right, q.right)))

    def widen(self, p: PairValue, q: PairValue) -> PairValue:
        self._own(p, q)
        return PairValue(self.left.widen(p.left, q.left), self.right.widen(p.right, q.right))

    def contains(self, p: PairValue, v: Any) -> bool:
        return self.left.contains(p.left, v) and self.right.contains(p.right, v)

    def points(self, u: FiniteUniverse):
        return self.left.points(u)

    def gamma_mask(self, p: PairValue, u: FiniteUniverse) -> np.ndarray:
        return self.left.gamma_mask(p.left, u) & self.right.gamma_mask(p.right, u)

    def render(self, p: PairValue) -> str:
        return f"({self.left.render(p.left)}, {self.right.render(p.right)})"

    # engine transfer protocol, applied component-wise
    def init(self, inputs) -> PairValue:
        return self._norm(PairValue(self.left.init(inputs), self.right.init(inputs)))

    def assign(self, x: str, e: Expr, p: PairValue) -> PairValue:
        return self._both("assign", x, e, pair=p)

    def bool_assign(self, x: str, c: Cond, p: PairValue) -> PairValue:
        return self._both("bool_assign", x, c, pair=p)

    def alloc(self, arr: str, length_var: str, e: Expr, p: PairValue) -> PairValue:
        return self._both("alloc", arr, length_var, e, pair=p)

    def store(self, arr: str, index: Expr, value: Expr, p: PairValue) -> PairValue:
        return self._both("store", arr, index, value, pair=p)

    def assume(self, c: Cond, p: PairValue) -> PairValue:
        return self._both("assume", c, pair=p)

    def refine(self, c: Cond, p: PairValue) -> PairValue:
        return self._both("refine", c, pair=p)

    def restrict(self, var: str, value: Any, p: PairValue) -> PairValue:
        return self._both("restrict", var, value, pair=p)

    def entails(self, c: Cond, p: PairValue) -> bool:
        left_ok = self.left.entails(c, p.left)
        right_ok = self.right.entails(c, p.right)
        return left_ok or right_ok

    def interval_of(self, e: Expr, p: PairValue) -> Interval:
        return INTERVAL.meet(self.left.interval_of(e, p.left), self.right.interval_of(e, p.right))

    def parity_of(self, e: Expr, p: PairValue) -> Parity:
        return PARITY.meet(self.left.parity_of(e, p.left), self.right.parity_of(e, p.right))


@dataclass(frozen=True)
class ReductionRule:
    """Granger-style pair of one-directional refinements."""

    name: str
    rho1: Callable[[PairValue], Any]
    rho2: Callable[[PairValue], Any]

    def step(self, p: PairValue) -> PairValue:
        return PairValue(self.rho1(p), self.rho2(p))


def compose_rules(rules: Sequence[ReductionRule]) -> ReductionRule:
    if len(rules) == 1:
        return rules[0]

    def rho1(p: PairValue) -> Any:
        left = p.left
        for r in rules:
            left = r.rho1(PairValue(left, p.right))
        return left

    def rho2(p: PairValue) -> Any:
        right = p.right
        for r in rules:
            right = r.rho2(PairValue(p.left, right))
        return right

    return ReductionRule("+".join(r.name for r in rules), rho1, rho2)


def reduce_iterates(rule: ReductionRule, p: PairValue, cap: int = 100) -> list[PairValue]:
    """The decreasing sequence ``p, step(p), ...`` up to its fixpoint or ``cap`` steps."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    seq = [p]
    for _ in range(cap):
        nxt = rule.step(seq[-1])
        if nxt == seq[-1]:
            break
        seq.append(nxt)
    return seq


def reduce_fixpoint(rule: ReductionRule, p: PairValue, cap: int = 100) -> PairValue:
    return reduce_iterates(rule, p, cap)[-1]


def reduce_once(rule: ReductionRule, p: PairValue) -> PairValue:
    """Single sequential pass: refine the left, then the right with the refined left."""
    left = rule.rho1(p)
    return PairValue(left, rule.rho2(PairValue(left, p.right)))


class Reduced(Cartesian):
    """Cartesian product followed by a reduction after every operation except widening.

    ``granger=True`` iterates the rule to its fixpoint (at most ``cap`` steps);
    otherwise one sequential pass is applied.
    """

    def __init__(
        self,
        left: Domain,
        right: Domain,
        rule: ReductionRule,
        granger: bool = True,
        cap: int = 100,
    ) -> None:
        super().__init__(left, right, smash=True)
        self.rule, self.granger, self.cap = rule, granger, cap

    def reduce(self, p: PairValue) -> PairValue:
        if self.granger:
            return reduce_fixpoint(self.rule, p, self.cap)
        return reduce_once(self.rule, p)

    def _norm(self, p: PairValue) -> PairValue:
        return super()._norm(self.reduce(super()._norm(p)))

    def init(self, inputs) -> PairValue:
        return self._norm(PairValue(self.left.init(inputs), self.right.init(inputs)))


def cartesian_apply(kind: str, p: PairValue, q: PairValue, left: Domain, right: Domain):
    d = Cartesian(left, right)
    if kind not in ("leq", "join", "meet", "widen"):
        raise ValueError(f"unknown operation {kind!r}")
    return getattr(d, kind)(p, q)


def pair_gamma(p: PairValue, u: FiniteUniverse, left: Domain, right: Domain) -> frozenset:
    return left.gamma_enum(p.left, u) & right.gamma_enum(p.right, u)


# scalar reduction rules


def _parity_atom(v: int) -> str:
    return "o" if v % 2 else "e"


def rho_interval_parity() -> ReductionRule:
    def rho1(p: PairValue) -> Interval:
        a, b = p.left, p.right
        if a.is_bottom or not b.atoms:
            return IBOT
        if len(b.atoms) != 1:
            return a
        (want,) = b.atoms
        lo, hi = a.lo, a.hi
        if lo != -INF and _parity_atom(lo) != want:
            lo += 1
        if hi != INF and _parity_atom(hi) != want:
            hi -= 1
        return Interval(lo, hi)

    def rho2(p: PairValue) -> Parity:
        a, b = p.left, p.right
        if a.is_bottom:
            return Parity.BOT
        if a.is_singleton:
            return PARITY.meet(b, PARITY.const(a.lo))
        return b

    return ReductionRule("interval-parity", rho1, rho2)


def rho_interval_congruence() -> ReductionRule:
    def rho1(p: PairValue) -> Interval:
        a, b = p.left, p.right
        if a.is_bottom or b.modulus is None:
            return IBOT
        m = b.modulus
        if m == 0:
            return INTERVAL.meet(a, Interval(0, 0))
        lo = a.lo if a.lo == -INF else -((-a.lo) // m) * m
        hi = a.hi if a.hi == INF else (a.hi // m) * m
        return Interval(lo, hi)

    def rho2(p: PairValue) -> Congruence:
        a, b = p.left, p.right
        if a.is_bottom:
            return CBOT
        if a.is_singleton:
            return Congruence(math.lcm(b.modulus, abs(a.lo))) if b.modulus is not None else CBOT
        return b

    return ReductionRule("interval-congruence", rho1, rho2)


# lifting to environments and stores


def lift_rule(rule: ReductionRule, left: NumEnvDomain, right: NumEnvDomain) -> ReductionRule:
    """Apply a value-level rule variable by variable on a pair of environments."""

    def _per_var(p: PairValue, side: str) -> Env:
        le, re = p.left, p.right
        if le.is_bottom or re.is_bottom:
            return ENV_BOTTOM
        keys = sorted(le.mapping.keys() | re.mapping.keys())
        rho = rule.rho1 if side == "left" else rule.rho2
        dom = left if side == "left" else right
        return make_env(
            dom.values,
            ((x, rho(PairValue(left.lookup(le, x), right.lookup(re, x)))) for x in keys),
        )

    return ReductionRule(
        rule.name, lambda p: _per_var(p, "left"), lambda p: _per_var(p, "right")
    )


def intervals_to_diff_rule(backflow: bool = False) -> ReductionRule:
    def rho1(p: PairValue) -> Env:
        env, s = p.left, p.right
        if env.is_bottom or s.is_bottom:
            return ENV_BOTTOM
        if not backflow:
            return env
        return make_env(INTERVAL, rho_diff_to_intervals(env.mapping, s))

    def rho2(p: PairValue) -> DiffStore:
        env, s = p.left, p.right
        if env.is_bottom:
            return DIFF_BOTTOM
        return rho_intervals_to_diff(env.mapping, s)

    return ReductionRule("intervals-to-diff" if not backflow else "diff-to-intervals", rho1, rho2)


# reduced cardinal power over values


@dataclass(frozen=True)
class PowerValue:
    atoms: tuple
    table: tuple

    def __post_init__(self) -> None:
        if len(self.atoms) != len(self.table):
            raise ValueError("every atom needs exactly one entry")

    def __getitem__(self, atom: Any) -> Any:
        return self.table[self.atoms.index(atom)]

    def __str__(self) -> str:
        return "{" + ", ".join(f"{a} -> {v}" for a, v in zip(self.atoms, self.table)) + "}"


def atoms_disjoint(exponent: Domain, atoms: Sequence[Any]) -> bool:
    return all(
        exponent.is_bottom(exponent.meet(a, b))
        for i, a in enumerate(atoms)
        for b in atoms[i + 1:]
    )


def atoms_cover(exponent: Domain, atoms: Sequence[Any]) -> bool:
    return reduce(exponent.join, atoms, exponent.bottom()) == exponent.top() and (
        not isinstance(exponent.top(), Interval) or _intervals_contiguous(atoms)
    )


def _intervals_contiguous(atoms: Sequence[Interval]) -> bool:
    ivs = sorted(atoms, key=lambda a: a.lo)
    if ivs[0].lo != -INF or ivs[-1].hi != INF:
        return False
    return all(nxt.lo == cur.hi + 1 for cur, nxt in zip(ivs, ivs[1:]))


class CardinalPower(Domain):
    """Maps from finitely many disjoint exponent atoms to base values, ordered pointwise.

    ``contains(f, v)`` reads the power as implications: whenever ``v`` lies in
    an atom, it lies in that atom's base value. The full isotone map on the
    exponent lattice is the one induced by ``induced``.
    """

    def __init__(self, base: Domain, exponent: Domain, atoms: Sequence[Any]) -> None:
        atoms = tuple(atoms)
        if not atoms:
            raise ValueError("a cardinal power needs at least one atom")
        if not atoms_disjoint(exponent, atoms):
            raise ValueError("power atoms must be pairwise disjoint")
        self.base, self.exponent, self.atoms = base, exponent, atoms
        self.name = f"{base.name}^{exponent.name}"
        self.has_finite_height = base.has_finite_height
        self.widening_is_join = base.widening_is_join

    value_type = PowerValue

    def _own(self, *fs: Any) -> None:
        super()._own(*fs)
        for f in fs:
            if f.atoms != self.atoms:
                raise DomainMismatch(f"atom list {f.atoms} differs from {self.atoms}")

    def make(self, table: Mapping[Any, Any] | Sequence[Any]) -> PowerValue:
        if isinstance(table, Mapping):
            table = [table[a] for a in self.atoms]
        return PowerValue(self.atoms, tuple(table))

    def bottom(self) -> PowerValue:
        return self.make([self.base.bottom()] * len(self.atoms))

    def top(self) -> PowerValue:
        return self.make([self.base.top()] * len(self.atoms))

    def is_bottom(self, f: PowerValue) -> bool:
        return all(self.base.is_bottom(v) for v in f.table)

    def leq(self, f: PowerValue, g: PowerValue) -> bool:
        self._own(f, g)
        return all([self.base.leq(x, y) for x, y in zip(f.table, g.table)])

    def _pointwise(self, op: Callable, f: PowerValue, g: PowerValue) -> PowerValue:
        self._own(f, g)
        return self.make([op(x, y) for x, y in zip(f.table, g.table)])

    def join(self, f, g):
        return self._pointwise(self.base.join, f, g)

    def meet(self, f, g):
        return self._pointwise(self.base.meet, f, g)

    def widen(self, f, g):
        return self._pointwise(self.base.widen, f, g)

    def contains(self, f: PowerValue, v: Any) -> bool:
        return all(
            self.base.contains(b, v)
            for a, b in zip(f.atoms, f.table)
            if self.exponent.contains(a, v)
        )

    def induced(self, f: PowerValue, x: Any) -> Any:
        """Value of the induced isotone map at exponent element ``x``."""
        parts = [
            b for a, b in zip(f.atoms, f.table)
            if not self.exponent.is_bottom(self.exponent.meet(a, x))
        ]
        return reduce(self.base.join, parts, self.base.bottom())

    def render(self, f: PowerValue) -> str:
        return "{" + ", ".join(
            f"{a} -> {self.base.render(b)}" for a, b in zip(f.atoms, f.table)
        ) + "}"


def power_pointwise(kind: str, f: PowerValue, g: PowerValue, power: CardinalPower):
    if kind not in ("leq", "join", "meet", "widen"):
        raise ValueError(f"unknown operation {kind!r}")
    return getattr(power, kind)(f, g)


def power_abstract(
    c: Iterable[int], atoms: Sequence[Any], u: FiniteUniverse, base: Domain, exponent: Domain
) -> PowerValue:
    """Best abstraction: each atom maps to the base abstraction of ``c`` restricted to it."""
    inside = [v for v in c if u.lo <= v <= u.hi]
    table = [base.alpha(v for v in inside if exponent.contains(a, v)) for a in atoms]
    return PowerValue(tuple(atoms), tuple(table))


def instrument_counters(run: Callable[[Callable[[Domain], Counting]], Any]) -> tuple[Any, dict[str, Counter]]:
    """Run ``run(wrap)``; each domain passed through ``wrap`` has its operations counted."""
    counts: dict[str, Counter] = {}

    def wrap(d: Domain) -> Counting:
        c = counts.setdefault(d.name, Counter())
        return Counting(d, c)

    result = run(wrap)
    return result, counts


# reduced cardinal power over program states


@dataclass(frozen=True)
class PowerState:
    pivot: str
    atoms: tuple
    table: tuple


class StatePower(Domain):
    """Reduced cardinal power whose exponent is the value of one pivot variable.

    Each atom maps to a base state meant to hold whenever the pivot lies in
    the atom. Statements that do not assign the pivot run atom by atom, one
    base transfer per atom. Assigning the pivot moves every post-state to the
    atoms its new pivot value can reach.
    """

    value_type = PowerState

    def __init__(self, base: Domain, pivot: str, exponent: Domain, atoms: Sequence[Any]) -> None:
        atoms = tuple(atoms)
        if not atoms:
            raise ValueError("power atoms must be a non-empty finite list")
        if not atoms_disjoint(exponent, atoms):
            raise ValueError("power atoms must be pairwise disjoint")
        if not atoms_cover(exponent, atoms):
            raise ValueError("power atoms must cover every value of the pivot")
        self.base, self.pivot, self.exponent, self.atoms = base, pivot, exponent, atoms
        self.exp_env = BoolEnvDomain() if exponent is BOOL else NumEnvDomain(exponent)
        self.name = f"({base.name})^{exponent.name}[{pivot}]"
        self.has_finite_height = base.has_finite_height
        self.widening_is_join = base.widening_is_join

    def _make(self, table: Sequence[Any]) -> PowerState:
        return PowerState(self.pivot, self.atoms, tuple(table))

    def _map(self, f: Callable[[Any], Any], ps: PowerState) -> PowerState:
        return self._make([f(s) for s in ps.table])

    def _atom_env(self, atom: Any) -> Env:
        return make_env(self.exponent, {self.pivot: atom})

    def bottom(self) -> PowerState:
        return self._make([self.base.bottom()] * len(self.atoms))

    def top(self) -> PowerState:
        return self._make([self.base.top()] * len(self.atoms))

    def is_bottom(self, ps: PowerState) -> bool:
        return all(self.base.is_bottom(s) for s in ps.table)

    def leq(self, p: PowerState, q: PowerState) -> bool:
        self._own(p, q)
        return all([self.base.leq(a, b) for a, b in zip(p.table, q.table)])

    def join(self, p, q):
        self._own(p, q)
        return self._make([self.base.join(a, b) for a, b in zip(p.table, q.table)])

    def meet(self, p, q):
        self._own(p, q)
        return self._make([self.base.meet(a, b) for a, b in zip(p.table, q.table)])

    def widen(self, p, q):
        self._own(p, q)
        return self._make([self.base.widen(a, b) for a, b in zip(p.table, q.table)])

    def contains(self, ps: PowerState, store: Mapping[str, Any]) -> bool:
        if self.pivot not in store:
            return any(self.base.contains(s, store) for s in ps.table)
        v = store[self.pivot]
        hits = [s for a, s in zip(self.atoms, ps.table) if self.exponent.contains(a, v)]
        return bool(hits) and all(self.base.contains(s, store) for s in hits)

    def render(self, ps: PowerState) -> str:
        return "{" + "; ".join(
            f"{a} => {self.base.render(s)}" for a, s in zip(self.atoms, ps.table)
        ) + "}"

    def entry(self, atom: Any, ps: PowerState) -> Any:
        return ps.table[self.atoms.index(atom)]

    # transfer
    def init(self, inputs) -> PowerState:
        s0 = self.base.init(inputs)
        return self._make([self.base.restrict(self.pivot, a, s0) for a in self.atoms])

    def _redistribute(self, posts: list[Any], reach: Callable[[int, int], Any]) -> PowerState:
        """``reach(i, j)`` is the contribution of old atom i to new atom j, or None."""
        table = []
        for j in range(len(self.atoms)):
            acc = self.base.bottom()
            for i in range(len(self.atoms)):
                if self.base.is_bottom(posts[i]):
                    continue
                part = reach(i, j)
                if part is not None:
                    acc = self.base.join(acc, part)
            table.append(acc)
        return self._make(table)

    def assign(self, x: str, e: Expr, ps: PowerState) -> PowerState:
        posts = [self.base.assign(x, e, s) for s in ps.table]
        if x != self.pivot:
            return self._make(posts)
        values = [self.exp_env.eval(e, self._atom_env(a)) for a in self.atoms]

        def reach(i: int, j: int):
            if self.exponent.is_bottom(self.exponent.meet(values[i], self.atoms[j])):
                return None
            return self.base.restrict(self.pivot, self.atoms[j], posts[i])

        return self._redistribute(posts, reach)

    def bool_assign(self, x: str, c: Cond, ps: PowerState) -> PowerState:
        posts = [self.base.bool_assign(x, c, s) for s in ps.table]
        if x != self.pivot:
            return self._make(posts)
        if not isinstance(self.exp_env, BoolEnvDomain):
            raise ValueError(f"pivot {x!r} is numeric but assigned a boolean")
        values = [self.exp_env.eval_cond(c, self._atom_env(a)) for a in self.atoms]
        self_ref = self.pivot in cond_vars(c)

        def reach(i: int, j: int):
            atom = self.atoms[j]
            if BOOL.is_bottom(BOOL.meet(values[i], atom)):
                return None
            s = posts[i]
            if not self_ref:
                s = self.base.refine(c if "tt" in atom.atoms else negate(c), s)
            return self.base.restrict(self.pivot, atom, s)

        return self._redistribute(posts, reach)

    def alloc(self, arr: str, length_var: str, e: Expr, ps: PowerState) -> PowerState:
        if length_var == self.pivot:
            raise ValueError("the pivot cannot be an array length")
        return self._map(lambda s: self.base.alloc(arr, length_var, e, s), ps)

    def store(self, arr: str, index: Expr, value: Expr, ps: PowerState) -> PowerState:
        return self._map(lambda s: self.base.store(arr, index, value, s), ps)

    def _filter(self, c: Cond, table: list[Any]) -> PowerState:
        if self.pivot in cond_vars(c):
            table = [
                self.base.bottom() if self.exp_env.is_bottom(self.exp_env.assume(c, self._atom_env(a))) else s
                for a, s in zip(self.atoms, table)
            ]
        return self._make(table)

    def assume(self, c: Cond, ps: PowerState) -> PowerState:
        return self._filter(c, [self.base.assume(c, s) for s in ps.table])

    def refine(self, c: Cond, ps: PowerState) -> PowerState:
        return self._filter(c, [self.base.refine(c, s) for s in ps.table])

    def restrict(self, var: str, value: Any, ps: PowerState) -> PowerState:
        table = [self.base.restrict(var, value, s) for s in ps.table]
        if var == self.pivot and isinstance(value, type(self.atoms[0])):
            table = [
                self.base.bottom() if self.exponent.is_bottom(self.exponent.meet(a, value)) else s
                for a, s in zip(self.atoms, table)
            ]
        return self._make(table)

    def entails(self, c: Cond, ps: PowerState) -> bool:
        return all(self.base.entails(c, s) for s in ps.table if not self.base.is_bottom(s))

    def interval_of(self, e: Expr, ps: PowerState) -> Interval:
        parts = [self.base.interval_of(e, s) for s in ps.table if not self.base.is_bottom(s)]
        return reduce(INTERVAL.join, parts, IBOT)

    def parity_of(self, e: Expr, ps: PowerState) -> Parity:
        parts = [self.base.parity_of(e, s) for s in ps.table if not self.base.is_bottom(s)]
        return reduce(PARITY.join, parts, Parity.BOT)
