"""Non-relational value domains: Interval, Parity, Sign, CongruenceMod, BoolAbs.

Every value domain offers, besides the lattice operations, the arithmetic
hooks used by environment evaluation (``const``, ``add``, ``neg``,
``add_const``) and the guard hooks used by ``assume``:

* ``refine_const(a, op, k)`` -- ``a`` narrowed to values ``v`` with ``v op k``
* ``refine_pair(a, b, op, d)`` -- both narrowed by ``a op b + d``
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import ClassVar, Iterable

from .lattice import Domain, register
from .syntax import SWAPPED

INF = math.inf

def _show_bound(b) -> str:
    if b == INF:
        return "+inf"
    if b == -INF:
        return "-inf"
    return str(b)


@dataclass(frozen=True)
class Interval:
    """``[lo..hi]`` with infinite bounds allowed; ``[+inf..-inf]`` is the unique bottom."""

    lo: int | float
    hi: int | float

    def __post_init__(self) -> None:
        if self.lo > self.hi or self.lo == INF or self.hi == -INF:
            object.__setattr__(self, "lo", INF)
            object.__setattr__(self, "hi", -INF)

    @property
    def is_bottom(self) -> bool:
        return self.lo == INF

    @property
    def is_singleton(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, v: int) -> bool:
        return self.lo <= v <= self.hi

    def __str__(self) -> str:
        if self.is_bottom:
            return "⊥"
        return f"[{_show_bound(self.lo)}..{_show_bound(self.hi)}]"


def interval(lo=-INF, hi=INF) -> Interval:
    return Interval(lo, hi)


IBOT = Interval(INF, -INF)
ITOP = Interval(-INF, INF)


class IntervalDomain(Domain):
    name = "interval"
    value_type = Interval

    def bottom(self) -> Interval:
        return IBOT

    def top(self) -> Interval:
        return ITOP

    def is_bottom(self, a: Interval) -> bool:
        return a.lo == INF

    def leq(self, a: Interval, b: Interval) -> bool:
        self._own(a, b)
        return a.is_bottom or (b.lo <= a.lo and a.hi <= b.hi)

    def join(self, a: Interval, b: Interval) -> Interval:
        self._own(a, b)
        return Interval(min(a.lo, b.lo), max(a.hi, b.hi))

    def meet(self, a: Interval, b: Interval) -> Interval:
        self._own(a, b)
        return Interval(max(a.lo, b.lo), min(a.hi, b.hi))

    def widen(self, a: Interval, b: Interval) -> Interval:
        self._own(a, b)
        if a.is_bottom:
            return b
        if b.is_bottom:
            return a
        return Interval(a.lo if b.lo >= a.lo else -INF, a.hi if b.hi <= a.hi else INF)

    def contains(self, a: Interval, v: int) -> bool:
        return a.lo <= v <= a.hi

    def alpha(self, values: Iterable[int]) -> Interval:
        vs = list(values)
        return Interval(min(vs), max(vs)) if vs else IBOT

    # arithmetic
    def const(self, k: int) -> Interval:
        return Interval(k, k)

    def add(self, a: Interval, b: Interval) -> Interval:
        if a.is_bottom or b.is_bottom:
            return IBOT
        return Interval(a.lo + b.lo, a.hi + b.hi)

    def neg(self, a: Interval) -> Interval:
        return a if a.is_bottom else Interval(-a.hi, -a.lo)

    def add_const(self, a: Interval, k: int) -> Interval:
        return self.add(a, Interval(k, k))

    # guards
    def refine_const(self, a: Interval, op: str, k: int) -> Interval:
        if a.is_bottom:
            return a
        if op == "<":
            return Interval(a.lo, min(a.hi, k - 1))
        if op == "<=":
            return Interval(a.lo, min(a.hi, k))
        if op == ">":
            return Interval(max(a.lo, k + 1), a.hi)
        if op == ">=":
            return Interval(max(a.lo, k), a.hi)
        if op == "=":
            return self.meet(a, Interval(k, k))
        if a.lo == k:
            return Interval(k + 1, a.hi)
        if a.hi == k:
            return Interval(a.lo, k - 1)
        return a

    def refine_pair(self, a: Interval, b: Interval, op: str, d: int) -> tuple[Interval, Interval]:
        if a.is_bottom or b.is_bottom:
            return IBOT, IBOT
        if op in (">", ">="):
            # a > b + d  <=>  b < a - d
            b2, a2 = self.refine_pair(b, a, SWAPPED[op], -d)
            return a2, b2
        if op == "<":
            a2 = Interval(a.lo, min(a.hi, b.hi + d - 1))
            b2 = Interval(max(b.lo, a.lo - d + 1), b.hi)
        elif op == "<=":
            a2 = Interval(a.lo, min(a.hi, b.hi + d))
            b2 = Interval(max(b.lo, a.lo - d), b.hi)
        elif op == "=":
            a2 = self.meet(a, self.add_const(b, d))
            b2 = self.meet(b, self.add_const(a, -d))
        else:
            a2, b2 = a, b
            if b.is_singleton:
                a2 = self.refine_const(a, "!=", b.lo + d)
            if a.is_singleton:
                b2 = self.refine_const(b, "!=", a.lo - d)
        if a2.is_bottom or b2.is_bottom:
            return IBOT, IBOT
        return a2, b2

    def to_interval(self, a: Interval) -> Interval:
        return a


INTERVAL = register(IntervalDomain())


class AtomSet:
    """Value of a finite powerset lattice over a fixed tuple of atoms."""

    ATOMS: ClassVar[tuple[str, ...]] = ()
    NAMES: ClassVar[dict[frozenset, str]] = {}

    __slots__ = ("atoms", "_hash")

    def __init__(self, atoms: Iterable[str]) -> None:
        atoms = frozenset(atoms)
        if not atoms <= set(self.ATOMS):
            raise ValueError(f"unknown atoms {set(atoms) - set(self.ATOMS)}")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "_hash", hash((type(self).__name__, atoms)))

    def __setattr__(self, key, value):
        raise AttributeError("immutable")

    def __eq__(self, other) -> bool:
        return type(other) is type(self) and other.atoms == self.atoms

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)})"

    def __str__(self) -> str:
        return self.NAMES[self.atoms]


class Parity(AtomSet):
    ATOMS = ("o", "e")
    NAMES = {frozenset(): "⊥", frozenset("o"): "o", frozenset("e"): "e", frozenset("oe"): "⊤"}
    __slots__ = ()


class Sign(AtomSet):
    ATOMS = ("-", "0", "+")
    NAMES = {
        frozenset(): "⊥",
        frozenset({"-"}): "-",
        frozenset({"0"}): "0",
        frozenset({"+"}): "+",
        frozenset({"-", "0"}): "0-",
        frozenset({"0", "+"}): "0+",
        frozenset({"-", "+"}): "!=0",
        frozenset({"-", "0", "+"}): "⊤",
    }
    __slots__ = ()


class BoolAbs(AtomSet):
    ATOMS = ("tt", "ff")
    NAMES = {
        frozenset(): "⊥",
        frozenset({"tt"}): "tt",
        frozenset({"ff"}): "ff",
        frozenset({"tt", "ff"}): "⊤",
    }
    __slots__ = ()


Parity.BOT, Parity.ODD, Parity.EVEN, Parity.TOP = (
    Parity(()), Parity("o"), Parity("e"), Parity("oe"),
)
Sign.BOT, Sign.NEG, Sign.ZERO, Sign.POS = Sign(()), Sign("-"), Sign("0"), Sign("+")
Sign.NONPOS, Sign.NONNEG, Sign.NONZERO = Sign({"-", "0"}), Sign({"0", "+"}), Sign({"-", "+"})
Sign.TOP = Sign({"-", "0", "+"})
BoolAbs.BOT, BoolAbs.TT, BoolAbs.FF, BoolAbs.TOP = (
    BoolAbs(()), BoolAbs({"tt"}), BoolAbs({"ff"}), BoolAbs({"tt", "ff"}),
)


class AtomSetDomain(Domain):
    """Powerset lattice over atoms: join is union, meet is intersection."""

    has_finite_height = True
    widening_is_join = True
    value_type: type[AtomSet] = AtomSet

    def atom_of(self, v) -> str:
        raise NotImplementedError

    def bottom(self):
        return self.value_type(())

    def top(self):
        return self.value_type(self.value_type.ATOMS)

    def is_bottom(self, a) -> bool:
        return not a.atoms

    def leq(self, a, b) -> bool:
        self._own(a, b)
        return a.atoms <= b.atoms

    def join(self, a, b):
        self._own(a, b)
        return self.value_type(a.atoms | b.atoms)

    def meet(self, a, b):
        self._own(a, b)
        return self.value_type(a.atoms & b.atoms)

    def contains(self, a, v) -> bool:
        return self.atom_of(v) in a.atoms

    def alpha(self, values: Iterable) -> AtomSet:
        return self.value_type({self.atom_of(v) for v in values})

    def elements(self) -> list:
        atoms = self.value_type.ATOMS
        out = []
        for mask in range(1 << len(atoms)):
            out.append(self.value_type(a for i, a in enumerate(atoms) if mask >> i & 1))
        return out


class _NumericAtoms(AtomSetDomain):
    """Atom-set domains over integers; arithmetic and guards are lifted atom by atom."""

    def atom_add(self, p: str, q: str) -> set[str]:
        raise NotImplementedError

    def atom_add_const(self, p: str, k: int) -> set[str]:
        raise NotImplementedError

    def atom_neg(self, p: str) -> str:
        raise NotImplementedError

    def atom_feasible(self, p: str, q: str, op: str, d: int) -> bool:
        """Is there ``v`` in atom ``p``, ``w`` in atom ``q`` with ``v op w + d``?"""
        raise NotImplementedError

    def atom_feasible_const(self, p: str, op: str, k: int) -> bool:
        raise NotImplementedError

    def const(self, k: int):
        return self.value_type({self.atom_of(k)})

    def add(self, a, b):
        out: set[str] = set()
        for p in a.atoms:
            for q in b.atoms:
                out |= self.atom_add(p, q)
        return self.value_type(out)

    def neg(self, a):
        return self.value_type(self.atom_neg(p) for p in a.atoms)

    def add_const(self, a, k: int):
        out: set[str] = set()
        for p in a.atoms:
            out |= self.atom_add_const(p, k)
        return self.value_type(out)

    def refine_const(self, a, op: str, k: int):
        return self.value_type(p for p in a.atoms if self.atom_feasible_const(p, op, k))

    def refine_pair(self, a, b, op: str, d: int):
        keep_a = {p for p in a.atoms if any(self.atom_feasible(p, q, op, d) for q in b.atoms)}
        keep_b = {q for q in b.atoms if any(self.atom_feasible(p, q, op, d) for p in a.atoms)}
        return self.value_type(keep_a), self.value_type(keep_b)


class ParityDomain(_NumericAtoms):
    name = "parity"
    value_type = Parity

    def atom_of(self, v: int) -> str:
        return "o" if v % 2 else "e"

    def atom_add(self, p, q):
        return {"e" if p == q else "o"}

    def atom_add_const(self, p, k):
        return {p if k % 2 == 0 else ("o" if p == "e" else "e")}

    def atom_neg(self, p):
        return p

    def atom_feasible(self, p, q, op, d):
        if op == "=":
            return self.atom_add_const(q, d) == {p}
        return True

    def atom_feasible_const(self, p, op, k):
        if op == "=":
            return self.atom_of(k) == p
        return True

    def to_interval(self, a: Parity) -> Interval:
        return IBOT if not a.atoms else ITOP


PARITY = register(ParityDomain())

_SIGN_IV = {"-": Interval(-INF, -1), "0": Interval(0, 0), "+": Interval(1, INF)}


class SignDomain(_NumericAtoms):
    """Signs; atom arithmetic goes through the exact interval image of each atom."""

    name = "sign"
    value_type = Sign

    def atom_of(self, v: int) -> str:
        return "-" if v < 0 else "0" if v == 0 else "+"

    def _from_iv(self, iv: Interval) -> set[str]:
        return {p for p, piv in _SIGN_IV.items() if not INTERVAL.meet(iv, piv).is_bottom}

    def atom_add(self, p, q):
        return self._from_iv(INTERVAL.add(_SIGN_IV[p], _SIGN_IV[q]))

    def atom_add_const(self, p, k):
        return self._from_iv(INTERVAL.add_const(_SIGN_IV[p], k))

    def atom_neg(self, p):
        return {"-": "+", "0": "0", "+": "-"}[p]

    def atom_feasible(self, p, q, op, d):
        a, _ = INTERVAL.refine_pair(_SIGN_IV[p], _SIGN_IV[q], op, d)
        return not a.is_bottom

    def atom_feasible_const(self, p, op, k):
        return not INTERVAL.refine_const(_SIGN_IV[p], op, k).is_bottom

    def to_interval(self, a: Sign) -> Interval:
        return reduce(INTERVAL.join, (_SIGN_IV[p] for p in a.atoms), IBOT)


SIGN = register(SignDomain())


class BoolDomain(AtomSetDomain):
    name = "bool"
    value_type = BoolAbs

    def atom_of(self, v) -> str:
        return "tt" if v else "ff"

    def points(self, u):
        return (False, True)

    def const(self, b: bool) -> BoolAbs:
        return BoolAbs.TT if b else BoolAbs.FF

    def negate(self, a: BoolAbs) -> BoolAbs:
        return BoolAbs({"ff" if p == "tt" else "tt" for p in a.atoms})


BOOL = register(BoolDomain())


@dataclass(frozen=True)
class Congruence:
    """``m``Z for ``modulus`` m >= 0 (0Z = {0}, 1Z = Z); ``modulus=None`` is bottom."""

    modulus: int | None

    def __post_init__(self) -> None:
        if self.modulus is not None and self.modulus < 0:
            object.__setattr__(self, "modulus", -self.modulus)

    def __str__(self) -> str:
        return "⊥" if self.modulus is None else f"{self.modulus}Z"


CBOT = Congruence(None)
CTOP = Congruence(1)


def _divides(n: int, m: int) -> bool:
    return m == 0 if n == 0 else m % n == 0


class CongruenceDomain(Domain):
    """Moduli ordered by divisibility: mZ <= nZ iff n divides m.

    Ascending chains are finite (each strict step divides the modulus), so
    the join serves as widening even though the height is unbounded.
    """

    name = "congruence"
    widening_is_join = True
    value_type = Congruence

    def bottom(self) -> Congruence:
        return CBOT

    def top(self) -> Congruence:
        return CTOP

    def is_bottom(self, a: Congruence) -> bool:
        return a.modulus is None

    def leq(self, a, b) -> bool:
        self._own(a, b)
        if a.modulus is None:
            return True
        if b.modulus is None:
            return False
        return _divides(b.modulus, a.modulus)

    def join(self, a, b):
        self._own(a, b)
        if a.modulus is None:
            return b
        if b.modulus is None:
            return a
        return Congruence(math.gcd(a.modulus, b.modulus))

    def meet(self, a, b):
        self._own(a, b)
        if a.modulus is None or b.modulus is None:
            return CBOT
        return Congruence(math.lcm(a.modulus, b.modulus))

    def contains(self, a, v: int) -> bool:
        return a.modulus is not None and _divides(a.modulus, v)

    def alpha(self, values: Iterable[int]) -> Congruence:
        vs = list(values)
        if not vs:
            return CBOT
        return Congruence(reduce(math.gcd, (abs(v) for v in vs)))

    def const(self, k: int) -> Congruence:
        return Congruence(abs(k))

    def add(self, a, b):
        return self.join(a, b) if not (self.is_bottom(a) or self.is_bottom(b)) else CBOT

    def neg(self, a):
        return a

    def add_const(self, a, k: int):
        return self.add(a, self.const(k))

    def refine_const(self, a, op: str, k: int):
        if op == "=":
            return Congruence(abs(k)) if self.contains(a, k) else CBOT
        return a

    def refine_pair(self, a, b, op: str, d: int):
        if self.is_bottom(a) or self.is_bottom(b):
            return CBOT, CBOT
        if op == "=":
            a2 = self.meet(a, self.add_const(b, d))
            b2 = self.meet(b, self.add_const(a, -d))
            return a2, b2
        return a, b

    def to_interval(self, a: Congruence) -> Interval:
        if a.modulus is None:
            return IBOT
        return Interval(0, 0) if a.modulus == 0 else ITOP


CONGRUENCE = register(CongruenceDomain())


def parity_of_interval(a: Interval) -> Parity:
    if a.is_bottom:
        return Parity.BOT
    if a.is_singleton:
        return PARITY.const(a.lo)
    return Parity.TOP


def parity_of_congruence(a: Congruence) -> Parity:
    if a.modulus is None:
        return Parity.BOT
    return Parity.EVEN if a.modulus % 2 == 0 else Parity.TOP
