"""Abstract-domain contract shared by every domain in the package.

A domain object carries the lattice operations; values are plain immutable
objects. Concretization is only ever enumerated over a small
``FiniteUniverse`` and only from tests and the soundness checker.
"""

from __future__ import annotations

import functools
import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np


class DomainMismatch(TypeError):
    """Raised when values of two different domains are combined."""


@dataclass(frozen=True)
class DomainDescriptor:
    name: str
    has_finite_height: bool
    widening_is_join: bool


@dataclass(frozen=True)
class FiniteUniverse:
    """The integers ``lo..hi``, used as an enumerable concrete domain."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"empty universe [{self.lo}, {self.hi}]")
        if self.hi - self.lo > 256:
            raise ValueError("universe wider than 256 values")

    def values(self) -> range:
        return range(self.lo, self.hi + 1)

    def tuples(self, arity: int) -> Iterable[tuple[int, ...]]:
        return itertools.product(self.values(), repeat=arity)

    def __len__(self) -> int:
        return self.hi - self.lo + 1


class Domain:
    """Base class for abstract domains.

    Subclasses implement ``bottom``, ``top``, ``leq``, ``join``, ``meet`` and
    ``contains`` (the membership test behind concretization). Finite-height
    domains keep the default widening, which is the join.
    """

    name = "domain"
    has_finite_height = False
    widening_is_join = False
    value_type: type | tuple[type, ...] = object

    @property
    def descriptor(self) -> DomainDescriptor:
        return DomainDescriptor(self.name, self.has_finite_height, self.widening_is_join)

    def _own(self, *values: Any) -> None:
        for v in values:
            if not isinstance(v, self.value_type):
                raise DomainMismatch(f"{v!r} is not a {self.name} value")

    def bottom(self) -> Any:
        raise NotImplementedError

    def top(self) -> Any:
        raise NotImplementedError

    def is_bottom(self, a: Any) -> bool:
        return a == self.bottom()

    def leq(self, a: Any, b: Any) -> bool:
        raise NotImplementedError

    def join(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def meet(self, a: Any, b: Any) -> Any:
        raise NotImplementedError

    def widen(self, a: Any, b: Any) -> Any:
        return self.join(a, b)

    def contains(self, a: Any, v: Any) -> bool:
        raise NotImplementedError

    def points(self, u: FiniteUniverse) -> Iterable[Any]:
        """Concrete points of the test universe this domain talks about."""
        return u.values()

    def gamma_enum(self, a: Any, u: FiniteUniverse) -> frozenset:
        return frozenset(v for v in self.points(u) if self.contains(a, v))

    def gamma_mask(self, a: Any, u: FiniteUniverse) -> np.ndarray:
        pts = list(self.points(u))
        return np.fromiter((self.contains(a, v) for v in pts), dtype=bool, count=len(pts))

    def render(self, a: Any) -> str:
        return str(a)


_REGISTRY: dict[str, Domain] = {}


def register(domain: Domain) -> Domain:
    if domain.name in _REGISTRY and _REGISTRY[domain.name] is not domain:
        raise ValueError(f"domain name {domain.name!r} already registered")
    _REGISTRY[domain.name] = domain
    return domain


def registered() -> dict[str, Domain]:
    return dict(_REGISTRY)


@dataclass
class LawReport:
    checked: int = 0
    violations: list[tuple[str, tuple]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def fail(self, law: str, *witness: Any) -> None:
        self.violations.append((law, witness))


def _cases(samples: Sequence[Any], max_cases: int, rng: random.Random):
    n = len(samples)
    if n**3 <= max_cases:
        yield from itertools.product(samples, repeat=3)
        return
    for _ in range(max_cases):
        yield rng.choice(samples), rng.choice(samples), rng.choice(samples)


def check_laws(
    d: Domain,
    samples: Sequence[Any],
    u: FiniteUniverse,
    *,
    max_cases: int = 10_000,
    seed: int = 0,
    exact_meet: bool = True,
    escalation_bound: int = 64,
) -> LawReport:
    """Check lattice, Galois and widening laws of ``d`` on ``samples``.

    All triples are checked when there are at most ``max_cases`` of them,
    otherwise ``max_cases`` triples are drawn with a fixed seed. Violations
    are returned as data.
    """
    if not samples:
        raise ValueError("check_laws needs at least one sample")
    report = LawReport()
    rng = random.Random(seed)
    cache: dict[Any, np.ndarray] = {}

    def g(a: Any) -> np.ndarray:
        m = cache.get(a)
        if m is None:
            m = cache[a] = d.gamma_mask(a, u)
        return m

    def subset(x: np.ndarray, y: np.ndarray) -> bool:
        return not np.any(x & ~y)

    # values are immutable and hashable, so binary results can be memoized
    leq, join, meet = (functools.lru_cache(maxsize=None)(f) for f in (d.leq, d.join, d.meet))
    seen_pairs: set[tuple[Any, Any]] = set()
    for a, b, c in _cases(samples, max_cases, rng):
        report.checked += 1
        ab, mab = join(a, b), meet(a, b)
        if join(ab, c) != join(a, join(b, c)):
            report.fail("join-associative", a, b, c)
        if meet(mab, c) != meet(a, meet(b, c)):
            report.fail("meet-associative", a, b, c)
        if leq(a, b) and leq(b, c) and not leq(a, c):
            report.fail("leq-transitive", a, b, c)
        if (a, b) in seen_pairs:
            continue
        seen_pairs.add((a, b))
        if ab != join(b, a):
            report.fail("join-commutative", a, b)
        if mab != meet(b, a):
            report.fail("meet-commutative", a, b)
        if join(a, a) != a:
            report.fail("join-idempotent", a)
        if meet(a, a) != a:
            report.fail("meet-idempotent", a)
        if join(a, mab) != a or meet(a, ab) != a:
            report.fail("absorption", a, b)
        if leq(a, b) != (ab == b):
            report.fail("leq-join-consistent", a, b)
        if not (leq(a, ab) and leq(b, ab) and leq(mab, a) and leq(mab, b)):
            report.fail("bounds", a, b)
        if not leq(a, a):
            report.fail("leq-reflexive", a)
        if leq(a, b) and leq(b, a) and a != b:
            report.fail("leq-antisymmetric", a, b)
        ga, gb = g(a), g(b)
        if leq(a, b) and not subset(ga, gb):
            report.fail("gamma-monotone", a, b)
        if not subset(ga | gb, g(ab)):
            report.fail("join-sound", a, b)
        gm = g(mab)
        if exact_meet:
            if not np.array_equal(gm, ga & gb):
                report.fail("meet-exact", a, b)
        elif not subset(ga & gb, gm):
            report.fail("meet-sound", a, b)
        if not leq(ab, d.widen(a, b)):
            report.fail("widen-covers", a, b)
    if d.is_bottom(d.bottom()) and g(d.bottom()).any():
        report.fail("gamma-bottom-empty", d.bottom())
    if not g(d.top()).all():
        report.fail("gamma-top-full", d.top())
    _check_widening_termination(d, samples, report, rng, escalation_bound)
    return report


def _check_widening_termination(
    d: Domain, samples: Sequence[Any], report: LawReport, rng: random.Random, bound: int
) -> None:
    # Cycle shuffled samples through the widening until a whole pass is stable.
    for start in samples[: min(len(samples), 32)]:
        order = list(samples)
        rng.shuffle(order)
        x, escalations = start, 0
        changed = True
        while changed and escalations <= bound:
            changed = False
            for y in order:
                nxt = d.widen(x, d.join(x, y))
                if nxt != x:
                    changed = True
                    escalations += 1
                    x = nxt
        if escalations > bound:
            report.fail("widen-terminates", start)


def widening_chain_length(d: Domain, chain: Iterable[Any], bound: int = 64) -> int | None:
    """Widen along ``chain`` and return the number of escalations, or None past ``bound``."""
    it = iter(chain)
    try:
        x = next(it)
    except StopIteration:
        return 0
    n = 0
    for y in it:
        nxt = d.widen(x, y)
        if nxt != x:
            n += 1
            if n > bound:
                return None
        x = nxt
    return n


def lattice_height(elements: Sequence[Any], leq: Callable[[Any, Any], bool]) -> int:
    """Length (in edges) of the longest strictly increasing chain."""
    elems = list(elements)
    below = {
        i: [j for j, y in enumerate(elems) if j != i and leq(y, x) and not leq(x, y)]
        for i, x in enumerate(elems)
    }
    memo: dict[int, int] = {}

    def h(i: int) -> int:
        if i not in memo:
            memo[i] = max((h(j) + 1 for j in below[i]), default=0)
        return memo[i]

    return max(h(i) for i in range(len(elems)))


COUNTED_OPS = frozenset(
    {
        "leq", "join", "meet", "widen",
        "assign", "bool_assign", "alloc", "store", "assume", "refine", "restrict",
    }
)


class Counting:
    """Proxy around a domain that counts calls of the lattice and transfer ops."""

    def __init__(self, inner: Any, counts: Counter | None = None) -> None:
        self._inner = inner
        self.counts: Counter = Counter() if counts is None else counts

    def __getattr__(self, name: str) -> Any:
        attr = getattr(self._inner, name)
        if name in COUNTED_OPS and callable(attr):
            counts = self.counts

            def counted(*args: Any, **kwargs: Any) -> Any:
                counts[name] += 1
                return attr(*args, **kwargs)

            return counted
        return attr

    def __repr__(self) -> str:
        return f"Counting({self._inner!r})"
