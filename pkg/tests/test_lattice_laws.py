from __future__ import annotations

import itertools
import random

import pytest

from prodint.diff import DiffDomain, make_store
from prodint.lattice import (
    Domain,
    DomainMismatch,
    FiniteUniverse,
    check_laws,
    lattice_height,
    register,
    registered,
    widening_chain_length,
)
from prodint.numeric import (
    BOOL,
    CONGRUENCE,
    INF,
    INTERVAL,
    PARITY,
    SIGN,
    BoolAbs,
    Congruence,
    Interval,
    Parity,
    Sign,
)
from prodint.products import Cartesian

U = FiniteUniverse(-16, 16)


def interval_samples(rng: random.Random, n: int = 400) -> list[Interval]:
    bounds = list(range(-12, 13))
    out = [Interval(INF, -INF), Interval(-INF, INF)]
    while len(out) < n:
        lo = rng.choice(bounds + [-INF])
        hi = rng.choice(bounds + [INF])
        out.append(Interval(lo, hi))
    return out


def congruence_samples() -> list[Congruence]:
    return [Congruence(None)] + [Congruence(m) for m in range(0, 13)]


def diff_samples(rng: random.Random, variables, n: int = 150):
    out = [make_store([]), DiffDomain().bottom()]
    while len(out) < n:
        k = rng.randint(1, 3)
        cons = []
        for _ in range(k):
            x, y = rng.sample(list(variables), 2)
            cons.append((x, y, rng.randint(-3, 4)))
        out.append(make_store(cons))
    return out


@pytest.mark.parametrize("domain", [PARITY, SIGN, BOOL], ids=lambda d: d.name)
def test_atom_domains_exhaustive(domain):
    elems = domain.elements()
    report = check_laws(domain, elems, U)
    assert report.checked == len(elems) ** 3
    assert report.ok, report.violations


@pytest.mark.parametrize(
    "left,right",
    [(PARITY, SIGN), (PARITY, PARITY), (SIGN, SIGN), (SIGN, PARITY), (BOOL, BOOL)],
    ids=lambda d: d.name,
)
def test_atom_products_exhaustive(left, right):
    d = Cartesian(left, right)
    elems = [d.value_type(a, b) for a in left.elements() for b in right.elements()]
    report = check_laws(d, elems, U, max_cases=len(elems) ** 3)
    assert report.checked == len(elems) ** 3
    assert report.ok, report.violations


def test_interval_randomized():
    samples = interval_samples(random.Random(1))
    report = check_laws(INTERVAL, samples, U, max_cases=10_000, seed=7)
    assert report.checked == 10_000
    assert report.ok, report.violations[:5]


def test_congruence_randomized():
    samples = congruence_samples()
    report = check_laws(CONGRUENCE, samples, U, max_cases=10_000, seed=7)
    # 14 samples give fewer than 10^4 triples: they are all checked
    assert report.checked == len(samples) ** 3
    assert report.ok, report.violations[:5]
    extra = check_laws(CONGRUENCE, samples * 2, U, max_cases=10_000, seed=8)
    assert extra.checked == 10_000 and extra.ok


def test_diff_randomized():
    d = DiffDomain(("x", "y", "z"))
    samples = diff_samples(random.Random(3), d.variables)
    report = check_laws(d, samples, FiniteUniverse(-5, 5), max_cases=10_000, seed=7)
    assert report.checked == 10_000
    assert report.ok, report.violations[:5]


def test_interval_widening_escalations_bounded():
    rng = random.Random(11)
    for _ in range(200):
        lo, hi = rng.randint(-5, 5), rng.randint(5, 10)
        chain = [Interval(lo - k * rng.randint(0, 3), hi + k * rng.randint(0, 3)) for k in range(100)]
        acc, joined = [], chain[0]
        for c in chain:
            joined = INTERVAL.join(joined, c)
            acc.append(joined)
        n = widening_chain_length(INTERVAL, acc, bound=64)
        assert n is not None and n <= 2


def test_congruence_ascending_chain_is_finite():
    chain = [Congruence(2**10 * 3**4 // d) for d in (1, 2, 4, 8, 3, 6, 12, 24, 48, 144, 432, 1296)]
    acc = list(itertools.accumulate(chain, CONGRUENCE.join))
    assert widening_chain_length(CONGRUENCE, acc, bound=64) is not None


def test_mismatched_domain_rejected():
    with pytest.raises(DomainMismatch):
        INTERVAL.join(Interval(0, 1), Parity.ODD)
    with pytest.raises(DomainMismatch):
        PARITY.leq(Sign.POS, Parity.ODD)


def test_universe_validation():
    with pytest.raises(ValueError):
        FiniteUniverse(3, 2)
    with pytest.raises(ValueError):
        FiniteUniverse(0, 10_000)
    assert len(FiniteUniverse(-2, 2)) == 5


def test_registry_rejects_duplicates():
    assert {"interval", "parity", "sign", "bool", "congruence"} <= set(registered())

    class Dup(Domain):
        name = "interval"

    with pytest.raises(ValueError):
        register(Dup())


def test_law_checker_finds_broken_join():
    class BrokenJoin(type(INTERVAL)):
        name = "broken"

        def join(self, a, b):
            j = super().join(a, b)
            return j if j.is_bottom or j.lo == -INF else Interval(j.lo + 1, j.hi)

    samples = interval_samples(random.Random(0), 50)
    report = check_laws(BrokenJoin(), samples, U, max_cases=2000)
    assert not report.ok
    assert any(law == "join-sound" for law, _ in report.violations)


def test_heights_of_small_lattices():
    assert lattice_height(PARITY.elements(), PARITY.leq) == 2
    assert lattice_height(SIGN.elements(), SIGN.leq) == 3
    assert lattice_height(BOOL.elements(), BOOL.leq) == 2


def test_bool_concretization():
    assert BOOL.gamma_enum(BoolAbs.TT, U) == frozenset({True})
    assert BOOL.gamma_enum(BoolAbs.TOP, U) == frozenset({False, True})
