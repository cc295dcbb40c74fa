from __future__ import annotations

import itertools
from collections import Counter

import pytest

from prodint.lattice import DomainMismatch, FiniteUniverse, lattice_height
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
from prodint.products import (
    CardinalPower,
    Cartesian,
    PairValue,
    Reduced,
    cartesian_apply,
    instrument_counters,
    pair_gamma,
    power_abstract,
    power_pointwise,
    reduce_fixpoint,
    reduce_iterates,
    rho_interval_congruence,
    rho_interval_parity,
)

U16 = FiniteUniverse(-16, 16)
U8 = FiniteUniverse(-8, 8)
O, E = Parity.ODD, Parity.EVEN
IBOT = Interval(INF, -INF)

INTERVALS = (
    [IBOT, Interval(-INF, INF)]
    + [Interval(a, b) for a in range(-12, 13) for b in range(a, 13)]
    + [Interval(-INF, b) for b in range(-12, 13, 3)]
    + [Interval(a, INF) for a in range(-12, 13, 3)]
)
CONGRUENCES = [Congruence(None)] + [Congruence(m) for m in range(0, 9)]


def iv(a, b):
    return Interval(a, b)


# golden values


@pytest.mark.parametrize("a", [iv(2, 4), iv(2, 3), iv(3, 4)])
def test_interval_parity_reduces_to_three(a):
    assert reduce_fixpoint(rho_interval_parity(), PairValue(a, O)) == PairValue(iv(3, 3), O)


def test_interval_parity_empty():
    assert reduce_fixpoint(rho_interval_parity(), PairValue(iv(1, 1), E)) == PairValue(IBOT, Parity.BOT)


def test_interval_congruence_golden():
    rule = rho_interval_congruence()
    assert reduce_fixpoint(rule, PairValue(iv(2, 2), Congruence(3))) == PairValue(IBOT, Congruence(None))
    assert reduce_fixpoint(rule, PairValue(iv(4, 5), Congruence(2))) == PairValue(iv(4, 4), Congruence(4))


def test_single_steps():
    rp, rc = rho_interval_parity(), rho_interval_congruence()
    assert rp.rho1(PairValue(iv(2, 3), O)) == iv(3, 3)
    assert rp.rho1(PairValue(iv(1, 1), E)) == IBOT
    assert rp.rho2(PairValue(iv(7, 7), Parity.TOP)) == O
    assert PARITY.alpha([7]) == O
    assert rc.rho1(PairValue(iv(2, 2), Congruence(3))) == IBOT
    assert rc.rho1(PairValue(iv(4, 5), Congruence(2))) == iv(4, 4)
    assert rc.rho2(PairValue(iv(4, 4), Congruence(2))) == Congruence(4)
    assert rc.rho2(PairValue(iv(0, 0), Congruence(1))) == Congruence(0)


def test_pair_gamma_examples():
    assert pair_gamma(PairValue(iv(2, 4), O), U8, INTERVAL, PARITY) == frozenset({3})
    assert pair_gamma(PairValue(iv(1, 1), E), U8, INTERVAL, PARITY) == frozenset()
    assert pair_gamma(PairValue(Interval(-INF, INF), Parity.TOP), U8, INTERVAL, PARITY) == frozenset(U8.values())


def test_cartesian_apply_examples():
    j = cartesian_apply("join", PairValue(iv(1, 2), O), PairValue(iv(3, 4), O), INTERVAL, PARITY)
    assert j == PairValue(iv(1, 4), O)
    assert cartesian_apply("leq", PairValue(iv(2, 3), O), PairValue(iv(2, 4), Parity.TOP), INTERVAL, PARITY)
    w = cartesian_apply("widen", PairValue(iv(0, 1), E), PairValue(iv(0, 2), Parity.TOP), INTERVAL, PARITY)
    assert w == PairValue(iv(0, INF), Parity.TOP)
    with pytest.raises(DomainMismatch):
        cartesian_apply("join", PairValue(iv(1, 2), O), PairValue(iv(1, 2), Sign.POS), INTERVAL, PARITY)
    with pytest.raises(ValueError):
        cartesian_apply("frobnicate", PairValue(iv(1, 2), O), PairValue(iv(1, 2), O), INTERVAL, PARITY)


# reduction contract, exhaustive


def _contract(rule, left, right, lefts, rights, max_iterations=None):
    for a, b in itertools.product(lefts, rights):
        p = PairValue(a, b)
        before = pair_gamma(p, U16, left, right)
        seq = reduce_iterates(rule, p)
        r = seq[-1]
        assert rule.step(r) == r, p
        assert left.leq(r.left, a) and right.leq(r.right, b), p
        assert pair_gamma(r, U16, left, right) == before, p
        if max_iterations is not None:
            assert len(seq) - 1 <= max_iterations, (p, seq)
        # Granger step conditions
        r1 = rule.rho1(p)
        assert left.leq(r1, a)
        assert pair_gamma(PairValue(r1, b), U16, left, right) == before
        r2 = rule.rho2(p)
        assert right.leq(r2, b)
        assert pair_gamma(PairValue(a, r2), U16, left, right) == before


def test_interval_parity_contract_exhaustive():
    _contract(rho_interval_parity(), INTERVAL, PARITY, INTERVALS, PARITY.elements(), max_iterations=3)


def test_interval_congruence_contract_exhaustive():
    _contract(rho_interval_congruence(), INTERVAL, CONGRUENCE, INTERVALS, CONGRUENCES)


def test_reduced_domain_normalizes_bottom():
    d = Reduced(INTERVAL, PARITY, rho_interval_parity())
    assert d.meet(PairValue(iv(0, 4), O), PairValue(iv(2, 2), Parity.TOP)) == d.bottom()
    assert d.join(PairValue(iv(2, 2), O), PairValue(iv(4, 5), E)) == PairValue(iv(2, 5), Parity.TOP)
    # widening results are not reduced
    w = d.widen(PairValue(iv(1, 1), O), PairValue(iv(1, 3), O))
    assert w == PairValue(iv(1, INF), O)


def test_reduction_rejects_zero_cap():
    with pytest.raises(ValueError):
        reduce_fixpoint(rho_interval_parity(), PairValue(iv(0, 1), O), cap=0)


# cardinal power


def test_power_pointwise_examples():
    p = CardinalPower(INTERVAL, PARITY, (O, E))
    f = p.make({O: IBOT, E: iv(-16, 0)})
    g = p.make({O: iv(-16, -16), E: IBOT})
    assert power_pointwise("join", f, g, p) == p.make({O: iv(-16, -16), E: iv(-16, 0)})
    q = CardinalPower(SIGN, BOOL, (BoolAbs.TT, BoolAbs.FF))
    assert power_pointwise("leq", q.make([Sign.BOT, Sign.ZERO]), q.make([Sign.POS, Sign.NONPOS]), q)
    r = CardinalPower(INTERVAL, PARITY, (O,))
    assert power_pointwise("widen", r.make([iv(0, 0)]), r.make([iv(0, 1)]), r) == r.make([iv(0, INF)])


def test_power_atom_mismatch_rejected():
    p = CardinalPower(INTERVAL, PARITY, (O, E))
    q = CardinalPower(INTERVAL, PARITY, (E, O))
    with pytest.raises(DomainMismatch):
        p.join(p.top(), q.top())
    with pytest.raises(ValueError):
        CardinalPower(INTERVAL, PARITY, (O, Parity.TOP))


def test_power_abstract_examples():
    assert power_abstract({3}, (O, E), U16, INTERVAL, PARITY).table == (iv(3, 3), IBOT)
    assert power_abstract(set(), (O, E), U16, INTERVAL, PARITY).table == (IBOT, IBOT)
    assert power_abstract({-16, 0}, (O, E), U16, INTERVAL, PARITY).table == (IBOT, iv(-16, 0))


def test_power_gamma_is_implication():
    p = CardinalPower(INTERVAL, PARITY, (O, E))
    f = p.make({O: iv(1, 3), E: iv(-4, 0)})
    assert p.gamma_enum(f, U8) == frozenset({1, 3, -4, -2, 0})


def test_induced_map_isotone():
    p = CardinalPower(INTERVAL, PARITY, (O, E))
    for lo, hi in itertools.product(range(-3, 3), repeat=2):
        f = p.make({O: iv(lo, lo + 1), E: iv(hi, hi + 2)})
        for x, y in itertools.product(PARITY.elements(), repeat=2):
            if PARITY.leq(x, y):
                assert INTERVAL.leq(p.induced(f, x), p.induced(f, y))
        assert p.induced(f, Parity.BOT) == IBOT


# counters


def test_cartesian_op_counts():
    def run(wrap):
        d = Cartesian(wrap(INTERVAL), wrap(PARITY))
        d.join(PairValue(iv(0, 1), O), PairValue(iv(3, 3), O))
        d.widen(PairValue(iv(0, 1), O), PairValue(iv(3, 3), O))
        d.leq(PairValue(iv(0, 1), O), PairValue(iv(3, 3), O))

    _, counts = instrument_counters(run)
    assert counts["interval"] == Counter({"join": 1, "widen": 1, "leq": 1})
    assert counts["parity"] == Counter({"join": 1, "widen": 1, "leq": 1})


@pytest.mark.parametrize("n", [2, 4])
def test_power_op_counts(n):
    atoms = (iv(-INF, -1), iv(0, 0), iv(1, 5), iv(6, INF))[:n] if n == 4 else (O, E)
    exponent = INTERVAL if n == 4 else PARITY

    def run(wrap):
        p = CardinalPower(wrap(SIGN), exponent, atoms)
        f = p.make([Sign.POS] * n)
        p.join(f, f)
        p.widen(f, f)

    _, counts = instrument_counters(run)
    assert counts["sign"] == Counter({"join": n, "widen": n})


# heights (measured, see the ledger for the comparison with closed formulas)


def _product_elements(a, b):
    return [PairValue(x, y) for x in a.elements() for y in b.elements()]


def test_measured_heights():
    pb = Cartesian(PARITY, BOOL)
    h_product = lattice_height(_product_elements(PARITY, BOOL), pb.leq)
    power = CardinalPower(PARITY, BOOL, (BoolAbs.TT, BoolAbs.FF))
    maps = [power.make([x, y]) for x in PARITY.elements() for y in PARITY.elements()]
    h_power = lattice_height(maps, power.leq)
    assert (h_product, h_power) == (4, 4)
    # stable across repeated measurement and element order
    assert lattice_height(list(reversed(maps)), power.leq) == h_power
    sp = Cartesian(SIGN, PARITY)
    assert lattice_height(_product_elements(SIGN, PARITY), sp.leq) == 5
