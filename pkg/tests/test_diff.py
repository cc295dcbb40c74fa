from __future__ import annotations

import itertools
import random

import numpy as np
import pytest

from prodint.diff import (
    DIFF_BOTTOM,
    DIFF_TOP,
    DiffDomain,
    diff_assign,
    diff_assume,
    diff_close,
    diff_entails,
    diff_join,
    diff_leq,
    diff_widen,
    make_store,
    rho_diff_to_intervals,
    rho_intervals_to_diff,
)
from prodint.lattice import FiniteUniverse
from prodint.numeric import INF, Interval
from prodint.parser import parse_cond, parse_expr

VARS = ("x", "y", "z")
D = DiffDomain(VARS)
U = FiniteUniverse(-8, 8)
GRID = np.array(list(U.tuples(3)), dtype=np.int64)
COL = {v: GRID[:, i] for i, v in enumerate(VARS)}
PAIRS = [(a, b) for a in VARS for b in VARS if a != b]
SINGLES = [make_store([(a, b, c)]) for a, b in PAIRS for c in range(-4, 5)]
DOUBLES = [make_store([p, q]) for p, q in itertools.combinations([(a, b, c) for a, b in PAIRS for c in range(-4, 5)], 2)]
OPS = {
    "<": np.less, "<=": np.less_equal, ">": np.greater, ">=": np.greater_equal, "=": np.equal,
}


def g(s):
    return D.gamma_mask(s, U)


def cond_mask(x, op, y, k):
    return OPS[op](COL[x], COL[y] + k)


def show(x, op, y, k):
    return f"{x} {op} {y} + {k}" if k >= 0 else f"{x} {op} {y} - {-k}"


def test_strict_chain_arithmetic():
    s = make_store([("i", "l", 0), ("l", "len", 1)])
    assert diff_entails(s, "i", "len", 0)
    s = make_store([("i", "l", 0), ("l", "len", 2)])
    assert diff_entails(s, "i", "len", 1)
    assert not diff_entails(s, "i", "len", 0)
    assert s.bound("i", "len") == 1


def test_infeasible_cycle_is_bottom():
    assert make_store([("i", "l", 0), ("l", "i", 0)]) is DIFF_BOTTOM
    # brute force confirms no integer pair satisfies both
    assert not any(i < l and l < i for i in range(-8, 9) for l in range(-8, 9))
    assert diff_assume(parse_cond("i < l"), make_store([("l", "i", 0)])).is_bottom
    assert make_store([("x", "x", 0)]).is_bottom
    assert make_store([("x", "x", 1)]) == DIFF_TOP


def test_join_examples():
    a = make_store([("l", "len", 2)])
    b = make_store([("l", "len", 1), ("len", "l", 1)])
    assert diff_join(a, b) == make_store([("l", "len", 2)])
    assert diff_join(a, DIFF_BOTTOM) == a
    assert diff_join(make_store([("x", "y", 0)]), make_store([("y", "x", 0)])) == DIFF_TOP


def test_assume_examples():
    assert diff_assume(parse_cond("i < l"), DIFF_TOP) == make_store([("i", "l", 0)])
    s = diff_assume(parse_cond("len < l + 1"), DIFF_TOP)
    s = diff_assume(parse_cond("l < len + 1"), s)
    assert str(s) == "{l < len + 1, len < l + 1}"
    assert diff_assume(parse_cond("x >= x"), s) == s
    assert diff_assume(parse_cond("x < 3"), s) == s


def test_assign_examples():
    assert diff_assign("i", parse_expr("i + 1"), make_store([("i", "l", 0)])) == make_store([("i", "l", 1)])
    assert diff_assign("len", parse_expr("l"), DIFF_TOP) == make_store([("len", "l", 1), ("l", "len", 1)])
    assert diff_assign("x", parse_expr("5"), make_store([("x", "y", 0)])) == DIFF_TOP


def test_assign_keeps_consequences_through_killed_variable():
    s = make_store([("a", "x", 0), ("x", "b", 0)])
    out = diff_assign("x", parse_expr("7"), s)
    assert out == make_store([("a", "b", -1)])


def test_entails_bottom_and_render():
    assert diff_entails(DIFF_BOTTOM, "a", "b", -100)
    assert str(make_store([("b", "a", -2), ("a", "c", 0)])) == "{a < c + 0, b < a - 2, b < c - 3}"


def test_closure_idempotent_and_exact():
    rng = random.Random(5)
    for _ in range(300):
        cons = [(*rng.sample(VARS, 2), rng.randint(-4, 4)) for _ in range(rng.randint(1, 4))]
        s = make_store(cons)
        assert diff_close(diff_close(s)) == diff_close(s)
        expected = np.ones(len(GRID), dtype=bool)
        for x, y, c in cons:
            expected &= COL[x] < COL[y] + c
        # closing never changes the meaning (over a window wide enough for these constants)
        assert np.array_equal(g(s), expected) or not expected.any() and s.is_bottom


def test_join_sound_and_least_exhaustive():
    stores = SINGLES + [DIFF_TOP, DIFF_BOTTOM]
    for a, b in itertools.product(stores, repeat=2):
        j = diff_join(a, b)
        assert not np.any((g(a) | g(b)) & ~g(j))
        assert diff_leq(a, j) and diff_leq(b, j)


def test_join_least_upper_bound_random():
    rng = random.Random(9)
    pool = SINGLES + DOUBLES[::7]
    for _ in range(2000):
        a, b, c = rng.choice(pool), rng.choice(pool), rng.choice(pool)
        if diff_leq(a, c) and diff_leq(b, c):
            assert diff_leq(diff_join(a, b), c)


@pytest.mark.parametrize("op", sorted(OPS))
def test_assume_sound_exhaustive(op):
    stores = SINGLES + [DIFF_TOP]
    for s in stores:
        gs = g(s)
        for x, y in PAIRS:
            for k in range(-3, 4):
                out = diff_assume(parse_cond(show(x, op, y, k)), s)
                assert not np.any(gs & cond_mask(x, op, y, k) & ~g(out))


def test_entails_sound_exhaustive():
    for s in DOUBLES[::3] + SINGLES:
        gs = g(s)
        for x, y in PAIRS:
            for k in range(-4, 5):
                if diff_entails(s, x, y, k):
                    assert not np.any(gs & ~cond_mask(x, "<", y, k))


def test_assign_sound_by_substitution():
    exprs = ["y + 1", "y - 2", "x + 1", "x - 3", "4", "y + z"]
    for s in SINGLES[::2] + DOUBLES[::41]:
        pts = GRID[g(s)]
        for text in exprs:
            out = diff_assign("x", parse_expr(text), s)
            env = {v: pts[:, i] for i, v in enumerate(VARS)}
            new = pts.copy()
            new[:, 0] = eval(text, {}, env) if text != "4" else 4
            for a, b, c in out.constraints:
                ia, ib = VARS.index(a), VARS.index(b)
                assert np.all(new[:, ia] < new[:, ib] + c), (s, text, (a, b, c))


def test_widen_keeps_stable_constraints():
    s1 = make_store([("i", "n", 0), ("i", "m", 3)])
    s2 = make_store([("i", "n", 0), ("i", "m", 4)])
    assert diff_widen(s1, s2) == make_store([("i", "n", 0)])
    assert diff_widen(DIFF_BOTTOM, s2) == s2


def test_intervals_to_diff():
    s = rho_intervals_to_diff({"l": Interval(-INF, 0), "len": Interval(1, 1)}, DIFF_TOP)
    assert s.bound("l", "len") == 0
    s = rho_intervals_to_diff({"l": Interval(-INF, 2), "len": Interval(1, 1)}, DIFF_TOP)
    assert s.bound("l", "len") == 2
    s = rho_intervals_to_diff({"x": Interval(0, INF), "y": Interval(0, 3)}, DIFF_TOP)
    assert s.bound("x", "y") is None
    assert s.bound("y", "x") == 4


def test_diff_to_intervals_backflow():
    out = rho_diff_to_intervals({"i": Interval(0, INF), "n": Interval(0, 5)}, make_store([("i", "n", 0)]))
    assert out["i"] == Interval(0, 4)
    assert out["n"] == Interval(1, 5)
