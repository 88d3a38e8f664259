from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslp.errors import FingerNotSet, NotCnf, PositionOutOfRange
from cslp.finger import (
    FingerState,
    PathBalancedIndex,
    PathBalanceParams,
    SkewForestSet,
    check_path_balance,
    fringe_access,
    fringe_access_path_balanced,
    iterated_log_floors,
    prepare,
    preprocess_fringe,
)
from cslp.generators import balanced_slp, gen_lower_bound, lz78_slp, random_slp, repetitive_string
from cslp.grammar import Slp

from conftest import text


def test_iterated_log_floors():
    assert iterated_log_floors(65536, 4) == [65536, 16, 4, 2]
    assert iterated_log_floors(1, 3) == [1, 0, 0]
    assert iterated_log_floors(10**18, 1) == [10**18]


def test_skew_forests_need_cnf():
    with pytest.raises(NotCnf):
        SkewForestSet(Slp.from_rules([("S", ["a", "b", "a"])], start="S"))
    with pytest.raises(ValueError):
        SkewForestSet(prepare(gen_lower_bound(2)).slp, 0)


def test_prepare_keeps_every_variable():
    g = gen_lower_bound(3)
    p = prepare(g)
    for v in range(g.num_vars):
        assert text(p.slp, p.representative[v]) == text(g, v)


@pytest.mark.parametrize("t", [1, 2, 3, 4])
def test_fringe_access_every_position(t):
    g = prepare(gen_lower_bound(4)).slp
    sf = preprocess_fringe(g, t)
    s = text(g, g.start)
    n = len(s)
    for i in range(1, n + 1):
        r = fringe_access(sf, g.start, i)
        assert r.symbol == s[i - 1]
        d = min(i, n - i + 1)
        assert r.steps <= 6 * math.log2(d + 2) + 12
    with pytest.raises(PositionOutOfRange):
        fringe_access(sf, g.start, n + 1)


def test_finger_needs_set():
    fs = FingerState(SkewForestSet(prepare(gen_lower_bound(2)).slp))
    with pytest.raises(FingerNotSet):
        fs.movefinger(1)
    with pytest.raises(FingerNotSet):
        fs.access(1)
    with pytest.raises(PositionOutOfRange):
        fs.setfinger(0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), g=st.integers(2, 80), t=st.integers(1, 4))
def test_finger_session_matches_string(seed, g, t):
    rng = random.Random(seed)
    src = random_slp(rng, g, 4000)
    s = text(src, src.start)
    n = len(s)
    fs = FingerState(SkewForestSet(prepare(src).slp, t))
    fs.setfinger(rng.randint(1, n))
    fs.check()
    for _ in range(60):
        i = rng.randint(1, n)
        if rng.random() < 0.5:
            fs.movefinger(i)
            fs.check()
            assert fs.symbol() == s[i - 1]
        else:
            assert fs.access(i) == s[i - 1]


def test_local_moves_are_cheap():
    s = repetitive_string(random.Random(2), 20000)
    fs = FingerState(SkewForestSet(prepare(lz78_slp(s, ["a", "b", "c"])).slp, 3))
    fs.setfinger(10000)
    for k in range(10001, 10400):
        fs.movefinger(k)
        assert fs.symbol() == s[k - 1]
        assert fs.last_steps <= 40


def test_path_balanced_fringe():
    rng = random.Random(5)
    g = balanced_slp(rng, 5000)
    assert check_path_balance(g, PathBalanceParams(0.4, 3.0))
    ix = PathBalancedIndex(g)
    s = text(g, g.start)
    n = len(s)
    for i in list(range(1, 200)) + list(range(n - 200, n + 1)) + [rng.randint(1, n) for _ in range(200)]:
        sym, steps = fringe_access_path_balanced(ix, g.start, i)
        assert sym == s[i - 1]
        assert steps <= 4 * math.log2(min(i, n - i + 1) + 2) + 6
    with pytest.raises(NotCnf):
        PathBalancedIndex(gen_lower_bound(2))


def test_path_balance_params():
    with pytest.raises(ValueError):
        PathBalanceParams(0.0, 1.0)
    with pytest.raises(ValueError):
        PathBalanceParams(2.0, 1.0)
