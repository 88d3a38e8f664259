from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.stateful import RuleBasedStateMachine, invariant, rule

from cslp.ancestry import (
    LevelAncestor,
    PredSet,
    WaIndex,
    WeightedTree,
    naive_wa,
    wa_build,
    wa_build_small,
    wa_query,
)
from cslp.errors import CapacityExceeded, HeightTooLarge, TreeTooLarge


class PredSetModel(RuleBasedStateMachine):
    def __init__(self):
        super().__init__()
        self.s = PredSet(24)
        self.model: dict[int, int] = {}

    keys = st.integers(-50, 50)

    @rule(x=keys, v=st.integers())
    def insert(self, x, v):
        if x not in self.model and len(self.model) >= 24:
            with pytest.raises(CapacityExceeded):
                self.s.insert(x, v)
            return
        self.s.insert(x, v)
        self.model[x] = v

    @rule(xs=st.lists(keys, unique=True, max_size=8))
    def insert_ascending(self, xs):
        xs.sort()
        if len(set(self.model) | set(xs)) > 24:
            return
        self.s.insert_ascending([(x, -x) for x in xs])
        self.model.update((x, -x) for x in xs)

    @rule(x=keys)
    def delete(self, x):
        self.s.delete(x)
        self.model.pop(x, None)

    @rule(x=keys)
    def split(self, x):
        self.s.split(x)
        self.model = {k: v for k, v in self.model.items() if k <= x}

    @rule(x=keys)
    def queries(self, x):
        below = [k for k in self.model if k < x]
        above = [k for k in self.model if k > x]
        p = max(below, default=None)
        q = min(above, default=None)
        assert self.s.pred(x) == (None if p is None else (p, self.model[p]))
        assert self.s.succ(x) == (None if q is None else (q, self.model[q]))
        assert self.s.rank(x) == len(below)
        assert (x in self.s) == (x in self.model)
        assert self.s.get(x) == self.model.get(x)

    @invariant()
    def same_items(self):
        assert self.s.items() == sorted(self.model.items())
        assert len(self.s) == len(self.model)
        ks = sorted(self.model)
        for k in range(len(ks) + 1):
            got = self.s.select(k)
            assert got == (None if k == len(ks) else (ks[k], self.model[ks[k]]))


TestPredSet = PredSetModel.TestCase
TestPredSet.settings = settings(max_examples=60, stateful_step_count=40, deadline=None)


def test_predset_copy_is_independent():
    s = PredSet()
    s.insert(3, "x")
    c = s.copy()
    c.split(0)
    assert 3 in s and 3 not in c


def random_weighted_tree(rng: random.Random, n: int, spread: int, wmax: int) -> WeightedTree:
    parent = [-1] + [max(0, v - rng.randint(1, spread)) for v in range(1, n)]
    if n > 2 and rng.random() < 0.3:
        parent[n // 2] = -1  # a forest with two roots
    return WeightedTree.from_edge_weights(parent, [rng.randint(0, wmax) for _ in range(n)])


def test_small_index_exhaustive():
    rng = random.Random(1)
    for _ in range(60):
        t = random_weighted_tree(rng, rng.randint(1, 64), rng.randint(1, 10), rng.randint(0, 6))
        ix = wa_build_small(t)
        for v in range(len(t)):
            for p in range(-1, t.depth[v] + 2):
                assert ix.query(v, p) == naive_wa(t, v, p)


def test_small_index_size_limit():
    t = WeightedTree.from_edge_weights([-1] + list(range(64)), [1] * 65)
    with pytest.raises(TreeTooLarge):
        wa_build_small(t)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 2000), spread=st.integers(1, 60),
       wmax=st.integers(0, 9))
def test_large_index_matches_scan(seed, n, spread, wmax):
    rng = random.Random(seed)
    t = random_weighted_tree(rng, n, spread, wmax)
    try:
        ix = wa_build(t)
    except HeightTooLarge:
        return
    for _ in range(100):
        v = rng.randrange(n)
        p = rng.randint(-1, t.depth[v] + 1)
        assert wa_query(ix, v, p) == naive_wa(t, v, p)


def test_height_limit():
    n = WaIndex.max_height + 2
    t = WeightedTree.from_edge_weights([-1] + list(range(n - 1)), [1] * n)
    with pytest.raises(HeightTooLarge):
        WaIndex(t)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 600), spread=st.integers(1, 30))
def test_level_ancestor(seed, n, spread):
    rng = random.Random(seed)
    parent = [-1] + [max(0, v - rng.randint(1, spread)) for v in range(1, n)]
    la = LevelAncestor(parent)
    for v in rng.sample(range(n), min(n, 50)):
        path = [v]
        while parent[path[-1]] >= 0:
            path.append(parent[path[-1]])
        path.reverse()
        assert la.depth[v] == len(path) - 1
        for d in range(len(path)):
            assert la.query(v, d) == path[d]
        assert la.query(v, len(path)) is None
