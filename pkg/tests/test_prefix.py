from __future__ import annotations

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslp.errors import NonPositiveWeight, NotACaterpillar, Redefinition, ShapeViolation
from cslp.generators import random_tree
from cslp.grammar import heavy_forest, is_contracting
from cslp.prefix import (
    LabeledTree,
    build_caterpillar_prefix_slp,
    build_prefix_slp,
    build_tree_prefix_slp,
    build_tree_prefix_slp_weak,
    normalize_tree,
)

from conftest import fingerprints, prefix_fingerprints, text


def check_string_prefixes(s: list[tuple[str, int]]) -> None:
    p = build_prefix_slp(s)
    assert max(len(r) for r in p.slp.rules) <= 10
    names = [a for a, _ in s]
    codes = {a: k + 1 for k, a in enumerate(p.slp.terminals)}
    h, ln = fingerprints(p.slp, codes)
    want = prefix_fingerprints(names, codes)
    assert p.index[0] is None
    for i in range(1, len(s) + 1):
        v = p.index[i]
        assert (ln[v], h[v]) == (i, want[i])


def test_single_symbol():
    p = build_prefix_slp([("a", 1)])
    assert text(p.slp, p.index[1]) == ["a"]
    assert p.index[0] is None


def test_three_symbols_every_prefix():
    s = [("a", 1), ("b", 1), ("c", 1)]
    p = build_prefix_slp(s)
    for i in range(4):
        assert text(p.slp, p.index[i]) == ["a", "b", "c"][:i]
    assert is_contracting(p.slp)[0]


def test_bad_weights():
    with pytest.raises(NonPositiveWeight):
        build_prefix_slp([("a", 0)])
    with pytest.raises(Redefinition):
        build_prefix_slp([("a", 1), ("a", 2)])


def test_exponential_weights():
    n = 300
    check_string_prefixes([(f"c{i}", 1 << (n - i)) for i in range(1, n + 1)])


@settings(max_examples=80, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("abc"), st.integers(1, 50)), min_size=1, max_size=120))
def test_prefixes_of_weighted_strings(pairs):
    w = {}
    s = [(a, w.setdefault(a, x)) for a, x in pairs]
    check_string_prefixes(s)
    p = build_prefix_slp(s)
    assert is_contracting(p.slp)[0]


def path_tree(symbols: str) -> LabeledTree:
    edges = tuple((k, k + 1, (a,)) for k, a in enumerate(symbols))
    return LabeledTree({a: 1 for a in symbols}, 0, edges)


def check_tree(t: LabeledTree, p) -> None:
    for node, want in t.prefixes().items():
        assert tuple(text(p.slp, p.index[node])) == want


def test_caterpillar_path():
    t = path_tree("ab")
    p = build_caterpillar_prefix_slp(t)
    check_tree(t, p)
    assert is_contracting(p.slp)[0]


def test_caterpillar_rejects_bushy_tree():
    t = LabeledTree({"a": 1}, 0, ((0, 1, ("a",)), (0, 2, ("a",)), (1, 3, ("a",)), (2, 4, ("a",))))
    with pytest.raises(NotACaterpillar):
        build_caterpillar_prefix_slp(t)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 300))
def test_caterpillar_random(seed, n):
    t = random_tree(random.Random(seed), n, {"a": 1, "b": 3}, 1, 1, "caterpillar")
    p = build_caterpillar_prefix_slp(t)
    check_tree(t, p)
    assert is_contracting(p.slp)[0]


def test_weak_requires_single_symbol_labels():
    t = LabeledTree({"a": 1}, 0, ((0, 1, ("a", "a")),))
    with pytest.raises(ShapeViolation):
        build_tree_prefix_slp_weak(t)


def distinct_symbol_tree(rng: random.Random, n: int, shape: str) -> LabeledTree:
    t = random_tree(rng, n, {"a": 1}, 1, 1, shape)
    terms = {f"e{c}": rng.randint(1, 4) for _, c, _ in t.edges}
    return LabeledTree(terms, 0, tuple((p, c, (f"e{c}",)) for p, c, _ in t.edges))


def heavy_paths_ok(slp) -> bool:
    hf = heavy_forest(slp)
    heavy = {b for _, b in hf.edges()}
    indeg = Counter(b for a, b in hf.edges() if a in heavy)
    return max(indeg.values(), default=0) <= 1


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 400),
       shape=st.sampled_from(["random", "deep", "star", "caterpillar"]))
def test_weak_tree_bounds(seed, n, shape):
    t = distinct_symbol_tree(random.Random(seed), n, shape)
    p = build_tree_prefix_slp_weak(t)
    assert p.slp.num_vars <= 4 * n
    assert max(len(r) for r in p.slp.rules) <= 6
    assert heavy_paths_ok(p.slp)
    check_tree(t, p)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(1, 300), lab=st.integers(0, 4),
       shape=st.sampled_from(["random", "deep", "star", "caterpillar"]))
def test_tree_prefix_contracting(seed, n, lab, shape):
    t = random_tree(random.Random(seed), n, {"a": 1, "b": 2}, lab, 0, shape)
    p = build_tree_prefix_slp(t)
    assert is_contracting(p.slp)[0]
    check_tree(t, p)


def test_normalize_tree_wraps_long_labels():
    t = LabeledTree({"a": 1, "b": 2}, "r", (("r", "u", ("a", "b", "a")), ("u", "v", ("b",))))
    nt = normalize_tree(t)
    labels = [lab for _, _, lab in nt.tree.edges]
    assert all(len(lab) <= 1 for lab in labels)
    # every side symbol stands for the label it replaced
    for x, body in nt.side_rules.items():
        assert nt.tree.terminals[x] == sum(t.terminals[a] for a in body)
