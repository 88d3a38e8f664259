from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslp.errors import (
    CyclicGrammar,
    LengthOverflow,
    NonPositiveWeight,
    NotAVariable,
    OutputTooLarge,
    PositionOutOfRange,
    Redefinition,
    UnknownSymbol,
)
from cslp.generators import random_slp
from cslp.grammar import (
    Slp,
    distinct_children,
    eval_all,
    eval_string,
    expand_heavy,
    heavy_forest,
    is_cnf,
    is_contracting,
    naive_access,
    restrict,
    to_cnf,
    validate,
)

from conftest import text


def small() -> Slp:
    return Slp.from_rules(
        [("A", ["a", "b"]), ("B", ["A", "A", "c"]), ("S", ["B", "A"])], start="S"
    )


def test_from_rules_encodes_terminals_as_negative_ids():
    g = small()
    assert g.terminals == ("a", "b", "c")
    assert g.rules[0] == (~0, ~1)
    assert g.start == g.var("S")


def test_eval_and_metrics():
    g = small()
    assert eval_string(g, g.start) == "ababcab"
    m = g.metrics
    assert m.lengths == [2, 5, 7]
    assert m.heights == [1, 2, 3]
    assert g.size == 7


def test_weighted_metrics():
    g = Slp.from_rules([("A", ["a", "b"]), ("S", ["A", "a"])], {"a": 3, "b": 1}, "S")
    assert g.metrics.weights == [4, 7]
    assert g.metrics.lengths == [2, 3]


def test_redefinition_and_unknown_symbols():
    with pytest.raises(Redefinition):
        Slp.from_rules([("A", ["a"]), ("A", ["b"])])
    with pytest.raises(UnknownSymbol):
        Slp.from_rules([("A", ["z"])], ["a"])
    with pytest.raises(UnknownSymbol):
        Slp.from_rules([("A", ["a"])], start="Q")


def test_cycle_is_reported_with_its_name():
    g = Slp.from_rules([("A", ["B"]), ("B", ["a", "A"])])
    with pytest.raises(CyclicGrammar) as e:
        validate(g)
    assert e.value.var in (0, 1)
    assert "'A'" in str(e.value) or "'B'" in str(e.value)


def test_non_positive_weight():
    with pytest.raises(NonPositiveWeight):
        Slp.from_rules([("A", ["a"])], {"a": 0}).metrics


def test_length_overflow():
    rules = [("A0", ["a"])] + [(f"A{i}", [f"A{i-1}", f"A{i-1}"]) for i in range(1, 70)]
    with pytest.raises(LengthOverflow):
        Slp.from_rules(rules).metrics


def test_eval_guard():
    rules = [("A0", ["a"])] + [(f"A{i}", [f"A{i-1}", f"A{i-1}"]) for i in range(1, 30)]
    g = Slp.from_rules(rules)
    with pytest.raises(OutputTooLarge):
        eval_string(g, 29, max_len=1000)


def test_naive_access_and_range():
    g = small()
    s = eval_string(g, g.start)
    for i in range(1, len(s) + 1):
        assert naive_access(g, g.start, i)[0] == s[i - 1]
    with pytest.raises(PositionOutOfRange):
        naive_access(g, g.start, 0)
    with pytest.raises(PositionOutOfRange):
        naive_access(g, g.start, len(s) + 1)


def test_is_contracting_reports_violation():
    g = small()
    ok, where = is_contracting(g)
    assert not ok
    # S -> B A: B has weight 5 of 7
    assert where == (g.var("S"), 0)
    flat = Slp.from_rules([("S", ["a", "b", "a"])], start="S")
    assert is_contracting(flat) == (True, None)


def test_heavy_forest_labels():
    g = small()
    hf = heavy_forest(g)
    s = g.var("S")
    assert hf.parent[s] == g.var("B")
    assert hf.right[s] == (g.var("A"),)
    assert hf.root[s] == hf.root[g.var("B")]


def test_expand_heavy():
    g = small()
    h = expand_heavy(g, g.var("S"), 0)
    assert eval_string(h, h.start) == eval_string(g, g.start)
    assert len(h.rules[h.start]) == 4
    with pytest.raises(NotAVariable):
        expand_heavy(g, g.var("A"), 0)


def test_distinct_children_and_restrict():
    g = Slp.from_rules([("A", ["a", "b"]), ("B", ["A", "A"]), ("S", ["B", "B"])], start="S")
    d = distinct_children(g)
    for rhs in d.rules:
        assert not (len(rhs) == 2 and rhs[0] == rhs[1] and rhs[0] >= 0)
    assert eval_string(d, d.start) == eval_string(g, g.start)
    r, remap = restrict(d, [d.var("A")])
    assert r.num_vars == 1 and eval_string(r, remap[d.var("A")]) == "ab"


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), g=st.integers(1, 40), eps=st.sampled_from([0.0, 0.1]))
def test_cnf_preserves_strings(seed, g, eps):
    import random

    src = random_slp(random.Random(seed), g, 500, epsilon_rate=eps)
    for split in ("chain", "weight"):
        res = to_cnf(src, eliminate_epsilon=True, split=split)
        assert is_cnf(res.slp)
        for v in range(src.num_vars):
            assert text(res.slp, res.representative[v]) == text(src, v)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), g=st.integers(1, 30))
def test_eval_all_agrees_with_eval(seed, g):
    import random

    src = random_slp(random.Random(seed), g, 300)
    every = eval_all(src)
    for v in range(src.num_vars):
        assert [src.terminals[x] for x in every[v]] == text(src, v)
