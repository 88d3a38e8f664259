from __future__ import annotations

import random

import pytest

from cslp.grammar import Slp, eval_symbols, topological_order


def text(slp: Slp, var: int | None) -> list[str]:
    """Oracle: the string derived by ``var`` written out in full."""
    if var is None:
        return []
    return [slp.terminals[x] for x in eval_symbols(slp, var)]


@pytest.fixture
def rng() -> random.Random:
    return random.Random(12345)


MOD = (1 << 61) - 1
BASE = 1_000_003


def fingerprints(slp: Slp, codes: dict[str, int] | None = None) -> tuple[list[int], list[int]]:
    """Karp-Rabin fingerprint and length of every variable, bottom-up.

    Terminal ``t`` hashes to ``codes[name]`` (default: its index + 1).
    """
    tcode = [codes[t] if codes else k + 1 for k, t in enumerate(slp.terminals)]
    n = slp.num_vars
    h = [0] * n
    ln = [0] * n
    for v in topological_order(slp.rules):
        acc, m = 0, 0
        for s in slp.rules[v]:
            if s < 0:
                acc = (acc * BASE + tcode[~s]) % MOD
                m += 1
            else:
                acc = (acc * pow(BASE, ln[s], MOD) + h[s]) % MOD
                m += ln[s]
        h[v], ln[v] = acc, m
    return h, ln


def prefix_fingerprints(s, codes: dict[str, int]) -> list[int]:
    out = [0]
    for a in s:
        out.append((out[-1] * BASE + codes[a]) % MOD)
    return out


def navigate_all(f) -> tuple[str, list[tuple[int, int]]]:
    """Walk the whole forest of ``f`` through cursor moves only.

    Checks parent, sibling and child moves against the explicit forest on
    the way. Returns the term rebuilt from the walk and ``(degree, cost)``
    for every ``nav_child`` call.
    """
    from cslp.fslp import ExplicitForest, FslpNavigator, eval_forest

    ef = eval_forest(f)
    nav = FslpNavigator(f)
    par = ef.parents()
    labels: list[str] = []
    children: list[list[int]] = []
    roots: list[int] = []
    costs: list[tuple[int, int]] = []
    first = nav.root_first()
    if not ef.roots:
        assert first is None
        return ExplicitForest([], [], []).term(), costs
    assert nav.root_last().as_list() == _nth_root(nav, first, len(ef.roots)).as_list()
    cur_of = {}
    stack = [(first, ef.roots[0], -1)]
    while stack:
        t, v, p_new = stack.pop()
        cur_of[v] = t
        me = len(labels)
        labels.append(nav.symbol(t))
        children.append([])
        (children[p_new] if p_new >= 0 else roots).append(me)
        assert labels[me] == ef.labels[v]
        kids = ef.children[v]
        assert nav.degree(t) == len(kids)
        up = nav.parent(t)
        if par[v] < 0:
            assert up is None
        else:
            assert up.as_list() == cur_of[par[v]].as_list()
        sibs = ef.children[par[v]] if par[v] >= 0 else ef.roots
        k = sibs.index(v)
        left, right = nav.left_sibling(t), nav.right_sibling(t)
        assert (left is None) == (k == 0)
        assert (right is None) == (k == len(sibs) - 1)
        if left is not None:
            assert left.as_list() == cur_of[sibs[k - 1]].as_list()
        if right is not None:
            stack.append((right, sibs[k + 1], p_new))
        if not kids:
            assert nav.first_child(t) is None and nav.last_child(t) is None
            assert nav.nav_child(t, 1) is None
            continue
        c = nav.first_child(t)
        x = c
        for j in range(1, len(kids) + 1):
            y = nav.nav_child(t, j)
            assert y.as_list() == x.as_list()
            costs.append((len(kids), y.cost))
            x = nav.right_sibling(x)
        assert x is None and nav.nav_child(t, len(kids) + 1) is None
        assert nav.last_child(t).as_list() == nav.nav_child(t, len(kids)).as_list()
        stack.append((c, kids[0], me))
    assert len(labels) == len(ef)
    return ExplicitForest(labels, children, roots).term(), costs


def _nth_root(nav, t, k: int):
    for _ in range(k - 1):
        t = nav.right_sibling(t)
    return t


# one line per acceptance criterion, printed at the end of the run
REPORT: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(REPORT, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
