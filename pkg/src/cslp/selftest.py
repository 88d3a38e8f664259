"""Reduced-scale oracle checks of every component, used by ``cslp selftest``."""

from __future__ import annotations

import random
from typing import Callable

from .ancestry import WaIndex, WeightedTree, naive_wa
from .balancer import access, make_contracting
from .finger import FingerState, SkewForestSet, prepare
from .fslp import FslpNavigator, eval_forest, example_fslp
from .generators import gen_lower_bound, lower_bound_string, random_fslp, random_slp, random_tree
from .grammar import eval_symbols, is_contracting
from .prefix import build_prefix_slp, build_tree_prefix_slp


def _contracting(rng: random.Random) -> None:
    for _ in range(20):
        g = random_slp(rng, rng.randint(1, 60), 2000, epsilon_rate=0.05)
        cs = make_contracting(g)
        assert is_contracting(cs.slp)[0]
        for v in range(g.num_vars):
            want = [g.terminals[x] for x in eval_symbols(g, v)]
            r = cs.rep(v)
            got = [] if r is None else [cs.slp.terminals[x] for x in eval_symbols(cs.slp, r)]
            assert got == want, g.names[v]
            if want:
                i = rng.randint(1, len(want))
                assert access(cs, v, i)[0] == want[i - 1]


def _prefixes(rng: random.Random) -> None:
    for _ in range(20):
        s = [rng.choice("ab") for _ in range(rng.randint(1, 200))]
        weights = {"a": rng.randint(1, 9), "b": rng.randint(1, 9)}
        p = build_prefix_slp([(a, weights[a]) for a in s])
        for i in range(len(s) + 1):
            v = p.index[i]
            got = [] if v is None else [p.slp.terminals[x] for x in eval_symbols(p.slp, v)]
            assert got == s[:i]
        t = random_tree(rng, rng.randint(1, 80), {"a": 1, "b": 2}, 3, 0)
        tp = build_tree_prefix_slp(t)
        for node, want in t.prefixes().items():
            v = tp.index[node]
            got = () if v is None else tuple(tp.slp.terminals[x] for x in eval_symbols(tp.slp, v))
            assert got == want


def _ancestors(rng: random.Random) -> None:
    for _ in range(20):
        n = rng.randint(1, 600)
        parent = [-1] + [max(0, v - rng.randint(1, 40)) for v in range(1, n)]
        t = WeightedTree.from_edge_weights(parent, [rng.randint(0, 5) for _ in range(n)])
        ix = WaIndex(t)
        for _ in range(200):
            v = rng.randrange(n)
            p = rng.randint(-1, t.depth[v] + 1)
            assert ix.query(v, p) == naive_wa(t, v, p)


def _finger(rng: random.Random) -> None:
    for _ in range(5):
        g = random_slp(rng, rng.randint(5, 80), 5000)
        s = [g.terminals[x] for x in eval_symbols(g, g.start)]
        fs = FingerState(SkewForestSet(prepare(g).slp, 3))
        n = len(s)
        fs.setfinger(rng.randint(1, n))
        for _ in range(300):
            i = rng.randint(1, n)
            if rng.random() < 0.5:
                fs.movefinger(i)
                assert fs.symbol() == s[i - 1]
            else:
                assert fs.access(i) == s[i - 1]


def _fslp(rng: random.Random) -> None:
    for f in [example_fslp()] + [random_fslp(rng, rng.randint(5, 80), 500) for _ in range(10)]:
        ef = eval_forest(f)
        nav = FslpNavigator(f)
        cur = nav.root_first()
        todo = [(cur, v) for v in ef.roots[:1]]
        while todo:
            c, v = todo.pop()
            assert nav.symbol(c) == ef.labels[v] and nav.degree(c) == len(ef.children[v])
            for j, w in enumerate(ef.children[v], 1):
                todo.append((nav.nav_child(c, j), w))


def _lower_bound(rng: random.Random) -> None:
    for n in range(1, 9):
        for binary in (False, True):
            g = gen_lower_bound(n, binary)
            assert [g.terminals[x] for x in eval_symbols(g, g.start)] == lower_bound_string(n, binary)


SUITES: dict[str, Callable[[random.Random], None]] = {
    "contracting": _contracting,
    "prefixes": _prefixes,
    "ancestors": _ancestors,
    "finger": _finger,
    "fslp": _fslp,
    "lower-bound": _lower_bound,
}


def run(seed: int = 0, report: Callable[[str], None] = print) -> bool:
    ok = True
    for name, fn in SUITES.items():
        try:
            fn(random.Random(seed))
        except AssertionError as e:
            ok = False
            report(f"FAIL {name} {e}")
        else:
            report(f"PASS {name}")
    return ok
