"""Turning an arbitrary SLP into a contracting one of linear size.

A rule is contracting when none of its variables is heavy, i.e. every
variable on the right-hand side has at most half the weight of the
left-hand side. In a contracting SLP every root-to-leaf path in the
derivation tree of A has length O(log |A|), which gives random access in
logarithmic time.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import MissingPrefixVariable, PositionOutOfRange, UnknownSymbol
from .grammar import Slp, is_contracting, to_cnf
from .heavy import HeavyTrees, heavy_trees_store, reduce_to_trees_store
from .prefix import ITree, PrefixSlp, tree_prefix_store
from .rulestore import RuleStore


@dataclass(frozen=True, eq=False)
class ContractingSlp:
    slp: Slp
    # original variable id -> output variable id (None: derives the empty string)
    representative: tuple[int | None, ...]
    source_names: tuple[str, ...] = ()

    def rep(self, var: int | str) -> int | None:
        if isinstance(var, str):
            try:
                var = self.source_names.index(var)
            except ValueError:
                raise UnknownSymbol(f"unknown variable {var!r}") from None
        return self.representative[var]


def _forest_tree(store: RuleStore, forest: HeavyTrees, side: int) -> tuple[ITree, dict[int, int]]:
    """All heavy trees of one labeling hung below a common root by empty edges."""
    parent = [-1]
    label: list[tuple[int, ...]] = [()]
    node: dict[int, int] = {}
    for r, ms in forest.members.items():
        if not ms:
            continue
        node[r] = len(parent)
        parent.append(0)
        label.append(())
        for a in ms:
            node[a] = len(parent)
            parent.append(node[forest.up[a][0]])
            label.append(forest.left_label(store, a) if side == 0 else forest.right_label(store, a))
    return ITree(0, parent, label), node


def balance_store(store: RuleStore, local: list[int]) -> list[int]:
    """Make the rules of ``local`` contracting; returns all variables created."""
    lset = set(local)
    snapshot = {v: store.rhs[v] for v in local}
    forest = heavy_trees_store(store, local)
    made: list[list[int]] = []
    pre_suf: list[dict[int, int | None]] = []
    for side in (0, 1):
        tree, node = _forest_tree(store, forest, side)
        res = tree_prefix_store(store, tree)
        made.append(res.created)
        pre_suf.append({a: res.index[k] for a, k in node.items() if a in lset})
    reduce_to_trees_store(store, lset, forest, snapshot, made[0], made[1], pre_suf[0], pre_suf[1])
    return made[0] + made[1]


def make_contracting(g: Slp) -> ContractingSlp:
    """Equivalent contracting SLP with O(|g|) variables and constant-length rules.

    Variables deriving the empty string have no counterpart and map to None.
    """
    cnf = to_cnf(g, eliminate_epsilon=True)
    store = RuleStore.from_slp(cnf.slp)
    local = list(range(len(store)))
    balance_store(store, local)
    roots = [r for r in cnf.representative if r is not None]
    start = cnf.slp.start
    out, remap = store.to_slp(roots, "X", start)
    rep = tuple(None if r is None else remap[r] for r in cnf.representative)
    ok, bad = is_contracting(out)
    assert ok, bad
    return ContractingSlp(out, rep, g.names)


def reduce_to_trees(g: Slp, h_left: PrefixSlp, h_right: PrefixSlp) -> ContractingSlp:
    """Combine ``g`` with prefix SLPs for its left and right labeled heavy trees.

    The terminals of ``h_left``/``h_right`` are symbol names of ``g``; their
    indexes map each variable name of ``g`` that is not a heavy-tree root to
    the variable deriving its left (reversed) or right path labeling.
    """
    store = RuleStore.from_slp(g)
    local = list(range(len(store)))
    snapshot = {v: store.rhs[v] for v in local}
    forest = heavy_trees_store(store, local)
    code = {name: ~k for k, name in enumerate(g.terminals)}
    code.update((name, k) for k, name in enumerate(g.names))
    maps: list[dict[str, int | None]] = []
    created: list[list[int]] = []
    for h in (h_left, h_right):
        base = len(store)
        for k, t in enumerate(h.slp.terminals):
            if t not in code:
                raise UnknownSymbol(f"prefix SLP symbol {t!r} is not a symbol of the grammar")
        tsym = [code[t] for t in h.slp.terminals]
        for k, rhs in enumerate(h.slp.rules):
            store.add(tuple(tsym[~s] if s < 0 else base + s for s in rhs), h.slp.names[k])
        created.append(list(range(base, len(store))))
        maps.append({name: (None if v is None else base + v) for name, v in h.index.items()})
    pre: dict[int, int | None] = {}
    suf: dict[int, int | None] = {}
    for a in local:
        if forest.root[a] == a:
            continue
        name = g.names[a]
        if name not in maps[0] or name not in maps[1]:
            raise MissingPrefixVariable(f"no prefix/suffix variable for {name!r}")
        pre[a], suf[a] = maps[0][name], maps[1][name]
    reduce_to_trees_store(store, set(local), forest, snapshot, created[0], created[1], pre, suf)
    out, remap = store.to_slp(local, "X", g.start)
    return ContractingSlp(out, tuple(remap[v] for v in local), g.names)


def access(cs: ContractingSlp, var: int | str, i: int) -> tuple[str, int]:
    """Symbol at 1-based position ``i`` of the original variable, and the
    number of rules descended through."""
    v = cs.rep(var)
    slp = cs.slp
    n = 0 if v is None else slp.metrics.lengths[v]
    if not 1 <= i <= n:
        raise PositionOutOfRange(f"position {i} outside 1..{n}")
    lengths = slp.metrics.lengths
    rules = slp.rules
    k = i - 1
    s = v
    steps = 0
    while s >= 0:
        steps += 1
        for c in rules[s]:
            m = 1 if c < 0 else lengths[c]
            if k < m:
                s = c
                break
            k -= m
    return slp.terminals[~s], steps
