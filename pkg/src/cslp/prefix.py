"""Contracting SLPs that define all prefixes of a weighted string or all
root-to-node labels of a labeled tree.

The ``*_store`` functions work inside a shared :class:`RuleStore`: the
symbols they consume may be variables of some other grammar (they are
treated as terminals with their stored weight), and every variable they
create is reported back so callers can tell construction-local variables
from foreign ones. The public wrappers take names and return :class:`Slp`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import (
    NonPositiveWeight, NotACaterpillar, NotAnAncestor, Redefinition, ShapeViolation, UnknownSymbol,
)
from .grammar import Slp
from .heavy import heavy_trees_store, reduce_to_trees_store
from .rulestore import RuleStore

WeightedString = Sequence[tuple[str, int]]


# ---------------------------------------------------------------------------
# base SLP


@dataclass
class BaseSlpArtifacts:
    """Base SLP plus its derivation tree D and the contracted tree D0.

    D has 2n nodes: node ``p`` (0 <= p < n) is the terminal at position p,
    node ``n + p`` is the variable whose right-hand side holds that terminal.
    """

    store: RuleStore
    symbols: list[int]  # the input string as store symbols
    root: int  # D node of the start variable
    var: dict[int, int]  # D node -> store variable
    children: dict[int, list[int]]
    parent: list[int]
    lo: list[int]  # first string position below a D node
    hi: list[int]
    in_s0: list[bool]
    d0_parent: list[int]
    level: list[int]
    height: list[int]
    probes: int = 0
    created: list[int] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.symbols)

    def store_symbol(self, node: int) -> int:
        return self.symbols[node] if node < self.n else self.var[node]

    def lsib(self, node: int) -> tuple[int, ...]:
        p = self.parent[node]
        if p < 0:
            return ()
        kids = self.children[p]
        return tuple(self.store_symbol(c) for c in kids[:kids.index(node)])

    def is_ancestor(self, a: int, b: int) -> bool:
        while b >= 0:
            if b == a:
                return True
            b = self.parent[b]
        return False

    def rules(self) -> dict[int, tuple[int, ...]]:
        return {self.var[v]: self.store.rhs[self.var[v]] for v in self.var}


def _split_point(prefix: list[int], lo: int, hi: int) -> tuple[int, int]:
    """Maximal i in [lo, hi] whose suffix weight exceeds half of the interval.

    Exponential search from the right end, then binary search; returns the
    split point and the number of weight probes.
    """
    total = prefix[hi + 1] - prefix[lo]
    end = prefix[hi + 1]
    probes = 0
    k = 0
    while True:
        idx = max(lo, hi - (1 << k) + 1)
        probes += 1
        if 2 * (end - prefix[idx]) > total:
            break
        k += 1
    if k == 0:
        return hi, probes
    left, right = idx, hi - (1 << (k - 1))
    # predicate holds at `left`, fails past `right`
    while left < right:
        mid = (left + right + 1) // 2
        probes += 1
        if 2 * (end - prefix[mid]) > total:
            left = mid
        else:
            right = mid - 1
    return left, probes


def build_base_store(store: RuleStore, symbols: Sequence[int]) -> BaseSlpArtifacts:
    n = len(symbols)
    if n == 0:
        raise ValueError("base SLP needs a nonempty string")
    prefix = [0]
    for s in symbols:
        prefix.append(prefix[-1] + store.weight(s))
    parent = [-1] * (2 * n)
    lo = [0] * (2 * n)
    hi = [0] * (2 * n)
    for p in range(n):
        lo[p] = hi[p] = p
    children: dict[int, list[int]] = {}
    topdown: list[int] = []
    probes = 0
    work = [(0, n - 1, -1)]
    root = -1
    while work:
        a, b, par = work.pop()
        i, pr = _split_point(prefix, a, b)
        probes += pr
        node = n + i
        if par < 0:
            root = node
        parent[node] = par
        lo[node], hi[node] = a, b
        topdown.append(node)
        kids: list[tuple[int, int] | int] = []
        if a < i:
            kids.append((a, i - 1))
        kids.append(i)
        if i < b:
            m = b - i
            mid = i + (m + 1) // 2  # v1 gets the ceiling
            kids.append((i + 1, mid))
            if mid < b:
                kids.append((mid + 1, b))
        parent[i] = node
        # interval children are resolved to D nodes once every split is known
        children[node] = kids  # type: ignore[assignment]
        for kid in reversed(kids):
            if not isinstance(kid, int):
                work.append((kid[0], kid[1], node))
    # resolve interval placeholders into D nodes
    node_of = {(lo[v], hi[v]): v for v in topdown}
    for v in topdown:
        resolved = []
        for kid in children[v]:
            if isinstance(kid, tuple):
                c = node_of[kid]
                resolved.append(c)
            else:
                resolved.append(kid)
        children[v] = resolved
    var: dict[int, int] = {}
    created = []
    for v in reversed(topdown):
        rhs = [symbols[c] if c < n else var[c] for c in children[v]]
        var[v] = store.add(rhs)
        created.append(var[v])

    in_s0 = [False] * (2 * n)
    in_s0[root] = True
    for v in topdown:
        for k, c in enumerate(children[v]):
            if k > 0:
                in_s0[c] = True
    low0 = [-1] * (2 * n)  # lowest S0 ancestor-or-self
    d0_parent = [-1] * (2 * n)
    level = [-1] * (2 * n)
    low0[root] = root
    level[root] = 0
    for v in topdown:
        for c in children[v]:
            d0_parent[c] = low0[v]
            low0[c] = c if in_s0[c] else low0[v]
            if in_s0[c]:
                level[c] = level[low0[v]] + 1
    height = [0] * (2 * n)
    # heights in D0: reversed preorder visits descendants first
    for v in reversed(topdown):
        for c in children[v]:
            if in_s0[c]:
                h = height[c] + 1
                p = d0_parent[c]
                if h > height[p]:
                    height[p] = h
    return BaseSlpArtifacts(
        store=store, symbols=list(symbols), root=root, var=var, children=children,
        parent=parent, lo=lo, hi=hi, in_s0=in_s0, d0_parent=d0_parent,
        level=level, height=height, probes=probes, created=created,
    )


def left_branch_value(art: BaseSlpArtifacts, alpha: int, beta: int) -> list[int]:
    """Symbols branching off to the left on the D path from alpha to beta."""
    if not art.is_ancestor(alpha, beta):
        raise NotAnAncestor(f"node {alpha} is not an ancestor of node {beta}")
    return art.symbols[art.lo[alpha]:art.lo[beta]]


def left_branch_by_lsib(art: BaseSlpArtifacts, alpha: int, beta: int) -> list[tuple[int, ...]]:
    """The same string as a list of lsib blocks (each derives its piece)."""
    if not art.is_ancestor(alpha, beta):
        raise NotAnAncestor(f"node {alpha} is not an ancestor of node {beta}")
    blocks = []
    while beta != alpha:
        blocks.append(art.lsib(beta))
        beta = art.parent[beta]
    return blocks[::-1]


@dataclass
class StringPrefixResult:
    base: BaseSlpArtifacts
    l_vars: dict[tuple[int, int], int]  # (level(alpha), beta) -> store variable
    index: list[int | None]  # prefix length -> store symbol (None for the empty prefix)
    created: list[int]
    max_rhs: int


def build_prefix_store(store: RuleStore, symbols: Sequence[int],
                       base_names: bool = False) -> StringPrefixResult:
    art = build_base_store(store, symbols)
    n = art.n
    if base_names:
        for node, v in art.var.items():
            store.names[v] = f"N{node - n}"
    # D0 children in preorder of D
    d0_children: dict[int, list[int]] = {}
    work = [art.root]
    order0 = []
    while work:
        v = work.pop()
        if v >= n:
            for c in reversed(art.children[v]):
                work.append(c)
        if art.in_s0[v]:
            order0.append(v)
            if v != art.root:
                d0_children.setdefault(art.d0_parent[v], []).append(v)
    lvars: dict[tuple[int, int], int] = {}
    level, height = art.level, art.height
    path: list[int] = []  # D0 ancestors indexed by level
    work = [art.root]
    while work:
        beta = work.pop()
        lb = level[beta]
        del path[lb:]
        path.append(beta)
        for c in reversed(d0_children.get(beta, ())):
            work.append(c)
        lsb = art.lsib(beta)
        for la in range(min(height[beta], lb - 1) + 1):
            dist = lb - la
            if dist == 1:
                rhs = lsb
            elif dist == 2:
                rhs = art.lsib(path[lb - 1]) + lsb
            else:
                inner = lvars[(la + 1, path[lb - 1])]
                rhs = art.lsib(path[la + 1]) + (inner,) + lsb
            name = f"L{la}_{beta - n if beta >= n else beta}{'' if beta >= n else 't'}" if base_names else None
            lvars[(la, beta)] = store.add(rhs, name)
    base_set = set(art.created)
    created_l = list(lvars.values())
    store.expand_heavy(created_l, base_set.__contains__)
    max_rhs = max((len(store.rhs[v]) for v in art.created + created_l), default=0)
    assert max_rhs <= 10, max_rhs
    low0 = [-1] * n
    for p in range(n):
        v = p
        while not art.in_s0[v]:
            v = art.parent[v]
        low0[p] = v
    index: list[int | None] = [None]
    for i in range(1, n):
        index.append(lvars[(0, low0[i])])
    index.append(art.var[art.root])
    return StringPrefixResult(art, lvars, index, art.created + created_l, max_rhs)


@dataclass(frozen=True, eq=False)
class PrefixSlp:
    slp: Slp
    index: dict[Hashable, int | None]  # prefix key -> SLP variable (None: empty prefix)

    def prefix_var(self, key: Hashable) -> int | None:
        return self.index[key]


def _alphabet_store(pairs: Iterable[tuple[str, int]]) -> tuple[RuleStore, dict[str, int]]:
    names: list[str] = []
    weights: list[int] = []
    code: dict[str, int] = {}
    for name, w in pairs:
        if w < 1:
            raise NonPositiveWeight(f"terminal {name!r} has weight {w}")
        if name in code:
            if weights[code[name]] != w:
                raise Redefinition(f"terminal {name!r} given weights {weights[code[name]]} and {w}")
            continue
        code[name] = len(names)
        names.append(name)
        weights.append(w)
    return RuleStore(names, weights), code


def _export(store: RuleStore, roots: Sequence[int], start: int | None,
            index: Mapping[Hashable, int | None], prefix: str = "X") -> PrefixSlp:
    slp, remap = store.to_slp([r for r in roots if r is not None and r >= 0], prefix, start)
    out: dict[Hashable, int | None] = {}
    for key, v in index.items():
        if v is None:
            out[key] = None
        elif v < 0:
            # a prefix that is a single terminal still gets a variable
            raise AssertionError("prefix index must point at variables")
        else:
            out[key] = remap[v]
    return PrefixSlp(slp, out)


def build_base_slp(s: WeightedString) -> BaseSlpArtifacts:
    store, code = _alphabet_store(s)
    return build_base_store(store, [~code[a] for a, _ in s])


def build_prefix_slp(s: WeightedString) -> PrefixSlp:
    """Contracting SLP with a variable for every nonempty prefix of ``s``.

    The index maps a prefix length ``i`` (0 <= i <= n) to its variable.
    """
    store, code = _alphabet_store(s)
    res = build_prefix_store(store, [~code[a] for a, _ in s], base_names=True)
    root = res.index[-1]
    store.names[root] = "S"
    return _export(store, res.created, root, dict(enumerate(res.index)))


# ---------------------------------------------------------------------------
# trees


@dataclass
class ITree:
    """Rooted tree over nodes ``0..len(parent)-1``; ``label[v]`` is the
    symbol sequence on the edge into ``v`` (empty for the root)."""

    root: int
    parent: list[int]
    label: list[tuple[int, ...]]

    def __len__(self) -> int:
        return len(self.parent)

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                ch[p].append(v)
        return ch

    def topdown(self, ch: list[list[int]] | None = None) -> list[int]:
        ch = self.children() if ch is None else ch
        order = [self.root]
        for v in order:
            order.extend(ch[v])
        return order


@dataclass
class TreePrefixResult:
    index: list[int | None]  # node -> store symbol deriving its prefix
    created: list[int]


def normalize_store(store: RuleStore, t: ITree,
                    distinct: bool = True) -> tuple[ITree, list[int], list[int]]:
    """Contract empty edges and replace long labels by fresh symbols.

    With ``distinct`` set, repeated occurrences of a symbol are wrapped too,
    so that every edge carries its own symbol.

    Returns the normalized tree, the map from old to new nodes and the fresh
    label variables (each derives the label it replaced).
    """
    ch = t.children()
    new_of = [-1] * len(t)
    parent: list[int] = [-1]
    label: list[tuple[int, ...]] = [()]
    xvars: list[int] = []
    seen: set[int] = set()
    for v in t.topdown(ch):
        if v == t.root:
            new_of[v] = 0
            continue
        lab = t.label[v]
        if not lab:
            new_of[v] = new_of[t.parent[v]]
            continue
        if len(lab) > 1 or (distinct and lab[0] in seen):
            # repeated symbols would glue heavy paths together
            x = store.add(lab)
            xvars.append(x)
            lab = (x,)
        seen.add(lab[0])
        new_of[v] = len(parent)
        parent.append(new_of[t.parent[v]])
        label.append(lab)
    return ITree(0, parent, label), new_of, xvars


def caterpillar_store(store: RuleStore, t: ITree) -> TreePrefixResult:
    """Prefix variables for a caterpillar; labels may be empty or long."""
    ch = t.children()
    for v in range(len(t)):
        if sum(1 for c in ch[v] if ch[c]) > 1:
            raise NotACaterpillar(f"node {v} has more than one inner child")
    spine = [t.root]
    v = t.root
    while ch[v]:
        inner = [c for c in ch[v] if ch[c]]
        v = inner[0] if inner else ch[v][0]
        spine.append(v)
        if not inner:
            break
    text: list[int] = []
    cut = [0]
    for v in spine[1:]:
        text.extend(t.label[v])
        cut.append(len(text))
    index: list[int | None] = [None] * len(t)
    created: list[int] = []
    local: set[int] = set()
    if text:
        res = build_prefix_store(store, text)
        created.extend(res.created)
        local.update(res.created)
        for v, c in zip(spine, cut):
            index[v] = res.index[c]
    on_spine = set(spine)
    leaves = []
    for v in spine:
        for c in ch[v]:
            if c in on_spine:
                continue
            body = ([] if index[v] is None else [index[v]]) + list(t.label[c])
            if not body:
                index[c] = index[v]
                continue
            index[c] = store.add(body)
            leaves.append(index[c])
    store.expand_heavy(leaves, local.__contains__)
    created.extend(leaves)
    return TreePrefixResult(index, created)


def weak_tree_store(store: RuleStore, t: ITree) -> TreePrefixResult:
    """Prefix variables whose heavy symbols induce a union of paths.

    Labels must be single symbols. The output is not contracting in general.
    """
    n_nodes = len(t)
    index: list[int | None] = [None] * n_nodes
    if n_nodes == 1:
        return TreePrefixResult(index, [])
    ch = t.children()
    order = t.topdown(ch)
    if n_nodes == 2:
        x = order[1]
        index[x] = store.add(t.label[x])
        return TreePrefixResult(index, [index[x]])
    created: list[int] = []
    root = t.root
    in_v = [len(ch[v]) >= 2 for v in range(n_nodes)]
    in_v[root] = True
    pvar: list[int] = [-1] * n_nodes  # P_{top(x), x}
    top: list[int] = [-1] * n_nodes
    for v in order:
        if not in_v[v]:
            continue
        for c in ch[v]:
            p = store.add(t.label[c])
            created.append(p)
            pvar[c], top[c] = p, v
            while not in_v[c] and ch[c]:
                (c2,) = ch[c]
                p = store.add((p,) + t.label[c2])
                created.append(p)
                pvar[c2], top[c2] = p, v
                c = c2
    # the contracted tree T' restricted to branching nodes and the root
    nodes = [v for v in order if in_v[v]]
    par2: dict[int, int] = {}
    d: dict[int, int] = {root: 0}
    rk: dict[int, int | None] = {root: None}  # None plays minus infinity
    peak: dict[int, int] = {root: root}
    for v in nodes:
        if v == root:
            continue
        u = top[v]
        par2[v] = u
        d[v] = d[u] + store.w[pvar[v]]
        rk[v] = (d[v] - 1).bit_length()
        peak[v] = peak[u] if rk[v] == rk[u] else v
    groups: dict[int, list[int]] = {}
    for v in nodes:
        groups.setdefault(peak[v], []).append(v)
    bvar: dict[int, int] = {}
    for pk, zs in groups.items():
        if len(zs) == 1:
            continue
        local_id = {v: k for k, v in enumerate(zs)}
        sub = ITree(0, [-1] + [local_id[par2[v]] for v in zs[1:]],
                    [()] + [(pvar[v],) for v in zs[1:]])
        res = weak_tree_store(store, sub)
        created.extend(res.created)
        for v in zs[1:]:
            bvar[v] = res.index[local_id[v]]
    for x in order:
        if x == root:
            continue
        v = x if in_v[x] else top[x]
        tail = [] if in_v[x] else [pvar[x]]
        if v == root:
            body = tail
        else:
            vh = peak[v]
            mid = [pvar[vh]] + ([bvar[v]] if v != vh else []) + tail
            u = par2[vh]
            if u == root:
                body = mid
            else:
                uh = peak[u]
                s = par2[uh]
                body = ([] if s == root else [index[s]]) + [pvar[uh]] \
                    + ([bvar[u]] if u != uh else []) + mid
        index[x] = store.add(body)
        created.append(index[x])
    return TreePrefixResult(index, created)


def tree_prefix_store(store: RuleStore, t: ITree) -> TreePrefixResult:
    """Contracting prefix variables for an arbitrary labeled tree."""
    nt, new_of, xvars = normalize_store(store, t)
    weak = weak_tree_store(store, nt)
    gvars = weak.created
    gset = set(gvars)
    snapshot = {v: store.rhs[v] for v in gvars}
    forest = heavy_trees_store(store, gvars)
    pre: dict[int, int | None] = {}
    suf: dict[int, int | None] = {}
    hl: list[int] = []
    hr: list[int] = []
    for r, ms in forest.members.items():
        if not ms:
            continue
        pos = {r: 0}
        for k, a in enumerate(ms, 1):
            pos[a] = k
        parent = [-1] + [pos[forest.up[a][0]] for a in ms]
        for side, out, made in ((0, pre, hl), (1, suf, hr)):
            labels = [()] + [forest.left_label(store, a) if side == 0
                             else forest.right_label(store, a) for a in ms]
            res = caterpillar_store(store, ITree(0, parent, labels))
            made.extend(res.created)
            for k, a in enumerate(ms, 1):
                out[a] = res.index[k]
    reduce_to_trees_store(store, gset, forest, snapshot, hl, hr, pre, suf)
    created = xvars + gvars + hl + hr
    store.expand_heavy(created, set(xvars).__contains__)
    index = [weak.index[new_of[v]] for v in range(len(t))]
    return TreePrefixResult(index, created)


# ---------------------------------------------------------------------------
# public tree API


@dataclass(frozen=True, eq=False)
class LabeledTree:
    """Rooted tree whose edges carry strings over a weighted alphabet."""

    terminals: Mapping[str, int]  # name -> weight
    root: Hashable
    edges: tuple[tuple[Hashable, Hashable, tuple[str, ...]], ...]  # (parent, child, label)

    @property
    def nodes(self) -> list[Hashable]:
        return [self.root] + [c for _, c, _ in self.edges]

    def prefixes(self) -> dict[Hashable, tuple[str, ...]]:
        """Root-to-node labels, computed directly (reference oracle)."""
        out: dict[Hashable, tuple[str, ...]] = {self.root: ()}
        by_parent: dict[Hashable, list] = {}
        for p, c, lab in self.edges:
            by_parent.setdefault(p, []).append((c, lab))
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c, lab in by_parent.get(v, ()):
                out[c] = out[v] + tuple(lab)
                stack.append(c)
        return out


def _to_itree(t: LabeledTree) -> tuple[RuleStore, dict[str, int], ITree, list[Hashable]]:
    store, code = _alphabet_store(t.terminals.items())
    nodes = t.nodes
    ids: dict[Hashable, int] = {}
    for v in nodes:
        if v in ids:
            raise ShapeViolation(f"node {v!r} has two parents or is the root and a child")
        ids[v] = len(ids)
    parent = [-1] * len(nodes)
    label: list[tuple[int, ...]] = [()] * len(nodes)
    for p, c, lab in t.edges:
        if p not in ids:
            raise ShapeViolation(f"edge from unknown node {p!r}")
        for a in lab:
            if a not in code:
                raise UnknownSymbol(f"label symbol {a!r} is not a declared terminal")
        parent[ids[c]] = ids[p]
        label[ids[c]] = tuple(~code[a] for a in lab)
    it = ITree(0, parent, label)
    if len(it.topdown()) != len(nodes):
        raise ShapeViolation("tree is not connected to its root")
    return store, code, it, nodes


def _tree_export(store: RuleStore, res: TreePrefixResult, nodes: list[Hashable]) -> PrefixSlp:
    return _export(store, res.created, None, dict(zip(nodes, res.index)))


@dataclass(frozen=True, eq=False)
class NormalizedTree:
    tree: LabeledTree
    side_rules: dict[str, tuple[str, ...]]  # fresh symbol -> label it stands for
    node_map: dict[Hashable, Hashable]  # original node -> node of the new tree


def normalize_tree(t: LabeledTree) -> NormalizedTree:
    store, _, it, nodes = _to_itree(t)
    nt, new_of, xvars = normalize_store(store, it, distinct=False)
    taken = set(t.terminals)
    rep: dict[int, Hashable] = {}
    for v, k in enumerate(new_of):
        rep.setdefault(k, nodes[v])
    xname: dict[int, str] = {}
    weights = dict(t.terminals)
    side: dict[str, tuple[str, ...]] = {}
    for x in xvars:
        k = len(xname)
        while f"X{k}" in taken:
            k += 1
        name = f"X{k}"
        taken.add(name)
        xname[x] = name
        weights[name] = store.w[x]
        side[name] = tuple(store.terminals[~s] for s in store.rhs[x])

    def sym(s: int) -> str:
        return store.terminals[~s] if s < 0 else xname[s]

    edges = tuple((rep[nt.parent[k]], rep[k], tuple(sym(s) for s in nt.label[k]))
                  for k in nt.topdown()[1:])
    tree = LabeledTree(weights, rep[0], edges)
    return NormalizedTree(tree, side, {nodes[v]: rep[k] for v, k in enumerate(new_of)})


def build_caterpillar_prefix_slp(t: LabeledTree) -> PrefixSlp:
    store, _, it, nodes = _to_itree(t)
    return _tree_export(store, caterpillar_store(store, it), nodes)


def build_tree_prefix_slp_weak(t: LabeledTree) -> PrefixSlp:
    store, _, it, nodes = _to_itree(t)
    if any(len(lab) != 1 for lab in it.label[1:]):
        raise ShapeViolation("every edge label must be a single symbol")
    return _tree_export(store, weak_tree_store(store, it), nodes)


def build_tree_prefix_slp(t: LabeledTree) -> PrefixSlp:
    """Contracting SLP with a variable for every root-to-node label of ``t``.

    The index maps each node to its variable; nodes whose label is empty
    (the root, or nodes reached by empty edges only) map to ``None``.
    """
    store, _, it, nodes = _to_itree(t)
    return _tree_export(store, tree_prefix_store(store, it), nodes)
