"""Predecessor sets with split, and weighted ancestor queries.

A weighted tree assigns each node a depth ``d`` that never decreases from a
parent to a child. The weighted ancestor query ``(v, p)`` asks for the
highest ancestor ``u`` of ``v`` (``v`` included) with ``d(u) > p``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Any, Iterator, Sequence

from .errors import CapacityExceeded, HeightTooLarge, TreeTooLarge

WORD = 64


class PredSet:
    """Ordered key/value set that also supports ``split``.

    Every key ever inserted stays in a sorted list ``T``; a bit mask marks
    the keys currently present. Split clears a suffix of the mask, so later
    re-insertions of the same keys are cheap. When ``T`` is full the keys
    that are no longer present are dropped.
    """

    __slots__ = ("capacity", "_keys", "_vals", "_bits")

    def __init__(self, capacity: int | None = None):
        self.capacity = capacity
        self._keys: list[int] = []
        self._vals: list[Any] = []
        self._bits = 0

    def __len__(self) -> int:
        return self._bits.bit_count()

    def __contains__(self, x: int) -> bool:
        i = bisect_left(self._keys, x)
        return i < len(self._keys) and self._keys[i] == x and (self._bits >> i) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return (k for k, _ in self.items())

    def items(self) -> list[tuple[int, Any]]:
        b = self._bits
        return [(k, v) for i, (k, v) in enumerate(zip(self._keys, self._vals)) if (b >> i) & 1]

    def get(self, x: int, default: Any = None) -> Any:
        i = bisect_left(self._keys, x)
        if i < len(self._keys) and self._keys[i] == x and (self._bits >> i) & 1:
            return self._vals[i]
        return default

    def _compact(self) -> None:
        """Drop every key that is no longer present."""
        b = self._bits
        keep = [i for i in range(len(self._keys)) if (b >> i) & 1]
        self._keys = [self._keys[i] for i in keep]
        self._vals = [self._vals[i] for i in keep]
        self._bits = (1 << len(keep)) - 1

    def insert(self, x: int, value: Any = None) -> None:
        keys = self._keys
        i = bisect_left(keys, x)
        if i < len(keys) and keys[i] == x:
            self._bits |= 1 << i
            self._vals[i] = value
            return
        if self.capacity is not None and len(keys) >= self.capacity:
            if len(self) >= self.capacity:
                raise CapacityExceeded(f"set already holds {self.capacity} keys")
            self._compact()
            keys = self._keys
            i = bisect_left(keys, x)
        keys.insert(i, x)
        self._vals.insert(i, value)
        b = self._bits
        self._bits = (b & ((1 << i) - 1)) | ((b >> i) << (i + 1)) | (1 << i)

    def insert_ascending(self, pairs: Sequence[tuple[int, Any]]) -> None:
        """Insert keys given in strictly increasing order."""
        if not pairs:
            return
        keys, vals = self._keys, self._vals
        cap = self.capacity
        bits = self._bits
        hi = bits.bit_length()
        if hi == 0 or keys[hi - 1] < pairs[0][0]:
            # common case: everything goes above the largest present key, so
            # absent keys up there are dropped and the new ones appended
            if cap is not None and hi + len(pairs) > cap:
                self._compact()
                keys, vals, bits = self._keys, self._vals, self._bits
                hi = len(keys)
                if hi + len(pairs) > cap:
                    raise CapacityExceeded(f"set would exceed {cap} keys")
            del keys[hi:]
            del vals[hi:]
            keys.extend(x for x, _ in pairs)
            vals.extend(v for _, v in pairs)
            self._bits = bits | (((1 << len(pairs)) - 1) << hi)
            return
        lo = 0
        for x, value in pairs:
            i = bisect_left(keys, x, lo)
            if i < len(keys) and keys[i] == x:
                bits |= 1 << i
                vals[i] = value
                lo = i + 1
                continue
            if cap is not None and len(keys) >= cap:
                self._bits = bits
                if bits.bit_count() >= cap:
                    raise CapacityExceeded(f"set already holds {cap} keys")
                self._compact()
                keys, vals, bits = self._keys, self._vals, self._bits
                i = bisect_left(keys, x)
            keys.insert(i, x)
            vals.insert(i, value)
            bits = (bits & ((1 << i) - 1)) | ((bits >> i) << (i + 1)) | (1 << i)
            lo = i + 1
        self._bits = bits

    def delete(self, x: int) -> None:
        i = bisect_left(self._keys, x)
        if i < len(self._keys) and self._keys[i] == x:
            self._bits &= ~(1 << i)

    def pred(self, x: int) -> tuple[int, Any] | None:
        """Largest present key ``< x``."""
        m = self._bits & ((1 << bisect_left(self._keys, x)) - 1)
        if not m:
            return None
        j = m.bit_length() - 1
        return self._keys[j], self._vals[j]

    def succ(self, x: int) -> tuple[int, Any] | None:
        """Smallest present key ``> x``."""
        i = bisect_right(self._keys, x)
        m = self._bits >> i
        if not m:
            return None
        j = i + (m & -m).bit_length() - 1
        return self._keys[j], self._vals[j]

    def rank(self, x: int) -> int:
        return (self._bits & ((1 << bisect_left(self._keys, x)) - 1)).bit_count()

    def select(self, k: int) -> tuple[int, Any] | None:
        if not 0 <= k < len(self):
            return None
        b = self._bits
        for _ in range(k):
            b &= b - 1
        j = (b & -b).bit_length() - 1
        return self._keys[j], self._vals[j]

    def split(self, x: int) -> None:
        """Keep exactly the keys ``<= x``."""
        self._bits &= (1 << bisect_right(self._keys, x)) - 1

    def copy(self) -> "PredSet":
        other = PredSet(self.capacity)
        other._keys = list(self._keys)
        other._vals = list(self._vals)
        other._bits = self._bits
        return other


@dataclass(frozen=True)
class WeightedTree:
    """Forest given by parent links (-1 for roots) and weighted depths."""

    parent: tuple[int, ...]
    depth: tuple[int, ...]

    @classmethod
    def from_edge_weights(cls, parent: Sequence[int], weight: Sequence[int]) -> "WeightedTree":
        """``weight[v]`` is the weight of the edge into ``v`` (ignored for roots)."""
        d = [-1] * len(parent)
        for v in range(len(parent)):
            path = []
            x = v
            while x >= 0 and d[x] < 0:
                path.append(x)
                x = parent[x]
            base = 0 if x < 0 else d[x]
            for y in reversed(path):
                base = base + weight[y] if parent[y] >= 0 else 0
                d[y] = base
        return cls(tuple(parent), tuple(d))

    def __len__(self) -> int:
        return len(self.parent)

    def children(self) -> list[list[int]]:
        ch: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p >= 0:
                ch[p].append(v)
        return ch


def naive_wa(t: WeightedTree, v: int, p: int) -> int | None:
    """Reference answer by scanning all ancestors."""
    best = None
    while v >= 0:
        if t.depth[v] > p:
            best = v
        v = t.parent[v]
    return best


def _dfs(ch: list[list[int]], roots: Sequence[int]) -> list[int]:
    order = []
    stack = list(reversed(roots))
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(reversed(ch[v]))
    return order


class SmallWaIndex:
    """Constant-query index for a weighted forest of at most ``WORD`` nodes."""

    def __init__(self, depth: Sequence[int], parent: Sequence[int], order: Sequence[int]):
        if len(order) > WORD:
            raise TreeTooLarge(f"{len(order)} nodes exceed the word size {WORD}")
        # perturbed depths are pairwise distinct and keep ancestors first
        keyed = sorted((depth[v] << WORD) + i for i, v in enumerate(order))
        self._keys = keyed
        self._node = [order[k & ((1 << WORD) - 1)] for k in keyed]
        pos = {v: j for j, v in enumerate(self._node)}
        self._anc: dict[int, int] = {}
        for v in order:
            p = parent[v]
            self._anc[v] = (self._anc.get(p, 0) if p in pos else 0) | (1 << pos[v])

    def query(self, v: int, p: int) -> int | None:
        i = bisect_left(self._keys, (p + 1) << WORD)
        m = self._anc[v] >> i
        if not m:
            return None
        return self._node[i + (m & -m).bit_length() - 1]


def wa_build_small(t: WeightedTree) -> SmallWaIndex:
    roots = [v for v, p in enumerate(t.parent) if p < 0]
    return SmallWaIndex(t.depth, t.parent, _dfs(t.children(), roots))


class WaShape:
    """The part of a weighted ancestor index that depends only on the
    parent links, so several depth functions can share it."""

    def __init__(self, parent: Sequence[int], max_height: int):
        n = len(parent)
        ch: list[list[int]] = [[] for _ in range(n)]
        roots = []
        for v, p in enumerate(parent):
            if p >= 0:
                ch[p].append(v)
            else:
                roots.append(v)
        # isolated roots need no structure: they answer for themselves
        order = _dfs(ch, [v for v in roots if ch[v]])
        level = [0] * n
        for v in order:
            p = parent[v]
            if p >= 0:
                level[v] = level[p] + 1
                if level[v] > max_height:
                    raise HeightTooLarge(f"height exceeds {max_height}")
        size = [1] * n
        for v in reversed(order):
            p = parent[v]
            if p >= 0:
                size[p] += size[v]
        macro = [False] * n
        reach = [0] * n  # height of the macro subtree below a macro node
        for v in reversed(order):
            if size[v] >= WORD:
                macro[v] = True
                p = parent[v]
                if p >= 0 and reach[v] + 1 > reach[p]:
                    reach[p] = reach[v] + 1
        # covering macro paths, each extended upward to its root
        path_of = [-1] * n
        paths: list[list[int]] = []
        for v in order:
            if not macro[v] or path_of[v] >= 0:
                continue
            up = []
            x = parent[v]
            while x >= 0:
                up.append(x)
                x = parent[x]
            chain = [v]
            x = v
            while True:
                nxt = [c for c in ch[x] if macro[c]]
                if not nxt:
                    break
                x = max(nxt, key=reach.__getitem__)
                chain.append(x)
            k = len(paths)
            paths.append(up[::-1] + chain)
            for y in chain:
                if path_of[y] < 0:
                    path_of[y] = k
        # micro trees and lowest macro ancestors; small micro trees are
        # packed together so that each batch holds up to WORD nodes
        lma = [-1] * n
        micro_of = [-1] * n
        batches: list[list[int]] = []
        batch: list[int] = []
        for at, v in enumerate(order):
            if macro[v]:
                continue
            p = parent[v]
            if p < 0 or macro[p]:
                if not ch[v]:
                    lma[v] = p  # a single node answers for itself
                    continue
                sub = order[at:at + size[v]]  # subtrees are contiguous in preorder
                if len(batch) + len(sub) > WORD:
                    batches.append(batch)
                    batch = []
                k = len(batches)
                for y in sub:
                    micro_of[y] = k
                    lma[y] = p
                batch.extend(sub)
        if batch:
            batches.append(batch)
        self.parent = parent
        self.level = level
        self.macro = macro
        self.path_of = path_of
        self.paths = paths
        self.lma = lma
        self.micro_of = micro_of
        self.batches = batches
        self.macro_leaves = sum(1 for v in order if macro[v] and not any(macro[c] for c in ch[v]))


class WaIndex:
    """Weighted ancestor index for forests of height ``O(WORD)``.

    Nodes with at least ``WORD`` descendants (counting themselves) are macro
    nodes; each macro node points at the structure of one root-to-leaf macro
    path through it. Micro trees get a :class:`SmallWaIndex`. Pass the
    ``shape`` of an index over the same parent links to skip rebuilding it.
    """

    max_height = 4 * WORD

    def __init__(self, t: WeightedTree, shape: WaShape | None = None):
        if shape is None:
            shape = WaShape(t.parent, self.max_height)
        elif shape.parent is not t.parent and tuple(shape.parent) != tuple(t.parent):
            raise ValueError("shape was built for other parent links")
        self.shape = shape
        depth = t.depth
        self.depth = depth
        self.level = shape.level
        self.macro = shape.macro
        self.lma = shape.lma
        self.macro_leaves = shape.macro_leaves
        self._path_of = shape.path_of
        self._micro_of = shape.micro_of
        self._paths: list[tuple[list[int], list[int]]] = []
        for path in shape.paths:
            ds: list[int] = []
            nodes: list[int] = []
            for y in path:
                if not ds or depth[y] != ds[-1]:
                    ds.append(depth[y])
                    nodes.append(y)
            self._paths.append((ds, nodes))
        parent = t.parent
        self._micro = [SmallWaIndex(depth, parent, b) for b in shape.batches]

    def _macro_query(self, v: int, p: int) -> int | None:
        ds, nodes = self._paths[self._path_of[v]]
        i = bisect_right(ds, p)
        if i == len(ds):
            return None
        u = nodes[i]
        return u if self.level[u] <= self.level[v] else None

    def query(self, v: int, p: int) -> int | None:
        if self.macro[v]:
            return self._macro_query(v, p)
        m = self.lma[v]
        if m >= 0 and self.depth[m] > p:
            return self._macro_query(m, p)
        r = self._micro_of[v]
        if r < 0:
            return v if self.depth[v] > p else None
        return self._micro[r].query(v, p)


def wa_build(t: WeightedTree) -> WaIndex:
    return WaIndex(t)


def wa_query(ix: WaIndex | SmallWaIndex, v: int, p: int) -> int | None:
    """Highest ancestor ``u`` of ``v`` (inclusive) with ``d(u) > p``, or None."""
    return ix.query(v, p)


class LevelAncestor:
    """Constant-query level ancestors in a forest (jump pointers plus ladders).

    ``query(v, d)`` returns the ancestor of ``v`` (inclusive) at depth ``d``,
    where roots have depth 0.
    """

    def __init__(self, parent: Sequence[int]):
        n = len(parent)
        self.parent = list(parent)
        ch: list[list[int]] = [[] for _ in range(n)]
        roots = []
        for v, p in enumerate(parent):
            if p < 0:
                roots.append(v)
            else:
                ch[p].append(v)
        order = _dfs(ch, roots)
        if len(order) != n:
            raise ValueError("parent links contain a cycle")
        depth = [0] * n
        for v in order:
            p = parent[v]
            if p >= 0:
                depth[v] = depth[p] + 1
        self.depth = depth
        height = [0] * n
        longc = [-1] * n
        for v in reversed(order):
            p = parent[v]
            if p >= 0 and height[v] + 1 > height[p]:
                height[p] = height[v] + 1
                longc[p] = v
        # long-path decomposition; each path is extended upward to a ladder
        self._ladder_of = [0] * n
        self._pos = [0] * n
        self._ladders: list[list[int]] = []
        for v in order:
            p = parent[v]
            if p >= 0 and longc[p] == v:
                continue
            path = [v]
            while longc[path[-1]] >= 0:
                path.append(longc[path[-1]])
            up = []
            x = p
            while x >= 0 and len(up) < len(path):
                up.append(x)
                x = parent[x]
            ladder = up[::-1] + path
            k = len(self._ladders)
            off = len(up)
            for j, y in enumerate(path):
                self._ladder_of[y] = k
                self._pos[y] = off + j
            self._ladders.append(ladder)
        jumps = [self.parent]
        reach = max(depth, default=0)
        while (1 << len(jumps)) <= reach:
            prev = jumps[-1]
            jumps.append([-1 if prev[v] < 0 else prev[prev[v]] for v in range(n)])
        self._jumps = jumps

    def query(self, v: int, d: int) -> int | None:
        k = self.depth[v] - d
        if k < 0:
            return None
        if k == 0:
            return v
        i = k.bit_length() - 1
        u = self._jumps[i][v]
        r = k - (1 << i)
        return self._ladders[self._ladder_of[u]][self._pos[u] - r]
