"""Heavy forests inside a rule store and the reduction from balancing an SLP
to building prefix SLPs for its heavy trees.

Everything here works on a :class:`RuleStore` plus a set of "local"
variables. Symbols outside that set behave like terminals: they may be
heavy, and they may be the roots of heavy trees.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection, Mapping, Sequence

from .errors import MissingPrefixVariable
from .rulestore import RuleStore


@dataclass
class HeavyTrees:
    """Heavy forest of the local variables.

    ``up[A] = (beta, pos)`` when the symbol ``beta`` at position ``pos`` is the
    heavy child of ``A``; ``root[A]`` is the root of the tree holding ``A``.
    """

    up: dict[int, tuple[int, int]]
    root: dict[int, int]
    members: dict[int, list[int]]  # tree root -> non-root members, top-down

    def left_label(self, store: RuleStore, a: int) -> tuple[int, ...]:
        pos = self.up[a][1]
        return tuple(reversed(store.rhs[a][:pos]))

    def right_label(self, store: RuleStore, a: int) -> tuple[int, ...]:
        pos = self.up[a][1]
        return store.rhs[a][pos + 1:]


def heavy_trees_store(store: RuleStore, local: Sequence[int]) -> HeavyTrees:
    rhs, w, tw = store.rhs, store.w, store.tw
    up: dict[int, tuple[int, int]] = {}
    for a in local:
        limit = w[a]
        for k, s in enumerate(rhs[a]):
            ws = tw[~s] if s < 0 else w[s]
            if 2 * ws > limit:
                up[a] = (s, k)
                break
    root: dict[int, int] = {}
    members: dict[int, list[int]] = {}
    for a in local:
        if a in root:
            continue
        chain = []
        x = a
        while x in up and x not in root:
            chain.append(x)
            x = up[x][0]
        r = root.get(x, x)
        if x not in up:
            root[x] = x
        members.setdefault(r, [])
        # the chain is bottom-up; members are kept top-down per tree
        for y in reversed(chain):
            root[y] = r
        members[r].extend(reversed(chain))
    # chains found later may hang below earlier ones: order members by depth
    depth: dict[int, int] = {r: 0 for r in members}
    for ms in members.values():
        for y in ms:
            path = []
            x = y
            while x not in depth:
                path.append(x)
                x = up[x][0]
            d = depth[x]
            for z in reversed(path):
                d += 1
                depth[z] = d
        ms.sort(key=depth.__getitem__)
    return HeavyTrees(up, root, members)


def reduce_to_trees_store(
    store: RuleStore,
    local: Collection[int],
    forest: HeavyTrees,
    snapshot: Mapping[int, tuple[int, ...]],
    hl_created: Sequence[int],
    hr_created: Sequence[int],
    pre: Mapping[int, int | None],
    suf: Mapping[int, int | None],
) -> None:
    """Rewrite the local variables so that every rule is contracting.

    ``pre[A]`` must derive the left labeling of the path from the root of
    A's heavy tree down to A (the reversed light prefixes), ``suf[A]`` the
    right labeling; ``None`` stands for the empty string.
    """
    for v in hl_created:
        store.rhs[v] = store.rhs[v][::-1]
    rewritten = []
    for a in local:
        r = forest.root[a]
        if r == a:
            continue
        if a not in pre or a not in suf:
            raise MissingPrefixVariable(f"no prefix/suffix variable for variable {a}")
        body: list[int] = []
        if pre[a] is not None:
            body.append(pre[a])
        body.extend(snapshot[r] if r >= 0 and r in local else (r,))
        if suf[a] is not None:
            body.append(suf[a])
        store.rhs[a] = tuple(body)
        rewritten.append(a)
    helper = set(hl_created)
    helper.update(hr_created)
    store.expand_heavy(rewritten, helper.__contains__)
    store.expand_heavy(list(hl_created) + list(hr_created), lambda s: s in local)
