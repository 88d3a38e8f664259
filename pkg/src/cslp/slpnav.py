"""Two-way navigation in the derivation tree of a string SLP.

A cursor ``sigma(A, i)`` records the path from ``A`` to its ``i``-th leaf as
a linked list of frames that share prefixes, so every cursor is an
immutable value. Runs of first-child steps and runs of last-child steps are
kept as single frames; closing such a run uses a level-ancestor query in
the first-child (last-child) forest. Moving to a neighbouring position
therefore touches a constant number of frames.

Frame kinds: ``(LEFT, top, bot)`` and ``(RIGHT, top, bot)`` are runs of
first/last-child steps from variable ``top`` down to symbol ``bot``;
``(MID, u, k)`` descends into child ``k`` of ``u`` (neither first nor last).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .ancestry import LevelAncestor
from .errors import PositionOutOfRange
from .grammar import Slp

LEFT, RIGHT, MID = 0, 1, 2

Path = Any  # None or (Path, frame)


@dataclass(frozen=True, slots=True)
class SigmaCursor:
    root: int  # variable of the navigated SLP
    i: int  # 1-based position
    n: int  # length of the root variable
    leaf: int  # terminal (encoded as ~t) at position i
    path: Path
    cost: int = field(compare=False)  # frames touched by the producing operation


class SlpNavigator:
    """Preprocessed SLP supporting cursor creation and neighbour moves.

    Variables whose rule has a single non-empty child are skipped
    transparently; variables deriving the empty string have no cursors.
    """

    def __init__(self, slp: Slp):
        self.slp = slp
        lengths = slp.metrics.lengths
        self.lengths = lengths
        nv = slp.num_vars
        nt = len(slp.terminals)
        alias: list[int | None] = [None] * nv
        rules: list[tuple[int, ...]] = [()] * nv
        for v in slp.metrics.order:
            kids = []
            for c in slp.rules[v]:
                if c < 0:
                    kids.append(c)
                elif alias[c] is not None:
                    kids.append(alias[c])
            if len(kids) == 1:
                alias[v] = kids[0]
            elif kids:
                alias[v] = v
                rules[v] = tuple(kids)
        self.alias = alias
        self.rules = rules
        self._len = [lengths[v] for v in range(nv)]

        def node(s: int) -> int:
            return s if s >= 0 else nv + ~s

        pl = [-1] * (nv + nt)
        pr = [-1] * (nv + nt)
        leftleaf = [0] * nv
        rightleaf = [0] * nv
        for v in slp.metrics.order:
            r = rules[v]
            if not r:
                continue
            pl[v] = node(r[0])
            pr[v] = node(r[-1])
            leftleaf[v] = r[0] if r[0] < 0 else leftleaf[r[0]]
            rightleaf[v] = r[-1] if r[-1] < 0 else rightleaf[r[-1]]
        self.leftleaf = leftleaf
        self.rightleaf = rightleaf
        self._node = node
        self._la = (LevelAncestor(pl), LevelAncestor(pr))

    # -- helpers ------------------------------------------------------------

    def _slen(self, s: int) -> int:
        return 1 if s < 0 else self._len[s]

    def _run_parent(self, side: int, top: int, bot: int) -> int:
        """The variable just above ``bot`` on the first/last-child run from ``top``."""
        la = self._la[side]
        return la.query(self._node(top), la.depth[self._node(bot)] + 1)

    # -- cursor creation ----------------------------------------------------

    def length(self, a: int) -> int:
        return self.lengths[a]

    def first(self, a: int) -> SigmaCursor | None:
        s = self.alias[a]
        if s is None:
            return None
        if s < 0:
            return SigmaCursor(a, 1, 1, s, None, 1)
        return SigmaCursor(a, 1, self.lengths[a], self.leftleaf[s], (None, (LEFT, s, self.leftleaf[s])), 1)

    def last(self, a: int) -> SigmaCursor | None:
        s = self.alias[a]
        if s is None:
            return None
        n = self.lengths[a]
        if s < 0:
            return SigmaCursor(a, n, n, s, None, 1)
        return SigmaCursor(a, n, n, self.rightleaf[s], (None, (RIGHT, s, self.rightleaf[s])), 1)

    def at(self, a: int, i: int) -> SigmaCursor:
        """Cursor to position ``i`` by one root-to-leaf descent."""
        n = self.lengths[a]
        if not 1 <= i <= n:
            raise PositionOutOfRange(f"position {i} outside 1..{n}")
        s = self.alias[a]
        assert s is not None
        path: Path = None
        k0 = i - 1
        steps = 1
        rules, slen = self.rules, self._slen
        while s >= 0:
            r = rules[s]
            last = len(r) - 1
            for k, c in enumerate(r):
                m = slen(c)
                if k0 < m:
                    break
                k0 -= m
            steps += 1
            if k == 0 or k == last:
                kind = LEFT if k == 0 else RIGHT
                if path is not None and path[1][0] == kind:
                    path = (path[0], (kind, path[1][1], c))
                else:
                    path = (path, (kind, s, c))
            else:
                path = (path, (MID, s, k))
            s = c
        return SigmaCursor(a, i, n, s, path, steps)

    # -- neighbour moves ----------------------------------------------------

    def _step(self, rest: Path, u: int, k: int, side: int) -> tuple[Path, int]:
        """Append the step from ``u`` into child ``k`` and the run to the
        extreme leaf on the ``side`` opposite to the direction of travel."""
        r = self.rules[u]
        c = r[k]
        kind = LEFT if k == 0 else RIGHT if k == len(r) - 1 else MID
        if kind == MID:
            rest = (rest, (MID, u, k))
        elif rest is not None and rest[1][0] == kind:
            rest = (rest[0], (kind, rest[1][1], c))
        else:
            rest = (rest, (kind, u, c))
        if c >= 0:
            leaf = self.leftleaf[c] if side == LEFT else self.rightleaf[c]
            rest = (rest, (side, c, leaf))
            return rest, leaf
        return rest, c

    def _move(self, cur: SigmaCursor, fwd: bool) -> SigmaCursor | None:
        if (cur.i == cur.n) if fwd else (cur.i == 1):
            return None
        # moving right: trailing last-child runs are finished, and the
        # frame before them tells where the next leaf starts
        done = RIGHT if fwd else LEFT
        path = cur.path
        cost = 1
        if path[1][0] == done:
            path = path[0]
            cost += 1
        rest, fr = path
        if fr[0] == MID:
            u, k = fr[1], fr[2]
        else:
            top, bot = fr[1], fr[2]
            u = self._run_parent(fr[0], top, bot)
            cost += 1
            if u != top:
                rest = (rest, (fr[0], top, u))
            k = 0 if fr[0] == LEFT else len(self.rules[u]) - 1
        k = k + 1 if fwd else k - 1
        rest, leaf = self._step(rest, u, k, LEFT if fwd else RIGHT)
        return SigmaCursor(cur.root, cur.i + (1 if fwd else -1), cur.n, leaf, rest, cost + 2)

    def succ(self, cur: SigmaCursor) -> SigmaCursor | None:
        return self._move(cur, True)

    def pred(self, cur: SigmaCursor) -> SigmaCursor | None:
        return self._move(cur, False)

    def symbol(self, cur: SigmaCursor) -> str:
        return self.slp.terminals[~cur.leaf]

    def frames(self, cur: SigmaCursor) -> list[tuple[int, int, int]]:
        out = []
        p = cur.path
        while p is not None:
            out.append(p[1])
            p = p[0]
        return out[::-1]
