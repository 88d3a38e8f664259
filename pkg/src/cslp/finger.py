"""Fringe access and finger search over a balanced SLP in Chomsky normal form.

The grammar must be in CNF with distinct children in every binary rule and
have logarithmic height below every variable; :func:`prepare` produces such
a grammar from any SLP.

Positions are 1-based. A path from a variable to a leaf of its derivation
tree is stored as an *accelerated path*: a list of edges, each either a
short edge (one rule application) or a long edge (a jump inside one of the
precomputed forests). Edges are tuples ``(src, forest, dst, lam, rho)``
where ``forest`` is -1 for short edges and ``lam``/``rho`` count the leaves
branching off to the left/right.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

from .ancestry import PredSet, WaIndex, WeightedTree
from .balancer import make_contracting
from .errors import FingerNotSet, NotCnf, NotContracting, PositionOutOfRange, ShapeViolation
from .grammar import Slp, distinct_children, is_cnf, to_cnf

Edge = tuple[int, int, int, int, int]

# height(A) <= HEIGHT_SLOPE * log2|A| + HEIGHT_SLACK is required below every variable
HEIGHT_SLOPE = 3.0
HEIGHT_SLACK = 8


@dataclass(frozen=True, eq=False)
class PreparedSlp:
    slp: Slp
    representative: tuple[int | None, ...]  # input variable -> variable of ``slp``


def prepare(g: Slp) -> PreparedSlp:
    """Balance ``g``, bring it into CNF and make the children of rules distinct."""
    cs = make_contracting(g)
    cnf = to_cnf(cs.slp, split="weight")
    out = distinct_children(cnf.slp)
    rep = tuple(None if r is None else cnf.representative[r] for r in cs.representative)
    return PreparedSlp(out, rep)


def iterated_log_floors(n: int, t: int) -> list[int]:
    """``floor(log^(k) n)`` for k < t; nonpositive iterates are clamped to 0.

    Flooring is exact for comparisons with integers: ``i <= x`` iff
    ``i <= floor(x)`` and ``m > x`` iff ``m > floor(x)``.
    """
    out = [n]
    x = float(n)
    for _ in range(1, t):
        x = math.log2(x) if x > 0 else -math.inf
        out.append(max(0, math.floor(x)) if x > -math.inf else 0)
    return out


def _rank(m: int) -> int:
    k = 0
    while m > 1 << (1 << k):
        k += 1
    return k


@dataclass(eq=False)
class _Forest:
    parent: list[int]
    lam: list[int]
    rho: list[int]
    root: list[int]
    wa: tuple[WaIndex, WaIndex]  # by left weights, by right weights

    def depth(self, side: int) -> list[int]:
        return self.rho if side else self.lam


def _build_forest(choice: list[int], lc: list[int], rc: list[int], ln: list[int],
                  order: Sequence[int]) -> _Forest:
    n = len(choice)
    lam = [0] * n
    rho = [0] * n
    root = list(range(n))
    for a in order:  # children before parents
        p = choice[a]
        if p < 0:
            continue
        if p == lc[a]:
            lam[a] = lam[p]
            rho[a] = rho[p] + ln[rc[a]]
        else:
            lam[a] = lam[p] + ln[lc[a]]
            rho[a] = rho[p]
        root[a] = root[p]
    par = tuple(choice)
    first = WaIndex(WeightedTree(par, tuple(lam)))
    wa = (first, WaIndex(WeightedTree(par, tuple(rho)), first.shape))
    return _Forest(choice, lam, rho, root, wa)


class SkewForestSet:
    """Forests F_0..F_{t-1} and their mirrors, with weighted ancestor indexes.

    Forest ``k`` is left-skewed, forest ``t + k`` is its mirror image.
    """

    def __init__(self, g: Slp, t: int = 3):
        if t < 1:
            raise ValueError("t must be at least 1")
        if not is_cnf(g):
            raise NotCnf("grammar is not in Chomsky normal form")
        n = g.num_vars
        lc = [-1] * n
        rc = [-1] * n
        term = [-1] * n
        for a, rhs in enumerate(g.rules):
            if len(rhs) == 1:
                term[a] = ~rhs[0]
            else:
                lc[a], rc[a] = rhs
                if lc[a] == rc[a]:
                    raise NotCnf(f"rule of {g.names[a]!r} has two equal children")
        m = g.metrics
        ln = list(m.lengths)
        for a in range(n):
            if m.heights[a] > HEIGHT_SLOPE * math.log2(ln[a]) + HEIGHT_SLACK:
                raise NotContracting(
                    f"variable {g.names[a]!r} has height {m.heights[a]} for length {ln[a]}")
        self.slp = g
        self.t = t
        self.lc, self.rc, self.term, self.ln = lc, rc, term, ln
        start = g.start if g.start is not None else (m.order[-1] if m.order else None)
        self.start = start
        self.n_total = ln[start] if start is not None else 0
        big = max(ln, default=1)
        self.thresholds = iterated_log_floors(max(big, self.n_total), t)
        rk = [_rank(x) for x in ln]
        order = m.order
        forests: list[_Forest | None] = [None] * (2 * t)
        for side in (0, 1):
            near, far = (lc, rc) if side == 0 else (rc, lc)
            for k in range(t):
                choice = [-1] * n
                th = self.thresholds[k]
                for a in range(n):
                    b, c = near[a], far[a]
                    if b < 0:
                        continue
                    if k == 0:
                        if rk[a] == rk[b]:
                            choice[a] = b
                        elif rk[a] == rk[c] > rk[b]:
                            choice[a] = c
                    elif ln[b] > th:
                        choice[a] = b
                    elif ln[c] > th:
                        choice[a] = c
                forests[side * t + k] = _build_forest(choice, lc, rc, ln, order)
        self.forests: list[_Forest] = forests  # type: ignore[assignment]

    # -- single steps -----------------------------------------------------

    def _short(self, a: int, p: int, side: int) -> tuple[int, int, Edge]:
        """One rule application; ``p`` counts from the given side."""
        lc, rc, ln = self.lc, self.rc, self.ln
        b, c = lc[a], rc[a]
        near = b if side == 0 else c
        if p <= ln[near]:
            child = near
        else:
            p -= ln[near]
            child = c if side == 0 else b
        e = (a, -1, child, 0, ln[c]) if child == b else (a, -1, child, ln[b], 0)
        return child, p, e

    def _long(self, a: int, p: int, fid: int, side: int) -> tuple[int, int, Edge | None]:
        f = self.forests[fid]
        w = f.rho if side else f.lam
        x = f.wa[side].query(a, w[a] - p)
        p -= w[a] - w[x]
        if x == a:
            return a, p, None
        return x, p, (a, fid, x, f.lam[a] - f.lam[x], f.rho[a] - f.rho[x])

    def _can_long(self, a: int, p: int, fid: int, side: int) -> bool:
        f = self.forests[fid]
        w = f.rho if side else f.lam
        return p <= w[a] + self.ln[f.root[a]]

    # -- fringe access ----------------------------------------------------

    def fringe(self, a: int, i: int, path: list[Edge]) -> tuple[int, int]:
        """Extend ``path`` by an accelerated path from ``a`` to ``a[i]``.

        Returns the leaf variable (a terminal rule) and the number of steps.
        """
        ln, term = self.ln, self.term
        if term[a] >= 0:
            return a, 0
        dl, dr = i, ln[a] - i + 1
        side, p = (0, dl) if dl <= dr else (1, dr)
        t = self.t
        base = side * t
        th = self.thresholds
        k = t - 1
        while p > th[k]:
            k -= 1
        steps = 0
        if ln[a] > th[k]:
            a, p, e = self._long(a, p, base + k, side)
            steps += 1
            if e is not None:
                path.append(e)
            a, p, e = self._short(a, p, side)
            steps += 1
            path.append(e)
        f0 = base
        while term[a] < 0:
            if self._can_long(a, p, f0, side):
                a, p, e = self._long(a, p, f0, side)
                steps += 1
                if e is not None:
                    path.append(e)
                if term[a] >= 0:
                    break
                a, p, e = self._short(a, p, side)
                steps += 1
                path.append(e)
            else:
                # plain descent to the leaf; same steps as repeated _short
                lc, rc = self.lc, self.rc
                while term[a] < 0:
                    b, c = lc[a], rc[a]
                    if side == 0:
                        if p <= ln[b]:
                            path.append((a, -1, b, 0, ln[c]))
                            a = b
                        else:
                            p -= ln[b]
                            path.append((a, -1, c, ln[b], 0))
                            a = c
                    elif p <= ln[c]:
                        path.append((a, -1, c, ln[b], 0))
                        a = c
                    else:
                        p -= ln[c]
                        path.append((a, -1, b, 0, ln[c]))
                        a = b
                    steps += 1
        return a, steps

    def short_path(self, a: int, i: int) -> tuple[list[Edge], int]:
        path: list[Edge] = []
        while self.term[a] < 0:
            a, i, e = self._short(a, i, 0)
            path.append(e)
        return path, a

    def symbol(self, leaf: int) -> str:
        return self.slp.terminals[self.term[leaf]]


def preprocess_fringe(g: Slp, t: int = 3) -> SkewForestSet:
    return SkewForestSet(g, t)


@dataclass(frozen=True)
class FringeResult:
    symbol: str
    steps: int
    path: list[Edge]
    leaf: int


def _check_pos(n: int, i: int) -> None:
    if not 1 <= i <= n:
        raise PositionOutOfRange(f"position {i} outside 1..{n}")


def fringe_access(sf: SkewForestSet, a: int, i: int) -> FringeResult:
    _check_pos(sf.ln[a], i)
    path: list[Edge] = []
    leaf, steps = sf.fringe(a, i, path)
    return FringeResult(sf.symbol(leaf), steps, path, leaf)


# ---------------------------------------------------------------------------
# finger search


@dataclass(eq=False)
class FingerState:
    """A finger on the start variable of a :class:`SkewForestSet`.

    Several fingers may share one forest set.
    """

    sf: SkewForestSet
    gamma: list[tuple[Edge, int, int]] = field(default_factory=list)
    f: int | None = None
    last_steps: int = 0

    def __post_init__(self) -> None:
        # room for two full paths, so evicting stale keys is rare
        h = self.sf.slp.metrics.heights[self.sf.start] if self.sf.start is not None else 0
        cap = 2 * h + 4
        self._cap = cap
        self.L = PredSet(cap)
        self.R = PredSet(cap)

    @property
    def n(self) -> int:
        return self.sf.n_total

    def _append(self, edges: Sequence[Edge]) -> None:
        gamma, L, R = self.gamma, self.L, self.R
        lam, rho = (gamma[-1][1], gamma[-1][2]) if gamma else (0, 0)
        j = len(gamma)
        lk = []
        rk = []
        for e in edges:
            # zero-weight steps repeat a key; the deepest index wins
            if e[3]:
                lam += e[3]
                lk.append((lam, j + 1))
            elif lk:
                lk[-1] = (lam, j + 1)
            else:
                lk.append((lam, j + 1))
            if e[4]:
                rho += e[4]
                rk.append((rho, j + 1))
            elif rk:
                rk[-1] = (rho, j + 1)
            else:
                rk.append((rho, j + 1))
            j += 1
            gamma.append((e, lam, rho))
        L.insert_ascending(lk)
        R.insert_ascending(rk)

    def setfinger(self, f: int) -> int:
        _check_pos(self.n, f)
        path, _ = self.sf.short_path(self.sf.start, f)
        self.gamma = []
        self.L = PredSet(self._cap)
        self.R = PredSet(self._cap)
        self.L.insert(0, 0)
        self.R.insert(0, 0)
        self._append(path)
        self.f = f
        self.last_steps = len(path)
        return self.last_steps

    def _leaf(self) -> int:
        return self.gamma[-1][0][2] if self.gamma else self.sf.start

    def _route(self, i: int) -> tuple[int, int, list[Edge], int, int]:
        """Shared part of movefinger and access; does not mutate the state.

        Returns the cut index j, the new tail, the leaf and the step count.
        """
        if self.f is None:
            raise FingerNotSet("setfinger must be called first")
        _check_pos(self.n, i)
        f = self.f
        sf = self.sf
        side = 0 if i < f else 1
        q = i if side == 0 else self.n - i + 1
        d = abs(f - i)
        key, j = (self.L if side == 0 else self.R).pred(q)
        steps = 1
        e = self.gamma[j][0]
        q -= key
        a, fid = e[0], e[1]
        tail: list[Edge] = []
        if fid < 0:
            # the old edge branches away from the target side: step the other way
            x, p = a, q
            child, p, e2 = sf._short(x, p, side)
            assert child == (sf.lc[a] if side == 0 else sf.rc[a])
        else:
            x, p, e2 = sf._long(a, q, fid, side)
            steps += 1
            if e2 is not None:
                tail.append(e2)
            child, p, e2 = sf._short(x, p, side)
            assert sf.forests[fid].parent[x] != child
        steps += 1
        tail.append(e2)
        m = sf.ln[child]
        assert m - p + 1 <= d, (m, p, d)
        pos = p if side == 0 else m - p + 1
        leaf, st = sf.fringe(child, pos, tail)
        return side, j, tail, leaf, steps + st

    def movefinger(self, i: int) -> int:
        if self.f is None:
            raise FingerNotSet("setfinger must be called first")
        _check_pos(self.n, i)
        if i == self.f:
            self.last_steps = 0
            return 0
        side, j, tail, _, steps = self._route(i)
        lam, rho = (self.gamma[j - 1][1], self.gamma[j - 1][2]) if j else (0, 0)
        del self.gamma[j:]
        self.L.split(lam)
        self.R.split(rho)
        self.L.insert(lam, j)
        self.R.insert(rho, j)
        self._append(tail)
        self.f = i
        self.last_steps = steps + 2
        return self.last_steps

    def access(self, i: int) -> str:
        if self.f is None:
            raise FingerNotSet("setfinger must be called first")
        _check_pos(self.n, i)
        if i == self.f:
            self.last_steps = 0
            return self.sf.symbol(self._leaf())
        _, _, _, leaf, steps = self._route(i)
        self.last_steps = steps
        return self.sf.symbol(leaf)

    def symbol(self) -> str:
        if self.f is None:
            raise FingerNotSet("setfinger must be called first")
        return self.sf.symbol(self._leaf())

    def check(self) -> None:
        """Recompute prefix sums from the stack and compare with L and R."""
        lam = rho = 0
        want_l = {0: 0}
        want_r = {0: 0}
        prev = self.sf.start
        for j, (e, l_j, r_j) in enumerate(self.gamma, 1):
            assert e[0] == prev
            prev = e[2]
            lam += e[3]
            rho += e[4]
            assert (lam, rho) == (l_j, r_j)
            want_l[lam] = j
            want_r[rho] = j
        assert dict(self.L.items()) == want_l, (self.L.items(), want_l)
        assert dict(self.R.items()) == want_r
        if self.f is not None:
            assert self.f == lam + 1
            assert self.sf.term[prev] >= 0


# ---------------------------------------------------------------------------
# path-balanced grammars


@dataclass(frozen=True)
class PathBalanceParams:
    """Every root-to-leaf path below A has length between alpha*log2|A| and
    beta*log2|A| (leaf = terminal rule)."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= self.beta:
            raise ValueError("need 0 < alpha <= beta")


def check_path_balance(g: Slp, params: PathBalanceParams, samples: int = 200,
                       seed: int = 0, slack: int = 1) -> bool:
    """Spot-check path balance on random root-to-leaf paths.

    Path lengths count rule applications; ``slack`` absorbs the final
    terminal rule of a CNF grammar.
    """
    rng = random.Random(seed)
    lengths = g.metrics.lengths
    cand = [a for a in range(g.num_vars) if lengths[a] >= 2]
    for _ in range(samples if cand else 0):
        a = rng.choice(cand)
        lg = math.log2(lengths[a])
        x, depth = a, 0
        while x >= 0:
            rhs = g.rules[x]
            depth += 1
            x = rng.choice(rhs)
        if not params.alpha * lg - slack <= depth <= params.beta * lg + slack:
            return False
    return True


class PathBalancedIndex:
    """All left edges (F_0) and all right edges (F_1) with weighted ancestor
    indexes on the right weights of F_0 and the left weights of F_1."""

    def __init__(self, g: Slp):
        if not is_cnf(g):
            raise NotCnf("grammar is not in Chomsky normal form")
        n = g.num_vars
        lc = [-1] * n
        rc = [-1] * n
        term = [-1] * n
        for a, rhs in enumerate(g.rules):
            if len(rhs) == 1:
                term[a] = ~rhs[0]
            else:
                lc[a], rc[a] = rhs
        ln = list(g.metrics.lengths)
        rho0 = [0] * n
        lam1 = [0] * n
        for a in g.metrics.order:
            if term[a] < 0:
                rho0[a] = rho0[lc[a]] + ln[rc[a]]
                lam1[a] = lam1[rc[a]] + ln[lc[a]]
        try:
            self.wa0 = WaIndex(WeightedTree(tuple(lc), tuple(rho0)))
            self.wa1 = WaIndex(WeightedTree(tuple(rc), tuple(lam1)))
        except Exception as exc:  # height too large for the index
            raise ShapeViolation(str(exc)) from exc
        self.slp = g
        self.lc, self.rc, self.term, self.ln = lc, rc, term, ln
        self.rho0, self.lam1 = rho0, lam1


def fringe_access_path_balanced(ix: PathBalancedIndex, a: int, i: int) -> tuple[str, int]:
    lc, rc, term, ln = ix.lc, ix.rc, ix.term, ix.ln
    _check_pos(ln[a], i)
    steps = 0
    if term[a] < 0:
        if 2 * i <= ln[a]:
            x = ix.wa0.query(a, ix.rho0[a] - (ln[a] - i + 1))
            steps += 1
            if term[x] < 0:
                i -= ln[lc[x]]
                x = rc[x]
                steps += 1
        else:
            j = ln[a] - i + 1
            x = ix.wa1.query(a, ix.lam1[a] - i)
            steps += 1
            if term[x] < 0:
                j -= ln[rc[x]]
                x = lc[x]
                i = ln[x] - j + 1
                steps += 1
        a = x
        while term[a] < 0:
            b = lc[a]
            if i <= ln[b]:
                a = b
            else:
                i -= ln[b]
                a = rc[a]
            steps += 1
    return ix.slp.terminals[term[a]], steps
