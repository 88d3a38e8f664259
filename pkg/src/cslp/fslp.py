"""Forest straight-line programs (FSLPs) in normal form and navigation in
the trees they compress.

Variables come in three classes: ``top`` variables derive forests, ``bot``
variables derive single trees and ``ctx`` variables derive contexts, i.e.
forests with exactly one hole ``x`` at a leaf. Rules are tuples:

* ``("eps",)`` and ``("cat", B, C)`` for top variables,
* ``("node", a, B)`` (the tree ``a(B)``) and ``("ins", X, B)`` (``X<B>``) for
  bot variables,
* ``("comp", Y, Z)`` (``Y<Z>``) and ``("ctx", a, L, R)`` (``a(L x R)``) for
  context variables.

Horizontal structure is captured by the rib SLP, whose symbols are the tree
variables; it is made contracting so that jumping to the ``j``-th tree of a
forest costs O(log d). Vertical structure is captured by the spine SLP,
whose symbols are the rules ``a(B)`` and ``a(LxR)``. A node is addressed by a
``TauCursor``: alternating rib and spine cursors with direction marks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .balancer import make_contracting
from .errors import (
    CyclicGrammar,
    OutputTooLarge,
    Redefinition,
    ShapeViolation,
    UnknownSymbol,
)
from .grammar import Slp, topological_order
from .slpnav import SigmaCursor, SlpNavigator

TOP, BOT, CTX = "top", "bot", "ctx"
CLASSES = (TOP, BOT, CTX)
_SHAPES = {"eps": TOP, "cat": TOP, "node": BOT, "ins": BOT, "comp": CTX, "ctx": CTX}
UNDERLINE = "̲"


@dataclass(frozen=True, eq=False)
class Fslp:
    classes: Mapping[str, str]
    rules: Mapping[str, tuple]
    start: str | None = None
    order: tuple[str, ...] = field(default=(), compare=False)  # children first

    @classmethod
    def from_rules(cls, classes: Mapping[str, str], rules: Iterable[tuple[str, tuple]] | Mapping[str, tuple],
                   start: str | None = None) -> "Fslp":
        pairs = list(rules.items()) if isinstance(rules, Mapping) else list(rules)
        table: dict[str, tuple] = {}
        for name, rhs in pairs:
            if name in table:
                raise Redefinition(f"variable {name!r} defined twice")
            table[name] = tuple(rhs)
        f = cls(dict(classes), table, start)
        order = validate_fslp(f)
        object.__setattr__(f, "order", tuple(order))
        return f

    def variables(self, kind: str) -> list[str]:
        return [v for v in self.order if self.classes[v] == kind]

    @property
    def size(self) -> int:
        return sum(max(1, len(r) - 1) for r in self.rules.values())


def _rule_vars(rule: tuple) -> list[tuple[str, tuple[str, ...]]]:
    """(variable, allowed classes) for every variable referenced by a rule."""
    kind = rule[0]
    v0 = (TOP, BOT)
    if kind == "eps":
        return []
    if kind == "cat":
        return [(rule[1], v0), (rule[2], v0)]
    if kind == "node":
        return [(rule[2], v0)]
    if kind == "ins":
        return [(rule[1], (CTX,)), (rule[2], (BOT,))]
    if kind == "comp":
        return [(rule[1], (CTX,)), (rule[2], (CTX,))]
    if kind == "ctx":
        return [(rule[2], v0), (rule[3], v0)]
    raise ShapeViolation(f"unknown rule kind {kind!r}")


_ARITY = {"eps": 1, "cat": 3, "node": 3, "ins": 3, "comp": 3, "ctx": 4}


def validate_fslp(f: Fslp) -> list[str]:
    """Check classes, rule shapes and acyclicity; returns a children-first order."""
    for v, c in f.classes.items():
        if c not in CLASSES:
            raise ShapeViolation(f"variable {v!r} has unknown class {c!r}")
    names = list(f.rules)
    index = {v: k for k, v in enumerate(names)}
    deps: list[list[int]] = []
    for v in names:
        rule = f.rules[v]
        if v not in f.classes:
            raise ShapeViolation(f"variable {v!r} has no class")
        if not rule or rule[0] not in _SHAPES or len(rule) != _ARITY[rule[0]]:
            raise ShapeViolation(f"malformed rule for {v!r}: {rule!r}")
        if _SHAPES[rule[0]] != f.classes[v]:
            raise ShapeViolation(f"rule {rule[0]!r} not allowed for {f.classes[v]} variable {v!r}")
        ds = []
        for u, allowed in _rule_vars(rule):
            if u not in index:
                raise UnknownSymbol(f"undefined variable {u!r} in rule for {v!r}")
            if f.classes[u] not in allowed:
                raise ShapeViolation(f"{u!r} ({f.classes[u]}) not allowed in rule {rule[0]!r} of {v!r}")
            ds.append(index[u])
        deps.append(ds)
    for v in f.classes:
        if v not in index:
            raise UnknownSymbol(f"variable {v!r} has a class but no rule")
    if f.start is not None:
        if f.start not in index:
            raise UnknownSymbol(f"start variable {f.start!r} is not defined")
        if f.classes[f.start] == CTX:
            raise ShapeViolation("the start variable must derive a forest")
    try:
        order = topological_order(deps)
    except CyclicGrammar as e:
        raise CyclicGrammar(f"variable {names[e.var]!r} is reachable from itself", names[e.var]) from None
    return [names[k] for k in order]


def example_fslp() -> Fslp:
    """Small example FSLP deriving a(b(c,b(c,c,c),c),b(c,b(c,c,c),c)) from A."""
    classes = {"A": BOT, "C": BOT, "D": BOT, "B": TOP, "E": TOP, "X": CTX, "Y": CTX}
    rules = {
        "A": ("node", "a", "B"),
        "B": ("cat", "C", "C"),
        "C": ("ins", "X", "D"),
        "D": ("node", "c", "E"),
        "X": ("comp", "Y", "Y"),
        "Y": ("ctx", "b", "D", "D"),
        "E": ("eps",),
    }
    return Fslp.from_rules(classes, rules, "A")


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class ExplicitForest:
    """Forest given by node labels and ordered child lists; ``hole`` is the
    node standing for the parameter ``x`` of a context."""

    labels: list[str]
    children: list[list[int]]
    roots: list[int]
    hole: int | None = None

    def __len__(self) -> int:
        return len(self.labels)

    def parents(self) -> list[int]:
        par = [-1] * len(self.labels)
        for v, ch in enumerate(self.children):
            for c in ch:
                par[c] = v
        return par

    def preorder(self) -> list[int]:
        out = []
        stack = list(reversed(self.roots))
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(reversed(self.children[v]))
        return out

    def term(self) -> str:
        parts: list[str] = []
        stack: list[Any] = [("seq", self.roots)]
        while stack:
            item = stack.pop()
            if isinstance(item, str):
                parts.append(item)
                continue
            _, seq = item
            todo: list[Any] = []
            for k, v in enumerate(seq):
                if k:
                    todo.append(",")
                todo.append(self.labels[v])
                if self.children[v]:
                    todo.append("(")
                    todo.append(("seq", self.children[v]))
                    todo.append(")")
            stack.extend(reversed(todo))
        return "".join(parts)


def forest_sizes(f: Fslp) -> dict[str, int]:
    """Number of nodes derived by each variable (contexts without the hole)."""
    size: dict[str, int] = {}
    for v in f.order:
        r = f.rules[v]
        k = r[0]
        if k == "eps":
            size[v] = 0
        elif k in ("cat", "ins", "comp"):
            size[v] = size[r[1]] + size[r[2]]
        elif k == "node":
            size[v] = 1 + size[r[2]]
        else:
            size[v] = 1 + size[r[2]] + size[r[3]]
    return size


def _expand(f: Fslp, var: str, max_nodes: int) -> ExplicitForest:
    n = forest_sizes(f)[var] + (1 if f.classes[var] == CTX else 0)
    if n > max_nodes:
        raise OutputTooLarge(f"{var!r} derives {n} nodes, more than {max_nodes}")
    labels: list[str] = []
    children: list[list[int]] = []
    roots: list[int] = []
    hole = None

    def new(label: str, out: list[int]) -> list[int]:
        out.append(len(labels))
        labels.append(label)
        ch: list[int] = []
        children.append(ch)
        return ch

    # tasks: ("F", A, out) expands a forest variable into ``out``;
    # ("C", X, out, filler) expands a context whose hole receives ``filler``
    stack: list[tuple] = [("F", var, roots) if f.classes[var] != CTX else ("C", var, roots, None)]
    while stack:
        task = stack.pop()
        if task[0] == "H":
            hole = len(labels)
            new("x", task[1])
            continue
        rule = f.rules[task[1]]
        out = task[2]
        k = rule[0]
        if task[0] == "F":
            if k == "cat":
                stack.append(("F", rule[2], out))
                stack.append(("F", rule[1], out))
            elif k == "node":
                stack.append(("F", rule[2], new(rule[1], out)))
            elif k == "ins":
                stack.append(("C", rule[1], out, ("F", rule[2])))
        else:
            filler = task[3]
            if k == "comp":
                stack.append(("C", rule[1], out, ("C", rule[2], filler)))
            else:
                ch = new(rule[1], out)
                stack.append(("F", rule[3], ch))
                if filler is None:
                    stack.append(("H", ch))
                elif filler[0] == "F":
                    stack.append(("F", filler[1], ch))
                else:
                    stack.append(("C", filler[1], ch, filler[2]))
                stack.append(("F", rule[2], ch))
    return ExplicitForest(labels, children, roots, hole)


def eval_forest(f: Fslp, var: str | None = None, max_len: int = 1 << 22) -> ExplicitForest:
    var = f.start if var is None else var
    if var not in f.classes or f.classes[var] == CTX:
        raise ShapeViolation(f"{var!r} is not a forest variable")
    return _expand(f, var, max_len)


def eval_context(f: Fslp, var: str, max_len: int = 1 << 22) -> ExplicitForest:
    if f.classes.get(var) != CTX:
        raise ShapeViolation(f"{var!r} is not a context variable")
    return _expand(f, var, max_len)


# ---------------------------------------------------------------------------
# rib and spine SLPs


@dataclass(frozen=True, eq=False)
class RibSlp:
    """String SLP over the tree variables; ``var_of`` maps its terminals back."""

    slp: Slp
    var_of: Mapping[str, str]


@dataclass(frozen=True, eq=False)
class SpineSlp:
    """String SLP over the rules a(B) and a(LxR); ``info`` maps its terminals
    to those rules."""

    slp: Slp
    info: Mapping[str, tuple]


def build_rib_slp(f: Fslp) -> RibSlp:
    rules: list[tuple[str, list[str]]] = []
    var_of: dict[str, str] = {}
    for v in f.order:
        r = f.rules[v]
        c = f.classes[v]
        if c == TOP:
            rules.append((v, [] if r[0] == "eps" else [r[1], r[2]]))
        elif c == BOT:
            t = v + UNDERLINE
            var_of[t] = v
            rules.append((v, [t]))
    return RibSlp(Slp.from_rules(rules, list(var_of)), var_of)


def build_spine_slp(f: Fslp) -> SpineSlp:
    rules: list[tuple[str, list[str]]] = []
    info: dict[str, tuple] = {}
    for v in f.order:
        r = f.rules[v]
        k = r[0]
        if k == "node":
            t = f"{r[1]}({r[2]})"
            info[t] = r
            rules.append((v, [t]))
        elif k == "ctx":
            t = f"{r[1]}({r[2]}x{r[3]})"
            info[t] = r
            rules.append((v, [t]))
        elif k == "ins":
            rules.append((v, [r[1]]))
        elif k == "comp":
            rules.append((v, [r[1], r[2]]))
    return SpineSlp(Slp.from_rules(rules, list(info)), info)


# ---------------------------------------------------------------------------
# tau cursors

Items = Any  # None or (Items, item); items are ("h", A, sigma), ("v", A, sigma) or a mark


@dataclass(frozen=True, slots=True)
class TauCursor:
    items: Items
    cost: int  # sigma operations and item changes used by the producing move

    def as_list(self) -> list:
        out = []
        p = self.items
        while p is not None:
            out.append(p[1])
            p = p[0]
        return out[::-1]


class FslpNavigator:
    """Preprocessed FSLP. All moves return fresh cursors (or None) and never
    modify their input."""

    def __init__(self, f: Fslp):
        self.f = f
        rib = build_rib_slp(f)
        self.rib = rib
        cs = make_contracting(rib.slp)
        self.rib_balanced = cs
        self.ribnav = SlpNavigator(cs.slp)
        rib_ids = rib.slp.var_index
        rib_len = rib.slp.metrics.lengths
        self.rib_len = {v: rib_len[rib_ids[v]] for v in rib_ids}
        self.rib_root = {v: cs.rep(rib_ids[v]) for v in rib_ids}
        self._rib_var = [rib.var_of[t] for t in cs.slp.terminals]
        spine = build_spine_slp(f)
        self.spine = spine
        self.spinenav = SlpNavigator(spine.slp)
        self.spine_id = spine.slp.var_index
        self._spine_info = [spine.info[t] for t in spine.slp.terminals]

    # -- helpers ------------------------------------------------------------

    def _vfirst(self, b: str) -> tuple:
        return ("v", b, self.spinenav.first(self.spine_id[b]))

    def _tree(self, items: Items, a: str, s: SigmaCursor | None, cost: int) -> TauCursor | None:
        """Append the horizontal pointer ``s`` into ``a`` and the root of its tree."""
        if s is None:
            return None
        b = self._rib_var[~s.leaf]
        v = self._vfirst(b)
        return TauCursor(((items, ("h", a, s)), v), cost + s.cost + v[2].cost)

    def _info(self, v: tuple) -> tuple:
        return self._spine_info[~v[2].leaf]

    def _xchild(self, items: Items, v: tuple, cost: int) -> TauCursor:
        """Move from a context node ``v`` (the last item) to its hole child."""
        s = v[2]
        if s.i < s.n:
            s2 = self.spinenav.succ(s)
            return TauCursor((items[0], ("v", v[1], s2)), cost + s2.cost)
        b = self.f.rules[v[1]][2]
        w = self._vfirst(b)
        return TauCursor((items, w), cost + w[2].cost)

    def _side(self, items: Items, a: str, mark: str, from_end: bool, cost: int) -> TauCursor | None:
        if self.rib_len[a] == 0:
            return None
        r = self.rib_root[a]
        s = self.ribnav.last(r) if from_end else self.ribnav.first(r)
        return self._tree((items, mark), a, s, cost + 1)

    # -- roots ---------------------------------------------------------------

    def root_first(self, a: str | None = None) -> TauCursor | None:
        a = self.f.start if a is None else a
        if self.rib_len[a] == 0:
            return None
        return self._tree(None, a, self.ribnav.first(self.rib_root[a]), 1)

    def root_last(self, a: str | None = None) -> TauCursor | None:
        a = self.f.start if a is None else a
        if self.rib_len[a] == 0:
            return None
        return self._tree(None, a, self.ribnav.last(self.rib_root[a]), 1)

    # -- queries -------------------------------------------------------------

    def symbol(self, t: TauCursor) -> str:
        return self._info(t.items[1])[1]

    def degree(self, t: TauCursor) -> int:
        info = self._info(t.items[1])
        if info[0] == "node":
            return self.rib_len[info[2]]
        return self.rib_len[info[2]] + 1 + self.rib_len[info[3]]

    # -- moves ---------------------------------------------------------------

    def first_child(self, t: TauCursor) -> TauCursor | None:
        items = t.items
        v = items[1]
        info = self._info(v)
        if info[0] == "node":
            return self._side(items, info[2], "M", False, 1)
        if self.rib_len[info[2]]:
            return self._side(items, info[2], "L", False, 1)
        return self._xchild(items, v, 1)

    def last_child(self, t: TauCursor) -> TauCursor | None:
        items = t.items
        v = items[1]
        info = self._info(v)
        if info[0] == "node":
            return self._side(items, info[2], "M", True, 1)
        if self.rib_len[info[3]]:
            return self._side(items, info[3], "R", True, 1)
        return self._xchild(items, v, 1)

    def nav_child(self, t: TauCursor, j: int) -> TauCursor | None:
        """The ``j``-th child (1-based) using one rib descent of O(log d) steps."""
        items = t.items
        v = items[1]
        info = self._info(v)
        if j < 1:
            return None
        if info[0] == "node":
            b = info[2]
            if j > self.rib_len[b]:
                return None
            return self._tree((items, "M"), b, self.ribnav.at(self.rib_root[b], j), 2)
        left, right = info[2], info[3]
        nl = self.rib_len[left]
        if j <= nl:
            return self._tree((items, "L"), left, self.ribnav.at(self.rib_root[left], j), 2)
        if j == nl + 1:
            return self._xchild(items, v, 2)
        j -= nl + 1
        if j > self.rib_len[right]:
            return None
        return self._tree((items, "R"), right, self.ribnav.at(self.rib_root[right], j), 2)

    def parent(self, t: TauCursor) -> TauCursor | None:
        rest, v = t.items
        s = v[2]
        if s.i > 1:
            s2 = self.spinenav.pred(s)
            return TauCursor((rest, ("v", v[1], s2)), 1 + s2.cost)
        rest2, p = rest
        if p[0] == "v":
            return TauCursor(rest, 1)
        # p is a horizontal pointer; before it a mark and the parent node
        if rest2 is None:
            return None
        return TauCursor(rest2[0], 1)

    def _sibling(self, t: TauCursor, right: bool) -> TauCursor | None:
        rest, v = t.items
        s = v[2]
        mark = "R" if right else "L"
        if s.i > 1:
            # v is the hole child of the context node just above in the same spine
            s2 = self.spinenav.pred(s)
            pv = ("v", v[1], s2)
            info = self._info(pv)
            side = info[3] if right else info[2]
            return self._side((rest, pv), side, mark, not right, 1 + s2.cost)
        rest2, p = rest
        if p[0] == "v":
            info = self._info(p)
            side = info[3] if right else info[2]
            return self._side(rest, side, mark, not right, 1)
        h = p[2]
        h2 = self.ribnav.succ(h) if right else self.ribnav.pred(h)
        if h2 is not None:
            return self._tree(rest2, p[1], h2, 1)
        if rest2 is None:
            return None
        m = rest2[1]
        if m != ("L" if right else "R"):
            return None
        # leaving the left (right) part of a context towards its hole child
        top = rest2[0]
        return self._xchild(top, top[1], 1)

    def right_sibling(self, t: TauCursor) -> TauCursor | None:
        return self._sibling(t, True)

    def left_sibling(self, t: TauCursor) -> TauCursor | None:
        return self._sibling(t, False)
