"""Straight-line programs: representation, validation, evaluation and the
basic transformations every other module builds on.

Symbols are plain integers. A variable is a non-negative index into
``Slp.rules``; terminal number ``t`` is encoded as ``~t`` (always negative),
so the two ranges never collide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
    CyclicGrammar,
    EpsilonDerivation,
    LengthOverflow,
    NonPositiveWeight,
    NotAVariable,
    OutputTooLarge,
    PositionOutOfRange,
    Redefinition,
    UnknownSymbol,
)

WORD_LIMIT = 1 << 64


def is_terminal(sym: int) -> bool:
    return sym < 0


def terminal_symbol(t: int) -> int:
    return ~t


@dataclass(frozen=True, eq=False)
class Slp:
    terminals: tuple[str, ...]
    weights: tuple[int, ...]
    names: tuple[str, ...]
    rules: tuple[tuple[int, ...], ...]
    start: int | None = None

    @classmethod
    def from_rules(
        cls,
        rules: Iterable[tuple[str, Sequence[str]]] | Mapping[str, Sequence[str]],
        terminals: Mapping[str, int] | Iterable[str] | None = None,
        start: str | None = None,
    ) -> "Slp":
        """Build an SLP from named rules.

        Names that never occur on a left-hand side are terminals. Terminal
        weights default to 1; pass a mapping to override them.
        """
        pairs = list(rules.items()) if isinstance(rules, Mapping) else list(rules)
        var_index: dict[str, int] = {}
        for lhs, _ in pairs:
            if lhs in var_index:
                raise Redefinition(f"variable {lhs!r} defined twice")
            var_index[lhs] = len(var_index)
        weights_in: dict[str, int] = {}
        if isinstance(terminals, Mapping):
            weights_in = dict(terminals)
        elif terminals is not None:
            weights_in = {t: 1 for t in terminals}
        term_index: dict[str, int] = {}
        for t in weights_in:
            if t in var_index:
                raise Redefinition(f"{t!r} is both a terminal and a variable")
            term_index[t] = len(term_index)
        implicit = terminals is None
        encoded = []
        for lhs, rhs in pairs:
            out = []
            for name in rhs:
                if name in var_index:
                    out.append(var_index[name])
                    continue
                if name not in term_index:
                    if not implicit:
                        raise UnknownSymbol(f"unknown symbol {name!r} in rule for {lhs!r}")
                    term_index[name] = len(term_index)
                out.append(~term_index[name])
            encoded.append(tuple(out))
        term_names = tuple(term_index)
        weights = tuple(weights_in.get(t, 1) for t in term_names)
        if start is not None and start not in var_index:
            raise UnknownSymbol(f"start variable {start!r} is not defined")
        return cls(
            terminals=term_names,
            weights=weights,
            names=tuple(lhs for lhs, _ in pairs),
            rules=tuple(encoded),
            start=None if start is None else var_index[start],
        )

    @property
    def num_vars(self) -> int:
        return len(self.rules)

    @property
    def size(self) -> int:
        return sum(len(r) for r in self.rules)

    @cached_property
    def var_index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.names)}

    def var(self, name: str) -> int:
        try:
            return self.var_index[name]
        except KeyError:
            raise UnknownSymbol(f"unknown variable {name!r}") from None

    def symbol_name(self, sym: int) -> str:
        return self.terminals[~sym] if sym < 0 else self.names[sym]

    def rule_text(self, var: int) -> str:
        return " ".join(self.symbol_name(s) for s in self.rules[var])

    @cached_property
    def metrics(self) -> "SlpMetrics":
        return metrics(self)


@dataclass
class SlpMetrics:
    lengths: list[int]
    weights: list[int]
    heights: list[int]
    order: list[int]  # children before parents

    def sym_length(self, sym: int) -> int:
        return 1 if sym < 0 else self.lengths[sym]


@dataclass
class ValidationReport:
    acyclic: bool = True
    single_definition: bool = True
    positive_weights: bool = True
    order: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.acyclic and self.single_definition and self.positive_weights


def topological_order(rules: Sequence[Sequence[int]], roots: Iterable[int] | None = None) -> list[int]:
    """Variables ordered so that every variable follows all variables in its rule."""
    n = len(rules)
    state = [0] * n  # 0 new, 1 on stack, 2 done
    order: list[int] = []
    for root in range(n) if roots is None else roots:
        if state[root]:
            continue
        state[root] = 1
        stack = [(root, 0)]
        while stack:
            v, k = stack[-1]
            rhs = rules[v]
            while k < len(rhs) and (rhs[k] < 0 or state[rhs[k]] == 2):
                k += 1
            if k == len(rhs):
                stack.pop()
                state[v] = 2
                order.append(v)
                continue
            child = rhs[k]
            stack[-1] = (v, k + 1)
            if state[child] == 1:
                raise CyclicGrammar(f"variable {child} is reachable from itself", child)
            state[child] = 1
            stack.append((child, 0))
    return order


def validate(slp: Slp) -> ValidationReport:
    nt = len(slp.terminals)
    nv = len(slp.rules)
    if len(slp.weights) != nt:
        raise NonPositiveWeight("terminal weight table has the wrong length")
    for t, w in zip(slp.terminals, slp.weights):
        if w < 1:
            raise NonPositiveWeight(f"terminal {t!r} has weight {w}")
    if len(set(slp.names)) != len(slp.names):
        raise Redefinition("duplicate variable name")
    for v, rhs in enumerate(slp.rules):
        for s in rhs:
            if (s >= 0 and s >= nv) or (s < 0 and ~s >= nt):
                raise UnknownSymbol(f"rule {v} references unknown symbol {s}")
    if slp.start is not None and not 0 <= slp.start < nv:
        raise UnknownSymbol("start variable out of range")
    try:
        order = topological_order(slp.rules)
    except CyclicGrammar as e:
        name = slp.names[e.var]
        raise CyclicGrammar(f"variable {name!r} is reachable from itself", e.var) from None
    return ValidationReport(order=order)


def metrics(slp: Slp) -> SlpMetrics:
    order = validate(slp).order
    tw = slp.weights
    n = len(slp.rules)
    lengths = [0] * n
    weights = [0] * n
    heights = [0] * n
    for v in order:
        ln = wt = h = 0
        for s in slp.rules[v]:
            if s < 0:
                ln += 1
                wt += tw[~s]
            else:
                ln += lengths[s]
                wt += weights[s]
                if heights[s] > h:
                    h = heights[s]
        if ln >= WORD_LIMIT or wt >= WORD_LIMIT:
            raise LengthOverflow(f"variable {slp.names[v]!r} exceeds 64-bit length")
        lengths[v] = ln
        weights[v] = wt
        heights[v] = h + 1
    return SlpMetrics(lengths, weights, heights, order)


def eval_symbols(slp: Slp, var: int, max_len: int = 1 << 26) -> list[int]:
    """val(var) as a list of terminal indices."""
    lengths = slp.metrics.lengths
    if lengths[var] > max_len:
        raise OutputTooLarge(f"|{slp.names[var]}| = {lengths[var]} exceeds {max_len}")
    rules = slp.rules
    memo: dict[int, list[int]] = {}
    out: list[int] = []
    stack = [var]
    while stack:
        s = stack.pop()
        if s < 0:
            out.append(~s)
            continue
        cached = memo.get(s)
        if cached is not None:
            out.extend(cached)
            continue
        if lengths[s] <= _MEMO_LEN:
            memo[s] = _small_eval(rules, s)
            out.extend(memo[s])
            continue
        stack.extend(reversed(rules[s]))
    return out


_MEMO_LEN = 4096


def _small_eval(rules, v) -> list[int]:
    out: list[int] = []
    stack = [v]
    while stack:
        s = stack.pop()
        if s < 0:
            out.append(~s)
        else:
            stack.extend(reversed(rules[s]))
    return out


def eval_string(slp: Slp, var: int, max_len: int = 1 << 26, sep: str = "") -> str:
    terms = slp.terminals
    return sep.join(terms[t] for t in eval_symbols(slp, var, max_len))


def eval_all(slp: Slp, max_total: int = 1 << 26) -> list[tuple[int, ...]]:
    """Decompress every variable; guarded by the total output size."""
    m = slp.metrics
    total = sum(m.lengths)
    if total > max_total:
        raise OutputTooLarge(f"total decompressed size {total} exceeds {max_total}")
    vals: list[tuple[int, ...]] = [()] * len(slp.rules)
    for v in m.order:
        parts: list[int] = []
        for s in slp.rules[v]:
            if s < 0:
                parts.append(~s)
            else:
                parts.extend(vals[s])
        vals[v] = tuple(parts)
    return vals


def is_contracting(slp: Slp) -> tuple[bool, tuple[int, int] | None]:
    """True iff no rule has a heavy variable; otherwise the first (var, index) violating it."""
    w = slp.metrics.weights
    for v, rhs in enumerate(slp.rules):
        limit = w[v]
        for k, s in enumerate(rhs):
            if s >= 0 and 2 * w[s] > limit:
                return False, (v, k)
    return True, None


@dataclass
class HeavyForest:
    """Heavy-child edges of an SLP.

    ``parent[v]`` is the heavy child of variable ``v`` (its parent in the
    forest) or ``None``; ``position[v]`` is its index in the rule. Labels are
    symbol tuples: ``left`` holds the reversed light prefix, ``right`` the
    light suffix. ``root`` maps each variable to the root of its heavy tree.
    """

    parent: list[int | None]
    position: list[int]
    left: list[tuple[int, ...]]
    right: list[tuple[int, ...]]
    root: list[int]

    def edges(self):
        for v, p in enumerate(self.parent):
            if p is not None:
                yield v, p


def heavy_forest(slp: Slp) -> HeavyForest:
    m = slp.metrics
    w = m.weights
    tw = slp.weights
    n = len(slp.rules)
    parent: list[int | None] = [None] * n
    position = [-1] * n
    left: list[tuple[int, ...]] = [()] * n
    right: list[tuple[int, ...]] = [()] * n
    root = list(range(n))
    for v in m.order:
        rhs = slp.rules[v]
        total = w[v]
        for k, s in enumerate(rhs):
            sw = tw[~s] if s < 0 else w[s]
            if 2 * sw > total:
                parent[v] = s
                position[v] = k
                left[v] = tuple(reversed(rhs[:k]))
                right[v] = tuple(rhs[k + 1:])
                root[v] = s if s < 0 else root[s]
                break
    return HeavyForest(parent, position, left, right, root)


def expand_heavy(slp: Slp, var: int, occurrence: int) -> Slp:
    """Replace one occurrence of a variable in ``var``'s rule by that variable's rule."""
    rhs = slp.rules[var]
    if not 0 <= occurrence < len(rhs) or rhs[occurrence] < 0:
        raise NotAVariable(f"position {occurrence} of {slp.names[var]!r} is not a variable")
    b = rhs[occurrence]
    new_rhs = rhs[:occurrence] + slp.rules[b] + rhs[occurrence + 1:]
    rules = list(slp.rules)
    rules[var] = new_rhs
    return Slp(slp.terminals, slp.weights, slp.names, tuple(rules), slp.start)


def naive_access(slp: Slp, var: int, i: int) -> tuple[str, int]:
    """Descend from ``var`` to its i-th leaf (1-based); returns (terminal, steps)."""
    lengths = slp.metrics.lengths
    if not 1 <= i <= lengths[var]:
        raise PositionOutOfRange(f"position {i} outside 1..{lengths[var]}")
    steps = 0
    v = var
    while True:
        steps += 1
        for s in slp.rules[v]:
            ln = 1 if s < 0 else lengths[s]
            if i <= ln:
                break
            i -= ln
        if s < 0:
            return slp.terminals[~s], steps
        v = s


class NameAllocator:
    """Hands out fresh variable names that avoid a set of taken names."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)
        self.counter: dict[str, int] = {}

    def fresh(self, prefix: str) -> str:
        k = self.counter.get(prefix, 0)
        while f"{prefix}{k}" in self.taken:
            k += 1
        name = f"{prefix}{k}"
        self.counter[prefix] = k + 1
        self.taken.add(name)
        return name

    def claim(self, name: str) -> str:
        if name in self.taken:
            return self.fresh(name + "_")
        self.taken.add(name)
        return name


@dataclass(eq=False)
class CnfResult:
    slp: Slp
    representative: list[int | None]  # original variable -> CNF variable (None: derives epsilon)


def to_cnf(slp: Slp, eliminate_epsilon: bool = False, split: str = "chain") -> CnfResult:
    """Chomsky normal form.

    ``split="chain"`` splits long rules left to right; ``split="weight"``
    splits at weighted midpoints, which keeps subtree heights logarithmic when
    the input is contracting.
    """
    if split not in ("chain", "weight"):
        raise ValueError(f"unknown split mode {split!r}")
    m = slp.metrics
    lengths = m.lengths
    if not eliminate_epsilon:
        for v in m.order:
            if lengths[v] == 0:
                raise EpsilonDerivation(f"variable {slp.names[v]!r} derives the empty string")
    names = NameAllocator(slp.names)
    out_names: list[str] = []
    out_rules: list[tuple[int, ...]] = []
    weight: list[int] = []
    tw = slp.weights

    def new_var(name, rhs, wt):
        out_names.append(name)
        out_rules.append(rhs)
        weight.append(wt)
        return len(out_rules) - 1

    term_var: dict[int, int] = {}
    rep: list[int | None] = [None] * len(slp.rules)

    def leaf(s):
        if s >= 0:
            return rep[s]
        t = ~s
        if t not in term_var:
            term_var[t] = new_var(names.fresh(f"T{_safe(slp.terminals[t])}_"), (s,), tw[t])
        return term_var[t]

    def binarize(syms, name):
        if len(syms) == 1:
            return syms[0]
        if split == "chain":
            left, rest = syms[0], syms[1:]
            right = binarize(rest, None) if len(rest) > 1 else rest[0]
        else:
            total = sum(weight[s] for s in syms)
            acc, best, cut = 0, None, 1
            for k in range(1, len(syms)):
                acc += weight[syms[k - 1]]
                score = max(acc, total - acc)
                if best is None or score < best:
                    best, cut = score, k
            left = binarize(syms[:cut], None)
            right = binarize(syms[cut:], None)
        return new_var(name or names.fresh("C"), (left, right), weight[left] + weight[right])

    for v in m.order:
        rhs = [s for s in slp.rules[v] if s < 0 or lengths[s] > 0]
        if not rhs:
            continue
        if len(rhs) == 1 and rhs[0] < 0 and ~rhs[0] not in term_var:
            t = ~rhs[0]
            names.taken.discard(slp.names[v])
            term_var[t] = new_var(names.claim(slp.names[v]), (rhs[0],), tw[t])
            rep[v] = term_var[t]
            continue
        syms = [leaf(s) for s in rhs]
        if len(syms) == 1:
            rep[v] = syms[0]
            continue
        names.taken.discard(slp.names[v])
        rep[v] = binarize(syms, names.claim(slp.names[v]))
    start = None if slp.start is None else rep[slp.start]
    out = Slp(slp.terminals, slp.weights, tuple(out_names), tuple(out_rules), start)
    return CnfResult(out, rep)


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in name)


def is_cnf(slp: Slp) -> bool:
    for rhs in slp.rules:
        if len(rhs) == 1:
            if rhs[0] >= 0:
                return False
        elif len(rhs) == 2:
            if rhs[0] < 0 or rhs[1] < 0:
                return False
        else:
            return False
    return True


def distinct_children(slp: Slp) -> Slp:
    """Rewrite every rule A -> B B as A -> B B' with a copy B' of B."""
    rules = list(slp.rules)
    names = list(slp.names)
    alloc = NameAllocator(names)
    copies: dict[int, int] = {}
    # children first, so a copy inherits the already rewritten rule
    for v in slp.metrics.order:
        rhs = rules[v]
        if len(rhs) == 2 and rhs[0] == rhs[1] and rhs[0] >= 0:
            b = rhs[0]
            if b not in copies:
                copies[b] = len(rules)
                rules.append(rules[b])
                names.append(alloc.fresh(names[b] + "_d"))
            rules[v] = (b, copies[b])
    return Slp(slp.terminals, slp.weights, tuple(names), tuple(rules), slp.start)


def reachable(slp: Slp, roots: Iterable[int]) -> list[int]:
    return topological_order(slp.rules, list(roots))


def restrict(slp: Slp, roots: Sequence[int]) -> tuple[Slp, dict[int, int]]:
    """Keep only variables reachable from ``roots``; returns the id remapping."""
    keep = sorted(reachable(slp, roots))
    remap = {v: k for k, v in enumerate(keep)}
    rules = tuple(tuple(s if s < 0 else remap[s] for s in slp.rules[v]) for v in keep)
    names = tuple(slp.names[v] for v in keep)
    start = remap.get(slp.start) if slp.start is not None else None
    return Slp(slp.terminals, slp.weights, names, rules, start), remap
