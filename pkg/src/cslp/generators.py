"""Seeded generators for grammars, trees and strings used by tests and the CLI."""

from __future__ import annotations

import math
import random
from typing import Sequence

from .grammar import Slp
from .prefix import LabeledTree


def gen_lower_bound(n: int, binary: bool = False) -> Slp:
    """Grammar of size O(n) for the string b1 a^(2^n) b2 a^(2^n) ... bn.

    With ``binary`` the separators b_i are replaced by the words
    T_i = b a^(2i-2) b a^(2i-1) b over the alphabet {a, b}.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rules: list[tuple[str, list[str]]] = [("A0", ["a"])]
    for i in range(1, n + 1):
        rules.append((f"A{i}", [f"A{i - 1}", f"A{i - 1}"]))
    body: list[str] = []
    if binary:
        # P_k derives a^k, defined by a chain
        top = 2 * n - 1
        rules.append(("P1", ["a"]))
        for k in range(2, top + 1):
            rules.append((f"P{k}", [f"P{k - 1}", "a"]))
        for i in range(1, n + 1):
            seg = ["b"] + ([f"P{2 * i - 2}"] if i > 1 else []) + ["b", f"P{2 * i - 1}", "b"]
            rules.append((f"T{i}", seg))
            body.append(f"T{i}")
            if i < n:
                body.append(f"A{n}")
        terminals: Sequence[str] = ["a", "b"]
    else:
        for i in range(1, n + 1):
            body.append(f"b{i}")
            if i < n:
                body.append(f"A{n}")
        terminals = ["a"] + [f"b{i}" for i in range(1, n + 1)]
    rules.append(("S", body))
    return Slp.from_rules(rules, terminals, start="S")


def lower_bound_string(n: int, binary: bool = False) -> list[str]:
    """The string of :func:`gen_lower_bound` written out directly."""
    out: list[str] = []
    block = ["a"] * (1 << n)
    for i in range(1, n + 1):
        if binary:
            out += ["b"] + ["a"] * (2 * i - 2) + ["b"] + ["a"] * (2 * i - 1) + ["b"]
        else:
            out.append(f"b{i}")
        if i < n:
            out += block
    return out


def random_slp(rng: random.Random, g: int, max_len: int = 1 << 16,
               alphabet: Sequence[str] = ("a", "b"), max_rhs: int = 4,
               epsilon_rate: float = 0.0) -> Slp:
    """Random SLP with ``g`` variables, each of length at most ``max_len``.

    Later variables refer to earlier ones, so lengths tend to grow
    exponentially until the cap bites. The longest variable is the start.
    """
    lengths: list[int] = []
    rules: list[tuple[str, list[str]]] = []
    for v in range(g):
        if rng.random() < epsilon_rate:
            rules.append((f"V{v}", []))
            lengths.append(0)
            continue
        k = rng.randint(1, max_rhs)
        rhs: list[str] = []
        total = 0
        for _ in range(k):
            if v and rng.random() < 0.75:
                # prefer recent variables so the grammar is deep
                u = v - 1 - min(v - 1, int(rng.expovariate(0.3)))
                if total + lengths[u] <= max_len:
                    rhs.append(f"V{u}")
                    total += lengths[u]
                    continue
            if total < max_len:
                rhs.append(rng.choice(alphabet))
                total += 1
        rules.append((f"V{v}", rhs))
        lengths.append(total)
    start = max(range(g), key=lengths.__getitem__) if g else None
    return Slp.from_rules(rules, list(alphabet), start=None if start is None else f"V{start}")


def lz78_slp(s: Sequence[str], alphabet: Sequence[str] | None = None) -> Slp:
    """Grammar from the LZ78 parse of ``s``: one variable per phrase and a
    left-leaning chain for their concatenation (deliberately unbalanced)."""
    trie: dict[tuple[str | None, str], str] = {}
    rules: list[tuple[str, list[str]]] = []
    phrases: list[str] = []
    i = 0
    n = len(s)
    while i < n:
        node: str | None = None
        while i < n and (node, s[i]) in trie:
            node = trie[(node, s[i])]
            i += 1
        if i < n:
            name = f"P{len(rules)}"
            rules.append((name, ([node] if node else []) + [s[i]]))
            trie[(node, s[i])] = name
            node = name
            i += 1
        phrases.append(node)  # type: ignore[arg-type]
    prev: str | None = None
    for k, p in enumerate(phrases):
        name = f"S{k}"
        rules.append((name, ([prev] if prev else []) + [p]))
        prev = name
    if prev is None:
        rules.append(("S0", []))
        prev = "S0"
    terms = sorted(set(s)) if alphabet is None else list(alphabet)
    return Slp.from_rules(rules, terms, start=prev)


def repetitive_string(rng: random.Random, n: int, alphabet: Sequence[str] = ("a", "b", "c")) -> list[str]:
    """Random string with many long repeats (random copies of earlier parts)."""
    out: list[str] = [rng.choice(alphabet)]
    while len(out) < n:
        if rng.random() < 0.3 or len(out) < 4:
            out.append(rng.choice(alphabet))
        else:
            m = min(n - len(out), rng.randint(1, len(out)))
            start = rng.randrange(len(out) - m + 1)
            out.extend(out[start:start + m])
    return out[:n]


def balanced_slp(rng: random.Random, n: int, alphabet: Sequence[str] = ("a", "b"),
                 alpha: float = 0.3, share: float = 0.5) -> Slp:
    """Random alpha-balanced CNF grammar for a string of length ``n``.

    Every rule A -> BC splits |A| with both parts at least alpha*|A| (or one
    for tiny lengths). Subtrees of equal length are shared with probability
    ``share`` to get a genuinely compressed grammar.
    """
    if not 0 < alpha <= 0.5:
        raise ValueError("alpha must lie in (0, 1/2]")
    rules: list[tuple[str, list[str]]] = []
    by_len: dict[int, list[str]] = {}
    term: dict[str, str] = {}

    def leaf(a: str) -> str:
        if a not in term:
            term[a] = f"T{a}"
            rules.append((term[a], [a]))
        return term[a]

    def build(m: int) -> str:
        pool = by_len.get(m)
        if pool and rng.random() < share:
            return rng.choice(pool)
        if m == 1:
            name = leaf(rng.choice(alphabet))
        else:
            lo = max(1, math.ceil(alpha * m))
            hi = m - lo
            k = rng.randint(lo, hi) if lo <= hi else m // 2
            left = build(k)
            right = build(m - k)
            name = f"N{len(rules)}"
            rules.append((name, [left, right]))
        by_len.setdefault(m, []).append(name)
        return name

    root = build(n)
    return Slp.from_rules(rules, list(alphabet), start=root)


def random_tree(rng: random.Random, n: int, terminals: dict[str, int],
                max_label: int = 1, min_label: int | None = None,
                shape: str = "random") -> LabeledTree:
    """Random labeled tree with ``n`` edges.

    ``shape`` is ``random`` (uniform attachment), ``deep`` (attach near the
    newest node), ``star`` or ``caterpillar``.
    """
    lo = max_label if min_label is None else min_label
    names = list(terminals)
    edges = []
    spine = 0
    for v in range(1, n + 1):
        if shape == "random":
            p = rng.randrange(v)
        elif shape == "deep":
            p = max(0, v - rng.randint(1, 3))
        elif shape == "star":
            p = 0
        elif shape == "caterpillar":
            p = spine
            if rng.random() < 0.5:
                spine = v
        else:
            raise ValueError(f"unknown shape {shape!r}")
        k = rng.randint(lo, max_label)
        edges.append((p, v, tuple(rng.choice(names) for _ in range(k))))
    return LabeledTree(dict(terminals), 0, tuple(edges))


def random_fslp(rng: random.Random, g: int, max_size: int = 10_000,
                labels: Sequence[str] = ("a", "b", "c")) -> "Fslp":
    """Random normal-form FSLP with about ``g`` rules whose start variable
    derives at most ``max_size`` nodes (the largest forest it can build)."""
    from .fslp import BOT, CTX, TOP, Fslp

    classes: dict[str, str] = {"E": TOP, "T0": BOT}
    rules: dict[str, tuple] = {"E": ("eps",), "T0": ("node", rng.choice(labels), "E")}
    size = {"E": 0, "T0": 1}
    forest = ["E", "T0"]
    trees = ["T0"]
    ctxs: list[str] = []

    def pick(pool: list[str]) -> str:
        # favour recent variables so sizes grow quickly
        k = len(pool) - 1 - min(len(pool) - 1, int(rng.expovariate(0.25)))
        return pool[k]

    for k in range(g):
        name = f"V{k}"
        choice = rng.random()
        if choice < 0.3:
            b, c = pick(forest), pick(forest)
            rule, cls, sz = ("cat", b, c), TOP, size[b] + size[c]
        elif choice < 0.5:
            b = pick(forest)
            rule, cls, sz = ("node", rng.choice(labels), b), BOT, 1 + size[b]
        elif choice < 0.7 and ctxs:
            x, b = pick(ctxs), pick(trees)
            rule, cls, sz = ("ins", x, b), BOT, size[x] + size[b]
        elif choice < 0.8 and ctxs:
            y, z = pick(ctxs), pick(ctxs)
            rule, cls, sz = ("comp", y, z), CTX, size[y] + size[z]
        else:
            left = pick(forest) if rng.random() < 0.7 else "E"
            right = pick(forest) if rng.random() < 0.7 else "E"
            rule, cls, sz = ("ctx", rng.choice(labels), left, right), CTX, 1 + size[left] + size[right]
        if sz > max_size:
            continue
        classes[name] = cls
        rules[name] = rule
        size[name] = sz
        if cls == CTX:
            ctxs.append(name)
        else:
            forest.append(name)
            if cls == BOT:
                trees.append(name)
    start = max(forest, key=size.__getitem__)
    return Fslp.from_rules(classes, rules, start)
