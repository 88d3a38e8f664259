"""Mutable rule table shared by the grammar constructions.

Constructions allocate variables in one common id space so that the output
of one stage (say, a prefix SLP whose "terminals" are variables of another
grammar) can be spliced into the next without renumbering.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .grammar import NameAllocator, Slp, topological_order


class RuleStore:
    def __init__(self, terminals: Sequence[str], term_weights: Sequence[int]):
        self.terminals = tuple(terminals)
        self.tw = list(term_weights)
        self.rhs: list[tuple[int, ...]] = []
        self.w: list[int] = []
        self.names: list[str | None] = []

    @classmethod
    def from_slp(cls, slp: Slp) -> "RuleStore":
        store = cls(slp.terminals, slp.weights)
        store.rhs = list(slp.rules)
        store.w = list(slp.metrics.weights)
        store.names = list(slp.names)
        return store

    def weight(self, s: int) -> int:
        return self.tw[~s] if s < 0 else self.w[s]

    def seq_weight(self, syms: Iterable[int]) -> int:
        tw, w = self.tw, self.w
        return sum(tw[~s] if s < 0 else w[s] for s in syms)

    def add(self, rhs: Sequence[int], name: str | None = None) -> int:
        rhs = tuple(rhs)
        self.rhs.append(rhs)
        self.w.append(self.seq_weight(rhs))
        self.names.append(name)
        return len(self.rhs) - 1

    def set_rhs(self, v: int, rhs: Sequence[int]) -> None:
        self.rhs[v] = tuple(rhs)

    def __len__(self) -> int:
        return len(self.rhs)

    def expand_heavy(self, targets: Iterable[int], expandable) -> None:
        """Expand, in parallel, every heavy occurrence of an expandable
        variable in the rules of ``targets``.

        Decisions and replacement bodies are taken from a snapshot, so the
        result does not depend on the order of ``targets``.
        """
        rhs, w, tw = self.rhs, self.w, self.tw
        updates = []
        for v in targets:
            limit = w[v]
            body = rhs[v]
            for k, s in enumerate(body):
                if s >= 0 and 2 * w[s] > limit and expandable(s):
                    updates.append((v, body[:k] + rhs[s] + body[k + 1:]))
                    break
        for v, body in updates:
            rhs[v] = body

    def is_contracting(self, targets: Iterable[int], local) -> bool:
        w = self.w
        for v in targets:
            limit = w[v]
            for s in self.rhs[v]:
                if s >= 0 and local(s) and 2 * w[s] > limit:
                    return False
        return True

    def to_slp(self, roots: Sequence[int], prefix: str = "X", start: int | None = None):
        """Export the variables reachable from ``roots`` as an ``Slp``.

        Returns the SLP and a map from store ids to SLP variable ids.
        """
        order = topological_order(self.rhs, list(roots))
        alloc = NameAllocator()
        given = {v: alloc.claim(self.names[v]) for v in order if self.names[v]}
        remap = {}
        names = []
        for v in order:
            remap[v] = len(names)
            names.append(given.get(v) or alloc.fresh(prefix))
        rules = tuple(tuple(s if s < 0 else remap[s] for s in self.rhs[v]) for v in order)
        slp = Slp(self.terminals, tuple(self.tw), tuple(names), rules,
                  None if start is None else remap[start])
        return slp, remap
