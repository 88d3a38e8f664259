"""Line-based text formats for SLPs, labeled trees and FSLPs.

All formats share the same conventions: the first non-blank line is a
version header, ``#`` starts a comment, names match ``[A-Za-z0-9_]+`` and
every parse error carries the offending line number.

SLP::

    slp v1
    terminal a [weight W]
    rule A -> X1 X2 ... Xk
    start S

Tree::

    tree v1
    terminal a [weight W]
    root r
    edge <parent> <child> [label symbols ...]

FSLP::

    fslp v1
    class A top|bot|ctx
    rule A -> eps | B C | a ( B ) | X < B > | Y < Z > | a ( L x R )
    start S
"""

from __future__ import annotations

import re
from typing import Iterator

from .errors import CyclicGrammar, ParseError, SlpError
from .fslp import BOT, CLASSES, Fslp
from .grammar import Slp
from .prefix import LabeledTree

NAME = re.compile(r"[A-Za-z0-9_]+\Z")
_TOKEN = re.compile(r"\s*([A-Za-z0-9_]+|[()<>])")


def _lines(text: str) -> Iterator[tuple[int, list[str]]]:
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def _name(tok: str, no: int) -> str:
    if not NAME.match(tok):
        raise ParseError(f"invalid name {tok!r}", no)
    return tok


def _header(lines: Iterator[tuple[int, list[str]]], kind: str) -> None:
    first = next(lines, None)
    if first is None or first[1] != [kind, "v1"]:
        raise ParseError(f"expected header '{kind} v1'", first[0] if first else 1)


def _terminal(toks: list[str], no: int, terms: dict[str, int]) -> None:
    if len(toks) not in (2, 4) or (len(toks) == 4 and toks[2] != "weight"):
        raise ParseError("expected 'terminal <name> [weight <W>]'", no)
    name = _name(toks[1], no)
    if name in terms:
        raise ParseError(f"terminal {name!r} declared twice", no)
    w = 1
    if len(toks) == 4:
        try:
            w = int(toks[3])
        except ValueError:
            raise ParseError(f"weight {toks[3]!r} is not an integer", no) from None
        if w < 1:
            raise ParseError(f"weight of {name!r} must be positive", no)
    terms[name] = w


# ---------------------------------------------------------------------------
# SLP


def parse_slp(text: str) -> Slp:
    lines = _lines(text)
    _header(lines, "slp")
    terms: dict[str, int] = {}
    rules: list[tuple[str, list[str]]] = []
    lhs_line: dict[str, int] = {}
    start: str | None = None
    start_line = 0
    for no, toks in lines:
        kw = toks[0]
        if kw == "terminal":
            _terminal(toks, no, terms)
        elif kw == "rule":
            if len(toks) < 3 or toks[2] != "->":
                raise ParseError("expected 'rule <A> -> <symbols>'", no)
            a = _name(toks[1], no)
            if a in lhs_line:
                raise ParseError(f"variable {a!r} already defined on line {lhs_line[a]}", no)
            lhs_line[a] = no
            rules.append((a, [_name(t, no) for t in toks[3:]]))
        elif kw == "start":
            if len(toks) != 2 or start is not None:
                raise ParseError("expected a single 'start <A>'", no)
            start, start_line = _name(toks[1], no), no
        else:
            raise ParseError(f"unknown directive {kw!r}", no)
    for a, rhs in rules:
        if a in terms:
            raise ParseError(f"{a!r} is declared as a terminal and defined by a rule", lhs_line[a])
        for s in rhs:
            if s not in terms and s not in lhs_line:
                raise ParseError(f"unknown symbol {s!r}", lhs_line[a])
    if start is not None and start not in lhs_line:
        raise ParseError(f"start variable {start!r} is not defined", start_line)
    try:
        slp = Slp.from_rules(rules, terms, start)
        slp.metrics  # validates acyclicity and weights
    except CyclicGrammar as e:
        raise ParseError(str(e), lhs_line[slp.names[e.var]]) from e
    except SlpError as e:
        raise ParseError(str(e)) from e
    return slp


def format_slp(slp: Slp) -> str:
    out = ["slp v1"]
    for t, w in zip(slp.terminals, slp.weights):
        out.append(f"terminal {t}" + (f" weight {w}" if w != 1 else ""))
    for v, name in enumerate(slp.names):
        rhs = slp.rule_text(v)
        out.append(f"rule {name} ->" + (f" {rhs}" if rhs else ""))
    if slp.start is not None:
        out.append(f"start {slp.names[slp.start]}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# labeled trees


def parse_tree(text: str) -> LabeledTree:
    lines = _lines(text)
    _header(lines, "tree")
    terms: dict[str, int] = {}
    root: str | None = None
    edges: list[tuple[str, str, tuple[str, ...]]] = []
    seen: dict[str, int] = {}
    for no, toks in lines:
        kw = toks[0]
        if kw == "terminal":
            _terminal(toks, no, terms)
        elif kw == "root":
            if len(toks) != 2 or root is not None:
                raise ParseError("expected a single 'root <id>'", no)
            root = _name(toks[1], no)
            if root in seen:
                raise ParseError(f"node {root!r} already has a parent", no)
            seen[root] = no
        elif kw == "edge":
            if len(toks) < 3:
                raise ParseError("expected 'edge <parent> <child> [symbols]'", no)
            p, c = _name(toks[1], no), _name(toks[2], no)
            if c in seen:
                raise ParseError(f"node {c!r} already appears on line {seen[c]}", no)
            seen[c] = no
            label = tuple(_name(t, no) for t in toks[3:])
            for a in label:
                if a not in terms:
                    raise ParseError(f"unknown terminal {a!r}", no)
            edges.append((p, c, label))
        else:
            raise ParseError(f"unknown directive {kw!r}", no)
    if root is None:
        raise ParseError("missing 'root' line")
    known = {root}
    for p, c, _ in edges:
        if p not in known:
            break
        known.add(c)
    else:
        return LabeledTree(terms, root, tuple(edges))
    children: dict[str, list[int]] = {}
    for k, (p, c, _) in enumerate(edges):
        children.setdefault(p, []).append(k)
    # otherwise reorder the edges top-down; each must hang below the root
    ordered = []
    stack = [root]
    while stack:
        v = stack.pop()
        for k in reversed(children.pop(v, [])):
            ordered.append(edges[k])
            stack.append(edges[k][1])
    if children:
        p = next(iter(children))
        raise ParseError(f"edge from {p!r} is not connected to the root", seen.get(edges[children[p][0]][1]))
    return LabeledTree(terms, root, tuple(ordered))


def format_tree(t: LabeledTree) -> str:
    out = ["tree v1"]
    for a, w in t.terminals.items():
        out.append(f"terminal {a}" + (f" weight {w}" if w != 1 else ""))
    out.append(f"root {t.root}")
    for p, c, lab in t.edges:
        out.append(" ".join(["edge", str(p), str(c), *lab]))
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# FSLPs


def _fslp_rule(lhs: str, rhs: str, classes: dict[str, str], no: int) -> tuple:
    toks = []
    pos = 0
    rhs = rhs.rstrip()
    while pos < len(rhs):
        m = _TOKEN.match(rhs, pos)
        if not m:
            raise ParseError(f"unexpected text {rhs[pos:].strip()!r}", no)
        toks.append(m.group(1))
        pos = m.end()
    names = [t for t in toks if t not in "()<>"]
    shape = "".join("n" if t not in "()<>" else t for t in toks)
    if toks == ["eps"]:
        return ("eps",)
    if shape == "nn":
        return ("cat", *names)
    if shape == "n(n)":
        return ("node", *names)
    if shape == "n<n>":
        return ("ins" if classes.get(lhs) == BOT else "comp", *names)
    if shape == "n(nnn)" and names[2] == "x":
        return ("ctx", names[0], names[1], names[3])
    raise ParseError(f"unrecognized rule shape {rhs.strip()!r}", no)


def parse_fslp(text: str) -> Fslp:
    lines = list(_lines(text))
    it = iter(lines)
    _header(it, "fslp")
    body = lines[1:]
    classes: dict[str, str] = {}
    for no, toks in body:
        if toks[0] == "class":
            if len(toks) != 3 or toks[2] not in CLASSES:
                raise ParseError("expected 'class <A> top|bot|ctx'", no)
            a = _name(toks[1], no)
            if a in classes:
                raise ParseError(f"class of {a!r} given twice", no)
            classes[a] = toks[2]
    rules: dict[str, tuple] = {}
    rule_line: dict[str, int] = {}
    start = None
    raw = {no: r for no, r in enumerate(text.splitlines(), 1)}
    for no, toks in body:
        kw = toks[0]
        if kw == "class":
            continue
        if kw == "rule":
            line = raw[no].split("#", 1)[0]
            head, sep, rhs = line.partition("->")
            ht = head.split()
            if not sep or len(ht) != 2:
                raise ParseError("expected 'rule <A> -> <rhs>'", no)
            a = _name(ht[1], no)
            if a in rules:
                raise ParseError(f"variable {a!r} defined twice", no)
            if a not in classes:
                raise ParseError(f"variable {a!r} has no class", no)
            rules[a] = _fslp_rule(a, rhs, classes, no)
            rule_line[a] = no
        elif kw == "start":
            if len(toks) != 2 or start is not None:
                raise ParseError("expected a single 'start <A>'", no)
            start = _name(toks[1], no)
        else:
            raise ParseError(f"unknown directive {kw!r}", no)
    try:
        return Fslp.from_rules(classes, rules, start)
    except CyclicGrammar as e:
        raise ParseError(str(e), rule_line[e.var]) from e
    except SlpError as e:
        raise ParseError(str(e)) from e


def _fslp_rhs(rule: tuple) -> str:
    k = rule[0]
    if k == "eps":
        return "eps"
    if k == "cat":
        return f"{rule[1]} {rule[2]}"
    if k == "node":
        return f"{rule[1]} ( {rule[2]} )"
    if k in ("ins", "comp"):
        return f"{rule[1]} < {rule[2]} >"
    return f"{rule[1]} ( {rule[2]} x {rule[3]} )"


def format_fslp(f: Fslp) -> str:
    out = ["fslp v1"]
    for v in f.order:
        out.append(f"class {v} {f.classes[v]}")
    for v in f.order:
        out.append(f"rule {v} -> {_fslp_rhs(f.rules[v])}")
    if f.start is not None:
        out.append(f"start {f.start}")
    return "\n".join(out) + "\n"

