"""Command-line front end.

Exit codes: 0 on success, 1 on parse or validation errors (and failed
``expect`` lines), 2 when a resource limit is exceeded.
"""

from __future__ import annotations

import argparse
import csv
import random
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .balancer import access, make_contracting
from .errors import (
    CapacityExceeded,
    FingerNotSet,
    HeightTooLarge,
    LengthOverflow,
    OutputTooLarge,
    ParseError,
    PositionOutOfRange,
    SlpError,
)
from .finger import FingerState, SkewForestSet, prepare
from .formats import format_fslp, format_slp, format_tree, parse_fslp, parse_slp
from .fslp import FslpNavigator
from .generators import gen_lower_bound, random_fslp, random_slp, random_tree
from .grammar import Slp, is_contracting

DEFAULT_MAX_LEN = 1 << 26
RESOURCE_ERRORS = (OutputTooLarge, LengthOverflow, HeightTooLarge, CapacityExceeded)


class ScriptError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(text: str, path: str | None, out: TextIO) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _script(text: str) -> list[tuple[int, list[str]]]:
    cmds = []
    for no, raw in enumerate(text.splitlines(), 1):
        for part in raw.split("#", 1)[0].split(";"):
            toks = part.split()
            if toks:
                cmds.append((no, toks))
    return cmds


def _int_arg(toks: list[str], no: int) -> int:
    if len(toks) != 2:
        raise ScriptError(f"'{toks[0]}' takes one integer argument", no)
    try:
        return int(toks[1])
    except ValueError:
        raise ScriptError(f"{toks[1]!r} is not an integer", no) from None


def _stats(slp: Slp) -> list[str]:
    m = slp.metrics
    ok, _ = is_contracting(slp)
    lines = [
        f"vars={slp.num_vars}",
        f"size={slp.size}",
        f"height={max(m.heights, default=0)}",
        f"contracting={'true' if ok else 'false'}",
    ]
    if slp.start is not None:
        lines.append(f"length={m.lengths[slp.start]}")
    return lines


def _load_slp(path: str, max_len: int) -> Slp:
    g = parse_slp(_read(path))
    if g.start is not None and g.metrics.lengths[g.start] > max_len:
        raise OutputTooLarge(f"start derives {g.metrics.lengths[g.start]} symbols, limit {max_len}")
    return g


def cmd_stats(a: argparse.Namespace, out: TextIO) -> int:
    g = parse_slp(_read(a.input))
    out.write("\n".join(_stats(g)) + "\n")
    return 0


def cmd_balance(a: argparse.Namespace, out: TextIO) -> int:
    g = parse_slp(_read(a.input))
    cs = make_contracting(g)
    if a.output is None:
        out.write(format_slp(cs.slp))
    else:
        _write(format_slp(cs.slp), a.output, out)
        out.write("\n".join(_stats(cs.slp)) + "\n")
    return 0


def cmd_access(a: argparse.Namespace, out: TextIO) -> int:
    g = parse_slp(_read(a.input))
    cs = make_contracting(g)
    sym, steps = access(cs, a.var, a.pos)
    out.write(f"{sym}\nsteps={steps}\n")
    return 0


def cmd_finger(a: argparse.Namespace, out: TextIO) -> int:
    if a.t < 1:
        raise SlpError("--t must be at least 1")
    g = _load_slp(a.input, a.max_len)
    if g.start is None:
        raise SlpError("the SLP has no start variable")
    cmds = _script(a.exec if a.exec is not None else _read(a.script))
    fs = FingerState(SkewForestSet(prepare(g).slp, a.t))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["op", "i", "d", "steps"])
    for no, toks in cmds:
        op = toks[0]
        if op not in ("set", "move", "access"):
            raise ScriptError(f"unknown finger command {op!r}", no)
        i = _int_arg(toks, no)
        d = 0 if fs.f is None else abs(i - fs.f)
        try:
            if op == "set":
                steps = fs.setfinger(i)
            elif op == "move":
                steps = fs.movefinger(i)
            else:
                fs.access(i)
                steps = fs.last_steps
        except (PositionOutOfRange, FingerNotSet) as e:
            raise ScriptError(str(e), no) from None
        w.writerow([op, i, d, steps])
    return 0


def cmd_fslp(a: argparse.Namespace, out: TextIO) -> int:
    f = parse_fslp(_read(a.input))
    cmds = _script(a.exec if a.exec is not None else _read(a.script))
    nav = FslpNavigator(f)
    cur = None
    last = None
    moves = {
        "parent": nav.parent,
        "first-child": nav.first_child,
        "last-child": nav.last_child,
        "left": nav.left_sibling,
        "right": nav.right_sibling,
    }
    for no, toks in cmds:
        op = toks[0]
        if op in ("root-first", "root-last"):
            var = toks[1] if len(toks) > 1 else f.start
            if var not in f.classes:
                raise ScriptError(f"unknown variable {var!r}", no)
            nxt = nav.root_first(var) if op == "root-first" else nav.root_last(var)
        elif op == "expect":
            if len(toks) != 2:
                raise ScriptError("'expect' takes one token", no)
            if last != toks[1]:
                out.write(f"expectation failed on line {no}: got {last!r}, expected {toks[1]!r}\n")
                return 1
            continue
        elif cur is None:
            raise ScriptError(f"'{op}' needs a current node; start with root-first", no)
        elif op == "symbol":
            last = nav.symbol(cur)
            out.write(last + "\n")
            continue
        elif op == "degree":
            last = str(nav.degree(cur))
            out.write(last + "\n")
            continue
        elif op == "child":
            nxt = nav.nav_child(cur, _int_arg(toks, no))
        elif op in moves:
            nxt = moves[op](cur)
        else:
            raise ScriptError(f"unknown navigation command {op!r}", no)
        if nxt is None:
            last = "none"
            out.write("none\n")
        else:
            cur = nxt
    return 0


def cmd_gen_lb(a: argparse.Namespace, out: TextIO) -> int:
    if a.n < 1:
        raise SlpError("n must be positive")
    _write(format_slp(gen_lower_bound(a.n, a.binary)), a.output, out)
    return 0


def cmd_gen_random(a: argparse.Namespace, out: TextIO) -> int:
    rng = random.Random(a.seed)
    if a.format == "slp":
        text = format_slp(random_slp(rng, a.size, min(a.max_len, DEFAULT_MAX_LEN)))
    elif a.format == "fslp":
        text = format_fslp(random_fslp(rng, a.size, min(a.max_len, 10**6)))
    else:
        text = format_tree(random_tree(rng, a.size, {"a": 1, "b": 1}, 3, 0))
    _write(text, a.output, out)
    return 0


def cmd_selftest(a: argparse.Namespace, out: TextIO) -> int:
    from .selftest import run

    ok = run(a.seed, lambda line: out.write(line + "\n"))
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cslp", description="Balanced SLPs, finger search and FSLP navigation.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stats", help="print size, height and whether the SLP is contracting")
    s.add_argument("input")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("balance", help="write an equivalent contracting SLP")
    s.add_argument("input")
    s.add_argument("output", nargs="?")
    s.set_defaults(func=cmd_balance)

    s = sub.add_parser("access", help="print the symbol at a position of a variable")
    s.add_argument("input")
    s.add_argument("var")
    s.add_argument("pos", type=int)
    s.set_defaults(func=cmd_access)

    s = sub.add_parser("finger", help="run a finger script (set/move/access i), CSV output")
    s.add_argument("input")
    s.add_argument("script", nargs="?", default="-")
    s.add_argument("-e", "--exec", help="script text given inline")
    s.add_argument("--t", type=int, default=3, help="number of fringe forest levels")
    s.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    s.set_defaults(func=cmd_finger)

    s = sub.add_parser("fslp", help="run a navigation script on an FSLP")
    s.add_argument("input")
    s.add_argument("script", nargs="?", default="-")
    s.add_argument("-e", "--exec", help="script text given inline")
    s.set_defaults(func=cmd_fslp)

    s = sub.add_parser("gen-lb", help="write the lower-bound SLP family member n")
    s.add_argument("n", type=int)
    s.add_argument("output", nargs="?")
    s.add_argument("--binary", action="store_true")
    s.set_defaults(func=cmd_gen_lb)

    s = sub.add_parser("gen-random", help="write a seeded random SLP, FSLP or tree")
    s.add_argument("output", nargs="?")
    s.add_argument("--format", choices=("slp", "fslp", "tree"), default="slp")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--size", type=int, default=50, help="rules (SLP/FSLP) or edges (tree)")
    s.add_argument("--max-len", type=int, default=1 << 16)
    s.set_defaults(func=cmd_gen_random)

    s = sub.add_parser("selftest", help="run reduced-scale oracle checks")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_selftest)
    return p


def run(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except RESOURCE_ERRORS as e:
        err.write(f"error: resource limit: {e}\n")
        return 2
    except (ParseError, ScriptError) as e:
        err.write(f"error: {e}\n")
        return 1
    except (SlpError, PositionOutOfRange, OSError) as e:
        err.write(f"error: {e}\n")
        return 1


def main() -> None:
    sys.exit(run())
