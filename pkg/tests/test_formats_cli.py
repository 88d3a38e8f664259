from __future__ import annotations

import io
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cslp import cli
from cslp.errors import ParseError
from cslp.formats import format_fslp, format_slp, format_tree, parse_fslp, parse_slp, parse_tree
from cslp.fslp import eval_forest, example_fslp
from cslp.generators import (
    balanced_slp,
    gen_lower_bound,
    lower_bound_string,
    lz78_slp,
    random_fslp,
    random_slp,
    random_tree,
    repetitive_string,
)

from conftest import text

SLP_TEXT = """slp v1
# two terminals, one heavier
terminal a
terminal b weight 3
rule A -> a b
rule S -> A A a
start S
"""

EXAMPLE_TEXT = """fslp v1
class A bot
class B top
class C bot
class D bot
class E top
class X ctx
class Y ctx
rule A -> a ( B )
rule B -> C C
rule C -> X < D >
rule D -> c ( E )
rule E -> eps
rule X -> Y < Y >
rule Y -> b ( D x D )
start A
"""


def fields(g) -> tuple:
    return g.terminals, g.weights, g.names, g.rules, g.start


def run(*argv: str) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_parse_slp():
    g = parse_slp(SLP_TEXT)
    assert text(g, g.start) == list("ababa")
    assert g.weights == (1, 3)
    assert fields(parse_slp(format_slp(g))) == fields(g)


@pytest.mark.parametrize(
    "body, line",
    [
        ("slp v2\n", 1),
        ("slp v1\nrule A -> q\n", 2),
        ("slp v1\nterminal a\nrule A -> a\nrule A -> a\n", 4),
        ("slp v1\nterminal a weight 0\n", 2),
        ("slp v1\nterminal a\nrule A -> B\nrule B -> A\n", 3),
        ("slp v1\nterminal a\nrule A -> a\nstart B\n", 4),
        ("slp v1\nfrobnicate\n", 2),
    ],
)
def test_slp_errors_carry_line_numbers(body, line):
    with pytest.raises(ParseError) as e:
        parse_slp(body)
    assert e.value.line == line


def test_tree_round_trip_and_reordering():
    t = parse_tree("tree v1\nterminal a\nterminal b weight 2\nroot r\nedge u v b\nedge r u a a\n")
    assert t.prefixes()["v"] == ("a", "a", "b")
    assert parse_tree(format_tree(t)).prefixes() == t.prefixes()
    with pytest.raises(ParseError):
        parse_tree("tree v1\nterminal a\nroot r\nedge u v a\n")
    with pytest.raises(ParseError):
        parse_tree("tree v1\nterminal a\nroot r\nedge r v q\n")


def test_fslp_text():
    f = parse_fslp(EXAMPLE_TEXT)
    assert eval_forest(f).term() == eval_forest(example_fslp()).term()
    g = parse_fslp(format_fslp(f))
    assert g.rules == f.rules and g.classes == f.classes
    with pytest.raises(ParseError) as e:
        parse_fslp("fslp v1\nclass A top\nrule A -> ( (\n")
    assert e.value.line == 3


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), g=st.integers(1, 50))
def test_generated_round_trips(seed, g):
    rng = random.Random(seed)
    s = random_slp(rng, g, 2000)
    assert fields(parse_slp(format_slp(s))) == fields(s)
    f = random_fslp(rng, g, 500)
    assert eval_forest(parse_fslp(format_fslp(f))).term() == eval_forest(f).term()
    t = random_tree(rng, g, {"a": 1, "b": 2}, 2, 0)
    assert parse_tree(format_tree(t)).prefixes() == {str(k): v for k, v in t.prefixes().items()}


@pytest.mark.parametrize("binary", [False, True])
def test_lower_bound_family(binary):
    for n in range(1, 8):
        g = gen_lower_bound(n, binary)
        assert text(g, g.start) == lower_bound_string(n, binary)
    assert lower_bound_string(2) == ["b1", "a", "a", "a", "a", "b2"]
    assert lower_bound_string(2, True)[:9] == ["b", "b", "a", "b"] + ["a"] * 4 + ["b"]


def test_string_generators():
    rng = random.Random(3)
    s = repetitive_string(rng, 500)
    assert len(s) == 500
    assert text(lz78_slp(s), lz78_slp(s).start) == s
    g = balanced_slp(rng, 777, alpha=0.25)
    assert len(text(g, g.start)) == 777


def test_cli_access_and_stats(tmp_path):
    p = tmp_path / "g.slp"
    assert run("gen-lb", "2", str(p))[0] == 0
    code, out, _ = run("access", str(p), "S", "3")
    assert code == 0 and out.splitlines()[0] == "a" and out.splitlines()[1].startswith("steps=")
    code, out, _ = run("stats", str(p))
    assert "length=6" in out.splitlines()
    q = tmp_path / "b.slp"
    code, out, _ = run("balance", str(p), str(q))
    assert code == 0 and "contracting=true" in out
    assert text(parse_slp(q.read_text()), parse_slp(q.read_text()).start) == lower_bound_string(2)


def test_cli_finger_csv(tmp_path):
    p = tmp_path / "g.slp"
    p.write_text(SLP_TEXT)
    code, out, _ = run("finger", str(p), "-e", "set 1; move 5; access 2")
    rows = [r.split(",") for r in out.splitlines()]
    assert code == 0 and rows[0] == ["op", "i", "d", "steps"]
    assert [r[:3] for r in rows[1:]] == [["set", "1", "0"], ["move", "5", "4"], ["access", "2", "3"]]
    assert run("finger", str(p), "-e", "move 9")[0] == 1
    assert run("finger", str(p), "-e", "set 1", "--max-len", "3")[0] == 2


def test_cli_fslp_script(tmp_path):
    p = tmp_path / "f.fslp"
    p.write_text(EXAMPLE_TEXT)
    code, out, _ = run("fslp", str(p), "-e", "root-first; child 2; symbol; expect b; degree; parent; symbol")
    assert code == 0 and out.split() == ["b", "3", "a"]
    code, out, _ = run("fslp", str(p), "-e", "root-first; parent")
    assert out.split() == ["none"]
    code, out, _ = run("fslp", str(p), "-e", "root-first; symbol; expect z")
    assert code == 1 and "expectation failed" in out
    code, _, err = run("fslp", str(p), "-e", "jump")
    assert code == 1 and "line 1" in err


def test_cli_errors(tmp_path):
    p = tmp_path / "bad.slp"
    p.write_text("slp v1\nrule A -> A\n")
    code, _, err = run("stats", str(p))
    assert code == 1 and "line 2" in err
    assert run("stats", str(tmp_path / "missing.slp"))[0] == 1


def test_cli_generators_and_selftest(tmp_path):
    for fmt in ("slp", "fslp", "tree"):
        code, out, _ = run("gen-random", "--format", fmt, "--seed", "4", "--size", "20")
        assert code == 0 and out.startswith(f"{fmt} v1")
    code, out, _ = run("selftest", "--seed", "1")
    assert code == 0 and all(line.startswith("PASS") for line in out.splitlines())
