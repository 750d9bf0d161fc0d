"""Bisimulation: partitions, the two-chart relation, maps, and collapse."""

import random

import pytest
from hypothesis import given, settings

from generators import charts, random_chart
from oracles import (
    exists_bisimulation_containing,
    naive_bisimilarity,
    naive_bisimilarity_pairs,
    relation_is_bisimulation,
)
from lleekit.bisim import (
    BisimMap,
    bisimilarity,
    bisimilarity_partition,
    collapse,
    image,
    is_bisimulation,
)
from lleekit.chart import Chart, TERMINATION, Transition, chart_of_nodes, interpret
from lleekit.errors import NotABisimulation, ParseError, UnknownNode
from lleekit.expr import parse


def _partition_pairs(part):
    return {(x, y) for block in part.blocks for x in block for y in block}


def test_partition_fixture(chart_g, chart_ci, chart_cii):
    assert _partition_pairs(bisimilarity_partition(chart_g)) == {
        (x, y) for x in chart_g.nodes for y in chart_g.nodes
    }
    # CI is already collapsed: every block is a singleton
    assert all(len(b) == 1 for b in bisimilarity_partition(chart_ci).blocks)
    part = bisimilarity_partition(chart_cii)
    assert set(part.blocks) == {
        frozenset({"z", "z'", "z''"}),
        frozenset({"x", "x'"}),
        frozenset({"y"}),
        frozenset({"k"}),
    }
    assert part.block_of("z'") == frozenset({"z", "z'", "z''"})
    with pytest.raises(UnknownNode):
        part.block_of("nope")


def test_partition_vs_naive():
    rng = random.Random(23)
    for _ in range(120):
        g = random_chart(rng, max_nodes=6)
        assert _partition_pairs(bisimilarity_partition(g)) == naive_bisimilarity(g)


def test_bisimilarity_vs_naive_pairs():
    rng = random.Random(29)
    for _ in range(100):
        g = random_chart(rng, max_nodes=5)
        h = random_chart(rng, max_nodes=5)
        assert bisimilarity(g, h) == naive_bisimilarity_pairs(g, h)


def test_bisimilarity_is_a_bisimulation():
    rng = random.Random(31)
    for _ in range(40):
        g = random_chart(rng, max_nodes=5)
        h = random_chart(rng, max_nodes=5)
        rel = bisimilarity(g, h)
        assert relation_is_bisimulation(rel, g, h)
        assert is_bisimulation(rel, g, h)


def test_bisimilarity_vs_lattice_search():
    # the greatest bisimulation contains a pair iff SOME bisimulation does
    rng = random.Random(37)
    for _ in range(12):
        g = random_chart(rng, max_nodes=3, alphabet=("a",))
        h = random_chart(rng, max_nodes=3, alphabet=("a",))
        rel = bisimilarity(g, h)
        for x in sorted(g.nodes):
            for y in sorted(h.nodes):
                assert ((x, y) in rel) == exists_bisimulation_containing(
                    (x, y), g, h
                )


def test_is_bisimulation_cases(chart_g):
    assert is_bisimulation(set(), chart_g, chart_g)
    identity = {(n, n) for n in chart_g.nodes}
    assert is_bisimulation(identity, chart_g, chart_g)
    assert is_bisimulation({("x", "x'"), ("x'", "x"), ("x", "x"), ("x'", "x'")},
                           chart_g, chart_g)
    toggle = Chart(
        [
            Transition("X", "a", "Y"),
            Transition("Y", "a", "X"),
            Transition("X", "b", TERMINATION),
            Transition("Y", "c", TERMINATION),
        ]
    )
    # X and Y disagree on terminal actions
    assert not is_bisimulation({("X", "Y")}, toggle, toggle)
    with pytest.raises(UnknownNode):
        is_bisimulation({("x", "nope")}, chart_g, chart_g)


def test_bisim_map_fixture(chart_g, chart_h, map_g_to_h):
    theta = map_g_to_h
    assert theta("x") == "X"
    assert theta("x'") == "X"
    with pytest.raises(UnknownNode):
        theta("X")
    assert theta.to_text() == "map v1\nx X\nx' X\n"
    again = BisimMap.from_text(theta.to_text(), chart_g, chart_h)
    assert again == theta
    assert hash(again) == hash(theta)
    assert theta.to_json_dict() == {"v": 1, "map": {"x": "X", "x'": "X"}}


def test_bisim_map_validation(chart_g, chart_h):
    with pytest.raises(NotABisimulation):
        BisimMap(chart_g, chart_h, {"x": "X"})  # not total
    with pytest.raises(NotABisimulation):
        BisimMap(chart_g, chart_h, {"x": "X", "x'": "W"})  # not a target node
    one = interpret(parse("a*0"))
    with pytest.raises(NotABisimulation):
        # x can do b, the target cannot: transfer fails
        BisimMap(chart_g, one, {"x": "a*0", "x'": "a*0"})
    flipped = Chart(chart_h.transitions, nodes=chart_h.nodes)  # drop the initial
    BisimMap(chart_g, flipped, {"x": "X", "x'": "X"})  # fine without initials


def test_bisim_map_initial_condition(chart_g):
    shifted = chart_g.rooted_at("x'")
    with pytest.raises(NotABisimulation):
        # identity transfer holds but x must map to the initial x'
        BisimMap(chart_g, shifted, {n: n for n in chart_g.nodes})


@pytest.mark.parametrize(
    "text",
    ["x X\n", "map v2\n", "map v1\nx\n", "map v1\nx X\nx X\n"],
)
def test_bisim_map_text_errors(text, chart_g, chart_h):
    with pytest.raises(ParseError):
        BisimMap.from_text(text, chart_g, chart_h)


def test_image(chart_g, chart_h, map_g_to_h):
    sub = chart_of_nodes(chart_g, {"x", "x'"}, start="x'")
    img = image(map_g_to_h, sub)
    assert img.parent == chart_h
    assert img.nodes == {"X"}
    assert img.start == "X"
    foreign = chart_of_nodes(chart_h, {"X"})
    with pytest.raises(UnknownNode):
        image(map_g_to_h, foreign)


def test_collapse_g(chart_g):
    res = collapse(chart_g)
    assert res.chart.nodes == {"x"}
    assert res.chart.initial == "x"
    assert res.chart.transitions == {
        Transition("x", "a", "x"),
        Transition("x", "b", "x"),
    }
    assert res.theta.mapping == {"x": "x", "x'": "x"}
    assert res.theta.source == chart_g
    assert res.theta.target == res.chart


def test_collapse_cii(chart_cii, chart_ci):
    res = collapse(chart_cii)
    assert res.chart.nodes == {"z", "x", "y", "k"}
    assert res.chart.initial == "z"
    # structurally CI with lower-case class representatives
    renamed = {
        Transition(t.src.lower(), t.action, t.dst.lower())
        for t in chart_ci.transitions
    }
    assert res.chart.transitions == renamed
    assert res.theta.mapping == {
        "z": "z",
        "z'": "z",
        "z''": "z",
        "x": "x",
        "x'": "x",
        "y": "y",
        "k": "k",
    }


def test_collapse_random_properties():
    rng = random.Random(41)
    for _ in range(60):
        g = random_chart(rng, max_nodes=6, rooted=True)
        res = collapse(g)
        # no two distinct collapse nodes are bisimilar
        part = bisimilarity_partition(res.chart)
        assert all(len(b) == 1 for b in part.blocks)
        # collapsing again changes nothing
        assert collapse(res.chart).chart == res.chart
        # the quotient map is a bisimulation relating initials
        assert (g.initial, res.chart.initial) in bisimilarity(g, res.chart)


@settings(max_examples=40, deadline=None)
@given(charts())
def test_partition_blocks_cover_nodes(g):
    part = bisimilarity_partition(g)
    seen = set()
    for block in part.blocks:
        assert not (block & seen)
        seen |= block
    assert seen == g.nodes
