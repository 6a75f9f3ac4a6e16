"""Graph container, admissibility checks, escape routes, serialization."""
import math

import pytest

from nlsgraph.graphs import (
    Edge,
    H_HOLDS_SUFFICIENT,
    H_UNKNOWN,
    MetricGraph,
    check_assumption_h,
    emit_graphspec,
    parse_graphspec,
    total_bounded_length,
    validate_class_g,
)
from nlsgraph.zoo import (
    big_circles,
    g_n,
    h_graph,
    half_line_graph,
    line_graph,
    loops_on_line,
    single_loop,
    star_graph,
    tilde_g_n,
)


def test_edge_kinds():
    hl = Edge(0, 3, None, None)
    assert hl.is_halfline and not hl.is_loop
    assert hl.endpoints() == (3,)
    loop = Edge(1, 2, 2, 5.0)
    assert loop.is_loop and not loop.is_halfline
    seg = Edge(2, 0, 1, 1.5)
    assert seg.endpoints() == (0, 1)


def test_edge_validation():
    with pytest.raises(ValueError):
        Edge(0, 0, None, 1.0)  # half-line with a length
    with pytest.raises(ValueError):
        Edge(0, 0, 1, None)  # bounded edge without one
    with pytest.raises(ValueError):
        Edge(0, 0, 1, -2.0)
    with pytest.raises(ValueError):
        Edge(0, 0, 1, math.inf)


def test_graph_validation():
    with pytest.raises(ValueError):
        MetricGraph("bad", frozenset({0}), (Edge(0, 0, 1, 1.0),))
    with pytest.raises(ValueError):
        MetricGraph(
            "dup",
            frozenset({0}),
            (Edge(0, 0, None, None), Edge(0, 0, None, None)),
        )


def test_degree_counts_loops_twice():
    g = loops_on_line([3.0])
    assert g.degree(1) == 4  # loop contributes 2, plus two half-lines
    h = h_graph()
    assert h.degree(0) == 3 and h.degree(1) == 3


def test_incident_and_lookup():
    g = big_circles(2)
    e = g.edge(0)
    assert e.is_loop and e.length == 1.0
    with pytest.raises(KeyError):
        g.edge(99)
    assert {e.id for e in g.incident(1)} == {0, 2, 3}


def test_total_bounded_length():
    assert total_bounded_length(star_graph(3)) == 0.0
    assert total_bounded_length(big_circles(3)) == 8.0  # loops 1+2+3, two unit edges
    assert total_bounded_length(g_n(4, 1)) == 14.0


def test_class_g_accepts_zoo():
    for g in (
        line_graph(),
        half_line_graph(),
        star_graph(3),
        h_graph(),
        big_circles(4),
        g_n(4, 1),
        tilde_g_n(4, 1),
        loops_on_line([2.0, 3.0]),
    ):
        assert validate_class_g(g) == [], g.name


def test_class_g_needs_halfline():
    probs = validate_class_g(single_loop())
    assert any("half-line" in s for s in probs)


def test_class_g_degree_two_needs_flag():
    edges = (
        Edge(0, 0, 1, 1.0),
        Edge(1, 1, 2, 1.0),
        Edge(2, 0, None, None),
        Edge(3, 0, None, None),
        Edge(4, 2, None, None),
        Edge(5, 2, None, None),
    )
    g = MetricGraph("chain", frozenset({0, 1, 2}), edges)
    assert any("degree 2" in s for s in validate_class_g(g))
    g2 = MetricGraph("chain", frozenset({0, 1, 2}), edges, frozenset({1}))
    assert validate_class_g(g2) == []


def test_class_g_connectivity():
    edges = (
        Edge(0, 0, None, None),
        Edge(1, 0, None, None),
        Edge(2, 1, 1, 2.0),  # floating loop
    )
    g = MetricGraph("dis", frozenset({0, 1}), edges)
    assert any("connected" in s for s in validate_class_g(g))


def test_escape_check_holds_on_zoo():
    for g in (
        line_graph(),
        star_graph(3),
        star_graph(5),
        h_graph(),
        big_circles(3),
        g_n(4, 1),
        tilde_g_n(4, 1),
        loops_on_line([2.0, 3.0]),
    ):
        rep = check_assumption_h(g)
        assert rep.status == H_HOLDS_SUFFICIENT, g.name
        hl = {e.id for e in g.halflines()}
        for v in g.vertices:
            r1, r2 = rep.witness[v]
            assert r1[-1] in hl and r2[-1] in hl
            assert not set(r1) & set(r2), (g.name, v)


def test_escape_check_unknown_cases():
    assert check_assumption_h(half_line_graph()).status == H_UNKNOWN
    assert check_assumption_h(single_loop()).status == H_UNKNOWN
    # loop hanging behind a single bridge: only one route from the loop side
    edges = (
        Edge(0, 0, None, None),
        Edge(1, 0, None, None),
        Edge(2, 0, 1, 1.0),
        Edge(3, 1, 1, 2.0),
    )
    lasso = MetricGraph("lasso", frozenset({0, 1}), edges)
    assert check_assumption_h(lasso).status == H_UNKNOWN


def test_graphspec_roundtrip():
    for g in (
        line_graph(),
        half_line_graph(),
        star_graph(4),
        h_graph(),
        single_loop(2.5),
        big_circles(5),
        g_n(5, 2),
        tilde_g_n(3, 1),
        loops_on_line([10.0, 10.0, 10.0]),
    ):
        text = emit_graphspec(g)
        assert text == emit_graphspec(g)  # deterministic
        g2 = parse_graphspec(text)
        assert g2.name == g.name
        assert g2.vertices == g.vertices
        assert g2.r_junctions == g.r_junctions
        assert len(g2.edges) == len(g.edges)
        for e, f in zip(sorted(g.edges, key=lambda e: e.id), g2.edges):
            assert (e.id, e.a, e.b, e.length) == (f.id, f.a, f.b, f.length)


def test_graphspec_parse():
    text = "# header comment\nname t\nedge 0 0 1 length=2.5\nhalfline 1 0\nhalfline 2 1\n"
    g = parse_graphspec(text)
    assert g.name == "t"
    assert len(g.edges) == 3
    assert g.edge(0).length == 2.5
    with pytest.raises(ValueError):
        parse_graphspec("edge 0 0 1 2.0\n")  # missing length=
    with pytest.raises(ValueError):
        parse_graphspec("frob 1 2\n")
