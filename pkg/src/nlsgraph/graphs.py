"""Metric graphs made of bounded edges and half-lines.

A metric graph here is a finite combinatorial multigraph in which every
bounded edge carries a positive length and every half-line is attached to a
single vertex.  Self-loops are allowed and count twice towards the degree of
their vertex.  The admissible class used throughout the package requires a
connected graph with at least one half-line and no vertex of degree two,
except for vertices explicitly flagged as plain junctions on a line (where a
degree-2 vertex is just an artificial marker on a copy of R).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import networkx as nx

VertexId = int
EdgeId = int

H_HOLDS_SUFFICIENT = "holds_sufficient"
H_UNKNOWN = "unknown"


@dataclass(frozen=True)
class Edge:
    """A single edge: bounded (two endpoints, a length) or a half-line.

    A half-line stores its attachment vertex in ``a``; ``b`` and ``length``
    are ``None``.  A bounded edge with ``a == b`` is a self-loop.
    """

    id: EdgeId
    a: VertexId
    b: VertexId | None
    length: float | None

    def __post_init__(self):
        if (self.b is None) != (self.length is None):
            raise ValueError(f"edge {self.id}: half-lines have no endpoint b and no length")
        if self.length is not None:
            if not (self.length > 0) or not math.isfinite(self.length):
                raise ValueError(f"edge {self.id}: length must be positive and finite")

    @property
    def is_halfline(self) -> bool:
        return self.b is None

    @property
    def is_loop(self) -> bool:
        return self.b is not None and self.a == self.b

    def endpoints(self) -> tuple[VertexId, ...]:
        return (self.a,) if self.b is None else (self.a, self.b)


@dataclass(frozen=True)
class MetricGraph:
    """Immutable metric graph.

    Parameters
    ----------
    name : str
        Human-readable identifier, kept through serialization.
    vertices : frozenset[int]
        Vertex ids.  Every edge endpoint must appear here.
    edges : tuple[Edge, ...]
        Edge list; ids must be unique.
    r_junctions : frozenset[int]
        Vertices exempt from the no-degree-2 rule (markers on a line).
    """

    name: str
    vertices: frozenset
    edges: tuple
    r_junctions: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        ids = [e.id for e in self.edges]
        if len(ids) != len(set(ids)):
            raise ValueError("duplicate edge ids")
        for e in self.edges:
            for v in e.endpoints():
                if v not in self.vertices:
                    raise ValueError(f"edge {e.id}: endpoint {v} is not a vertex")
        if not self.r_junctions <= self.vertices:
            raise ValueError("r_junctions must be vertices")

    def edge(self, eid: EdgeId) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(f"no edge with id {eid}")

    def incident(self, v: VertexId) -> list:
        """Edges touching v.  A self-loop at v appears once in the list."""
        return [e for e in self.edges if v in e.endpoints()]

    def degree(self, v: VertexId) -> int:
        d = 0
        for e in self.edges:
            if e.is_halfline:
                d += 1 if e.a == v else 0
            elif e.is_loop:
                d += 2 if e.a == v else 0
            else:
                d += (e.a == v) + (e.b == v)
        return d

    def bounded_edges(self) -> list:
        return [e for e in self.edges if not e.is_halfline]

    def halflines(self) -> list:
        return [e for e in self.edges if e.is_halfline]


def total_bounded_length(g: MetricGraph) -> float:
    """Sum of the lengths of all bounded edges (half-lines excluded)."""
    return float(sum(e.length for e in g.bounded_edges()))


def _connected(g: MetricGraph) -> bool:
    if not g.vertices:
        return False
    adj = {v: set() for v in g.vertices}
    for e in g.edges:
        if not e.is_halfline and e.a != e.b:
            adj[e.a].add(e.b)
            adj[e.b].add(e.a)
    seen = set()
    stack = [next(iter(g.vertices))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v] - seen)
    return seen == set(g.vertices)


def validate_class_g(g: MetricGraph) -> list:
    """Check membership in the admissible graph class.

    Returns a list of human-readable violation strings; an empty list means
    the graph is admissible: connected, at least one half-line, every bounded
    edge of positive length, and no vertex of degree 2 unless flagged as a
    plain junction on a line.
    """
    violations = []
    if not _connected(g):
        violations.append("graph is not connected")
    if not g.halflines():
        violations.append("no unbounded edge (at least one half-line required)")
    for v in sorted(g.vertices):
        d = g.degree(v)
        if d == 0:
            violations.append(f"isolated vertex {v}")
        elif d == 2 and v not in g.r_junctions:
            violations.append(f"degree 2 vertex {v}")
    return violations


@dataclass(frozen=True)
class HReport:
    """Result of the two-escape-routes sufficient check.

    ``status`` is ``holds_sufficient`` when every vertex admits two
    edge-disjoint paths to infinity and every bounded edge lies on a cycle or
    on a path joining two half-lines; otherwise ``unknown`` (the check is
    one-sided, it never certifies failure).  ``witness`` maps each vertex to
    two edge-disjoint escape routes given as edge-id lists ending in a
    half-line id.
    """

    status: str
    witness: dict | None = None


_INF = "oo"  # virtual vertex collecting all half-lines


def _flow_digraph(g: MetricGraph) -> nx.DiGraph:
    dg = nx.DiGraph()
    dg.add_nodes_from(g.vertices)
    dg.add_node(_INF)
    for e in g.edges:
        if e.is_halfline:
            c = dg[e.a][_INF]["capacity"] if dg.has_edge(e.a, _INF) else 0
            dg.add_edge(e.a, _INF, capacity=c + 1)
        elif not e.is_loop:
            for x, y in ((e.a, e.b), (e.b, e.a)):
                c = dg[x][y]["capacity"] if dg.has_edge(x, y) else 0
                dg.add_edge(x, y, capacity=c + 1)
    return dg


def _two_escape_paths(g: MetricGraph, v: VertexId, flow: dict) -> list | None:
    """Decompose a unit-capacity flow of value >= 2 into two edge-id routes."""
    # residual multiset of directed pair uses
    used = {}
    for x, ys in flow.items():
        for y, f in ys.items():
            if f > 0:
                used[(x, y)] = used.get((x, y), 0) + int(round(f))
    # cancel antiparallel uses; max-flow may route both ways over one pair,
    # which would otherwise overdraw the concrete edge-id pool below
    for x, y in list(used):
        back = used.get((y, x), 0)
        if back and used.get((x, y), 0):
            c = min(used[(x, y)], back)
            used[(x, y)] -= c
            used[(y, x)] -= c
    # pools of concrete edge ids per unordered vertex pair / half-line vertex
    pair_pool = {}
    hl_pool = {}
    for e in g.edges:
        if e.is_halfline:
            hl_pool.setdefault(e.a, []).append(e.id)
        elif not e.is_loop:
            pair_pool.setdefault(frozenset((e.a, e.b)), []).append(e.id)
    routes = []
    for _ in range(2):
        path = []
        x = v
        guard = 0
        while x != _INF:
            guard += 1
            if guard > 10 * len(g.edges) + 10:
                return None
            nxt = None
            for (a, b), cnt in used.items():
                if a == x and cnt > 0:
                    nxt = b
                    break
            if nxt is None:
                return None
            used[(x, nxt)] -= 1
            if nxt == _INF:
                path.append(hl_pool[x].pop())
            else:
                path.append(pair_pool[frozenset((x, nxt))].pop())
            x = nxt
        routes.append(path)
    return routes


def check_assumption_h(g: MetricGraph) -> HReport:
    """Sufficient check that two disjoint trails to infinity leave every point.

    The check asks for max-flow at least 2 from every vertex to a virtual
    infinity vertex under unit edge capacities, and additionally that every
    bounded edge lies on a cycle or on a path joining two half-lines (so that
    points in the middle of an edge also have two outgoing routes).  Returns
    ``holds_sufficient`` or ``unknown``; it never certifies a negative.
    """
    if not g.halflines() or not _connected(g):
        return HReport(H_UNKNOWN)
    dg = _flow_digraph(g)
    witness = {}
    for v in sorted(g.vertices):
        if not dg.has_node(v):
            return HReport(H_UNKNOWN)
        value, flow = nx.maximum_flow(dg, v, _INF)
        if value < 2:
            return HReport(H_UNKNOWN)
        routes = _two_escape_paths(g, v, flow)
        if routes is None:
            return HReport(H_UNKNOWN)
        witness[v] = tuple(tuple(r) for r in routes)

    # every bounded edge on a cycle, or joining two components that both
    # reach a half-line when the edge is a bridge
    simple = nx.Graph()
    simple.add_nodes_from(g.vertices)
    mult = {}
    for e in g.bounded_edges():
        if not e.is_loop:
            key = frozenset((e.a, e.b))
            mult[key] = mult.get(key, 0) + 1
            simple.add_edge(e.a, e.b)
    hl_vertices = {e.a for e in g.halflines()}
    bridges = set(frozenset(b) for b in nx.bridges(simple)) if simple.edges else set()
    for e in g.bounded_edges():
        if e.is_loop:
            continue
        key = frozenset((e.a, e.b))
        if mult[key] >= 2 or key not in bridges:
            continue
        h = simple.copy()
        h.remove_edge(e.a, e.b)
        side_a = nx.node_connected_component(h, e.a)
        side_b = nx.node_connected_component(h, e.b)
        if not (side_a & hl_vertices and side_b & hl_vertices):
            return HReport(H_UNKNOWN)
    return HReport(H_HOLDS_SUFFICIENT, witness)


# ---------------------------------------------------------------------------
# plain-text serialization
#
# Format, one record per line, order-insensitive, '#' starts a comment:
#   name <string>
#   rjunction <v>
#   edge <id> <v1> <v2> length=<x>
#   halfline <id> <v>
# ---------------------------------------------------------------------------


def emit_graphspec(g: MetricGraph) -> str:
    lines = [f"name {g.name}"]
    for v in sorted(g.r_junctions):
        lines.append(f"rjunction {v}")
    for e in g.edges:
        if e.is_halfline:
            lines.append(f"halfline {e.id} {e.a}")
        else:
            lines.append(f"edge {e.id} {e.a} {e.b} length={e.length!r}")
    return "\n".join(lines) + "\n"


def parse_graphspec(text: str) -> MetricGraph:
    """Parse the plain-text edge-list format emitted by :func:`emit_graphspec`.

    Lengths round-trip exactly (they are written with ``repr``).  Raises
    ``ValueError`` on malformed records, duplicate ids or unknown keywords.
    """
    name = "graph"
    edges = []
    rjunc = set()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kw = parts[0]
        try:
            if kw == "name":
                name = " ".join(parts[1:]) if len(parts) > 1 else "graph"
            elif kw == "rjunction":
                (v,) = parts[1:]
                rjunc.add(int(v))
            elif kw == "edge":
                eid, v1, v2, tail = parts[1:]
                if not tail.startswith("length="):
                    raise ValueError("missing length")
                edges.append(Edge(int(eid), int(v1), int(v2), float(tail[len("length="):])))
            elif kw == "halfline":
                eid, v = parts[1:]
                edges.append(Edge(int(eid), int(v), None, None))
            else:
                raise ValueError(f"unknown keyword {kw!r}")
        except ValueError as exc:
            raise ValueError(f"line {ln}: {exc}") from None
    vertices = set(rjunc)
    for e in edges:
        vertices.update(e.endpoints())
    edges.sort(key=lambda e: e.id)
    return MetricGraph(name, frozenset(vertices), tuple(edges), frozenset(rjunc))
