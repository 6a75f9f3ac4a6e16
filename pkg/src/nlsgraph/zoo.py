"""Deterministic builders for the graph families used in the experiments.

All builders return plain :class:`MetricGraph` objects whose specs round-trip
through the text serializer.  Half-lines are kept as genuine half-lines; the
mesh layer decides the truncation length.
"""
from __future__ import annotations

import numpy as np

from .functionals import ProblemParams, soliton_oracle
from .graphs import Edge, MetricGraph
from .meshing import GridFunction, Mesh, interpolate


def line_graph() -> MetricGraph:
    """The real line as two half-lines glued at a flagged junction vertex."""
    edges = (Edge(0, 0, None, None), Edge(1, 0, None, None))
    return MetricGraph("line", frozenset({0}), edges, frozenset({0}))


def half_line_graph() -> MetricGraph:
    """A single half-line attached to one vertex."""
    return MetricGraph("halfline", frozenset({0}), (Edge(0, 0, None, None),))


def star_graph(n: int) -> MetricGraph:
    """N half-lines joined at one vertex; N >= 3 (N = 2 is just the line)."""
    if n < 3:
        raise ValueError("star_graph needs n >= 3; n = 2 is the line graph")
    edges = tuple(Edge(i, 0, None, None) for i in range(n))
    return MetricGraph(f"star{n}", frozenset({0}), edges)


def h_graph() -> MetricGraph:
    """Two vertices joined by a unit edge, two half-lines at each vertex."""
    edges = (
        Edge(0, 0, 1, 1.0),
        Edge(1, 0, None, None),
        Edge(2, 0, None, None),
        Edge(3, 1, None, None),
        Edge(4, 1, None, None),
    )
    return MetricGraph("hgraph", frozenset({0, 1}), edges)


def single_loop(length: float = 2.0) -> MetricGraph:
    """A compact circle, realized as one self-loop at a flagged base vertex.

    Not in the admissible class (it has no half-line); used as the compact
    control case where the ground state is attained trivially.
    """
    g = MetricGraph("loop", frozenset({0}), (Edge(0, 0, 0, float(length)),),
                    frozenset({0}))
    return g


def big_circles(k: int) -> MetricGraph:
    """A line with a self-loop of length j at the j-th marked vertex.

    Vertices v_1 .. v_k sit at unit spacing; v_j carries a self-loop of
    length j; half-line tails leave v_1 and v_k.  Levels of loop-localized
    states decrease to the line level as the loop index grows, and nothing
    attains the infimum.
    """
    if k < 1:
        raise ValueError("big_circles needs k >= 1")
    edges = []
    eid = 0
    for j in range(1, k + 1):
        edges.append(Edge(eid, j, j, float(j)))
        eid += 1
    for j in range(1, k):
        edges.append(Edge(eid, j, j + 1, 1.0))
        eid += 1
    edges.append(Edge(eid, 1, None, None))
    eid += 1
    edges.append(Edge(eid, k, None, None))
    return MetricGraph(f"bigcircles{k}", frozenset(range(1, k + 1)), tuple(edges))


def _periodic_cells(n: int, k: int, center_b_block: bool):
    """Common scaffold for the two-sided periodic constructions.

    Cells sit at integer positions -k .. k.  Every cell vertex carries two
    half-lines; cells at nonzero positions carry a self-loop of length n.
    The center carries either a bundle of n parallel unit edges to an apex
    vertex (total length n) or the same self-loop of length n as everywhere
    else.  The infinite line is cut after the outermost cells; the two cut
    ends continue as half-lines so the mesh pins them far away instead of
    imposing an artificial condition at the window boundary.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if k < 1:
        raise ValueError("need k >= 1")
    # vertex ids: cell j -> j + k (0 .. 2k); apex (if any) -> 2k + 1
    vid = {j: j + k for j in range(-k, k + 1)}
    vertices = set(vid.values())
    edges = []
    eid = 0
    for j in range(-k, k):
        edges.append(Edge(eid, vid[j], vid[j + 1], 1.0))
        eid += 1
    for j in range(-k, k + 1):
        if j != 0:
            edges.append(Edge(eid, vid[j], vid[j], float(n)))
            eid += 1
    if center_b_block:
        if n == 2:
            # a 2-edge bundle would leave a degree-2 apex; merge it away
            edges.append(Edge(eid, vid[0], vid[0], 2.0))
            eid += 1
        else:
            apex = 2 * k + 1
            vertices.add(apex)
            for _ in range(n):
                edges.append(Edge(eid, vid[0], apex, 1.0))
                eid += 1
    else:
        edges.append(Edge(eid, vid[0], vid[0], float(n)))
        eid += 1
    for j in range(-k, k + 1):
        for _ in range(2):
            edges.append(Edge(eid, vid[j], None, None))
            eid += 1
    for j in (-k, k):
        edges.append(Edge(eid, vid[j], None, None))
        eid += 1
    return vertices, tuple(edges)


def g_n(n: int, k: int = 2) -> MetricGraph:
    """Periodic-style graph whose center cell is a bundle of n unit edges.

    2k+1 cells on a line; each cell has two half-lines; off-center cells have
    a self-loop of length n; the center has n parallel unit edges to an apex
    (same total length as one loop).  The cut line-ends continue as one extra
    half-line per side.  For n = 2 the bundle is merged into a loop of length
    2 to avoid a degree-2 apex.
    """
    vertices, edges = _periodic_cells(n, k, center_b_block=True)
    return MetricGraph(f"gn{n}k{k}", frozenset(vertices), edges)


def tilde_g_n(n: int, k: int = 2) -> MetricGraph:
    """Fully periodic companion of :func:`g_n`: every cell has the loop."""
    vertices, edges = _periodic_cells(n, k, center_b_block=False)
    return MetricGraph(f"tildegn{n}k{k}", frozenset(vertices), edges)


def loops_on_line(loop_lengths, name: str | None = None) -> MetricGraph:
    """A line of unit edges with a self-loop of given length at each vertex.

    Two half-lines leave each end of the line, so every vertex keeps two
    disjoint escape routes.  With several long loops this is the standard
    multiplicity template: one solution localizes on each loop.
    """
    lengths = [float(x) for x in loop_lengths]
    if not lengths:
        raise ValueError("need at least one loop")
    m = len(lengths)
    edges = []
    eid = 0
    for i, ell in enumerate(lengths, start=1):
        edges.append(Edge(eid, i, i, ell))
        eid += 1
    for i in range(1, m):
        edges.append(Edge(eid, i, i + 1, 1.0))
        eid += 1
    for v in ((1, m) if m > 1 else (1,)):
        for _ in range(2):
            edges.append(Edge(eid, v, None, None))
            eid += 1
    label = name or ("loopline" + "-".join(f"{x:g}" for x in lengths))
    return MetricGraph(label, frozenset(range(1, m + 1)), tuple(edges))


# ---------------------------------------------------------------------------
# closed-form states on stars
# ---------------------------------------------------------------------------


def star_solution(mesh: Mesh, pp: ProblemParams, a: float = 0.0) -> GridFunction:
    """The shifted-soliton solution family on a star of N half-lines.

    For even N, half of the half-lines carry phi(x + a) and the other half
    phi(x - a); any a >= 0 gives a solution and the action does not depend on
    a.  For odd N only a = 0 (the half-soliton, peak at the vertex) solves
    the vertex condition, and a != 0 is rejected.
    """
    g = mesh.graph
    hls = sorted((e.id for e in g.halflines()))
    n = len(hls)
    if n < 3 or g.bounded_edges() or len(g.vertices) != 1:
        raise ValueError("star_solution needs a star graph mesh")
    if a < 0:
        raise ValueError("offset a must be nonnegative")
    if n % 2 == 1 and a != 0.0:
        raise ValueError("odd star: only the half-soliton (a = 0) is a solution")
    oracle = soliton_oracle(pp)
    plus = set(hls[: n // 2])

    def f(e, x):
        return oracle.phi(x + a) if e.id in plus else oracle.phi(x - a)

    return interpolate(mesh, f)
