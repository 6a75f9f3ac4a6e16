"""Uniform per-edge P1 discretization of metric graphs.

Each edge gets its own uniform grid with an even number of intervals (so an
odd node count, which composite Simpson needs).  Vertices carry a single
shared degree of freedom; half-lines are truncated to a finite length with
the far node pinned to zero.  The pinned node is a mesh artifact, not a graph
vertex.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import MetricGraph

MIN_TRUNC = 5.0


@dataclass
class Mesh:
    """Discretized metric graph.

    Attributes
    ----------
    graph : MetricGraph
    h_target : float
        Requested step; actual per-edge steps divide the edge length evenly.
    trunc : float
        Truncation length used for every half-line.
    edge_dofs : dict[int, numpy.ndarray]
        For each edge id, global DOF index of each node, ordered from
        endpoint ``a`` to endpoint ``b`` (to the far pinned node for a
        half-line).  Self-loops start and end at the same vertex DOF.
    edge_h : dict[int, float]
    edge_len : dict[int, float]
        Bounded length, or ``trunc`` for half-lines.
    vertex_dof : dict[int, int]
    pinned : numpy.ndarray of bool
        True at truncated far-end DOFs, which every solver keeps at zero.
    """

    graph: MetricGraph
    h_target: float
    trunc: float
    edge_dofs: dict
    edge_h: dict
    edge_len: dict
    vertex_dof: dict
    pinned: np.ndarray
    n_dofs: int
    _stiffness: sp.csr_matrix | None = field(default=None, repr=False)
    _weights: np.ndarray | None = field(default=None, repr=False)

    def edge_x(self, eid: int) -> np.ndarray:
        """Local node coordinates of an edge, from 0 to its (truncated) length."""
        n = len(self.edge_dofs[eid])
        return np.linspace(0.0, self.edge_len[eid], n)

    @property
    def stiffness(self) -> sp.csr_matrix:
        """Exact P1 stiffness matrix: u^T K u = sum_e int_e (u')^2."""
        if self._stiffness is None:
            rows, cols, vals = [], [], []
            for eid, dofs in self.edge_dofs.items():
                w = 1.0 / self.edge_h[eid]
                a, b = dofs[:-1], dofs[1:]
                rows.extend([a, b, a, b])
                cols.extend([a, b, b, a])
                vals.extend([np.full(len(a), w), np.full(len(a), w),
                             np.full(len(a), -w), np.full(len(a), -w)])
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            vals = np.concatenate(vals)
            self._stiffness = sp.coo_matrix(
                (vals, (rows, cols)), shape=(self.n_dofs, self.n_dofs)).tocsr()
        return self._stiffness

    @property
    def weights(self) -> np.ndarray:
        """Global composite-Simpson weights accumulated over edges."""
        if self._weights is None:
            w = np.zeros(self.n_dofs)
            for eid, dofs in self.edge_dofs.items():
                np.add.at(w, dofs, simpson_weights(len(dofs), self.edge_h[eid]))
            self._weights = w
        return self._weights


def simpson_weights(n_nodes: int, h: float) -> np.ndarray:
    """Composite Simpson weights for an odd number of equispaced nodes."""
    if n_nodes < 3 or n_nodes % 2 == 0:
        raise ValueError("composite Simpson needs an odd node count >= 3")
    w = np.empty(n_nodes)
    w[0] = w[-1] = 1.0
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _n_intervals(length: float, h_target: float) -> int:
    n = max(2, math.ceil(length / h_target - 1e-12))
    return n if n % 2 == 0 else n + 1


def discretize(g: MetricGraph, h_target: float = 0.01, trunc: float = 20.0) -> Mesh:
    """Build a mesh with shared vertex DOFs and pinned truncated far ends.

    Parameters
    ----------
    g : MetricGraph
    h_target : float
        Upper bound for the per-edge step; each edge uses
        ``ceil(len/h_target)`` intervals rounded up to an even count.
    trunc : float
        Length at which every half-line is cut; the far node is pinned to 0.
        Values below 5 are rejected as too aggressive for decaying states.
    """
    if h_target <= 0:
        raise ValueError("h_target must be positive")
    if trunc < MIN_TRUNC:
        raise ValueError(f"trunc={trunc} too small; needs trunc >= {MIN_TRUNC}")
    vertex_dof = {v: i for i, v in enumerate(sorted(g.vertices))}
    next_dof = len(vertex_dof)
    edge_dofs, edge_h, edge_len = {}, {}, {}
    pinned_idx = []
    for e in sorted(g.edges, key=lambda e: e.id):
        length = trunc if e.is_halfline else e.length
        n_int = _n_intervals(length, h_target)
        dofs = np.empty(n_int + 1, dtype=np.int64)
        dofs[0] = vertex_dof[e.a]
        interior = np.arange(next_dof, next_dof + n_int - 1)
        dofs[1:-1] = interior
        next_dof += n_int - 1
        if e.is_halfline:
            dofs[-1] = next_dof
            pinned_idx.append(next_dof)
            next_dof += 1
        else:
            dofs[-1] = vertex_dof[e.b]
        edge_dofs[e.id] = dofs
        edge_h[e.id] = length / n_int
        edge_len[e.id] = float(length)
    pinned = np.zeros(next_dof, dtype=bool)
    pinned[pinned_idx] = True
    return Mesh(g, h_target, trunc, edge_dofs, edge_h, edge_len,
                vertex_dof, pinned, next_dof)


@dataclass
class GridFunction:
    """Nodal values of a piecewise-linear function on a mesh."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_dofs,):
            raise ValueError("values length must equal the DOF count")

    def copy(self) -> "GridFunction":
        return GridFunction(self.mesh, self.values.copy())

    def edge_values(self, eid: int) -> np.ndarray:
        return self.values[self.mesh.edge_dofs[eid]]

    def zero_pinned(self) -> "GridFunction":
        self.values[self.mesh.pinned] = 0.0
        return self


def interpolate(mesh: Mesh, f) -> GridFunction:
    """Sample a per-edge coordinate function at the mesh nodes.

    ``f(edge, x)`` receives the Edge object and an array of local coordinates
    in [0, len] and returns values.  Values coming from different edges must
    agree at shared vertices to 1e-9 (absolute plus relative), else a
    ``ValueError`` is raised.  Truncated far-end nodes are pinned to zero.
    """
    vals = np.zeros(mesh.n_dofs)
    vertex_seen = {}
    for e in sorted(mesh.graph.edges, key=lambda e: e.id):
        dofs = mesh.edge_dofs[e.id]
        fe = np.asarray(f(e, mesh.edge_x(e.id)), dtype=float)
        if fe.shape != dofs.shape:
            raise ValueError(f"edge {e.id}: interpolant returned wrong shape")
        ends = [(e.a, fe[0])] + ([] if e.is_halfline else [(e.b, fe[-1])])
        for v, val in ends:
            if v in vertex_seen:
                ref = vertex_seen[v]
                if abs(val - ref) > 1e-9 * max(1.0, abs(ref)):
                    raise ValueError(
                        f"discontinuous interpolant at vertex {v}: {ref} vs {val}")
            else:
                vertex_seen[v] = val
        vals[dofs] = fe
    u = GridFunction(mesh, vals)
    return u.zero_pinned()


def norms(u: GridFunction, q: float) -> float:
    """L^q norm via composite Simpson on nodal samples; max |DOF| for q=inf."""
    if q == math.inf:
        return float(np.max(np.abs(u.values))) if u.values.size else 0.0
    if q < 1:
        raise ValueError("q must be in [1, inf]")
    m = u.mesh
    total = 0.0
    for eid, dofs in m.edge_dofs.items():
        w = simpson_weights(len(dofs), m.edge_h[eid])
        total += float(w @ np.abs(u.values[dofs]) ** q)
    return total ** (1.0 / q)


def grad_norm_sq(u: GridFunction) -> float:
    """Exact Dirichlet energy of the piecewise-linear interpolant."""
    m = u.mesh
    total = 0.0
    for eid, dofs in m.edge_dofs.items():
        d = np.diff(u.values[dofs])
        total += float(d @ d) / m.edge_h[eid]
    return total


def restrict_norm(u: GridFunction, region, q: float) -> float:
    """L^q norm restricted to a set of edge ids.

    Nodes shared with edges outside the region contribute through the
    region's own Simpson end weights only.  An empty region returns 0.0 with
    a warning.
    """
    region = set(region)
    if not region:
        warnings.warn("restrict_norm over an empty region", stacklevel=2)
        return 0.0
    m = u.mesh
    unknown = region - set(m.edge_dofs)
    if unknown:
        raise KeyError(f"region contains unknown edge ids: {sorted(unknown)}")
    if q == math.inf:
        return float(max(np.max(np.abs(u.values[m.edge_dofs[eid]])) for eid in region))
    if q < 1:
        raise ValueError("q must be in [1, inf]")
    total = 0.0
    for eid in region:
        dofs = m.edge_dofs[eid]
        w = simpson_weights(len(dofs), m.edge_h[eid])
        total += float(w @ np.abs(u.values[dofs]) ** q)
    return total ** (1.0 / q)


def dump_csv(u: GridFunction, fh) -> None:
    """Write ``edge_id, local_x, value`` rows ordered by (edge id, node index)."""
    close = False
    if isinstance(fh, (str, bytes)):
        fh = open(fh, "w", encoding="utf-8")
        close = True
    try:
        fh.write("edge_id,local_x,value\n")
        for eid in sorted(u.mesh.edge_dofs):
            xs = u.mesh.edge_x(eid)
            vals = u.edge_values(eid)
            for x, v in zip(xs, vals):
                fh.write(f"{eid},{x:.12g},{v:.17g}\n")
    finally:
        if close:
            fh.close()
