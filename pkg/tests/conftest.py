"""Shared fixtures: reference meshes, soliton interpolants, random fields."""
import numpy as np
import pytest

from nlsgraph import (
    GridFunction,
    ProblemParams,
    discretize,
    interpolate,
    soliton_oracle,
)
from nlsgraph.zoo import line_graph


@pytest.fixture(scope="session")
def pp4():
    return ProblemParams(1.0, 4.0)


@pytest.fixture(scope="session")
def line_mesh():
    return discretize(line_graph(), h_target=0.01, trunc=20.0)


@pytest.fixture(scope="session")
def phi_line(pp4, line_mesh):
    orc = soliton_oracle(pp4)
    return interpolate(line_mesh, lambda e, x: orc.phi(x))


def smooth_random_field(mesh, rng, passes=12):
    """Nonnegative random nodal field, smoothed edge by edge.

    Vertex DOFs are shared, so the result is automatically continuous; the
    smoothing passes just keep slopes bounded enough that quadrature-level
    comparisons are meaningful.
    """
    vals = rng.random(mesh.n_dofs) + 0.05
    for _ in range(passes):
        out = vals.copy()
        for dofs in mesh.edge_dofs.values():
            v = vals[dofs]
            sm = v.copy()
            sm[1:-1] = 0.25 * v[:-2] + 0.5 * v[1:-1] + 0.25 * v[2:]
            out[dofs] = sm
        vals = out
    vals[mesh.pinned] = 0.0
    return GridFunction(mesh, vals)
