"""Constrained minimization, Newton polish, multiplicity scans."""
import math

import numpy as np
import pytest

from nlsgraph import (
    GridFunction,
    ProblemParams,
    STATUS_CONVERGED,
    STATUS_ESCAPED,
    SolverOptions,
    classify_solution,
    discretize,
    edge_bump_init,
    interpolate,
    kind_partition,
    minimize_doubly_constrained,
    minimize_nehari,
    multiplicity_scan,
    norms,
    refine_newton,
    soliton_bump_init,
    soliton_level,
    soliton_oracle,
    vertex_bump_init,
)
from nlsgraph.solvers import argmax_edge_info, tied_argmax_edges
from nlsgraph.zoo import (
    big_circles,
    h_graph,
    half_line_graph,
    line_graph,
    loops_on_line,
    star_graph,
    star_solution,
)

S4_3 = 4.0 / 3.0


def test_argmax_edge_info(pp4, line_mesh, phi_line):
    eid, idx, sup, margin = argmax_edge_info(phi_line)
    assert idx == 0  # peak at the junction node
    assert math.isclose(sup, math.sqrt(2.0), rel_tol=1e-12)
    assert margin == 0.0  # vertex maxima are shared between edges
    assert sorted(tied_argmax_edges(phi_line)) == [0, 1]


def test_argmax_interior_bump(pp4):
    mesh = discretize(big_circles(3), h_target=0.05, trunc=6.0)
    u = soliton_bump_init(mesh, pp4, 2)  # the loop of length 3
    eid, idx, sup, margin = argmax_edge_info(u)
    assert eid == 2
    assert margin > 0.0
    assert 0 < idx < len(mesh.edge_dofs[2]) - 1


def test_kind_partition_and_classify(pp4):
    g = big_circles(3)
    part = kind_partition(g)
    assert part["S3"] == {0, 1, 2}
    assert part["S2"] == {3, 4}
    assert len(part["S1"]) == 2
    mesh = discretize(g, h_target=0.05, trunc=6.0)
    u = soliton_bump_init(mesh, pp4, 2)
    assert classify_solution(g, u, part) == ["S3"]
    with pytest.raises(ValueError):
        classify_solution(g, u, {"only": part["S1"]})


def test_init_builders(pp4):
    mesh = discretize(big_circles(3), h_target=0.05, trunc=6.0)
    for builder in (soliton_bump_init, edge_bump_init):
        u = builder(mesh, pp4, 2)
        assert norms(u, 2) > 0
        assert np.all(u.values >= 0.0)
        assert tied_argmax_edges(u) == [2]
    with pytest.raises(ValueError):
        soliton_bump_init(mesh, pp4, 2, center=5.0)  # outside the edge
    hl = sorted(e.id for e in big_circles(3).halflines())[0]
    with pytest.raises(ValueError):
        edge_bump_init(mesh, pp4, hl)
    v = vertex_bump_init(mesh, pp4, 1, halfwidth=0.8)
    assert v.values[mesh.vertex_dof[1]] > 0
    assert np.all(v.values >= 0.0)


def test_minimize_nehari_line(pp4):
    g = line_graph()
    opts = SolverOptions(h=0.02, trunc=15.0)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    init = vertex_bump_init(mesh, pp4, 0, halfwidth=5.0)
    rep = minimize_nehari(g, pp4, init, opts)
    assert math.isclose(rep.level, S4_3, rel_tol=0.01)
    # trace is monotone nonincreasing up to a small slack
    tr = np.asarray(rep.trace)
    assert np.all(np.diff(tr) <= 1e-9)
    assert math.isclose(rep.multiplier, 1.0, rel_tol=1e-3)
    # the polish drives the state to a genuine critical point
    post = refine_newton(g, pp4, rep.u, opts)
    assert post.status == STATUS_CONVERGED
    assert abs(post.multiplier - 1.0) <= 1e-6
    assert math.isclose(post.level, S4_3, rel_tol=1e-3)


def test_minimize_nehari_halfline(pp4):
    g = half_line_graph()
    mesh = discretize(g, h_target=0.02, trunc=15.0)
    init = vertex_bump_init(mesh, pp4, 0, halfwidth=5.0)
    rep = minimize_nehari(g, pp4, init, SolverOptions(h=0.02, trunc=15.0))
    assert math.isclose(rep.level, 0.5 * S4_3, rel_tol=0.01)


def test_minimize_nehari_star_stays_above_line(pp4):
    # no ground state on the star: the level stays strictly above s
    g = star_graph(3)
    mesh = discretize(g, h_target=0.02, trunc=15.0)
    init = vertex_bump_init(mesh, pp4, 0, halfwidth=5.0)
    rep = minimize_nehari(g, pp4, init, SolverOptions(h=0.02, trunc=15.0))
    assert rep.level > S4_3
    assert rep.level < 2.0 + 0.05


def test_minimize_nehari_guards(pp4):
    g = line_graph()
    mesh = discretize(g, h_target=0.05, trunc=6.0)
    zero = GridFunction(mesh, np.zeros(mesh.n_dofs))
    with pytest.raises(ValueError):
        minimize_nehari(g, pp4, zero, SolverOptions(h=0.05, trunc=6.0))
    other = discretize(star_graph(3), h_target=0.05, trunc=6.0)
    init = vertex_bump_init(other, pp4, 0, halfwidth=2.0)
    with pytest.raises(ValueError):
        minimize_nehari(g, pp4, init, SolverOptions(h=0.05, trunc=6.0))


def test_doubly_constrained_long_loop(pp4):
    g = big_circles(8)
    opts = SolverOptions(h=0.02, trunc=10.0, max_iters=900)
    pre = minimize_doubly_constrained(g, pp4, 7, opts)  # loop of length 8
    assert pre.status != STATUS_ESCAPED
    assert S4_3 < pre.level < S4_3 + 0.05
    post = refine_newton(g, pp4, pre.u, opts)
    assert post.status == STATUS_CONVERGED
    assert S4_3 < post.level < S4_3 + 0.05
    eid, idx, _, margin = argmax_edge_info(post.u)
    assert eid == 7 and margin > 0.0
    assert 0 < idx < len(post.u.mesh.edge_dofs[7]) - 1


def test_doubly_constrained_short_loop(pp4):
    # a unit loop cannot hold a near-soliton state: either the sup escapes
    # or the level stays well above the line level
    g = big_circles(8)
    opts = SolverOptions(h=0.02, trunc=10.0, max_iters=900)
    rep = minimize_doubly_constrained(g, pp4, 0, opts)
    assert rep.status == STATUS_ESCAPED or rep.level > S4_3 + 0.05


def test_doubly_constrained_hgraph(pp4):
    g = h_graph()
    opts = SolverOptions(h=0.02, trunc=10.0, max_iters=2500)
    rep = minimize_doubly_constrained(g, pp4, 0, opts)
    if rep.status == STATUS_CONVERGED:
        assert rep.level >= S4_3 + 0.05
    assert min(rep.trace) >= S4_3 + 0.05


def test_doubly_constrained_rejects_halfline(pp4):
    g = star_graph(3)
    with pytest.raises(ValueError):
        minimize_doubly_constrained(g, pp4, 0, SolverOptions(h=0.05, trunc=6.0))


def test_refine_newton_star(pp4):
    g = star_graph(3)
    opts = SolverOptions(h=0.01, trunc=20.0)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    rep = refine_newton(g, pp4, star_solution(mesh, pp4), opts)
    assert rep.status == STATUS_CONVERGED
    assert abs(rep.level - 2.0) <= 1e-3
    assert abs(rep.multiplier - 1.0) <= 1e-6
    assert rep.kirchhoff_max <= 1e-6
    assert rep.nehari_res <= 1e-8 * norms(rep.u, 4) ** 4
    assert np.all(rep.u.values[mesh.pinned] == 0.0)


def test_refine_newton_rejects_zero(pp4):
    g = star_graph(3)
    opts = SolverOptions(h=0.05, trunc=6.0)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    with pytest.raises(ValueError):
        refine_newton(g, pp4, GridFunction(mesh, np.zeros(mesh.n_dofs)), opts)


def test_refine_newton_sign_changing(pp4):
    # an odd two-bump state refines to the doubled ground level; its soft
    # separation mode keeps the residual above the convergence bar (the
    # Hessian eigenvalue along it is exponentially small in the domain
    # size), so the claim here is about the level, which is pinned hard
    g = line_graph()
    opts = SolverOptions(h=0.01, trunc=20.0)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    orc = soliton_oracle(pp4)

    def f(e, x):
        s = 1.0 if e.id == 0 else -1.0
        return s * (orc.phi(x - 13.0) - orc.phi(x + 13.0))

    rep = refine_newton(g, pp4, interpolate(mesh, f), opts)
    assert float(np.min(rep.u.values)) < -1.0  # genuinely sign-changing
    assert rep.level >= 2.0 * S4_3 - 0.05
    assert abs(rep.level - 2.0 * S4_3) <= 5e-4
    assert abs(rep.multiplier - 1.0) <= 1e-3


def test_multiplicity_scan_star_empty(pp4):
    recs = multiplicity_scan(star_graph(3), pp4, 0.5,
                             SolverOptions(h=0.05, trunc=6.0, max_iters=200))
    assert recs == []


def test_multiplicity_scan_loopline(pp4):
    g = loops_on_line([10.0, 10.0, 10.0])
    opts = SolverOptions(h=0.05, trunc=8.0, max_iters=1200)
    sols = multiplicity_scan(g, pp4, 5.0, opts, workers=4)
    assert len(sols) >= 3
    levels = [s.level for s in sols]
    assert levels == sorted(levels)
    part = kind_partition(g)
    for s in sols:
        eid, idx, _, margin = argmax_edge_info(s.u)
        assert margin > 0.0
        assert eid in part["S3"]
        assert 0 < idx < len(s.u.mesh.edge_dofs[eid]) - 1
        assert float(np.min(s.u.values[~s.u.mesh.pinned])) > 0.0
    # pairwise distinct in relative L2
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            a, b = sols[i].u.values, sols[j].u.values
            rel = np.linalg.norm(a - b) / max(np.linalg.norm(a), 1e-300)
            assert rel > 1e-3


def test_seed_determinism(pp4):
    g = line_graph()
    opts = SolverOptions(h=0.05, trunc=8.0, max_iters=400, restarts=2, seed=42)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    init = vertex_bump_init(mesh, pp4, 0, halfwidth=3.0)
    r1 = minimize_nehari(g, pp4, init, opts)
    r2 = minimize_nehari(g, pp4, init, opts)
    assert r1.level == r2.level
    assert np.array_equal(r1.u.values, r2.u.values)
