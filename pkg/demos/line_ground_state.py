"""Ground state on the real line, checked against the explicit soliton.

The line (two half-lines glued at a vertex) is the one graph where the
minimizer is known in closed form, so it makes a good end-to-end sanity
run: descend the constrained level, polish with Newton, and compare the
numbers to the exact ones.
"""
import math

from nlsgraph import (
    ProblemParams,
    SolverOptions,
    discretize,
    line_graph,
    minimize_nehari,
    refine_newton,
    soliton_level,
    vertex_bump_init,
    write_profile_svg,
)


def main():
    pp = ProblemParams(lam=1.0, p=4.0)
    opts = SolverOptions(h=0.01, trunc=20.0)
    g = line_graph()
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    s = soliton_level(pp)
    print(f"exact soliton level s = {s:.9f}")

    init = vertex_bump_init(mesh, pp, 0, halfwidth=5.0)
    pre = minimize_nehari(g, pp, init, opts)
    print(f"descent:  level {pre.level:.9f}  ({pre.iterations} iters,"
          f" status {pre.status})")

    post = refine_newton(g, pp, pre.u, opts)
    print(f"newton:   level {post.level:.9f}  multiplier"
          f" {post.multiplier:.9f}")
    print(f"kirchhoff residual {post.kirchhoff_max:.2e}")
    print(f"level error vs exact: {abs(post.level - s):.2e}")

    out = "line_ground_state.svg"
    write_profile_svg(out, post.u, f"line ground state, level {post.level:.6f}")
    print(f"wrote {out}")

    # the level scales like lam^(3 - 6/p) across lam at fixed p
    for lam in (0.5, 2.0):
        ratio = soliton_level(ProblemParams(lam, 4.0)) / s
        print(f"s_{lam:g} / s_1 = {ratio:.6f}   (lam^1.5 ="
              f" {lam ** 1.5:.6f})")
    assert math.isclose(post.level, s, rel_tol=1e-3)


if __name__ == "__main__":
    main()
