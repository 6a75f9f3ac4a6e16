"""Batch harness reproducing the level tables, case signatures and sweeps.

Every command returns a flat list of :class:`ExperimentRecord` rows sharing
one CSV schema (``graph,params,lambda,p,tag,value,tol,status``), with a JSON
mirror.  Conventions:

* ``c_est`` rows are upper estimates of the ground-state level; they take the
  minimum over a descent portfolio, an escaping-bump ladder (graphs with
  half-lines) and every found solution, so ``c_est <= sigma_upper`` holds by
  construction.
* ``sigma_upper`` is the minimum level over *found* solutions (converged
  Newton outputs and closed-form star states); the true least-action level
  is bounded above by it, never certified.
* verdict rows carry the measured margin of a check as ``value``; hard
  numeric checks report ``ok``/``failed``, asymptotic-trend checks report
  ``evidence`` when the trend holds and ``failed`` otherwise.

All commands are deterministic for a fixed seed; record lists come back in a
fixed order so CSV output is byte-identical across runs.
"""
from __future__ import annotations

import io
import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .functionals import (
    ProblemParams,
    action,
    project_nehari,
    soliton_level,
    soliton_oracle,
)
from .graphs import MetricGraph, check_assumption_h, validate_class_g
from .meshing import Mesh, discretize, dump_csv, interpolate
from .solvers import (
    STATUS_CONVERGED,
    SolverOptions,
    argmax_edge_info,
    classify_solution,
    edge_bump_init,
    kind_partition,
    minimize_doubly_constrained,
    minimize_nehari,
    multiplicity_scan,
    refine_newton,
    vertex_bump_init,
)
from .svgplot import write_profile_svg
from .zoo import big_circles, g_n, h_graph, loops_on_line, single_loop, star_graph, star_solution, tilde_g_n

TAGS = ("c_est", "sigma_upper", "level_of_solution", "gap")

STATUS_OK = "ok"
STATUS_FAILED = "failed"
STATUS_EVIDENCE = "evidence"

CSV_HEADER = "graph,params,lambda,p,tag,value,tol,status"


@dataclass(frozen=True)
class ExperimentRecord:
    """One row of the experiment table.

    ``params`` is a ``key=value;key=value`` string (free-form keys); ``tag``
    comes from the closed enumeration in ``TAGS``; ``status`` is either a
    solver status or one of ok/failed/evidence.
    """
    graph: str
    params: str
    lam: float
    p: float
    tag: str
    value: float
    tol: float
    status: str

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown tag {self.tag!r}")
        if not math.isfinite(self.value):
            raise ValueError("record value must be finite")


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in records:
        buf.write(",".join([
            r.graph, r.params, repr(float(r.lam)), repr(float(r.p)),
            r.tag, repr(float(r.value)), repr(float(r.tol)), r.status,
        ]) + "\n")
    return buf.getvalue()


def records_to_json(records) -> str:
    rows = [{
        "graph": r.graph, "params": r.params, "lambda": r.lam, "p": r.p,
        "tag": r.tag, "value": r.value, "tol": r.tol, "status": r.status,
    } for r in records]
    return json.dumps(rows, indent=1) + "\n"


def write_records(records, out_dir, stem, fmt: str = "csv") -> str:
    os.makedirs(out_dir, exist_ok=True)
    if fmt == "csv":
        path = os.path.join(out_dir, stem + ".csv")
        text = records_to_csv(records)
    elif fmt == "json":
        path = os.path.join(out_dir, stem + ".json")
        text = records_to_json(records)
    else:
        raise ValueError("format must be csv or json")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def ordering_violations(records) -> list:
    """c/sigma consistency: sigma_upper >= c_est - 2 tol within each run."""
    groups = {}
    for r in records:
        groups.setdefault((r.graph, r.lam, r.p), {}).setdefault(r.tag, []).append(r)
    bad = []
    for key, tags in groups.items():
        for c in tags.get("c_est", ()):
            for s in tags.get("sigma_upper", ()):
                if s.value < c.value - 2.0 * c.tol:
                    bad.append(f"{key}: sigma_upper {s.value} < c_est {c.value} - 2*{c.tol}")
    return bad


def level_floor_violations(records, floor_rel: float = 0.01) -> list:
    """Converged solutions on (H)-verified graphs must sit above s_lam - 0.01."""
    bad = []
    for r in records:
        if (r.tag == "level_of_solution" and r.status == STATUS_CONVERGED
                and "H=holds_sufficient" in r.params):
            floor = soliton_level(ProblemParams(r.lam, r.p)) - floor_rel
            if r.value < floor:
                bad.append(f"{r.graph} {r.params}: level {r.value} < {floor}")
    return bad


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def bump_ladder(g: MetricGraph, pp: ProblemParams, mesh: Mesh | None = None,
                offsets=(1.5, 2.0, 3.0, 4.0, 5.0), trunc: float = 25.0) -> list:
    """Nehari-projected levels of soliton bumps escaping down a half-line.

    Returns ``[(offset, level), ...]``.  On graphs where the ground-state
    level is approached only along escaping sequences, the ladder decreases
    monotonically toward the soliton level; its last entry is the c estimate.
    """
    hls = sorted(e.id for e in g.halflines())
    if not hls:
        raise ValueError("bump ladder needs a half-line")
    if mesh is None:
        mesh = discretize(g, h_target=0.01, trunc=trunc)
    eid = hls[0]
    oracle = soliton_oracle(pp)
    out = []
    for a in offsets:
        hw = 0.98 * a
        if a + hw >= mesh.trunc:
            raise ValueError(f"offset {a} does not fit below trunc={mesh.trunc}")
        delta = float(oracle.phi(hw))

        def f(e, x, _a=a, _delta=delta):
            if e.id != eid:
                return np.zeros_like(x)
            return np.maximum(oracle.phi(x - _a) - _delta, 0.0)

        u = project_nehari(interpolate(mesh, f), pp)
        out.append((float(a), action(u, pp)))
    return out


def _is_star(g: MetricGraph) -> bool:
    return (len(g.vertices) == 1 and not g.bounded_edges()
            and len(g.halflines()) >= 3)


def _level_tol(h: float) -> float:
    # discretization bias on levels scales like h^2 (measured ~1e-5 at h=0.01)
    return max(1e-4, 25.0 * h * h)


def _h_stamp(g: MetricGraph) -> str:
    return f"H={check_assumption_h(g).status}"


def cmd_levels(g: MetricGraph, pp: ProblemParams, opts: SolverOptions | None = None,
               min_len: float = 0.5, allow_compact: bool = False,
               workers: int = 1) -> list:
    """Ground-state and least-action level estimates for one graph.

    Runs a descent portfolio plus (on graphs with half-lines) the escaping
    bump ladder for ``c_est``; collects converged solutions from Newton
    polish, a multiplicity scan and star closed forms for ``sigma_upper``;
    emits both plus their gap.
    """
    opts = opts or SolverOptions()
    problems = validate_class_g(g)
    if problems and not allow_compact:
        raise ValueError("not in the admissible class: " + "; ".join(problems)
                         + " (pass allow_compact to waive)")
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    tol = _level_tol(opts.h)
    stamp = _h_stamp(g)
    c_cands = []
    solutions = []

    inits = []
    bounded = sorted(g.bounded_edges(), key=lambda e: (-e.length, e.id))
    if bounded:
        e = bounded[0]
        hw = max(0.5 * e.length, min(6.0 / math.sqrt(pp.lam), 0.9 * mesh.trunc))
        inits.append((f"init=edge{e.id}", edge_bump_init(mesh, pp, e.id, halfwidth=hw)))
    v_star = max(sorted(g.vertices), key=g.degree)
    hw_v = min(8.0 / math.sqrt(pp.lam), 0.9 * mesh.trunc)
    inits.append((f"init=vertex{v_star}",
                  vertex_bump_init(mesh, pp, v_star, halfwidth=hw_v)))
    for label, u0 in inits:
        rep = minimize_nehari(g, pp, u0, opts)
        c_cands.append((rep.trace[-1], label))
        pol = refine_newton(g, pp, rep.u, opts)
        if pol.status == STATUS_CONVERGED:
            solutions.append((pol.level, label + ";polish=newton", pol))

    if g.halflines():
        ladder = bump_ladder(g, pp, mesh=mesh if mesh.trunc >= 12.0 else None)
        c_cands.append((ladder[-1][1], f"init=ladder;offset={ladder[-1][0]:g}"))

    if _is_star(g):
        u = star_solution(mesh, pp, 0.0)
        solutions.append((action(u, pp), "init=star-closed-form", None))

    for rep in multiplicity_scan(g, pp, min_len, opts, mesh=mesh, workers=workers):
        solutions.append((rep.level, f"init=scan-edge{rep.argmax_edge}", rep))

    records = []
    c_all = c_cands + [(lvl, lab) for lvl, lab, _ in solutions]
    c_val, c_lab = min(c_all, key=lambda t: t[0])
    records.append(ExperimentRecord(
        g.name, f"{c_lab};{stamp}", pp.lam, pp.p, "c_est", c_val, tol, STATUS_OK))
    if solutions:
        s_val, s_lab, s_rep = min(solutions, key=lambda t: t[0])
        status = s_rep.status if s_rep is not None else STATUS_OK
        records.append(ExperimentRecord(
            g.name, f"{s_lab};{stamp}", pp.lam, pp.p, "sigma_upper", s_val, tol, status))
        records.append(ExperimentRecord(
            g.name, stamp, pp.lam, pp.p, "gap", s_val - c_val, 2.0 * tol, STATUS_OK))
        for lvl, lab, rep in sorted(solutions, key=lambda t: (t[0], t[1])):
            records.append(ExperimentRecord(
                g.name, f"{lab};{stamp}", pp.lam, pp.p, "level_of_solution",
                lvl, tol, rep.status if rep is not None else STATUS_OK))
    return records


# ---------------------------------------------------------------------------
# case signatures
# ---------------------------------------------------------------------------


def _solve_on_edge(g, pp, eid, opts, mesh):
    """Doubly-constrained solve then Newton polish; returns both reports."""
    pre = minimize_doubly_constrained(g, pp, eid, opts=opts, mesh=mesh)
    post = refine_newton(g, pp, pre.u, opts=opts)
    return pre, post


def _probe_task(payload):
    g, pp, eid, opts = payload
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    pre, post = _solve_on_edge(g, pp, eid, opts, mesh)
    return eid, pre.trace[-1], post


def _probe_edges(g, pp, eids, opts, workers: int, mesh=None):
    """(eid, constrained level, polished report) per edge, in input order."""
    if workers > 1 and len(eids) > 1:
        from concurrent.futures import ProcessPoolExecutor

        payloads = [(g, pp, eid, opts) for eid in eids]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_probe_task, payloads))
    if mesh is None:
        mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    out = []
    for eid in eids:
        pre, post = _solve_on_edge(g, pp, eid, opts, mesh)
        out.append((eid, pre.trace[-1], post))
    return out


def _case_a1(pp, opts, sizes):
    length = sizes[0] if sizes else 2.0
    g = single_loop(length)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    tol = _level_tol(opts.h)
    # the minimizer here flattens to a constant; explicit descent steps are
    # diffusion-limited, so the iteration budget must grow like 1/h^2
    budget = max(opts.max_iters, 2000, math.ceil(1.5 / (opts.h * opts.h)))
    lopts = replace(opts, max_iters=budget)
    pre, post = _solve_on_edge(g, pp, 0, lopts, mesh)
    c_val = min(pre.trace[-1], post.level) if post.status == STATUS_CONVERGED \
        else pre.trace[-1]
    records = [
        ExperimentRecord(g.name, f"case=A1;len={length:g};H=unknown", pp.lam, pp.p,
                         "c_est", c_val, tol, STATUS_OK),
        ExperimentRecord(g.name, f"case=A1;len={length:g};H=unknown", pp.lam, pp.p,
                         "sigma_upper", post.level, tol, post.status),
        ExperimentRecord(g.name, f"case=A1;len={length:g};H=unknown", pp.lam, pp.p,
                         "level_of_solution", post.level, tol, post.status),
    ]
    # attainment: the descent level closes onto a converged solution's level
    attained = (post.status == STATUS_CONVERGED
                and abs(post.level - pre.trace[-1]) <= 5.0 * tol)
    records.append(ExperimentRecord(
        g.name, "case=A1;check=c-attained", pp.lam, pp.p, "gap",
        pre.trace[-1] - post.level, 5.0 * tol,
        STATUS_OK if attained else STATUS_FAILED))
    return records


def _case_a2(pp, opts, sizes):
    sizes = sizes or (4, 6, 8)
    s_lam = soliton_level(pp)
    tol = _level_tol(opts.h)
    records = []
    loop_levels = []
    for k in sizes:
        g = big_circles(k)
        mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
        stamp = _h_stamp(g)
        eid = k - 1  # the longest loop
        pre, post = _solve_on_edge(g, pp, eid, opts, mesh)
        records.append(ExperimentRecord(
            g.name, f"case=A2;K={k};edge={eid};{stamp}", pp.lam, pp.p,
            "level_of_solution", post.level, tol, post.status))
        loop_levels.append(post.level)
        if k == sizes[-1]:
            c_val = min(pre.trace[-1], post.level)
            records.append(ExperimentRecord(
                g.name, f"case=A2;K={k};{stamp}", pp.lam, pp.p,
                "c_est", c_val, tol, STATUS_OK))
            records.append(ExperimentRecord(
                g.name, f"case=A2;K={k};{stamp}", pp.lam, pp.p,
                "sigma_upper", post.level, tol, post.status))
            records.append(ExperimentRecord(
                g.name, f"case=A2;K={k};check=gap-small;{stamp}", pp.lam, pp.p,
                "gap", post.level - c_val, 2.0 * tol,
                STATUS_OK if post.level - c_val < 0.02 else STATUS_FAILED))
    dec = min(a - b for a, b in zip(loop_levels, loop_levels[1:]))
    above = min(loop_levels) - s_lam
    window = max(loop_levels) - s_lam
    records.append(ExperimentRecord(
        "bigcircles", f"case=A2;check=levels-decreasing;sizes={'/'.join(map(str, sizes))}",
        pp.lam, pp.p, "gap", dec, 0.0,
        STATUS_EVIDENCE if dec > 0 else STATUS_FAILED))
    records.append(ExperimentRecord(
        "bigcircles", "case=A2;check=levels-above-soliton", pp.lam, pp.p,
        "gap", above, 0.0, STATUS_EVIDENCE if above > 0 else STATUS_FAILED))
    records.append(ExperimentRecord(
        "bigcircles", "case=A2;check=levels-within-0.1", pp.lam, pp.p,
        "gap", 0.1 - window, 0.0,
        STATUS_EVIDENCE if window < 0.1 else STATUS_FAILED))
    return records


def _case_b1(pp, opts, sizes):
    sizes = sizes or (3, 4)
    tol = _level_tol(opts.h)
    records = []
    for n in sizes:
        g = star_graph(n)
        mesh = discretize(g, h_target=opts.h, trunc=max(opts.trunc, 25.0))
        stamp = _h_stamp(g)
        ladder = bump_ladder(g, pp, mesh=mesh)
        c_val = ladder[-1][1]
        drops = [a - b for (_, a), (_, b) in zip(ladder, ladder[1:])]
        records.append(ExperimentRecord(
            g.name, f"case=B1;N={n};init=ladder;{stamp}", pp.lam, pp.p,
            "c_est", c_val, tol, STATUS_EVIDENCE))
        records.append(ExperimentRecord(
            g.name, f"case=B1;N={n};check=ladder-decreasing", pp.lam, pp.p,
            "gap", min(drops), 0.0,
            STATUS_EVIDENCE if min(drops) > 0 else STATUS_FAILED))
        if n % 2 == 0:
            shifts = (0.0, 0.3, 0.7, 1.5)
            levels = [action(star_solution(mesh, pp, a), pp) for a in shifts]
            sigma = levels[0]
            sigma_label = "init=star-closed-form"
            spread = (max(levels) - min(levels)) / sigma
            records.append(ExperimentRecord(
                g.name, f"case=B1;N={n};check=shift-invariance", pp.lam, pp.p,
                "gap", spread, 1e-4,
                STATUS_OK if spread <= 1e-4 else STATUS_FAILED))
        else:
            pol = refine_newton(g, pp, star_solution(mesh, pp, 0.0), opts)
            sigma = pol.level
            sigma_label = "init=half-soliton;polish=newton"
            records.append(ExperimentRecord(
                g.name, f"case=B1;N={n};{sigma_label};{stamp}",
                pp.lam, pp.p, "level_of_solution", sigma, tol, pol.status))
        records.append(ExperimentRecord(
            g.name, f"case=B1;N={n};{sigma_label};{stamp}", pp.lam, pp.p,
            "sigma_upper", sigma, tol, STATUS_OK))
        gap = sigma - c_val
        records.append(ExperimentRecord(
            g.name, f"case=B1;N={n};check=gap-positive;{stamp}", pp.lam, pp.p,
            "gap", gap, 2.0 * tol, STATUS_OK if gap > 0.05 else STATUS_FAILED))
    return records


def _case_b2(pp, opts, sizes, workers: int = 1):
    sizes = sizes or (6, 10, 14)
    s_lam = soliton_level(pp)
    floor = s_lam + 0.05
    tol = _level_tol(opts.h)
    records = []
    min_s3 = {}
    s1s2_levels = []
    for n in sizes:
        for g in (g_n(n, 2), tilde_g_n(n, 2)):
            stamp = _h_stamp(g)
            part = kind_partition(g)
            probe = sorted(part["S3"])
            s2 = sorted(part["S2"])
            if g.name.startswith("gn"):
                # one bundle edge and one line edge probe the S2 landscape
                probe += [s2[-1], s2[0]]
            best_s3 = math.inf
            for eid, _, post in _probe_edges(g, pp, probe, opts, workers):
                tags = classify_solution(g, post.u, part)
                cls = "+".join(tags)
                records.append(ExperimentRecord(
                    g.name, f"case=B2;N={n};edge={eid};class={cls};{stamp}",
                    pp.lam, pp.p, "level_of_solution", post.level, tol, post.status))
                if post.status == STATUS_CONVERGED:
                    if tags == ["S3"]:
                        best_s3 = min(best_s3, post.level)
                    elif "S1" in tags or "S2" in tags:
                        s1s2_levels.append(post.level)
            min_s3[g.name] = best_s3
        gtag, ttag = f"gn{n}k2", f"tildegn{n}k2"
        diff = min_s3[gtag] - min_s3[ttag]
        ok = math.isfinite(diff) and diff > 0
        records.append(ExperimentRecord(
            gtag, f"case=B2;N={n};check=above-tilde", pp.lam, pp.p,
            "gap", diff if math.isfinite(diff) else 0.0, 0.0,
            STATUS_EVIDENCE if ok else STATUS_FAILED))
    seq = [min_s3[f"gn{n}k2"] for n in sizes]
    dec = min(a - b for a, b in zip(seq, seq[1:]))
    ok = math.isfinite(dec) and dec > 0
    records.append(ExperimentRecord(
        "gn", f"case=B2;check=s3-decreasing;sizes={'/'.join(map(str, sizes))}",
        pp.lam, pp.p, "gap", dec if math.isfinite(dec) else 0.0, 0.0,
        STATUS_EVIDENCE if ok else STATUS_FAILED))
    if s1s2_levels:
        margin = min(s1s2_levels) - floor
        records.append(ExperimentRecord(
            "gn", "case=B2;check=s1s2-floor", pp.lam, pp.p, "gap", margin,
            0.0, STATUS_OK if margin >= 0 else STATUS_FAILED))
    # the short-edge gap on the H-shaped control graph
    g = h_graph()
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    hopts = replace(opts, max_iters=max(opts.max_iters, 2000))
    pre, post = _solve_on_edge(g, pp, 0, hopts, mesh)
    delta2 = min(pre.trace[-1], post.level if post.status == STATUS_CONVERGED
                 else math.inf) - s_lam
    records.append(ExperimentRecord(
        g.name, f"case=B2;edge=0;class=S2;{_h_stamp(g)}", pp.lam, pp.p,
        "level_of_solution", post.level, tol, post.status))
    records.append(ExperimentRecord(
        g.name, "case=B2;check=hgraph-delta2", pp.lam, pp.p, "gap", delta2,
        tol, STATUS_OK if delta2 > 0.05 else STATUS_FAILED))
    return records


def cmd_classify(case: str, pp: ProblemParams | None = None,
                 opts: SolverOptions | None = None, sizes=None,
                 workers: int = 1) -> list:
    """Run one of the four attainment-pattern signatures.

    A1: compact loop, ground state attained.  A2: loop ladder approaching the
    soliton level from above, gap closing.  B1: star, strict gap with sigma
    attained in closed form.  B2: bundle-vs-loop family, every solution
    strictly above the soliton level with the periodic companion below.
    """
    pp = pp or ProblemParams(1.0, 4.0)
    opts = opts or SolverOptions()
    cases = {"A1": _case_a1, "A2": _case_a2, "B1": _case_b1}
    if case == "B2":
        return _case_b2(pp, opts, sizes, workers=workers)
    if case not in cases:
        raise ValueError("case must be one of A1, A2, B1, B2")
    return cases[case](pp, opts, sizes)


# ---------------------------------------------------------------------------
# multiplicity and sweeps
# ---------------------------------------------------------------------------


def cmd_multiplicity(g: MetricGraph, pp: ProblemParams, min_len: float,
                     opts: SolverOptions | None = None, out_dir=None,
                     workers: int = 1) -> tuple:
    """Scan for edge-localized solutions; dump one profile CSV+SVG each.

    Returns ``(records, paths)``; profiles go to ``out_dir`` when given.
    """
    opts = opts or SolverOptions()
    reps = multiplicity_scan(g, pp, min_len, opts, workers=workers)
    tol = _level_tol(opts.h)
    stamp = _h_stamp(g)
    records = []
    paths = []
    for i, rep in enumerate(reps):
        records.append(ExperimentRecord(
            g.name, f"edge={rep.argmax_edge};margin={rep.sup_margin:.3e};{stamp}",
            pp.lam, pp.p, "level_of_solution", rep.level, tol, rep.status))
        if out_dir is not None:
            os.makedirs(out_dir, exist_ok=True)
            stem = os.path.join(out_dir, f"{g.name}_sol{i}_edge{rep.argmax_edge}")
            dump_csv(rep.u, stem + ".csv")
            write_profile_svg(
                stem + ".svg", rep.u,
                f"{g.name} edge {rep.argmax_edge} level {rep.level:.6f}")
            paths += [stem + ".csv", stem + ".svg"]
    if reps:
        records.append(ExperimentRecord(
            g.name, f"count={len(reps)};{stamp}", pp.lam, pp.p, "sigma_upper",
            min(r.level for r in reps), tol, STATUS_OK))
    return records, paths


def _sweep_task(payload):
    k, eid, pp, opts = payload
    g = big_circles(k)
    mesh = discretize(g, h_target=opts.h, trunc=opts.trunc)
    pre, post = _solve_on_edge(g, pp, eid, opts, mesh)
    attained = False
    if post.status == STATUS_CONVERGED:
        eid_star, idx, _, margin = argmax_edge_info(post.u)
        n_edge = len(mesh.edge_dofs[eid])
        interior = eid_star == eid and idx not in (0, n_edge - 1)
        positive = float(np.min(post.u.values[~mesh.pinned])) > 0.0
        # states trapped on a too-short loop converge well above the line
        # level; only a state within 2% of it witnesses the long-edge
        # attainment regime, and that cut is what turns on at the threshold
        low = post.level <= 1.02 * soliton_level(pp)
        attained = interior and margin > 0.0 and positive and low
    if post.status == STATUS_CONVERGED:
        level, status = post.level, post.status
    else:
        level, status = pre.trace[-1], pre.status
    return float(eid + 1), level, attained, status


def _run_sweep(k, pp, opts, workers):
    # loop eid j of big_circles(k) has length j + 1
    payloads = [(k, eid, pp, opts) for eid in range(k)]
    if workers > 1 and len(payloads) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_task, payloads))
    return [_sweep_task(pl) for pl in payloads]


def cmd_sweep(pp: ProblemParams | None = None, opts: SolverOptions | None = None,
              lengths=tuple(range(1, 13)), lams=(0.5, 1.0, 2.0), ps=(3.0, 4.0, 6.0),
              workers: int = 1) -> list:
    """Loop-length attainment sweep over the loops of one ladder graph.

    Solves the doubly-constrained problem pinned to each self-loop of
    ``big_circles(max(lengths))``, whose loops realize every integer length
    in the grid.  Emits a level row per length with an ``attained=`` flag
    in ``params``, a decreasing-past-threshold trend row, the empirical
    attainment threshold per lambda, and a trend row checking that the
    threshold scales roughly like 1/sqrt(lambda) (integer resolution, so
    the tolerance is loose).  The p sweep is exploratory: thresholds are
    recorded without any assertion.
    """
    pp = pp or ProblemParams(1.0, 4.0)
    opts = opts or SolverOptions()
    tol = _level_tol(opts.h)
    records = []

    def threshold_rows(lam, p, k, tag_params):
        name = f"bigcircles{k}"
        rows = _run_sweep(k, ProblemParams(lam, p), opts, workers)
        thr = None
        attained_levels = []
        for length, level, attained, status in rows:
            records.append(ExperimentRecord(
                name, f"{tag_params};len={length:g};attained={'yes' if attained else 'no'}",
                lam, p, "level_of_solution", level, tol, status))
            if attained:
                attained_levels.append(level)
                if thr is None:
                    thr = length
        if thr is not None:
            records.append(ExperimentRecord(
                name, f"{tag_params};check=attainment-threshold;threshold={thr:g}",
                lam, p, "gap", thr, 0.0, STATUS_EVIDENCE))
        if len(attained_levels) >= 2:
            worst = max(b - a for a, b in zip(attained_levels, attained_levels[1:]))
            worst = max(worst, 0.0)
            records.append(ExperimentRecord(
                name, f"{tag_params};check=levels-decreasing-past-threshold",
                lam, p, "gap", worst, 2.0 * tol,
                STATUS_EVIDENCE if worst <= 2.0 * tol else STATUS_FAILED))
        return thr

    thr_by_lam = {}
    k_main = max(lengths)
    for lam in lams:
        thr_by_lam[lam] = threshold_rows(lam, pp.p, k_main, f"sweep=length;lam={lam:g}")
    base = thr_by_lam.get(pp.lam)
    if base:
        devs = []
        for lam, thr in thr_by_lam.items():
            if thr is None or lam == pp.lam:
                continue
            predicted = base / math.sqrt(lam / pp.lam)
            devs.append(abs(thr - predicted) / predicted)
        if devs:
            worst = max(devs)
            records.append(ExperimentRecord(
                f"bigcircles{k_main}", "sweep=length;check=threshold-scaling-1-over-sqrt-lam",
                pp.lam, pp.p, "gap", worst, 0.5,
                STATUS_EVIDENCE if worst <= 0.5 else STATUS_FAILED))
    for p in ps:
        if p == pp.p:
            continue
        threshold_rows(pp.lam, p, min(k_main, 8), f"sweep=p;p={p:g}")
    return records
