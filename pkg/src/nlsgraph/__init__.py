"""Stationary NLS on metric graphs: levels, solutions and experiments."""

from .graphs import (
    Edge,
    HReport,
    H_HOLDS_SUFFICIENT,
    H_UNKNOWN,
    MetricGraph,
    check_assumption_h,
    emit_graphspec,
    parse_graphspec,
    total_bounded_length,
    validate_class_g,
)
from .meshing import (
    GridFunction,
    Mesh,
    discretize,
    dump_csv,
    grad_norm_sq,
    interpolate,
    norms,
    restrict_norm,
)
from .functionals import (
    KirchhoffReport,
    ProblemParams,
    SolitonOracle,
    action,
    action_gradient,
    gn_check,
    kirchhoff_residual,
    lagrange_estimate,
    nehari_residual,
    project_nehari,
    reduced_level,
    soliton_level,
    soliton_oracle,
)
from .rearrangement import (
    Profile1D,
    decreasing_rearrangement,
    dirichlet_on_band,
    distribution,
    kfold_compress,
    preimage_count,
    profile_dump_csv,
    profile_grad_sq,
    profile_norm,
    symmetric_rearrangement,
)
from .solvers import (
    STATUS_CONVERGED,
    STATUS_ESCAPED,
    STATUS_MAX_ITERS,
    SolveReport,
    SolverOptions,
    classify_solution,
    edge_bump_init,
    kind_partition,
    minimize_doubly_constrained,
    minimize_nehari,
    multiplicity_scan,
    refine_newton,
    soliton_bump_init,
    vertex_bump_init,
)
from .zoo import (
    big_circles,
    g_n,
    h_graph,
    half_line_graph,
    line_graph,
    loops_on_line,
    single_loop,
    star_graph,
    star_solution,
    tilde_g_n,
)
from .experiments import (
    ExperimentRecord,
    bump_ladder,
    cmd_classify,
    cmd_levels,
    cmd_multiplicity,
    cmd_sweep,
    level_floor_violations,
    ordering_violations,
    records_to_csv,
    records_to_json,
    write_records,
)
from .svgplot import render_profile, write_profile_svg

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
