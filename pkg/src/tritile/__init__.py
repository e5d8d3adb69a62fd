"""Exact K_{h,h,h}-tiling tools for balanced tripartite graphs."""
from .augment import augment_tiling, check_reachability_chain, cluster_graph, reachability_chain
from .checks import (
    IntersectionShape,
    ShapeKind,
    Violation,
    check_c4_free,
    check_tiling_certificate,
    check_triangle_free,
    column_intersection_shape,
    copy_profile,
    enumerate_khhh,
    very_extreme_violations,
)
from .constructions import (
    Construction,
    QGadgetSpec,
    SidonSet,
    find_sidon_set,
    gamma3_blowup,
    gamma_r,
    lb0_graph,
    lb12_graph,
    lbvexc_graph,
    q_graph,
    random_min_degree_graph,
    sidon_bipartite,
)
from .errors import (
    BudgetExceeded,
    ConstructionError,
    FormatError,
    GadgetInfeasible,
    GraphError,
    NoSidonSet,
    TritileError,
)
from .experiments import ExperimentReport, emit_table, parse_csv, run_experiment
from .graph import (
    BipartitePair,
    ColumnLayout,
    KhhhCopy,
    TripartiteGraph,
    build_graph,
    min_pair_degree,
    pair_density,
    parse,
    serialize,
)
from .kernels import BACKEND
from .regularity import (
    RegularityVerdict,
    eps_regular_exhaustive,
    eps_regular_sampled,
    slicing_property_test,
    super_regular_check,
)
from .solver import (
    RefutationCertificate,
    SolveResult,
    TilingCertificate,
    Verdict,
    check_refutation_certificate,
    exact_factor_decision,
    max_tiling,
    profile_counting_refutation,
)

__version__ = "0.1.0"
