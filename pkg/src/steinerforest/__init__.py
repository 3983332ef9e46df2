"""Steiner forest toolkit: primal-dual clustering, branch-decomposition DP,
exact oracles, and an end-to-end approximation pipeline for planar inputs."""

from .graph import (
    ContractionRecord,
    Demand,
    Graph,
    connected_components,
    contract_edge,
    contract_edges,
    is_acyclic,
    is_feasible,
    shortest_path_forest,
    shortest_path_forest_truncated,
)
from .instances import (
    InstanceFormatError,
    ResultRecord,
    emit_result,
    generate_grid_instance,
    parse_instance,
    parse_result,
    serialize_instance,
)
from .partitions import Partition, bell_number, join_on, set_partitions
from .priority import (
    CategoryState,
    EmptyBicategoryError,
    NaiveCategoryState,
    OrientationOverflowError,
)
from .clustering import (
    InfeasibleDemandError,
    PCOutput,
    decompose_instance,
    gw_steiner_forest,
    phase1,
    phase2,
    build_isolated_forest,
    run_pc_clustering,
)
from .branchdecomp import (
    BDNode,
    BranchDecomposition,
    balance,
    boundaries,
    boundary,
    complete,
    heuristic_decompose,
    to_dot,
    validate,
    width,
)
from .reduction import UnitReduction, adapt_decomposition, unit_length_reduce
from .layers import build_regions, contract_alpha, validate_layers, validate_regions
from .configs import (
    Configuration,
    active_sets,
    canonical_configuration,
    compatible_triple,
    demand_consistent,
    enumerate_simple_configs,
    is_compatible_with,
    simple_subpartitions,
)
from .dpsolver import DPInfeasibleError, DPTable, DPWidthError, dp_solve, reconstruct
from .oracle import (
    OracleLimitError,
    OracleResult,
    brute_force_opt,
    check_augmentation,
    theorem9_augment,
)
from .pipeline import (
    MODES,
    PipelineConfig,
    lift_stage,
    merge_solutions,
    run_ptas,
    solve_dp_only,
    spanner_stage,
    thinning_stage,
)

__version__ = "0.1.0"
