"""Approximation algorithms for l1-regularised sparse rank-1 approximation of tensors."""

from .algorithms import (
    AlgoReport,
    RegParams,
    Rank1Solution,
    Variant,
    ZeroTensorError,
    algorithm_v1,
    algorithm_v2,
    bound_ratio_v1,
    bound_ratio_v2,
    default_omegas,
    objective_value,
    run_algorithm,
    sparsity_ratio,
    upper_bound_vub,
)
from .amm import AmmConfig, AmmTrace, amm_block_update, amm_solve, random_init
from .estimator import SparseRank1Approximation
from .sparsify import soft_threshold, sphere_l1_maximize, xi_empirical, xi_lower_bound
from .tensor_core import mode_unfolding, multilinear_value, read_dten, reshape_to_matrix, write_dten

__version__ = "0.1.0"

__all__ = [
    "AlgoReport",
    "AmmConfig",
    "AmmTrace",
    "RegParams",
    "Rank1Solution",
    "SparseRank1Approximation",
    "Variant",
    "ZeroTensorError",
    "algorithm_v1",
    "algorithm_v2",
    "amm_block_update",
    "amm_solve",
    "bound_ratio_v1",
    "bound_ratio_v2",
    "default_omegas",
    "mode_unfolding",
    "multilinear_value",
    "objective_value",
    "random_init",
    "read_dten",
    "reshape_to_matrix",
    "run_algorithm",
    "soft_threshold",
    "sparsity_ratio",
    "sphere_l1_maximize",
    "upper_bound_vub",
    "write_dten",
    "xi_empirical",
    "xi_lower_bound",
]
