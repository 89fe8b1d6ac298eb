"""Exact inference: the brute-force oracle and GDL message passing."""

from .oracle import (
    DEFAULT_MAX_STATES,
    DenseDistribution,
    brute_force_log_partition,
    brute_force_marginal,
    entropy,
    expected_log_kernel,
    joint_distribution,
    joint_of_kernels,
    kl_divergence,
    log_partition_of,
    marginalize,
    restricted_log_partition,
)
from .gdl import (
    MessageSet,
    Schedule,
    TreeBeliefs,
    TreePartition,
    beliefs_from_messages,
    bethe_entropy,
    calibrate,
    run_gdl,
    tree_entropy,
    tree_joint_eval,
    tree_log_partition,
    tree_marginal,
)

__all__ = [
    "DEFAULT_MAX_STATES",
    "DenseDistribution",
    "brute_force_log_partition",
    "brute_force_marginal",
    "entropy",
    "expected_log_kernel",
    "joint_distribution",
    "joint_of_kernels",
    "kl_divergence",
    "log_partition_of",
    "marginalize",
    "restricted_log_partition",
    "MessageSet",
    "Schedule",
    "TreeBeliefs",
    "TreePartition",
    "beliefs_from_messages",
    "bethe_entropy",
    "calibrate",
    "run_gdl",
    "tree_entropy",
    "tree_joint_eval",
    "tree_log_partition",
    "tree_marginal",
]
