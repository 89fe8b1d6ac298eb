"""Numerical verification of the sub-tree bound inequalities."""

from .checks import (
    InequalityCheck,
    check_bound,
    check_corollary1,
    check_corollary2,
    check_corollary3,
    check_theorem2,
    check_theorem3,
    check_tree_exactness,
)
from .suite import InstanceResult, InstanceSpec, SuiteConfig, SuiteReport, evaluate_instance, run_suite

__all__ = [
    "InequalityCheck",
    "check_bound",
    "check_corollary1",
    "check_corollary2",
    "check_corollary3",
    "check_theorem2",
    "check_theorem3",
    "check_tree_exactness",
    "InstanceResult",
    "InstanceSpec",
    "SuiteConfig",
    "SuiteReport",
    "evaluate_instance",
    "run_suite",
]
