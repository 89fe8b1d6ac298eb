"""Sub-tree lower bounds, sub-tree catalogs and the q_S / q_B selections."""

from .lower_bound import (
    BoundCalculator,
    BoundReport,
    ComplementReport,
    PairDivergences,
    complement_distribution,
    pairwise_divergences,
    subtree_lower_bound,
)
from .catalog import (
    CatalogEntry,
    EnumerationMode,
    SelectionStrategy,
    SubtreeCatalog,
    best_bound_subtree,
    build_catalog,
    catalog_from_subtrees,
    enumerate_subtrees,
    greedy_min_entropy,
    min_entropy_subtree,
    partition_pairs,
)

__all__ = [
    "BoundCalculator",
    "BoundReport",
    "ComplementReport",
    "PairDivergences",
    "complement_distribution",
    "pairwise_divergences",
    "subtree_lower_bound",
    "CatalogEntry",
    "EnumerationMode",
    "SelectionStrategy",
    "SubtreeCatalog",
    "best_bound_subtree",
    "build_catalog",
    "catalog_from_subtrees",
    "enumerate_subtrees",
    "greedy_min_entropy",
    "min_entropy_subtree",
    "partition_pairs",
]
