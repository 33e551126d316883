"""Nearest-neighbor conditional mutual information and a local-permutation
conditional independence test for continuous data."""

__version__ = "0.1.0"

from .citest import NullDistribution, ci_test, null_distribution
from .core import CITestConfig, CITestResult, digamma, rank_transform
from .estimator import CmiEstimate, cmi_knn, entropy_knn, rule_of_thumb_k
from .metrics import aupc, ks_uniform, rejection_rate
from .neighbors import NeighborIndex
from .permutation import PermutationMap, apply_permutation, full_permutation, local_permutation
from .synthdata import ModelSpec, generate

__all__ = [
    "CITestConfig",
    "CITestResult",
    "CmiEstimate",
    "ModelSpec",
    "NeighborIndex",
    "NullDistribution",
    "PermutationMap",
    "apply_permutation",
    "aupc",
    "ci_test",
    "cmi_knn",
    "digamma",
    "entropy_knn",
    "full_permutation",
    "generate",
    "ks_uniform",
    "local_permutation",
    "null_distribution",
    "rank_transform",
    "rejection_rate",
    "rule_of_thumb_k",
]
