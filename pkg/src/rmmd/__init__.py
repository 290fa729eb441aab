"""Regularized MMD two-sample testing with baselines, multiple comparisons and a power harness."""

__version__ = "0.1.0"

from .estimators import (EmbeddingStats, PairKernelTable, VarianceEstimate, embedding_stats,
                         mmd2, pair_kernel_table, renyi_entropy_estimate, rmmd, variance_estimate)
from .kernel import GramMatrix, KernelSpec, eval_kernel, gram, median_heuristic, parse_kernel
from .testing import (DegenerateVarianceError, TestConfig, TestOutcome, run_test, test_kfda,
                      test_ks, test_mmd, test_rmmd)

__all__ = [
    "EmbeddingStats", "PairKernelTable", "VarianceEstimate", "embedding_stats", "mmd2",
    "pair_kernel_table", "renyi_entropy_estimate", "rmmd", "variance_estimate", "GramMatrix",
    "KernelSpec", "eval_kernel", "gram", "median_heuristic", "parse_kernel",
    "DegenerateVarianceError", "TestConfig", "TestOutcome", "run_test", "test_kfda", "test_ks",
    "test_mmd", "test_rmmd",
]
