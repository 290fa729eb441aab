"""Mean-embedding statistics: squared norms, MMD^2, RMMD and its pair-kernel variances."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kernel import KernelSpec, as_sample, gram_matrix

VARIANCE_MODES = ("zeta1", "paper")
HYPOTHESES = ("H0", "H1")


class SampleSizeError(ValueError):
    """Sample too small for the requested estimator."""


@dataclass(frozen=True)
class EmbeddingStats:
    """Estimates of ||mu_P||^2, ||mu_Q||^2 and <mu_P, mu_Q>."""

    norm_p_sq: float
    norm_q_sq: float
    cross: float
    n1: int
    n2: int
    biased: bool

    @property
    def mmd2(self) -> float:
        return self.norm_p_sq + self.norm_q_sq - 2.0 * self.cross

    def rmmd(self, kappa_p: float, kappa_q: float) -> float:
        return self.mmd2 - kappa_p * self.norm_p_sq - kappa_q * self.norm_q_sq


def _offdiag_mean(k: np.ndarray) -> float:
    # summing off-diagonal entries directly avoids cancelling a dominant diagonal
    n = k.shape[0]
    return k[~np.eye(n, dtype=bool)].sum() / (n * (n - 1))


def norm_sq(k: np.ndarray, biased: bool) -> float:
    """Squared-norm estimate of a mean embedding from its square Gram matrix."""
    n = k.shape[0]
    if biased:
        if n < 1:
            raise SampleSizeError("need at least 1 point")
        return float(k.mean())
    if n < 2:
        raise SampleSizeError("unbiased estimate needs at least 2 points")
    return float(_offdiag_mean(k))


def embedding_stats_from_gram(kxx, kyy, kxy, biased: bool = False) -> EmbeddingStats:
    return EmbeddingStats(
        norm_sq(kxx, biased), norm_sq(kyy, biased), float(kxy.mean()),
        kxx.shape[0], kyy.shape[0], biased,
    )


def embedding_stats(spec: KernelSpec, x, y, biased: bool = False) -> EmbeddingStats:
    x, y = as_sample(x), as_sample(y)
    spec = spec.resolve(x, y)
    return embedding_stats_from_gram(
        gram_matrix(spec, x), gram_matrix(spec, y), gram_matrix(spec, x, y), biased
    )


def mmd2(spec: KernelSpec, x, y, biased: bool = False) -> float:
    """Squared MMD; the unbiased form drops the diagonal of the within-sample sums."""
    return embedding_stats(spec, x, y, biased).mmd2


def _check_kappa(kappa_p: float, kappa_q: float) -> None:
    if kappa_p < 0 or kappa_q < 0:
        raise ValueError("regularization constants must be non-negative")


def rmmd(spec: KernelSpec, x, y, kappa_p: float = 1.0, kappa_q: float = 1.0,
         biased: bool = False) -> float:
    """Regularized MMD: MMD^2 - kappa_p ||mu_P||^2 - kappa_q ||mu_Q||^2."""
    _check_kappa(kappa_p, kappa_q)
    return embedding_stats(spec, x, y, biased).rmmd(kappa_p, kappa_q)


def renyi_entropy_estimate(spec: KernelSpec, x) -> float:
    """Parzen-window quadratic Renyi entropy, ``-log`` of the biased squared norm."""
    x = as_sample(x)
    if x.shape[0] < 1:
        raise SampleSizeError("need at least 1 point")
    spec = spec.resolve(x) if x.shape[0] > 1 else spec
    v = norm_sq(gram_matrix(spec, x), biased=True)
    if not v > 0:
        raise ValueError(f"squared norm estimate {v} is not positive")
    return float(-np.log(v))


@dataclass(frozen=True)
class PairKernelTable:
    """h and h' evaluated on all off-diagonal pairs of z_i = (x_i, y_i).

    Diagonal entries are stored as zero and never enter any average.
    """

    h_values: np.ndarray
    hprime_values: np.ndarray
    kappa_p: float
    kappa_q: float

    @property
    def m(self) -> int:
        return self.h_values.shape[0]


def pair_kernel_table_from_gram(kxx, kyy, kxy, kappa_p: float, kappa_q: float) -> PairKernelTable:
    _check_kappa(kappa_p, kappa_q)
    m = kxx.shape[0]
    if kyy.shape[0] != m:
        raise SampleSizeError("paired table needs equal sample sizes")
    if m < 2:
        raise SampleSizeError("paired table needs at least 2 pairs")
    hp = kappa_p * kxx + kappa_q * kyy
    h = kxx + kyy - kxy - kxy.T - hp
    np.fill_diagonal(hp, 0.0)
    np.fill_diagonal(h, 0.0)
    # exact symmetry: the sums above are symmetric only up to round-off
    h = 0.5 * (h + h.T)
    hp = 0.5 * (hp + hp.T)
    return PairKernelTable(h, hp, float(kappa_p), float(kappa_q))


def pair_kernel_table(spec: KernelSpec, x, y, kappa_p: float = 1.0,
                      kappa_q: float = 1.0) -> PairKernelTable:
    x, y = as_sample(x), as_sample(y)
    if x.shape[0] != y.shape[0]:
        raise SampleSizeError("paired table needs n1 == n2; equalize the samples first")
    spec = spec.resolve(x, y)
    return pair_kernel_table_from_gram(
        gram_matrix(spec, x), gram_matrix(spec, y), gram_matrix(spec, x, y), kappa_p, kappa_q
    )


@dataclass(frozen=True)
class VarianceEstimate:
    sigma_sq: float
    mode: str
    hypothesis: str


def variance_estimate(table: PairKernelTable, hypothesis: str = "H1",
                      mode: str = "zeta1") -> VarianceEstimate:
    """Asymptotic variance of sqrt(m) * (RMMD_hat - RMMD).

    ``zeta1`` is 4 Var_i(mean_j g(z_i, z_j)), the first-order U-statistic
    component; ``paper`` is 4 (E[g^2] - E[g]^2) over all off-diagonal pairs.
    ``g`` is h under H1 and h' under H0.
    """
    if hypothesis not in HYPOTHESES:
        raise ValueError(f"hypothesis must be one of {HYPOTHESES}")
    if mode not in VARIANCE_MODES:
        raise ValueError(f"mode must be one of {VARIANCE_MODES}")
    g = table.h_values if hypothesis == "H1" else table.hprime_values
    m = table.m
    if mode == "paper":
        npairs = m * (m - 1)
        mean = g.sum() / npairs
        s = 4.0 * ((g * g).sum() / npairs - mean * mean)
    else:
        rows = g.sum(axis=1) / (m - 1)
        s = 4.0 * float(np.var(rows))
    return VarianceEstimate(max(float(s), 0.0), mode, hypothesis)
