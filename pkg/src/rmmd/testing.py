"""Two-sample test runners: RMMD (normal or permutation null), MMD, KFDA and KS.

All kernel tests share one permutation engine.  A relabeling of the pooled
sample changes the statistics only through the within- and between-group
Gram sums, so ``B`` relabelings cost one ``(B, N) @ (N, N)`` product.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import stats

from .estimators import (
    SampleSizeError,
    embedding_stats_from_gram,
    norm_sq,
    pair_kernel_table_from_gram,
    variance_estimate,
)
from .kernel import KernelSpec, as_sample, gram_matrix, parse_kernel

METHODS = ("rmmd", "mmd", "kfda", "ks")
NULL_MODES = ("normal", "permutation")
DEGENERATE_VARIANCE = 1e-14

# independent RNG streams derived from the run seed
_STREAM_EQUALIZE = 1
_STREAM_PAIRING = 2
_STREAM_PERMUTE = 3


class DegenerateVarianceError(RuntimeError):
    """Normal-null variance estimate is ~0; rerun with a permutation null."""


class IllConditionedError(RuntimeError):
    """KFDA regularized system cannot be solved reliably."""


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) % 2**64, *keys])


@dataclass(frozen=True)
class TestConfig:
    __test__ = False  # not a pytest class

    method: str = "rmmd"
    kernel: Optional[KernelSpec] = field(default_factory=KernelSpec)
    kappa_p: float = 1.0
    kappa_q: float = 1.0
    gamma: float = 0.1
    alpha: float = 0.05
    null_mode: str = "permutation"
    n_permutations: int = 1000
    seed: int = 0
    variance_mode: str = "zeta1"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.null_mode not in NULL_MODES:
            raise ValueError(f"null_mode must be one of {NULL_MODES}")
        if self.null_mode == "normal" and self.method != "rmmd":
            raise ValueError("the normal null is only available for rmmd")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if self.kappa_p < 0 or self.kappa_q < 0:
            raise ValueError("kappa must be non-negative")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if self.n_permutations < 1:
            raise ValueError("n_permutations must be positive")
        if self.method != "ks" and self.kernel is None:
            raise ValueError(f"method {self.method} needs a kernel")
        if isinstance(self.kernel, str):
            object.__setattr__(self, "kernel", parse_kernel(self.kernel))

    def with_(self, **changes) -> "TestConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kernel"] = None if self.kernel is None else str(self.kernel)
        return d


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    statistic: float
    p_value: float
    reject: bool
    null_center: float
    null_scale: float
    n_used: int
    config: TestConfig
    kernel: Optional[str] = None  # resolved kernel, e.g. with the median bandwidth filled in
    null_mode: Optional[str] = None  # null actually used (differs from config after a fallback)

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "reject": self.reject,
            "null_center": self.null_center,
            "null_scale": self.null_scale,
            "n_used": self.n_used,
            "kernel": self.kernel,
            "null_mode": self.null_mode,
            "config": self.config.to_dict(),
        }


def _outcome(stat, p, cfg, center=0.0, scale=0.0, n_used=0, kernel=None, null_mode=None):
    p = float(min(max(p, 0.0), 1.0))
    return TestOutcome(float(stat), p, bool(p < cfg.alpha), float(center), float(scale),
                       int(n_used), cfg, None if kernel is None else str(kernel),
                       null_mode or cfg.null_mode)


def _canonical(x: np.ndarray, y: np.ndarray):
    """Order the two samples deterministically so results do not depend on argument order."""
    kx = (x.shape[0], x.tobytes())
    ky = (y.shape[0], y.tobytes())
    return ky < kx


def _prepare(x, y, cfg: TestConfig, min_size: int):
    x, y = as_sample(x), as_sample(y)
    if x.shape[0] < min_size or y.shape[0] < min_size:
        raise SampleSizeError(f"{cfg.method} needs at least {min_size} points per sample")
    if x.shape[1] != y.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    kp, kq = cfg.kappa_p, cfg.kappa_q
    if _canonical(x, y):
        x, y, kp, kq = y, x, kq, kp
    return x, y, kp, kq


def equalize(x: np.ndarray, y: np.ndarray, rng: np.random.Generator):
    """Subsample the larger sample without replacement down to the smaller size."""
    m = min(x.shape[0], y.shape[0])
    if x.shape[0] > m:
        x = x[np.sort(rng.choice(x.shape[0], m, replace=False))]
    elif y.shape[0] > m:
        y = y[np.sort(rng.choice(y.shape[0], m, replace=False))]
    return x, y


# ---------------------------------------------------------------------------
# permutation engine


def label_matrix(n1: int, n2: int, n_perm: int, seed: int) -> np.ndarray:
    """Row 0 is the observed labeling; rows 1..B are seeded random relabelings."""
    n = n1 + n2
    rng = derive_rng(seed, _STREAM_PERMUTE)
    perms = rng.permuted(np.tile(np.arange(n), (n_perm, 1)), axis=1)
    a = np.zeros((n_perm + 1, n))
    a[0, :n1] = 1.0
    rows = np.repeat(np.arange(1, n_perm + 1), n1)
    a[rows, perms[:, :n1].ravel()] = 1.0
    return a


def group_sums(k: np.ndarray, a: np.ndarray):
    """Off-diagonal within-group sums and the cross sum for each labeling row of ``a``."""
    k0 = np.array(k, dtype=float)
    np.fill_diagonal(k0, 0.0)  # a dominant diagonal would otherwise cancel catastrophically
    rows = k0.sum(axis=1)
    total = rows.sum()
    aka = np.einsum("ij,ij->i", a @ k0, a)
    ak1 = a @ rows
    sxx = aka
    syy = total - 2.0 * ak1 + aka
    sxy = ak1 - aka
    return sxx, syy, sxy


def rmmd_from_sums(sxx, syy, sxy, n1, n2, kappa_p, kappa_q):
    p = sxx / (n1 * (n1 - 1))
    q = syy / (n2 * (n2 - 1))
    mmd = p + q - 2.0 * (sxy / (n1 * n2))
    return mmd - kappa_p * p - kappa_q * q


def permutation_p_value(observed: float, null: np.ndarray) -> float:
    """(1 + #{null >= observed}) / (1 + B), with a relative tie tolerance."""
    tol = 1e-12 * max(1.0, abs(observed))
    return (1.0 + np.count_nonzero(null >= observed - tol)) / (1.0 + null.size)


def _kernel_for(cfg: TestConfig, x, y) -> KernelSpec:
    return cfg.kernel.resolve(x, y)


def _rmmd_permutation(x, y, kp, kq, cfg: TestConfig):
    spec = _kernel_for(cfg, x, y)
    pooled = np.concatenate([x, y])
    k = gram_matrix(spec, pooled)
    n1, n2 = x.shape[0], y.shape[0]
    a = label_matrix(n1, n2, cfg.n_permutations, cfg.seed)
    stats_ = rmmd_from_sums(*group_sums(k, a), n1, n2, kp, kq)
    p = permutation_p_value(stats_[0], stats_[1:])
    return _outcome(stats_[0], p, cfg, n_used=min(n1, n2), kernel=spec, null_mode="permutation")


# ---------------------------------------------------------------------------
# public runners


def test_rmmd(x, y, cfg: TestConfig) -> TestOutcome:
    """RMMD test.

    Normal mode standardizes the unbiased statistic by the plug-in H0 center
    ``-(kappa_p + kappa_q) ||mu_pooled||^2`` and the H0 scale from h' over a
    seeded random pairing of the pooled sample, and reports the upper-tail
    normal p-value.  Permutation mode uses label shuffles of the pooled data.
    """
    if cfg.method != "rmmd":
        raise ValueError("config method is not rmmd")
    x, y, kp, kq = _prepare(x, y, cfg, 2)
    if cfg.null_mode == "permutation":
        return _rmmd_permutation(x, y, kp, kq, cfg)

    spec = _kernel_for(cfg, x, y)
    x, y = equalize(x, y, derive_rng(cfg.seed, _STREAM_EQUALIZE))
    m = x.shape[0]
    pooled = np.concatenate([x, y])
    k = gram_matrix(spec, pooled)
    kxx, kyy, kxy = k[:m, :m], k[m:, m:], k[:m, m:]
    stat = embedding_stats_from_gram(kxx, kyy, kxy).rmmd(kp, kq)
    center = -(kp + kq) * norm_sq(k, biased=False)

    order = derive_rng(cfg.seed, _STREAM_PAIRING).permutation(2 * m)
    u, v = order[:m], order[m:]
    table = pair_kernel_table_from_gram(k[np.ix_(u, u)], k[np.ix_(v, v)], k[np.ix_(u, v)], kp, kq)
    var = variance_estimate(table, "H0", cfg.variance_mode).sigma_sq
    if var <= DEGENERATE_VARIANCE:
        raise DegenerateVarianceError(
            f"H0 variance estimate {var:.3g} is degenerate; use the permutation null"
        )
    scale = np.sqrt(var / m)
    z = (stat - center) / scale
    return _outcome(stat, stats.norm.sf(z), cfg, center, scale, m, spec, "normal")


def test_mmd(x, y, cfg: TestConfig) -> TestOutcome:
    """Unbiased MMD^2 with a one-sided permutation null."""
    if cfg.method != "mmd":
        raise ValueError("config method is not mmd")
    x, y, _, _ = _prepare(x, y, cfg, 2)
    return _rmmd_permutation(x, y, 0.0, 0.0, cfg)


def kfda_operator(k: np.ndarray, gamma: float) -> np.ndarray:
    """Label-independent ``K (K/N + gamma I)^{-1}`` used by every KFDA relabeling."""
    n = k.shape[0]
    lam, vec = np.linalg.eigh(k)
    lam = np.clip(lam, 0.0, None)
    if gamma * n <= 1e-12 * max(lam[-1], 1e-300):
        raise IllConditionedError(f"gamma={gamma} is too small relative to the Gram spectrum")
    w = n * lam / (lam + gamma * n)
    return (vec * w) @ vec.T


def kfda_from_labels(op: np.ndarray, a: np.ndarray, n1: int, n2: int) -> np.ndarray:
    """KFDA statistic for each labeling row of ``a`` (1 marks the first sample).

    The within-class covariance is the label-free uncentered second moment minus a
    rank-2 term, so the whitened norm follows from a 2x2 Woodbury correction.
    """
    n = n1 + n2
    am = a @ op
    colsum = op.sum(axis=0)
    tot = colsum.sum()
    a_col = a @ colsum
    s_aa = np.einsum("ij,ij->i", am, a)
    mpp = s_aa / n1**2
    mpq = (a_col - s_aa) / (n1 * n2)
    mqq = (tot - 2.0 * a_col + s_aa) / n2**2
    dgd = mpp - 2.0 * mpq + mqq
    c1, c2 = np.sqrt(n1 / n), np.sqrt(n2 / n)
    r1 = c1 * (mpp - mpq)
    r2 = c2 * (mpq - mqq)
    # I - S with S = D [[mpp, mpq], [mpq, mqq]] D
    e11 = 1.0 - c1 * c1 * mpp
    e22 = 1.0 - c2 * c2 * mqq
    e12 = -c1 * c2 * mpq
    det = e11 * e22 - e12 * e12
    corr = (r1 * r1 * e22 - 2.0 * r1 * r2 * e12 + r2 * r2 * e11) / det
    return (n1 * n2 / n) * (dgd + corr)


def kfda_statistic(spec: KernelSpec, x, y, gamma: float = 0.1) -> float:
    """(n1 n2 / N) || (Sigma_W + gamma I)^{-1/2} (mu_P - mu_Q) ||^2."""
    x, y = as_sample(x), as_sample(y)
    spec = spec.resolve(x, y)
    k = gram_matrix(spec, np.concatenate([x, y]))
    a = np.zeros((1, k.shape[0]))
    a[0, : x.shape[0]] = 1.0
    return float(kfda_from_labels(kfda_operator(k, gamma), a, x.shape[0], y.shape[0])[0])


def test_kfda(x, y, cfg: TestConfig) -> TestOutcome:
    """Kernel Fisher discriminant statistic with a one-sided permutation null."""
    if cfg.method != "kfda":
        raise ValueError("config method is not kfda")
    x, y, _, _ = _prepare(x, y, cfg, 2)
    spec = _kernel_for(cfg, x, y)
    k = gram_matrix(spec, np.concatenate([x, y]))
    n1, n2 = x.shape[0], y.shape[0]
    op = kfda_operator(k, cfg.gamma)
    s = kfda_from_labels(op, label_matrix(n1, n2, cfg.n_permutations, cfg.seed), n1, n2)
    if not np.all(np.isfinite(s)):
        raise IllConditionedError("non-finite KFDA statistic")
    return _outcome(s[0], permutation_p_value(s[0], s[1:]), cfg, n_used=min(n1, n2),
                    kernel=spec, null_mode="permutation")


def ks_statistic(x, y) -> float:
    """sup |F1 - F2| over the pooled support."""
    x = np.sort(np.asarray(x, dtype=float).ravel())
    y = np.sort(np.asarray(y, dtype=float).ravel())
    grid = np.concatenate([x, y])
    f1 = np.searchsorted(x, grid, side="right") / x.size
    f2 = np.searchsorted(y, grid, side="right") / y.size
    return float(np.max(np.abs(f1 - f2)))


def test_ks(x, y, cfg: TestConfig) -> TestOutcome:
    """Classical 1-D two-sample Kolmogorov-Smirnov test, asymptotic p-value."""
    if cfg.method != "ks":
        raise ValueError("config method is not ks")
    x, y, _, _ = _prepare(x, y, cfg, 1)
    if x.shape[1] != 1:
        raise ValueError("the KS test is only defined for 1-D samples")
    n1, n2 = x.shape[0], y.shape[0]
    d = ks_statistic(x, y)
    p = stats.kstwobign.sf(np.sqrt(n1 * n2 / (n1 + n2)) * d)
    return _outcome(d, p, cfg, n_used=min(n1, n2), null_mode="asymptotic")


_RUNNERS = {"rmmd": test_rmmd, "mmd": test_mmd, "kfda": test_kfda, "ks": test_ks}


def run_test(x, y, cfg: TestConfig, fallback: bool = True) -> TestOutcome:
    """Dispatch on ``cfg.method``; a degenerate normal null falls back to permutation."""
    try:
        return _RUNNERS[cfg.method](x, y, cfg)
    except DegenerateVarianceError:
        if not fallback:
            raise
        return test_rmmd(x, y, cfg.with_(null_mode="permutation"))
