"""Kernel catalogue, median-distance bandwidth and dense Gram matrices.

Periodic kernels take their inputs in radians; use :func:`to_circle` to map
unit-interval data onto ``[0, 2*pi)`` first.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

TWO_PI = 2.0 * np.pi

KINDS = ("gaussian", "periodic-cosh", "periodic-log", "product-periodic", "linear")
# "linear" is a diagnostic kernel for hand-checkable estimator tests; it is
# neither stationary nor characteristic and is kept out of the catalogue.
CATALOGUE = KINDS[:4]
PERIODIC = ("periodic-cosh", "periodic-log", "product-periodic")

_SHORT = {
    "gaussian": "gaussian",
    "pcosh": "periodic-cosh",
    "plog": "periodic-log",
    "pprod": "product-periodic",
    "linear": "linear",
}


class KernelError(ValueError):
    """Invalid kernel specification or incompatible input."""


@dataclass(frozen=True)
class KernelSpec:
    """Immutable kernel descriptor.

    ``bandwidth`` is used by the gaussian kernel only and may be the string
    ``"median"`` until resolved against data with :meth:`resolve`.
    ``theta`` is used by the periodic-log and product-periodic kernels.
    """

    kind: str = "gaussian"
    bandwidth: Union[float, str, None] = "median"
    theta: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KernelError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "gaussian":
            if isinstance(self.bandwidth, str):
                if self.bandwidth != "median":
                    raise KernelError(f"bad bandwidth {self.bandwidth!r}")
            elif self.bandwidth is None or not (float(self.bandwidth) > 0 and np.isfinite(self.bandwidth)):
                raise KernelError("gaussian bandwidth must be strictly positive")
        else:
            object.__setattr__(self, "bandwidth", None)
        if self.kind in ("periodic-log", "product-periodic"):
            if self.theta is None or not (0.0 < self.theta < 1.0):
                raise KernelError("theta must lie strictly inside (0, 1)")

    @property
    def is_periodic(self) -> bool:
        return self.kind in PERIODIC

    @property
    def needs_resolution(self) -> bool:
        return self.kind == "gaussian" and self.bandwidth == "median"

    @property
    def input_dim(self) -> Optional[int]:
        """Required point dimension, or None if any dimension is accepted."""
        if self.kind in ("periodic-cosh", "periodic-log"):
            return 1
        if self.kind == "product-periodic":
            return 2
        return None

    def resolve(self, *samples) -> "KernelSpec":
        """Freeze a ``median`` bandwidth from the pooled samples."""
        if not self.needs_resolution:
            return self
        pooled = np.concatenate([as_sample(s) for s in samples], axis=0)
        return KernelSpec("gaussian", median_heuristic(pooled))

    def __str__(self) -> str:
        if self.kind == "gaussian":
            bw = self.bandwidth if isinstance(self.bandwidth, str) else repr(float(self.bandwidth))
            return f"gaussian:{bw}"
        if self.kind == "periodic-cosh":
            return "pcosh"
        if self.kind == "periodic-log":
            return f"plog:{self.theta!r}"
        if self.kind == "product-periodic":
            return f"pprod:{self.theta!r}"
        return "linear"


def parse_kernel(text: str) -> KernelSpec:
    """Parse the canonical string form, e.g. ``gaussian:median`` or ``plog:0.9``."""
    name, _, arg = text.strip().partition(":")
    kind = _SHORT.get(name)
    if kind is None:
        raise KernelError(f"unknown kernel {text!r}")
    try:
        if kind == "gaussian":
            if arg in ("", "median"):
                return KernelSpec("gaussian", "median")
            return KernelSpec("gaussian", float(arg))
        if kind in ("periodic-log", "product-periodic"):
            return KernelSpec(kind, None, float(arg) if arg else 0.9)
    except ValueError as exc:
        raise KernelError(f"bad kernel argument in {text!r}: {exc}") from None
    if arg:
        raise KernelError(f"kernel {name!r} takes no argument")
    return KernelSpec(kind, None)


def as_sample(x) -> np.ndarray:
    """Coerce to a float ``(n, d)`` array; 1-D input is treated as n points in R^1."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        a = a[:, None]
    elif a.ndim != 2:
        raise KernelError(f"sample must be 1-D or 2-D, got shape {a.shape}")
    return a


def to_circle(x) -> np.ndarray:
    """Map unit-interval coordinates onto angles in ``[0, 2*pi)``."""
    return TWO_PI * np.asarray(x, dtype=float)


def median_heuristic(pooled) -> float:
    """Median Euclidean distance over all distinct index pairs."""
    a = as_sample(pooled)
    if a.shape[0] < 2:
        raise KernelError("median heuristic needs at least 2 points")
    if not np.all(np.isfinite(a)):
        raise KernelError("non-finite coordinate in sample")
    med = float(np.median(pdist(a)))
    if med <= 0.0:
        raise KernelError("median pairwise distance is zero; bandwidth would be invalid")
    return med


def _check(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> None:
    if spec.needs_resolution:
        raise KernelError("gaussian:median must be resolved against data before evaluation")
    if a.shape[1] != b.shape[1]:
        raise KernelError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    need = spec.input_dim
    if need is not None and a.shape[1] != need:
        raise KernelError(f"{spec.kind} kernel needs dimension {need}, got {a.shape[1]}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise KernelError("non-finite coordinate in sample")


def _evaluate(spec: KernelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    kind = spec.kind
    if kind == "gaussian":
        sq = cdist(a, b, "sqeuclidean")
        return np.exp(-sq / (2.0 * float(spec.bandwidth) ** 2))
    if kind == "linear":
        return a @ b.T
    # |x - y| keeps every periodic kernel bit-symmetric in its arguments
    diff = np.abs(a[:, None, :] - b[None, :, :])
    if kind == "periodic-cosh":
        return np.cosh(np.pi - np.mod(diff[..., 0], TWO_PI))
    th = spec.theta
    denom = 1.0 - 2.0 * th * np.cos(diff) + th * th
    if kind == "periodic-log":
        return -np.log(denom[..., 0])
    return 1.0 / (denom[..., 0] * denom[..., 1])


def eval_kernel(spec: KernelSpec, x, y) -> float:
    """Kernel value for a single pair of points."""
    a = as_sample(np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1))
    b = as_sample(np.atleast_1d(np.asarray(y, dtype=float)).reshape(1, -1))
    _check(spec, a, b)
    return float(_evaluate(spec, a, b)[0, 0])


@dataclass(frozen=True)
class GramMatrix:
    entries: np.ndarray
    square: bool

    @property
    def shape(self):
        return self.entries.shape


def gram(spec: KernelSpec, a, b=None) -> GramMatrix:
    """Dense matrix of ``k(a_i, b_j)``; pass ``b=None`` (or ``b is a``) for the square case."""
    square = b is None or b is a
    a = as_sample(a)
    b = a if square else as_sample(b)
    _check(spec, a, b)
    k = _evaluate(spec, a, b)
    if square:
        # copy the upper triangle down so symmetry is exact regardless of BLAS order
        iu = np.triu_indices_from(k, 1)
        k[(iu[1], iu[0])] = k[iu]
    k.setflags(write=False)
    return GramMatrix(k, square)


def gram_matrix(spec: KernelSpec, a, b=None) -> np.ndarray:
    """Like :func:`gram` but returns the raw ndarray."""
    return gram(spec, a, b).entries
