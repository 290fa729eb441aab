"""Seeded generators for the synthetic benchmark distributions.

Perturbed uniforms have unnormalized density ``1 + sin(w x)`` on [0, 1] or
``1 + sin(w x) sin(w y)`` on [0, 1]^2.  The circular variants apply the same
shapes to the angle ``2 pi x``, i.e. ``1 + sin(2 pi w x)``, so ``w`` counts full
periods over the unit interval and larger ``w`` is harder to detect.  All
densities are bounded by 2 and are drawn by rejection from the uniform proposal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("uniform1d", "perturbed1d", "uniform2d", "perturbed2d", "gaussian",
         "circular1d", "circular2d")
_ALIASES = {"puni1d": "perturbed1d", "puni2d": "perturbed2d", "gauss": "gaussian",
            "cuni1d": "circular1d", "cuni2d": "circular2d"}
_SHORT = {"perturbed1d": "puni1d", "perturbed2d": "puni2d",
          "circular1d": "cuni1d", "circular2d": "cuni2d"}


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    omega: float = 0.0
    d: int = 1
    c: float = 1.0
    loc: float = 0.0  # additive shift applied to every coordinate

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.omega < 0:
            raise ValueError("omega must be >= 0")
        if self.kind == "gaussian" and (self.d < 1 or not self.c > 0):
            raise ValueError("gaussian needs d >= 1 and c > 0")

    @property
    def dim(self) -> int:
        if self.kind in ("uniform1d", "perturbed1d", "circular1d"):
            return 1
        if self.kind in ("uniform2d", "perturbed2d", "circular2d"):
            return 2
        return self.d

    @property
    def is_perturbed(self) -> bool:
        return self.kind in ("perturbed1d", "perturbed2d", "circular1d", "circular2d")

    @property
    def frequency(self) -> float:
        """Angular frequency applied to unit-interval coordinates."""
        return 2.0 * np.pi * self.omega if self.kind.startswith("circular") else self.omega

    def __str__(self) -> str:
        args = []
        if self.is_perturbed:
            name, args = _SHORT[self.kind], [f"omega={self.omega:g}"]
        elif self.kind == "gaussian":
            name, args = "gauss", [f"d={self.d}", f"c={self.c:g}"]
        else:
            name = self.kind
        if self.loc:
            args.append(f"loc={self.loc:g}")
        return name + (":" + ",".join(args) if args else "")


def parse_generator(text: str) -> GeneratorSpec:
    """Parse ``uniform1d``, ``puni1d:omega=6``, ``cuni2d:omega=3``, ``gauss:d=25,c=1.5``."""
    name, _, rest = text.strip().partition(":")
    kind = _ALIASES.get(name, name)
    kw = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        key = key.strip()
        if not eq or key not in ("omega", "d", "c", "loc"):
            raise ValueError(f"bad generator parameter {item!r} in {text!r}")
        kw[key] = int(val) if key == "d" else float(val)
    return GeneratorSpec(kind, **kw)


def _rejection(rng: np.random.Generator, n: int, dim: int, density) -> np.ndarray:
    out = np.empty((0, dim))
    while out.shape[0] < n:
        need = n - out.shape[0]
        batch = max(64, int(2.2 * need) + 16)
        cand = rng.random((batch, dim))
        keep = 2.0 * rng.random(batch) <= density(cand)
        out = np.concatenate([out, cand[keep]])
    return out[:n]


def sample(spec: GeneratorSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. points as an ``(n, dim)`` array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    w = spec.frequency
    if spec.kind == "gaussian":
        pts = np.sqrt(spec.c) * rng.standard_normal((n, spec.d))
    elif spec.kind in ("uniform1d", "uniform2d") or w == 0.0:
        pts = rng.random((n, spec.dim))
    elif spec.dim == 1:
        pts = _rejection(rng, n, 1, lambda u: 1.0 + np.sin(w * u[:, 0]))
    else:
        pts = _rejection(rng, n, 2, lambda u: 1.0 + np.sin(w * u[:, 0]) * np.sin(w * u[:, 1]))
    return pts + spec.loc if spec.loc else pts


def normalizer(spec: GeneratorSpec) -> float:
    """Integral of the unnormalized perturbed density over its unit domain."""
    if not spec.is_perturbed:
        raise ValueError("normalizer is defined for perturbed generators only")
    w = spec.frequency
    s = 0.0 if w == 0.0 else (1.0 - np.cos(w)) / w
    return 1.0 + (s if spec.dim == 1 else s * s)


def acceptance_rate(spec: GeneratorSpec) -> float:
    """Expected acceptance probability of the rejection sampler (envelope 2)."""
    return normalizer(spec) / 2.0
