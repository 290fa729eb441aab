"""Monte-Carlo harness: power / type-I error, kappa sweeps and sample-size efficiency.

Every trial derives its randomness from ``(seed, trial)`` only, so estimates
are identical whatever the worker count.  Repeated calls with the same seed
at different ``n`` or ``kappa`` reuse the same random streams (paired design).
"""
from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .kernel import to_circle
from .synthdata import GeneratorSpec, sample
from .testing import TestConfig, derive_rng, run_test


class TrialError(RuntimeError):
    def __init__(self, trial: int, cause: Exception):
        super().__init__(f"trial {trial} failed: {cause}")
        self.trial = trial
        self.cause = cause


class NotAchievedError(RuntimeError):
    """Target power not reached within ``n_max``; ``trace`` holds the probes."""

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = list(trace)


@dataclass(frozen=True)
class PowerEstimate:
    power: float
    reps: int
    std_err: float
    n_per_sample: int
    config: TestConfig
    seed: int
    gen_p: str = ""
    gen_q: str = ""
    fallbacks: int = 0  # trials whose normal null degenerated and used permutation

    def to_dict(self) -> dict:
        return {
            "power": self.power, "std_err": self.std_err, "reps": self.reps,
            "n": self.n_per_sample, "seed": self.seed, "gen_p": self.gen_p,
            "gen_q": self.gen_q, "fallbacks": self.fallbacks, **_flat_config(self.config),
        }


def _flat_config(cfg: TestConfig) -> dict:
    return {f"cfg_{k}": v for k, v in cfg.to_dict().items()}


def _draw(gen: GeneratorSpec, n: int, rng, periodic: bool) -> np.ndarray:
    pts = sample(gen, n, rng)
    return to_circle(pts) if periodic else pts


def run_trial(gen_p: GeneratorSpec, gen_q: GeneratorSpec, n: int, cfg: TestConfig,
              seed: int, trial: int):
    """One seeded trial; returns (reject, used_fallback)."""
    periodic = cfg.kernel is not None and cfg.kernel.is_periodic
    x = _draw(gen_p, n, derive_rng(seed, trial, 0), periodic)
    y = _draw(gen_q, n, derive_rng(seed, trial, 1), periodic)
    tseed = int(derive_rng(seed, trial, 2).integers(2**63))
    try:
        out = run_test(x, y, cfg.with_(seed=tseed))
    except Exception as exc:  # noqa: BLE001 - re-raised with the trial index
        raise TrialError(trial, exc) from exc
    return out.reject, out.null_mode != cfg.null_mode and cfg.method == "rmmd"


def estimate_power(gen_p: GeneratorSpec, gen_q: GeneratorSpec, n: int, cfg: TestConfig,
                   reps: int, seed: int, threads: int = 1) -> PowerEstimate:
    """Rejection frequency over ``reps`` independent trials (type-I rate when P == Q)."""
    if reps < 1:
        raise ValueError("reps must be >= 1")

    def one(t):
        return run_trial(gen_p, gen_q, n, cfg, seed, t)

    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(t) for t in range(reps)]
    rejections = sum(r for r, _ in results)
    power = rejections / reps
    return PowerEstimate(power, reps, math.sqrt(power * (1.0 - power) / reps), n, cfg, seed,
                         str(gen_p), str(gen_q), sum(f for _, f in results))


def repeated_power(gen_p, gen_q, n, cfg, reps, seed, runs: int = 10, threads: int = 1):
    """Mean and SD of the power over ``runs`` independent harness repetitions."""
    ests = [estimate_power(gen_p, gen_q, n, cfg, reps, int(derive_rng(seed, 7, r).integers(2**63)),
                           threads) for r in range(runs)]
    p = np.array([e.power for e in ests])
    return float(p.mean()), float(p.std(ddof=1)) if runs > 1 else 0.0, ests


def kappa_sweep(gen_p, gen_q, n: int, kappas: Sequence[float], cfg: TestConfig, reps: int,
                seed: int, threads: int = 1) -> List[Tuple[float, PowerEstimate]]:
    """Power at each kappa (kappa_p = kappa_q) on shared data streams."""
    if any(k < 0 for k in kappas):
        raise ValueError("kappa must be non-negative")
    return [(float(k), estimate_power(gen_p, gen_q, n, cfg.with_(kappa_p=k, kappa_q=k),
                                      reps, seed, threads)) for k in kappas]


def search_sample_size(gen_p, gen_q, cfg: TestConfig, target_power: float, reps: int, seed: int,
                       n_max: int, n_start: int = 25, resolution: int = 5, threads: int = 1):
    """Doubling search then bisection for the smallest n whose power meets the target.

    Returns ``(n, trace)`` with ``trace`` the list of ``(n, power)`` probes.
    """
    if not 0.0 < target_power < 1.0:
        raise ValueError("target_power must lie in (0, 1)")
    trace: List[Tuple[int, float]] = []
    cache = {}

    def power(n):
        if n not in cache:
            cache[n] = estimate_power(gen_p, gen_q, n, cfg, reps, seed, threads).power
            trace.append((n, cache[n]))
        return cache[n]

    lo, hi, n = None, None, n_start
    while True:
        if power(n) >= target_power:
            hi = n
            break
        lo = n
        if n >= n_max:
            raise NotAchievedError(
                f"power {cache[n]:.3f} < {target_power} at n_max={n_max}", trace)
        n = min(2 * n, n_max)
    if lo is None:
        return hi, trace
    while hi - lo > resolution:
        mid = (lo + hi) // 2
        if power(mid) >= target_power:
            hi = mid
        else:
            lo = mid
    return hi, trace


def minimal_sample_size(gen_p, gen_q, cfg: TestConfig, target_power: float, reps: int, seed: int,
                        n_max: int, threads: int = 1) -> int:
    return search_sample_size(gen_p, gen_q, cfg, target_power, reps, seed, n_max,
                              threads=threads)[0]


@dataclass(frozen=True)
class AREResult:
    """Relative efficiency ``N_V / N_T`` of test T with respect to test V."""

    n_t: int
    n_v: int
    ratio: float
    target_power: float
    trace_t: List[Tuple[int, float]] = field(default_factory=list)
    trace_v: List[Tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"n_t": self.n_t, "n_v": self.n_v, "ratio": self.ratio,
                "target_power": self.target_power,
                "trace_t": [list(p) for p in self.trace_t],
                "trace_v": [list(p) for p in self.trace_v]}


class AREError(RuntimeError):
    def __init__(self, message, trace_t, trace_v):
        super().__init__(message)
        self.trace_t, self.trace_v = trace_t, trace_v


def are(gen_p, gen_q, cfg_t: TestConfig, cfg_v: TestConfig, target_power: float = 0.95,
        reps: int = 500, seed: int = 0, n_max: int = 3200, threads: int = 1) -> AREResult:
    """Finite-power relative efficiency; ratio < 1 means V needs fewer samples than T."""
    traces = {}
    sizes = {}
    for name, cfg in (("t", cfg_t), ("v", cfg_v)):
        try:
            sizes[name], traces[name] = search_sample_size(
                gen_p, gen_q, cfg, target_power, reps, seed, n_max, threads=threads)
        except NotAchievedError as exc:
            traces[name] = exc.trace
            raise AREError(f"test {name.upper()} ({cfg.method}): {exc}",
                           traces.get("t", []), traces.get("v", [])) from exc
    return AREResult(sizes["t"], sizes["v"], sizes["v"] / sizes["t"], target_power,
                     traces["t"], traces["v"])


# ---------------------------------------------------------------------------
# serialization: long-format rows are the plotting interface


def rows_to_csv(rows: List[dict]) -> str:
    if not rows:
        return ""
    keys = list(rows[0])
    for r in rows[1:]:
        keys += [k for k in r if k not in keys]
    buf = io.StringIO()
    w = csv.DictWriter(buf, keys, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def rows_to_json(rows: List[dict], header: Optional[dict] = None) -> str:
    return json.dumps({"header": header or {}, "rows": rows}, indent=2)
