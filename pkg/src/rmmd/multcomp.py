"""Dunn-Sidak corrected comparison plans (pairwise / one-vs-all) and region FDRs."""
from __future__ import annotations

import csv
import io
import itertools
import json
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .kernel import as_sample
from .testing import TestConfig, TestOutcome, derive_rng, run_test

MODES = ("pairwise", "one-vs-all")
REGIONS = ("A1", "A2", "A3", "B")
_MIN_SIZE = {"rmmd": 2, "mmd": 2, "kfda": 2, "ks": 1}
_STREAM_REST = 11


def sidak(alpha_family: float, n_comparisons: int) -> float:
    """Per-comparison level giving familywise level ``alpha_family`` over n independent tests."""
    if not 0.0 < alpha_family < 1.0:
        raise ValueError("alpha_family must lie in (0, 1)")
    if n_comparisons < 1:
        raise ValueError("n_comparisons must be >= 1")
    return float(-np.expm1(np.log1p(-alpha_family) / n_comparisons))


@dataclass(frozen=True)
class ComparisonPlan:
    mode: str
    groups: Sequence[Tuple[str, np.ndarray]]
    alpha_family: float = 0.05

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if len(self.groups) < 2:
            raise ValueError("a comparison plan needs at least 2 groups")
        labels = [g[0] for g in self.groups]
        if len(set(labels)) != len(labels):
            raise ValueError("group labels must be unique")
        if not 0.0 < self.alpha_family < 1.0:
            raise ValueError("alpha_family must lie in (0, 1)")

    @property
    def n_comparisons(self) -> int:
        m = len(self.groups)
        return m * (m - 1) // 2 if self.mode == "pairwise" else m - 1


@dataclass(frozen=True)
class MultiCompReport:
    mode: str
    alpha_family: float
    alpha_per_test: float
    comparisons: List[Tuple[str, TestOutcome]]
    rejected: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "alpha_family": self.alpha_family,
            "alpha_per_test": self.alpha_per_test,
            "n_comparisons": len(self.comparisons),
            "rejected": list(self.rejected),
            "comparisons": [{"label": lab, **out.to_dict()} for lab, out in self.comparisons],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def csv_rows(self) -> List[dict]:
        return [
            {"label": lab, "statistic": repr(o.statistic), "p_value": repr(o.p_value),
             "alpha_per_test": repr(self.alpha_per_test), "reject": str(o.reject).lower()}
            for lab, o in self.comparisons
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, ["label", "statistic", "p_value", "alpha_per_test", "reject"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(self.csv_rows())
        return buf.getvalue()


def _jobs(plan: ComparisonPlan):
    """(label, focal, other) triples in lexicographic label order."""
    groups = sorted(((str(lab), as_sample(s)) for lab, s in plan.groups), key=lambda g: g[0])
    if plan.mode == "pairwise":
        for (la, a), (lb, b) in itertools.combinations(groups, 2):
            yield f"{la} vs {lb}", a, b
        return
    # one-vs-all: M-1 comparisons, the last label is covered by the others
    for i, (la, a) in enumerate(groups[:-1]):
        rest = np.concatenate([s for j, (_, s) in enumerate(groups) if j != i])
        yield f"{la} vs rest", a, rest


def run_plan(plan: ComparisonPlan, cfg: TestConfig, fallback: bool = True) -> MultiCompReport:
    """Run every comparison of the plan at the Dunn-Sidak per-test level."""
    minimum = _MIN_SIZE[cfg.method]
    for lab, s in plan.groups:
        if as_sample(s).shape[0] < minimum:
            raise ValueError(f"group {lab!r} has fewer than {minimum} points")
    alpha_bar = sidak(plan.alpha_family, plan.n_comparisons)
    results = []
    for idx, (label, a, b) in enumerate(_jobs(plan)):
        sub_seed = int(derive_rng(cfg.seed, 100, idx).integers(2**63))
        if plan.mode == "one-vs-all" and b.shape[0] > a.shape[0]:
            pick = derive_rng(sub_seed, _STREAM_REST).choice(b.shape[0], a.shape[0], replace=False)
            b = b[np.sort(pick)]
        results.append((label, run_test(a, b, cfg.with_(alpha=alpha_bar, seed=sub_seed), fallback)))
    rejected = [lab for lab, out in results if out.p_value < alpha_bar]
    return MultiCompReport(plan.mode, plan.alpha_family, alpha_bar, results, rejected)


@dataclass(frozen=True)
class FDRMetrics:
    fdr0: float
    fdr1: float
    fdr2: float

    def as_tuple(self):
        return (self.fdr0, self.fdr1, self.fdr2)


def fdr_metrics(rejected, regions: Mapping[str, str]) -> Optional[FDRMetrics]:
    """Fractions of the rejected labels in A2|A3|B, A3|B and B.

    Returns None when nothing was rejected (the ratios are undefined).
    """
    rejected = list(dict.fromkeys(rejected))
    if not rejected:
        return None
    counts: Dict[str, int] = dict.fromkeys(REGIONS, 0)
    for lab in rejected:
        if lab not in regions:
            raise ValueError(f"label {lab!r} has no region")
        r = regions[lab]
        if r not in counts:
            raise ValueError(f"unknown region {r!r} for label {lab!r}")
        counts[r] += 1
    u = len(rejected)
    return FDRMetrics(
        (counts["A2"] + counts["A3"] + counts["B"]) / u,
        (counts["A3"] + counts["B"]) / u,
        counts["B"] / u,
    )
