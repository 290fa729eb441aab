import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rmmd.kernel import KernelSpec
from rmmd.multcomp import ComparisonPlan, fdr_metrics, run_plan, sidak
from rmmd.testing import TestConfig

KS = TestConfig("ks", kernel=None)


def test_sidak_reference_values():
    assert round(sidak(0.05, 45), 4) == 0.0011
    assert sidak(0.05, 45) == pytest.approx(0.0011392016030112861, rel=1e-12)
    assert round(sidak(0.05, 21), 4) == 0.0024
    assert sidak(0.05, 1) == pytest.approx(0.05, rel=1e-15)
    with pytest.raises(ValueError):
        sidak(0.05, 0)
    with pytest.raises(ValueError):
        sidak(1.5, 3)


@pytest.mark.property
@given(alpha=st.floats(1e-4, 0.5), n=st.integers(1, 500))
def test_sidak_inverse_and_monotone(alpha, n):
    a = sidak(alpha, n)
    assert 1 - (1 - a) ** n == pytest.approx(alpha, abs=1e-12)
    assert sidak(alpha, n + 1) < a


def groups(m, n=12, seed=0, shift=0.0):
    rng = np.random.default_rng(seed)
    return [(f"g{i}", rng.normal(size=(n, 1)) + shift * i) for i in range(m)]


@pytest.mark.parametrize("m,count", [(10, 45), (7, 21), (2, 1)])
def test_pairwise_counts(m, count):
    rep = run_plan(ComparisonPlan("pairwise", groups(m)), KS)
    assert len(rep.comparisons) == count
    assert rep.alpha_per_test == pytest.approx(sidak(0.05, count))
    labels = [lab for lab, _ in rep.comparisons]
    assert labels == sorted(labels)


def test_one_vs_all_counts_and_rest_size():
    rep = run_plan(ComparisonPlan("one-vs-all", groups(5)), KS)
    assert [lab for lab, _ in rep.comparisons] == [f"g{i} vs rest" for i in range(4)]
    assert all(o.n_used == 12 for _, o in rep.comparisons)


def test_rejected_set_uses_corrected_level():
    cfg = TestConfig("mmd", kernel=KernelSpec("gaussian", 1.0), n_permutations=499)
    rep = run_plan(ComparisonPlan("pairwise", groups(3, n=25, shift=2.0)), cfg)
    assert rep.rejected == [lab for lab, o in rep.comparisons if o.p_value < rep.alpha_per_test]
    assert len(rep.rejected) == 3
    assert all(o.config.alpha == rep.alpha_per_test for _, o in rep.comparisons)


def test_identical_groups_single_comparison():
    x = np.random.default_rng(3).normal(size=(20, 1))
    for mode in ("pairwise", "one-vs-all"):
        rep = run_plan(ComparisonPlan(mode, [("a", x), ("b", x.copy())]), KS)
        assert len(rep.comparisons) == 1 and rep.rejected == []


def test_plan_validation():
    with pytest.raises(ValueError):
        ComparisonPlan("pairwise", groups(1))
    with pytest.raises(ValueError):
        ComparisonPlan("pairwise", [("a", np.zeros(3)), ("a", np.ones(3))])
    with pytest.raises(ValueError):
        ComparisonPlan("all", groups(2))
    with pytest.raises(ValueError):
        run_plan(ComparisonPlan("pairwise", [("a", np.zeros((1, 1))), ("b", np.ones((5, 1)))]),
                 TestConfig("mmd", kernel=KernelSpec("gaussian", 1.0)))


def test_run_plan_deterministic_and_serializable():
    cfg = TestConfig("mmd", kernel=KernelSpec(), n_permutations=99, seed=5)
    plan = ComparisonPlan("pairwise", groups(4, shift=0.3))
    a, b = run_plan(plan, cfg), run_plan(plan, cfg)
    assert a == b
    d = json.loads(a.to_json())
    assert d["n_comparisons"] == 6
    rows = a.to_csv().strip().splitlines()
    assert rows[0] == "label,statistic,p_value,alpha_per_test,reject" and len(rows) == 7
    for line, (lab, out) in zip(rows[1:], a.comparisons):
        fields = line.split(",")
        assert fields[0] == lab and float(fields[2]) == out.p_value


def test_fdr_examples():
    regions = {f"e{i}": "A1" for i in range(1, 5)}
    assert fdr_metrics(["e1", "e2", "e3", "e4"], regions).as_tuple() == (0.0, 0.0, 0.0)
    labels = [f"e{i}" for i in range(10)]
    regions = dict.fromkeys(labels, "A1")
    regions.update(e0="A2", e1="A2", e2="A3", e3="B")
    assert fdr_metrics(labels, regions).as_tuple() == pytest.approx((0.4, 0.2, 0.1))
    assert fdr_metrics(["x", "y"], {"x": "B", "y": "B"}).as_tuple() == (1.0, 1.0, 1.0)
    assert fdr_metrics([], {}) is None
    with pytest.raises(ValueError):
        fdr_metrics(["zz"], {})


@pytest.mark.property
@given(st.dictionaries(st.text(min_size=1, max_size=4), st.sampled_from(["A1", "A2", "A3", "B"]),
                       min_size=1))
def test_fdr_monotone(regions):
    f = fdr_metrics(list(regions), regions)
    assert 1.0 >= f.fdr0 >= f.fdr1 >= f.fdr2 >= 0.0
