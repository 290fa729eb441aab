"""Published reference values that are not acceptance criteria.

Each test runs the stated setup as written and asserts the stated tolerance;
messages carry the measured numbers so a mismatch is self-describing.
"""
import math

import pytest

from rmmd.bench import NotAchievedError, estimate_power, kappa_sweep, minimal_sample_size
from rmmd.kernel import parse_kernel
from rmmd.synthdata import parse_generator
from rmmd.testing import TestConfig

pytestmark = pytest.mark.slow

PCOSH = parse_kernel("pcosh")
UNI = parse_generator("uniform1d")
Q6 = parse_generator("puni1d:omega=6")


def test_kfda_periodic1_power():
    est = estimate_power(UNI, Q6, 200, TestConfig("kfda", PCOSH, gamma=0.1, n_permutations=200),
                         300, seed=12)
    assert abs(est.power - 0.24) <= 0.1, f"kfda power {est.power:.3f}, expected 0.24 +- 0.1"


def test_mmd_gaussian_row_power():
    gp, gq = parse_generator("gauss:d=25,c=1.5"), parse_generator("gauss:d=25,c=1.8")
    est = estimate_power(gp, gq, 250, TestConfig("mmd"), 100, seed=13)
    assert abs(est.power - 0.88) <= 0.1, f"mmd power {est.power:.3f}, expected 0.88 +- 0.1"


def test_kappa_grid_beats_zero():
    rows = kappa_sweep(UNI, parse_generator("puni1d:omega=4"), 200, [0.0, 0.5, 1.0],
                       TestConfig("rmmd", PCOSH, null_mode="normal"), 500, seed=14)
    p = {k: e.power for k, e in rows}
    assert p[0.5] > p[0.0] and p[1.0] > p[0.0], f"powers by kappa: {p}"


def test_puni6_rmmd_needs_at_most_100():
    cfg = TestConfig("rmmd", parse_kernel("pprod:0.9"), null_mode="normal")
    try:
        n = minimal_sample_size(parse_generator("uniform2d"), parse_generator("puni2d:omega=6"),
                                cfg, 0.99, 200, seed=15, n_max=800)
    except NotAchievedError as exc:
        pytest.fail(f"target 0.99 not reached: trace {exc.trace}")
    assert n <= 100, f"minimal n = {n}"


def test_periodic1_dominance_ordering():
    reps = 300
    cfgs = {"rmmd": TestConfig("rmmd", PCOSH, 0.8, 0.8, null_mode="normal"),
            "mmd": TestConfig("mmd", PCOSH, n_permutations=200),
            "kfda": TestConfig("kfda", PCOSH, gamma=0.1, n_permutations=200)}
    est = {k: estimate_power(UNI, Q6, 200, c, reps, seed=16) for k, c in cfgs.items()}
    r = est["rmmd"]
    for other in ("mmd", "kfda"):
        o = est[other]
        slack = 2 * math.sqrt(r.std_err**2 + o.std_err**2)
        assert r.power >= o.power - slack, \
            f"rmmd {r.power:.3f} < {other} {o.power:.3f} beyond 2 combined SEs ({slack:.3f})"
