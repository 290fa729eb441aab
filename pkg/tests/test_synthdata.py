import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import quad

from rmmd.synthdata import GeneratorSpec, acceptance_rate, parse_generator, sample


def quad_cdf(w):
    """Normalized CDF of 1 + sin(w x) on [0, 1] by numerical quadrature."""
    dens = lambda t: 1.0 + np.sin(w * t)
    z = quad(dens, 0.0, 1.0)[0]
    return lambda x: quad(dens, 0.0, x)[0] / z


def quad_mean(w):
    dens = lambda t: 1.0 + np.sin(w * t)
    return quad(lambda t: t * dens(t), 0, 1)[0] / quad(dens, 0, 1)[0]


def test_omega_zero_is_uniform():
    x = sample(parse_generator("puni1d:omega=0"), 10_000, 1)[:, 0]
    assert stats.kstest(x, "uniform").pvalue > 0.01


def test_perturbed_cdf_matches_quadrature():
    x = np.sort(sample(parse_generator("puni1d:omega=6"), 100_000, 2)[:, 0])
    cdf = quad_cdf(6.0)
    grid = np.linspace(0.0, 1.0, 201)
    emp = np.searchsorted(x, grid, side="right") / x.size
    ref = np.array([cdf(g) for g in grid])
    assert np.max(np.abs(emp - ref)) < 0.01


def test_circular_cdf_matches_quadrature():
    x = np.sort(sample(parse_generator("cuni1d:omega=3"), 50_000, 3)[:, 0])
    cdf = quad_cdf(2 * np.pi * 3)
    grid = np.linspace(0.0, 1.0, 101)
    emp = np.searchsorted(x, grid, side="right") / x.size
    assert np.max(np.abs(emp - np.array([cdf(g) for g in grid]))) < 0.01


def test_gaussian_variance():
    x = sample(parse_generator("gauss:d=25,c=1.5"), 10_000, 4)
    v = x.var(axis=0, ddof=1)
    assert np.all((v >= 1.35) & (v <= 1.65))
    assert np.all(np.abs(x.mean(axis=0)) < 0.06)


def test_acceptance_rates():
    assert acceptance_rate(GeneratorSpec("perturbed1d", 0.0)) == 0.5
    assert acceptance_rate(GeneratorSpec("perturbed1d", 6.0)) == pytest.approx(0.5033191427791361, rel=1e-12)
    assert acceptance_rate(GeneratorSpec("perturbed2d", 6.0)) == pytest.approx(0.5000220334175766, rel=1e-12)
    assert acceptance_rate(GeneratorSpec("circular1d", 4.0)) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(ValueError):
        acceptance_rate(GeneratorSpec("uniform1d"))


def test_acceptance_rate_matches_empirical():
    spec = GeneratorSpec("perturbed1d", 2.0)
    rng = np.random.default_rng(5)
    u = rng.random(200_000)
    acc = np.mean(2.0 * rng.random(u.size) <= 1 + np.sin(2.0 * u))
    assert acc == pytest.approx(acceptance_rate(spec), abs=0.005)


@pytest.mark.parametrize("text", ["uniform1d", "uniform2d", "puni1d:omega=6", "puni2d:omega=3",
                                  "gauss:d=25,c=1.5", "cuni1d:omega=6", "cuni2d:omega=6",
                                  "uniform1d:loc=2"])
def test_parse_round_trip(text):
    assert str(parse_generator(text)) == text


def test_parse_errors():
    for bad in ["nope", "puni1d:freq=3", "puni1d:omega=-1", "gauss:d=0"]:
        with pytest.raises(ValueError):
            parse_generator(bad)


def test_loc_shift():
    x = sample(parse_generator("uniform1d:loc=2"), 500, 0)
    assert x.min() >= 2.0 and x.max() < 3.0


# ---------------------------------------------------------------------------
# invariants

KINDS = ["uniform1d", "uniform2d", "puni1d:omega=6", "puni2d:omega=6", "cuni1d:omega=4",
         "cuni2d:omega=2", "gauss:d=3,c=2"]


@pytest.mark.property
@pytest.mark.parametrize("text", KINDS)
@settings(max_examples=15)
@given(n=st.integers(1, 300), seed=st.integers(0, 2**63))
def test_determinism_and_support(text, n, seed):
    spec = parse_generator(text)
    a, b = sample(spec, n, seed), sample(spec, n, seed)
    assert a.shape == (n, spec.dim) and np.array_equal(a, b)
    if spec.kind != "gaussian":
        assert np.all((a >= 0.0) & (a <= 1.0))


@pytest.mark.property
@pytest.mark.parametrize("omega", [1.0, 3.0, 6.0])
def test_sample_mean_matches_quadrature(omega):
    x = sample(GeneratorSpec("perturbed1d", omega), 100_000, int(omega))[:, 0]
    se = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean() - quad_mean(omega)) < 3 * se
