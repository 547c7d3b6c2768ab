"""Radial measure layer: density and CDF against independent quadrature,
both integral formulas, the exact sampler, and the resolution of unity."""

import math

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from bgcs import measure

HALF_PI_ROOT2 = 2.2214414690791831  # (1/4) 2 Gamma(3/4) Gamma(1/4) = pi/sqrt(2) * ...


def _scipy_sigma(n, k, big_r):
    nu = k - n
    return (2.0 / (math.pi**n * math.gamma(k))) * big_r ** (0.5 * nu) \
        * scipy.special.kv(nu, 2.0 * math.sqrt(big_r))


# --- density and total-radius density --------------------------------------


def test_density_origin_limit():
    model = measure.MeasureModel(1, 3.0)
    # Gamma(K-N) / (pi^N Gamma(K)) = Gamma(2)/(pi Gamma(3)) = 1/(2 pi)
    assert measure.density(model, [0.0]) == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)
    near = measure.density(model, [1e-12])
    assert near == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-4)


def test_density_origin_singular_for_small_k():
    with pytest.raises(ValueError):
        measure.density(measure.MeasureModel(1, 1.0), [0.0])
    with pytest.raises(ValueError):
        measure.density(measure.MeasureModel(2, 0.75), [0.0, 0.0])


@given(
    st.integers(min_value=1, max_value=3),
    st.floats(min_value=0.3, max_value=6.0),
    st.floats(min_value=0.01, max_value=15.0),
)
def test_density_matches_direct_formula(n, k, big_r):
    model = measure.MeasureModel(n, k)
    r = np.full(n, big_r / n)
    assert measure.density(model, r) == pytest.approx(_scipy_sigma(n, k, big_r), rel=1e-11)


def test_density_depends_only_on_total_radius():
    model = measure.MeasureModel(2, 1.5)
    assert measure.density(model, [0.3, 0.9]) == pytest.approx(
        measure.density(model, [1.1, 0.1]), rel=1e-14)


def test_density_domain_errors():
    model = measure.MeasureModel(2, 1.5)
    with pytest.raises(ValueError):
        measure.density(model, [0.5])
    with pytest.raises(ValueError):
        measure.density(model, [-0.1, 0.5])
    with pytest.raises(ValueError):
        measure.MeasureModel(0, 1.0)
    with pytest.raises(ValueError):
        measure.MeasureModel(1, -2.0)


def test_total_radius_density_vs_sigma_one_mode():
    """For N = 1 the R density is pi times the radial density."""
    model = measure.MeasureModel(1, 0.8)
    grid = np.array([0.05, 0.3, 1.0, 4.0])
    lhs = measure.total_radius_density(model, grid)
    rhs = np.array([math.pi * measure.density(model, [g]) for g in grid])
    assert lhs == pytest.approx(rhs, rel=1e-12)


@pytest.mark.parametrize("n,k", [(1, 1.0), (2, 0.75), (2, 3.0), (3, 1.5)])
def test_total_radius_density_normalized(n, k):
    model = measure.MeasureModel(n, k)
    val, err = scipy.integrate.quad(
        lambda x: float(measure.total_radius_density(model, x)[0]), 0.0, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=max(1e-9, 4.0 * err))


@pytest.mark.parametrize("n,k,q", [(1, 1.0, 0.7), (2, 0.75, 1.3), (2, 2.5, 6.0)])
def test_radial_cdf_vs_scipy(n, k, q):
    model = measure.MeasureModel(n, k)
    expected, err = scipy.integrate.quad(
        lambda x: float(measure.total_radius_density(model, x)[0]), 0.0, q,
        limit=200, points=[0.0])
    assert measure.radial_cdf(model, q) == pytest.approx(expected, abs=max(1e-9, 4.0 * err))


def test_radial_cdf_monotone_to_one():
    model = measure.MeasureModel(1, 0.5)
    qs = [0.1, 0.5, 2.0, 10.0, 60.0]
    vals = [measure.radial_cdf(model, q) for q in qs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        measure.radial_cdf(model, -1.0)


# --- the two integral formulas ---------------------------------------------


def test_formula_a_listed_instances():
    res = measure.verify_formula_a(1, 1.0, [0.0])
    assert res.rhs == pytest.approx(1.0, rel=1e-14)
    assert res.rel_err <= 1e-8

    res = measure.verify_formula_a(2, 3.0, [0.0, 0.0])
    assert res.rhs == pytest.approx(2.0, rel=1e-14)
    assert res.rel_err <= 1e-8

    res = measure.verify_formula_a(1, 0.5, [0.5])
    assert res.rhs == pytest.approx(0.5 * math.sqrt(math.pi), rel=1e-14)
    assert res.rel_err <= 1e-8


def test_formula_a_domain_errors():
    with pytest.raises(ValueError):
        measure.verify_formula_a(1, 1.0, [-1.5])
    with pytest.raises(ValueError):
        measure.verify_formula_a(1, -1.0, [0.5])
    with pytest.raises(ValueError):
        measure.verify_formula_a(2, 1.0, [0.5])


def test_formula_b_listed_instances():
    res = measure.verify_formula_b(2.0, 0.0, 2.0)
    assert res.rhs == pytest.approx(0.25, rel=1e-14)
    assert res.rel_err <= 1e-8

    res = measure.verify_formula_b(1.0, 0.5, 1.0)
    assert res.rhs == pytest.approx(HALF_PI_ROOT2, rel=1e-12)
    assert res.rel_err <= 1e-8

    with pytest.raises(ValueError):
        measure.verify_formula_b(0.5, 1.0, 1.0)
    with pytest.raises(ValueError):
        measure.verify_formula_b(2.0, 0.0, -1.0)


@pytest.mark.parametrize("k,s", [(1.0, 0.0), (0.5, 0.5), (2.5, 1.25), (0.75, -0.25)])
def test_formula_a_equals_formula_b_one_mode(k, s):
    """N = 1 instances of A map onto B under u = 2 sqrt(r):
    A(K, s) = 2^(1 - 2s - K) * B(mu = 2s + K + 1, nu = K - 1, a = 1)."""
    a_res = measure.verify_formula_a(1, k, [s])
    b_res = measure.verify_formula_b(2.0 * s + k + 1.0, k - 1.0, 1.0)
    scale = 2.0 ** (1.0 - 2.0 * s - k)
    assert a_res.lhs == pytest.approx(scale * b_res.lhs, rel=1e-10)
    assert a_res.rhs == pytest.approx(scale * b_res.rhs, rel=1e-12)


def test_moment_check_values():
    model = measure.MeasureModel(2, 1.5)
    res = measure.moment_check(model, (2, 1))
    # unnormalized identity: Gamma(3) Gamma(2) Gamma(4.5); dividing by
    # Gamma(1.5) gives the sampler expectation 26.25 (tests/oracles.py)
    assert res.rhs == pytest.approx(2.0 * math.gamma(4.5), rel=1e-13)
    assert res.rhs / math.gamma(1.5) == pytest.approx(26.25, rel=1e-13)
    assert res.rel_err <= 1e-8

    res0 = measure.moment_check(measure.MeasureModel(1, 0.5), (0,))
    assert res0.rhs == pytest.approx(math.gamma(0.5), rel=1e-13)
    assert res0.rel_err <= 1e-10

    with pytest.raises(ValueError):
        measure.moment_check(model, (1,))
    with pytest.raises(ValueError):
        measure.moment_check(model, (-1, 0))


def test_check_result_serialization():
    res = measure.verify_formula_b(2.0, 0.0, 2.0)
    record = res.as_dict()
    assert record["check"] == "formula_b"
    assert set(record) == {"check", "params", "lhs", "rhs", "rel_err"}
    assert record["rel_err"] == res.rel_err


# --- exact sampler ---------------------------------------------------------


def test_sample_deterministic():
    model = measure.MeasureModel(2, 1.5)
    r1, t1 = measure.sample(model, 1000, seed=3, workers=2)
    r2, t2 = measure.sample(model, 1000, seed=3, workers=2)
    assert np.array_equal(r1, r2) and np.array_equal(t1, t2)
    r3, _ = measure.sample(model, 1000, seed=4, workers=2)
    assert not np.array_equal(r1, r3)
    assert r1.shape == (1000, 2)


def test_sampler_first_moments():
    model = measure.MeasureModel(1, 2.0)
    r, theta = measure.sample(model, 200_000, seed=11)
    # E[r] = K, E[r^2] = K(K+1) Gamma ratio = 2 K (K+1)
    assert np.mean(r) == pytest.approx(2.0, abs=0.1)
    assert np.mean(r * r) == pytest.approx(12.0, abs=1.5)
    assert np.mean(np.exp(1j * theta)) == pytest.approx(0.0, abs=0.01)


def test_sampler_report_structure():
    model = measure.MeasureModel(2, 0.75)
    report = measure.sampler_report(model, 50_000, seed=5, workers=2)
    quantities = [row["quantity"] for row in report["rows"]]
    assert "r[0]" in quantities and "r[0]r[1]" in quantities
    assert sum(q.startswith("cdf(") for q in quantities) == len(measure.CDF_PROBE_SCALES)
    assert report["max_z"] == max(abs(row["z_score"]) for row in report["rows"])
    for row in report["rows"]:
        assert row["sem"] > 0.0


def test_sampler_report_within_bands():
    model = measure.MeasureModel(1, 1.0)
    report = measure.sampler_report(model, 100_000, seed=0)
    assert report["max_z"] <= 4.5


# --- resolution of unity ---------------------------------------------------


@pytest.mark.parametrize("n,k,cutoff", [(1, 0.5, 6), (2, 0.75, 4)])
def test_resolution_quadrature(n, k, cutoff):
    model = measure.MeasureModel(n, k)
    res = measure.resolution_check(model, cutoff, mode="quadrature")
    assert res.max_dev <= 1e-8
    assert res.as_dict()["check"] == "resolution_of_unity"


def test_resolution_montecarlo():
    model = measure.MeasureModel(1, 2.0)
    res = measure.resolution_check(model, 4, mode="montecarlo", budget=100_000, seed=42)
    assert res.max_z <= 4.0
    assert res.as_dict()["z_score"] == res.max_z


def test_resolution_unknown_mode():
    with pytest.raises(ValueError):
        measure.resolution_check(measure.MeasureModel(1, 1.0), 3, mode="exactly")
