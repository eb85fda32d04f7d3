import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mtescape import errors
from mtescape.hts import (
    HittingTimeSample,
    estimate_L,
    extremal_index,
    hts_csv,
    hts_sweep,
    sample_hitting_times,
)
from mtescape.measure import MeasureEvaluator

GRID = 1e-2 * 10 ** (-0.5 * np.arange(5))


@pytest.fixture(scope="module")
def sample_03(full_map, density_full):
    return sample_hitting_times(full_map, density_full, (0.3, 1e-2, 1e-2), 200_000, 2000, seed=4)


@pytest.fixture(scope="module")
def mu_03(density_full):
    return MeasureEvaluator(density_full)(0.29, 0.31)


def test_full_hole_hits_at_once(full_map, density_full):
    s = sample_hitting_times(full_map, density_full, (0.5, 1.0, 1.0), 5000, 10, seed=1)
    assert np.all(s.times == 1) and s.n_censored == 0


def test_counts_consistent(sample_03):
    s = sample_03
    assert s.times.min() >= 1
    assert s.times.size + s.n_censored == s.n_samples
    assert s.times.max() <= s.horizon


def test_needs_seed(full_map, density_full):
    with pytest.raises(errors.ConfigError):
        sample_hitting_times(full_map, density_full, (0.3, 1e-2, 1e-2), 10, 10, seed=None)


def test_kac_mean(sample_03, mu_03):
    # mean of r_H for a non-periodic centre is close to 1/mu(H)
    assert sample_03.n_censored == 0
    assert sample_03.times.mean() == pytest.approx(1 / mu_03, rel=0.2)


def test_censoring_falls_with_horizon(full_map, density_full):
    fr = []
    for h in (20, 80, 320):
        s = sample_hitting_times(full_map, density_full, (0.3, 1e-2, 1e-2), 20_000, h, seed=9)
        fr.append(s.n_censored / s.n_samples)
    assert fr[0] > fr[1] > fr[2]


@given(n1=st.integers(0, 2000), n2=st.integers(0, 2000))
def test_survival_monotone(sample_03, n1, n2):
    a, b = sorted((n1, n2))
    Sa, Sb = sample_03.survival([a, b])
    assert Sb <= Sa and 0 <= Sb and Sa <= 1


def test_survival_ignores_censored_in_denominator():
    s = HittingTimeSample((0.0, 1.0, 1.0), np.array([1, 2, 2]), 7, 10, 5)
    np.testing.assert_allclose(s.survival([0, 1, 2, 5]), [1.0, 0.9, 0.7, 0.7])


def test_exponential_tail(sample_03, mu_03):
    n = np.arange(math.ceil(1 / mu_03), math.ceil(6 / mu_03))
    S = sample_03.survival(n)
    y = np.log(S)
    fit = np.polyfit(n, y, 1)
    resid = y - np.polyval(fit, n)
    r2 = 1 - resid.var() / y.var()
    assert fit[0] < 0 and r2 > 0.99


def test_L_nonnegative_and_defined(sample_03, mu_03):
    for a in (0.8, 1.0, 1.5):
        est = estimate_L(sample_03, mu_03, a, 1.0)
        assert est.L_value >= 0 and est.stderr > 0
        assert est.n_eps == math.floor(mu_03 ** -a)


def test_L_horizon_guard(sample_03, mu_03):
    with pytest.raises(errors.InsufficientHorizon):
        estimate_L(sample_03, mu_03, 3.0, 1.0)


def test_L_rejects_bad_alpha(sample_03, mu_03):
    with pytest.raises(errors.ConfigError):
        estimate_L(sample_03, mu_03, 0.0, 1.0)


def test_extremal_index_empty_hole(sample_03):
    assert extremal_index(sample_03, 0.0) == 0.0


def test_extremal_index_equals_L11(sample_03, mu_03):
    ei = extremal_index(sample_03, mu_03)
    est = estimate_L(sample_03, mu_03, 1.0, 1.0)
    assert ei == pytest.approx(est.L_value, abs=est.stderr)
    # same survivor count: identical up to the floor in the time index
    n = math.floor(1 / mu_03)
    assert est.n_eps == n
    assert est.L_value == pytest.approx(-math.log(sample_03.survival(n)[0]), rel=1e-12)


def test_extremal_index_at_fixed_point(full_map, density_full):
    eps = 1e-4
    mu = MeasureEvaluator(density_full)(-eps, eps)
    s = sample_hitting_times(full_map, density_full, (0.0, eps, eps), 10**6,
                             math.floor(1 / mu) + 1, seed=21)
    assert extremal_index(s, mu) == pytest.approx(0.5, rel=0.15)


def test_sweep_trend_and_csv(full_map, density_full):
    rep = hts_sweep(full_map, 0.3, GRID[:4], alphas=(1.0,), n_samples=200_000, seed=2,
                    density=density_full)
    L = np.array([r.L_value for r in rep.rows])
    se = np.array([r.stderr for r in rep.rows])
    # moves towards the predicted value 1, within noise
    gap = np.abs(L - 1)
    assert gap[-1] <= gap[0] + 3 * se[-1]
    text = hts_csv(rep)
    head, *rows = text.splitlines()
    assert head.split(",")[:3] == ["z", "eps_L", "eps_R"]
    assert len(rows) == 4
    assert rep.case == "nonperiodic" and rep.predicted == 1.0
