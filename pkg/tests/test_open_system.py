import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mtescape import errors
from mtescape.maps import UnimodalMap
from mtescape.measure import MeasureEvaluator
from mtescape.montecarlo import simulate_hits, survivor_curve
from mtescape.open_system import (
    FULL,
    auto_horizon,
    escape_rate_mc,
    escape_rate_spectral,
    extrapolate,
    induced_escape_check,
    local_escape_sweep,
    refine_bins,
    split_eps,
    sweep_csv,
)
from mtescape.symbolic import build_inducing_domain, first_return_map

from conftest import A_SECOND

GRID = 1e-2 * 10 ** (-0.5 * np.arange(5))
GOLD_LO = (5 - math.sqrt(5)) / 8


@given(eps=st.floats(1e-8, 1.0), r=st.floats(0.1, 10.0))
def test_split_eps(eps, r):
    eL, eR = split_eps(eps, r)
    assert eL / eR == pytest.approx(r, rel=1e-12)
    assert math.sqrt(eL * eR) == pytest.approx(eps, rel=1e-12)


# ----------------------------------------------------------------- spectral
def test_empty_hole_rate_zero(full_map):
    rate, qsd = escape_rate_spectral(full_map, 0.3, 0.0, 0.0, 1024)
    assert rate == 0.0 and qsd.eigenvalue == 1.0


def test_full_hole_rate_infinite(full_map):
    rate, qsd = escape_rate_spectral(full_map, 0.5, 1.0, 1.0, 1024)
    assert rate == math.inf and qsd.eigenvalue == 0.0


def test_hole_too_small(full_map):
    with pytest.raises(errors.HoleTooSmall):
        escape_rate_spectral(full_map, 0.3, 1e-6, 1e-6, 1024)


def test_spectral_rate_matches_mc_at_fixed_point(full_map, density_full):
    eps = 1e-2
    rate, qsd = escape_rate_spectral(full_map, 0.0, eps, eps, 1 << 15)
    est = escape_rate_mc(full_map, 0.0, eps, eps, 10**6, auto_horizon(rate, 10**6), seed=5,
                         density=density_full)
    assert abs(est.rate - rate) <= 3 * est.stderr + 0.05 * rate
    assert qsd.residual < 1e-10
    assert np.all(qsd.masses >= 0)
    assert qsd.masses.sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.xfail(strict=True, reason="the finite-eps ratio at eps=1e-2 is 0.579, both "
                   "estimators agree; 15% around the eps->0 limit is too tight here")
def test_spectral_rate_within_15pc_of_limit(full_map, density_full):
    eps = 1e-2
    mu = MeasureEvaluator(density_full)(-eps, eps)
    rate, _ = escape_rate_spectral(full_map, 0.0, eps, eps, 1 << 15)
    assert rate / mu == pytest.approx(0.5, rel=0.15)


@pytest.mark.parametrize("z", [0.0, 0.3])
def test_quasi_stationary_density_positive(full_map, z):
    _, qsd = escape_rate_spectral(full_map, z, 1e-2, 1e-2, 4096)
    assert qsd.masses.min() > 0


@given(z=st.floats(0.0, 1.0), e1=st.floats(1e-3, 5e-2), e2=st.floats(1e-3, 5e-2),
       r=st.floats(0.5, 2.0))
def test_hole_monotonicity(z, e1, e2, r):
    f = UnimodalMap(4.0)
    lo, hi = sorted((e1, e2))
    a, _ = escape_rate_spectral(f, z, lo * r, lo, 4096, min_hole_bins=0)
    b, _ = escape_rate_spectral(f, z, hi * r, hi, 4096, min_hole_bins=0)
    assert a >= 0 and a <= b + 1e-12


def test_eigenvalue_increments_shrink(full_map):
    lams = []
    for eps in GRID:
        nb = refine_bins(full_map, 0.3, eps, eps, 1 << 14)
        _, q = escape_rate_spectral(full_map, 0.3, eps, eps, nb)
        lams.append(q.eigenvalue)
    inc = np.abs(np.diff(lams))
    assert np.all(np.diff(inc) < 0)


@pytest.mark.parametrize("z", [0.0, 0.3])
@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_grid_stability(full_map, z, eps):
    nb = refine_bins(full_map, z, eps, eps, 1 << 12)
    a, _ = escape_rate_spectral(full_map, z, eps, eps, nb)
    b, _ = escape_rate_spectral(full_map, z, eps, eps, 2 * nb)
    assert abs(a - b) < 0.05 * b


def test_refine_bins_resolves_each_side(full_map):
    nb = refine_bins(full_map, 0.3, 3e-5, 1e-5, 1 << 10, min_side_bins=32)
    assert 1e-5 * nb >= 32 and 1e-5 * nb / 2 < 32


# ----------------------------------------------------------------- Monte Carlo
def test_mc_empty_hole(full_map, density_full):
    est = escape_rate_mc(full_map, 0.3, 0.0, 0.0, 1000, 50, seed=1, density=density_full)
    assert (est.rate, est.stderr) == (0.0, 0.0)


def test_mc_needs_seed(full_map, density_full):
    with pytest.raises(errors.ConfigError):
        escape_rate_mc(full_map, 0.3, 1e-2, 1e-2, 1000, 50, seed=None, density=density_full)


def test_mc_off_orbit_fixed_point(full_map, density_full):
    eps = 1e-3
    mu = MeasureEvaluator(density_full)(0.75 - eps, 0.75 + eps)
    est = escape_rate_mc(full_map, 0.75, eps, eps, 400_000, auto_horizon(0.5 * mu, 400_000),
                         seed=11, density=density_full)
    assert est.rate / mu == pytest.approx(0.5, rel=0.15)


@settings(max_examples=5)
@given(z=st.floats(0.0, 1.0), log_eps=st.floats(-2.5, -1.5), seed=st.integers(0, 2**31))
def test_mc_agrees_with_spectral(full_map, density_full, z, log_eps, seed):
    eps = 10 ** log_eps
    nb = refine_bins(full_map, z, eps, eps, 1 << 14)
    rate_sp, _ = escape_rate_spectral(full_map, z, eps, eps, nb)
    est = escape_rate_mc(full_map, z, eps, eps, 200_000, auto_horizon(rate_sp, 200_000),
                         seed=seed, density=density_full)
    assert abs(est.rate - rate_sp) <= 3 * est.stderr + 0.05 * rate_sp


@given(seed=st.integers(0, 2**40), workers=st.integers(2, 4))
@settings(max_examples=8)
def test_mc_independent_of_workers(density_full, seed, workers):
    f = UnimodalMap(4.0)
    n = 40_000  # spans three RNG blocks
    a = simulate_hits(f, density_full, (0.29, 0.31), n, 200, seed, workers=1)
    b = simulate_hits(f, density_full, (0.29, 0.31), n, 200, seed, workers=workers)
    np.testing.assert_array_equal(a, b)


def test_mc_seed_changes_draws(density_full, full_map):
    a = simulate_hits(full_map, density_full, (0.29, 0.31), 1000, 50, 1)
    b = simulate_hits(full_map, density_full, (0.29, 0.31), 1000, 50, 2)
    assert not np.array_equal(a, b)


def test_survivor_curve_counts():
    t = np.array([0, 1, 1, 3, 6, -1])
    np.testing.assert_array_equal(survivor_curve(t, 4), [5, 4, 2, 2, 1])


# ----------------------------------------------------------------- sweeps
def test_extrapolate_linear_data():
    eps = np.array([1e-2, 1e-3, 1e-4, 1e-5])
    assert extrapolate(eps, 0.5 + 3 * eps ** 0.5, "periodic_in_orbit", 2.0) == pytest.approx(0.5)
    assert extrapolate(eps, 1.0 - 2 * eps, "nonperiodic", 2.0) == pytest.approx(1.0)
    ratios = 0.75 + 5 * eps
    ratios[1] = np.nan
    assert extrapolate(eps, ratios, "periodic_off_orbit", 2.0) == pytest.approx(0.75)


def test_sweep_rejects_bad_grid(full_map, density_full):
    with pytest.raises(errors.ConfigError):
        local_escape_sweep(full_map, 0.0, GRID[::-1], density=density_full)
    with pytest.raises(errors.ConfigError):
        local_escape_sweep(full_map, 0.0, GRID[:3], density=density_full)
    with pytest.raises(errors.ConfigError):
        local_escape_sweep(full_map, 0.0, GRID, method="mc", density=density_full)


@pytest.mark.parametrize("z,pred", [(0.0, 0.5), (0.75, 0.5), (GOLD_LO, 0.75), (0.3, 1.0)])
def test_sweep_predictions(full_map, density_full, z, pred):
    rep = local_escape_sweep(full_map, z, GRID, density=density_full)
    assert rep.predicted == pytest.approx(pred, abs=1e-9)
    assert 0 < rep.predicted <= 1
    for _, r in rep.observed:
        assert 0 < r <= 1.2
    assert all(e.rate_spectral >= 0 for e in rep.estimates)
    assert rep.extrapolated == pytest.approx(pred, abs=0.05)


def test_sweep_csv_format(full_map, density_full):
    rep = local_escape_sweep(full_map, 0.3, GRID, density=density_full)
    rep.estimates[0].rate_spectral = math.inf
    lines = sweep_csv(rep).splitlines()
    assert lines[0].startswith("z,eps_L,eps_R,mu_H,rate_spectral")
    assert len(lines) == 6
    assert lines[1].split(",")[4] == FULL
    assert lines[2].split(",")[1] == "0.0031622776601683794"


# ----------------------------------------------------------------- induced escape
@pytest.fixture(scope="module")
def induced_eps(full_partition, full_map):
    out = {}
    for eps in (1e-3, 1e-4):
        dom = build_inducing_domain(full_partition, 0.0, hole=(-eps, eps))
        out[eps] = first_return_map(full_map, dom)
    return out


def test_induced_no_hole(full_map, induced_eps, density_full):
    r = induced_escape_check(full_map, induced_eps[1e-3], 0.0, 0.0, 0.0, density=density_full)
    assert (r.Lambda, r.lhs, r.rhs) == (1.0, 0.0, 0.0)


def test_induced_escape_relation(full_map, induced_eps, density_full):
    r = induced_escape_check(full_map, induced_eps[1e-3], 0.0, 1e-3, 1e-3, density=density_full)
    assert r.relative_gap < 0.1
    assert 0 < r.Lambda < 1


def test_induced_limit_ratio(full_map, induced_eps, density_full):
    r3 = induced_escape_check(full_map, induced_eps[1e-3], 0.0, 1e-3, 1e-3, density=density_full)
    r4 = induced_escape_check(full_map, induced_eps[1e-4], 0.0, 1e-4, 1e-4, density=density_full)
    assert abs(r4.limit_ratio - 1) <= abs(r3.limit_ratio - 1) + 1e-3
    assert r4.limit_ratio == pytest.approx(1.0, abs=0.05)


def test_second_map_rate_finite(second_map, density_second, second_orbit):
    z = second_orbit.point(3)
    rate, _ = escape_rate_spectral(second_map, z, 1e-2, 1e-2, 1 << 14)
    assert 0 < rate < math.inf
    assert second_map.A == A_SECOND
