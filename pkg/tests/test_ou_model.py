import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from otrsim.ou_model import (
    DomainError, OuParams, half_life_from_phi, phi_from_half_life, pnl_moments, step,
)
from otrsim.rng import RngSpec
from otrsim.simulator import simulate_paths

# mpmath, 30 digits
PHI_TAU5 = 0.87055056329612413913627001748
PHI_TAU100 = 0.993092495437035901533210216888
TAU_PHI09 = 6.57881347896058378308955159725


def test_phi_from_half_life_values():
    assert phi_from_half_life(1) == 0.5
    assert phi_from_half_life(5) == pytest.approx(PHI_TAU5, rel=1e-15)
    assert phi_from_half_life(100) == pytest.approx(PHI_TAU100, rel=1e-15)


@pytest.mark.parametrize("tau", [0, -1, math.inf, math.nan])
def test_phi_from_half_life_domain(tau):
    with pytest.raises(DomainError):
        phi_from_half_life(tau)


def test_half_life_from_phi_values():
    assert half_life_from_phi(0.5) == pytest.approx(1.0, rel=1e-15)
    assert half_life_from_phi(2 ** (-1 / 25)) == pytest.approx(25.0, rel=1e-12)
    assert half_life_from_phi(0.9) == pytest.approx(TAU_PHI09, rel=1e-14)


@pytest.mark.parametrize("phi", [0.0, 1.0, -0.5, 1.5])
def test_half_life_from_phi_domain(phi):
    with pytest.raises(DomainError):
        half_life_from_phi(phi)


@given(st.floats(min_value=0.1, max_value=1e4))
def test_half_life_round_trip(tau):
    assert half_life_from_phi(phi_from_half_life(tau)) == pytest.approx(tau, rel=1e-12)


@given(st.floats(min_value=0.1, max_value=1e4), st.floats(min_value=1e-3, max_value=1e3))
def test_phi_increasing_in_half_life(tau, dt):
    assert 0 < phi_from_half_life(tau) < phi_from_half_life(tau + dt) < 1


def test_step_examples():
    assert step(OuParams(5, 0.0, 1), 123.0, 0.0) == 5
    assert step(OuParams(0, 1.0, 1), 3.0, 2.0) == 5
    assert step(OuParams(5, 0.5, 1), 0.0, 0.0) == 2.5


def test_params_validation():
    with pytest.raises(DomainError):
        OuParams(0, 0.5, -1)
    with pytest.raises(DomainError):
        OuParams(0, 0.5, 1, m=0)
    with pytest.raises(DomainError):
        OuParams(math.nan, 0.5, 1)
    assert OuParams.from_half_life(5, 1, 1).phi == 0.5


def _brute_moments(forecast, phi, sigma, p0, m, t):
    # expand P_t = c_t + sum_j w_j eps_j by running the recursion on coefficients
    c, w = p0, []
    for _ in range(t):
        c = (1 - phi) * forecast + phi * c
        w = [phi * x for x in w] + [sigma]
    return m * (c - p0), m * m * sum(x * x for x in w)


def test_pnl_moments_examples():
    mo = pnl_moments(OuParams(5, 0.5, 1), 1)
    assert (mo.mean, mo.variance) == (2.5, 1.0)
    mo = pnl_moments(OuParams(5, 0.5, 1), 2)
    assert mo.mean == pytest.approx(3.75) and mo.variance == pytest.approx(1.25)
    assert _brute_moments(5, 0.5, 1, 0, 1, 2) == pytest.approx((3.75, 1.25))
    mo = pnl_moments(OuParams(5, 0.5, 1), 200)
    assert mo.mean == pytest.approx(5.0) and mo.variance == pytest.approx(4 / 3)


def test_pnl_moments_random_walk_and_domain():
    assert pnl_moments(OuParams(0, 1.0, 2.0), 7).variance == pytest.approx(28.0)
    assert pnl_moments(OuParams(0, -1.0, 1.0), 3).variance == pytest.approx(3.0)
    for bad in (0, -1, 1.5):
        with pytest.raises(DomainError):
            pnl_moments(OuParams(0, 0.5, 1), bad)


@given(st.floats(-20, 20), st.floats(-0.99, 0.99), st.floats(0, 5), st.floats(-20, 20),
       st.floats(0.1, 10), st.integers(1, 60))
def test_pnl_moments_matches_brute_expansion(forecast, phi, sigma, p0, m, t):
    mo = pnl_moments(OuParams(forecast, phi, sigma, p0, m), t)
    mean, var = _brute_moments(forecast, phi, sigma, p0, m, t)
    assert mo.mean == pytest.approx(mean, rel=1e-9, abs=1e-9)
    assert mo.variance == pytest.approx(var, rel=1e-9, abs=1e-12)


def test_pnl_moments_reduce_to_geometric_sum_form_at_zero_entry():
    forecast, phi, sigma, t = 3.0, 0.8, 1.5, 9
    mo = pnl_moments(OuParams(forecast, phi, sigma), t)
    mean = (1 - phi) * forecast * sum(phi**j for j in range(t))
    var = sigma**2 * sum(phi ** (2 * j) for j in range(t))
    assert mo.mean == pytest.approx(mean, rel=1e-12)
    assert mo.variance == pytest.approx(var, rel=1e-12)


@given(st.floats(-0.99, 0.99).filter(lambda x: abs(x) > 1e-3), st.integers(1, 100))
def test_variance_increasing_in_horizon(phi, t):
    assume(phi ** (2 * t) > 1e-12)  # beyond this the increment is below float resolution
    p = OuParams(1.0, phi, 1.0)
    assert pnl_moments(p, t + 1).variance > pnl_moments(p, t).variance


@given(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), st.integers(1, 50))
def test_moment_scaling(c, t):
    base = pnl_moments(OuParams(4, 0.7, 1.3, 1.0, 1.0), t)
    scaled = pnl_moments(OuParams(4, 0.7, 1.3, 1.0, c), t)
    assert scaled.mean == pytest.approx(c * base.mean, rel=1e-12)
    assert scaled.variance == pytest.approx(c * c * base.variance, rel=1e-12)


@settings(max_examples=6, deadline=None)
@given(st.floats(-10, 10), st.floats(-0.95, 0.99), st.floats(0.1, 3), st.floats(-5, 5),
       st.integers(1, 200), st.integers(0, 2**32))
def test_simulation_agrees_with_closed_form(forecast, phi, sigma, p0, t, seed):
    n = 100_000
    params = OuParams(forecast, phi, sigma, p0)
    pnl = simulate_paths(params, n, t, RngSpec(seed))[:, -1] - p0
    mo = pnl_moments(params, t)
    assert abs(pnl.mean() - mo.mean) < 4 * math.sqrt(mo.variance / n)
    assert abs(pnl.var(ddof=1) - mo.variance) < 4 * mo.variance * math.sqrt(2 / (n - 1))


def test_simulated_paths_start_at_entry():
    paths = simulate_paths(OuParams(1, 0.5, 1, p0=3.0), 5, 4, RngSpec(1))
    assert paths.shape == (5, 5)
    assert np.all(paths[:, 0] == 3.0)
