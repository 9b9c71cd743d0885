import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import cumulative_trapezoid, quad

from gtsprice.errors import DomainError, OutOfRange, TruncationError
from gtsprice.gts_core import GtsParams, characteristic_exponent, cumulant, esscher_shift
from gtsprice.transform import (
    FrftConfig,
    GridKind,
    auto_config,
    cdf_grid,
    density_grid,
    fourier_sum,
    frft,
    query,
    survival,
)

from conftest import DATA, PARAM_SETS

param_sets = pytest.mark.parametrize("params", PARAM_SETS.values(), ids=PARAM_SETS.keys())


def direct_frft(x, delta):
    n = len(x)
    jk = np.outer(np.arange(n), np.arange(n))
    # reduce the phase mod 1 first so the oracle itself keeps full accuracy
    return np.exp(-2j * np.pi * np.mod(jk * delta, 1.0)) @ x


def gil_pelaez_cdf(params, tau, x):
    """Oracle CDF by adaptive quadrature of the Gil-Pelaez integral."""
    def g(u):
        return (np.exp(-1j * u * x + tau * characteristic_exponent(params, u))).imag / u
    val, _ = quad(g, 0, np.inf, limit=2000, epsabs=1e-12)
    return 0.5 - val / math.pi


@pytest.mark.parametrize("n", [1, 7, 64, 128, 300])
@pytest.mark.parametrize("delta", [1.0 / 128, 0.0371, -0.2, 1.5])
def test_frft_matches_direct_sum(n, delta):
    rng = np.random.default_rng(n)
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    np.testing.assert_allclose(frft(x, delta), direct_frft(x, delta), rtol=0, atol=1e-10 * max(1, n / 128))


def test_frft_reduces_to_fft():
    x = np.random.default_rng(1).normal(size=64)
    np.testing.assert_allclose(frft(x, 1 / 64), np.fft.fft(x), atol=1e-11)
    assert frft(np.array([]), 0.3).size == 0


def test_fourier_sum_matches_direct():
    rng = np.random.default_rng(2)
    v = rng.normal(size=50) + 1j * rng.normal(size=50)
    z = -3.0 + 0.17 * np.arange(50)
    x = 0.4 + 0.05 * np.arange(50)
    oracle = np.exp(1j * np.outer(x, z)) @ v
    np.testing.assert_allclose(fourier_sum(v, -3.0, 0.17, 0.4, 0.05), oracle, atol=1e-11)


@param_sets
@pytest.mark.parametrize("tau", [1 / 12, 1.0])
def test_density_mass_and_mean(params, tau):
    g = density_grid(params, tau)
    dx = g.step
    assert g.kind is GridKind.Density
    assert np.sum(g.values) * dx == pytest.approx(1.0, abs=1e-6)
    mean = np.sum(g.x * g.values) * dx
    assert mean == pytest.approx(cumulant(params, 1) * tau, rel=1e-5, abs=1e-8)
    var = np.sum((g.x - mean) ** 2 * g.values) * dx
    assert var == pytest.approx(cumulant(params, 2) * tau, rel=1e-4)


@param_sets
def test_cdf_limits_and_monotone(params):
    g = cdf_grid(params, 1.0)
    assert g.kind is GridKind.Cdf
    assert g.values[0] == pytest.approx(0.0, abs=1e-4)
    assert g.values[-1] == pytest.approx(1.0, abs=1e-4)
    assert np.all(np.diff(g.values) >= 0)
    assert g.max_repair <= 1e-6


@param_sets
def test_cdf_matches_gil_pelaez(params):
    tau = 1.0
    g = cdf_grid(params, tau)
    sd = math.sqrt(cumulant(params, 2) * tau)
    for x in cumulant(params, 1) * tau + sd * np.array([-2.0, -0.5, 0.3, 1.7]):
        assert query(g, x) == pytest.approx(gil_pelaez_cdf(params, tau, x), abs=1e-5)


def test_cdf_derivative_is_density():
    p = PARAM_SETS["sp500"]
    cfg = auto_config(p, 1.0)
    f = density_grid(p, 1.0, cfg)
    F = cdf_grid(p, 1.0, cfg)
    peak = f.values.max()
    np.testing.assert_allclose(np.gradient(F.values, F.step), f.values, atol=5e-5 * peak)
    running = cumulative_trapezoid(f.values, dx=f.step, initial=0.0) + F.values[0]
    np.testing.assert_allclose(running, F.values, atol=1e-5)


def test_density_golden(riskneutral):
    measures = {"h_star": riskneutral.shifted,
                "h_star_plus_1": esscher_shift(riskneutral.shifted, 1.0)}
    with open(DATA / "density_golden.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 102
    for row in rows:
        grid = density_grid(measures[row["measure"]], float(row["tau"]))
        assert query(grid, float(row["x"])) == pytest.approx(float(row["density"]), abs=1e-5)


def test_grids_are_read_only_and_fingerprinted():
    p = PARAM_SETS["symmetric"]
    a, b = density_grid(p, 1.0), density_grid(p, 1.0)
    with pytest.raises(ValueError):
        a.values[0] = 1.0
    assert a.params_fingerprint == b.params_fingerprint
    assert a.params_fingerprint != density_grid(p, 0.5).params_fingerprint
    assert a.params_fingerprint != density_grid(p, 1.0, h=0.1).params_fingerprint
    np.testing.assert_array_equal(a.values, b.values)


def test_query_and_survival_bounds():
    g = cdf_grid(PARAM_SETS["symmetric"], 1.0)
    with pytest.raises(OutOfRange):
        query(g, g.x[-1] + 1.0)
    with pytest.raises(OutOfRange):
        query(g, float("nan"))
    assert survival(g, g.x[0] - 5.0) == 1.0
    assert survival(g, g.x[-1] + 5.0) == 0.0
    mid = float(g.x[len(g.x) // 2])
    assert survival(g, mid) == pytest.approx(1.0 - query(g, mid))
    with pytest.raises(DomainError):
        survival(density_grid(PARAM_SETS["symmetric"], 1.0), 0.0)


def test_auto_config_covers_requested_points():
    p = PARAM_SETS["sp500"]
    cfg = auto_config(p, 1.0, cover=[-40.0, 25.0])
    x = cfg.abscissae(cfg.center)
    assert x[0] < -40.0 and x[-1] > 25.0
    z = cfg.frequencies()
    assert np.max(np.abs(np.exp(characteristic_exponent(p, [z[0], z[-1]])))) <= 1e-12


def test_truncated_frequency_grid_is_reported():
    p = PARAM_SETS["sp500"]
    narrow = FrftConfig(n_points=256, freq_step=0.01, space_step=0.5)
    with pytest.raises(TruncationError):
        density_grid(p, 1.0, narrow)


def test_slowly_decaying_exponent_is_refused():
    # beta near 0 over one month needs millions of nodes; refuse instead of allocating
    p = GtsParams(0.0, 0.1, 0.15, 1.2, 1.0, 1.5, 1.2)
    with pytest.raises(TruncationError):
        auto_config(p, 1 / 12)


@pytest.mark.parametrize("kwargs", [dict(n_points=100), dict(n_points=32),
                                    dict(freq_step=0.0), dict(space_step=-1.0)])
def test_frft_config_validation(kwargs):
    with pytest.raises(DomainError):
        FrftConfig(**kwargs)


@settings(max_examples=15, deadline=None)
@given(tau=st.floats(0.02, 3.0))
def test_density_mass_any_horizon(tau):
    g = density_grid(PARAM_SETS["right_heavy"], tau)
    assert np.sum(g.values) * g.step == pytest.approx(1.0, abs=1e-6)
    assert np.min(g.values) > -1e-8
