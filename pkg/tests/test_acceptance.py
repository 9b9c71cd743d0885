"""Acceptance criteria 1-10, one verdict line each.

The lines are collected in ``conftest.ACCEPTANCE_LINES`` and printed in the
pytest terminal summary, so ``pytest tests/test_acceptance.py`` shows the
full list even with output capture on.
"""

import math
import os
import sys
import time

import numpy as np
import pytest
from scipy.integrate import quad

from gtsprice.calibration import fit, likelihood_config, log_likelihood, score_and_hessian
from gtsprice.gts_core import SP500_PARAMS, GtsParams, cumulant, solve_esscher, to_decimal_annual
from gtsprice.market_data import load_prices, log_returns
from gtsprice.pricing import (
    TABLE_MATURITIES,
    TABLE_MONEYNESS,
    BsParams,
    ContourConfig,
    PricingRequest,
    bs_price,
    cdf_pair,
    error_surface,
    gts_call_generalized,
    optimal_q,
    payoff_error,
    price_table,
)
from gtsprice.quadrature import CompositeRule, integrate, newton_cotes_weights
from gtsprice.transform import cdf_grid, density_grid, frft

from conftest import ACCEPTANCE_LINES, PARAM_SETS, sample_returns

SPOT, RATE = 4437.86, 0.06


def report(number, ok, detail):
    ACCEPTANCE_LINES.append((number, "PASS" if ok else "FAIL", detail))
    return ok


@pytest.fixture(scope="module")
def table(riskneutral):
    start = time.perf_counter()
    rows = price_table(SPOT, RATE, riskneutral)
    return rows, time.perf_counter() - start


def test_criterion_01_esscher_parameter():
    start = time.perf_counter()
    h = solve_esscher(to_decimal_annual(SP500_PARAMS), RATE).h_star
    elapsed = time.perf_counter() - start
    others = {d: solve_esscher(to_decimal_annual(SP500_PARAMS, d), RATE).h_star for d in (365, 252)}
    ok = abs(h - (-2.4448)) <= 1e-3 and elapsed < 1.0
    detail = (f"h*={h:.5f} with D=360 (target -2.4448 +/- 1e-3) in {elapsed * 1e3:.1f} ms; "
              f"D=365 gives {others[365]:.4f}, D=252 gives {others[252]:.4f}")
    assert report(1, ok, detail)


def test_criterion_02_price_table_golden(table, golden_table):
    rows, elapsed = table
    cells = {(round(r.k, 2), r.tau): r for r in rows}
    worst = {"bsm": 0.0, "gts_21": 0.0, "gts_16": 0.0}
    for g in golden_table:
        r = cells[(round(g["k"], 2), g["tau"])]
        assert not r.failure, r.failure
        worst["bsm"] = max(worst["bsm"], abs(round(r.bsm, 2) - g["bsm"]))
        worst["gts_21"] = max(worst["gts_21"], abs(round(r.gts_generalized, 2) - g["gts_21"]))
        worst["gts_16"] = max(worst["gts_16"], abs(round(r.gts_extended, 2) - g["gts_16"]))
    # the table is printed to two decimals; allow for the float spelling of 0.01
    ok = max(worst.values()) <= 0.01 + 1e-9 and elapsed < 120 and len(golden_table) == len(rows)
    detail = (f"{len(golden_table)} cells, max |diff| bsm={worst['bsm']:.2f} "
              f"generalized={worst['gts_21']:.2f} extended={worst['gts_16']:.2f}, {elapsed:.1f} s")
    assert report(2, ok, detail)


def test_criterion_03_engine_agreement(table):
    rows, _ = table
    gap = max(abs(r.gts_extended - r.gts_generalized) for r in rows)
    assert report(3, gap < 0.01, f"max |extended - generalized| = {gap:.2e} over {len(rows)} cells")


def test_criterion_04_contour_invariance(riskneutral):
    worst = 0.0
    for k in (0.55, 0.85, 1.0, 1.65):
        for tau in (0.25, 0.5, 1.0):
            req = PricingRequest(SPOT, SPOT / k, tau, RATE, riskneutral)
            a = gts_call_generalized(req, ContourConfig(q=-2.5))
            b = gts_call_generalized(req, ContourConfig(q=-3.5))
            worst = max(worst, abs(a - b) / abs(b))
    assert report(4, worst < 1e-4, f"max relative gap q=-2.5 vs q=-3.5 on 12 cells = {worst:.1e}")


def test_criterion_05_transform():
    rng = np.random.default_rng(0)
    x = rng.normal(size=128) + 1j * rng.normal(size=128)
    delta = 0.0371
    jk = np.outer(np.arange(128), np.arange(128))
    direct = np.exp(-2j * np.pi * np.mod(jk * delta, 1.0)) @ x
    frft_err = float(np.max(np.abs(frft(x, delta) - direct)))
    mass_err = mean_err = cdf_err = 0.0
    monotone = True
    for params in PARAM_SETS.values():
        for tau in (0.25, 1.0):
            g = density_grid(params, tau)
            mass_err = max(mass_err, abs(np.sum(g.values) * g.step - 1.0))
            k1 = cumulant(params, 1) * tau
            mean = np.sum(g.x * g.values) * g.step
            mean_err = max(mean_err, abs(mean - k1) / max(abs(k1), 1e-12))
            c = cdf_grid(params, tau)
            monotone &= bool(np.all(np.diff(c.values) >= 0))
            cdf_err = max(cdf_err, c.values[0], 1.0 - c.values[-1])
    ok = frft_err < 1e-10 and mass_err < 1e-6 and mean_err < 1e-5 and monotone and cdf_err < 1e-4
    detail = (f"FRFT err {frft_err:.1e}; mass err {mass_err:.1e}; mean rel err {mean_err:.1e}; "
              f"CDF monotone={monotone}, limit err {cdf_err:.1e}")
    assert report(5, ok, detail)


def test_criterion_06_quadrature():
    w = newton_cotes_weights()
    u = np.arange(13.0) / 6.0 - 1.0
    rhs = np.zeros(13)
    rhs[0] = 2.0
    oracle = 6.0 * np.linalg.solve(np.polynomial.legendre.legvander(u, 12).T, rhs)
    weight_err = float(np.max(np.abs(w - oracle) / np.abs(oracle)))
    moment_err = max(abs(math.fsum(w * np.arange(13.0) ** m) / (12.0 ** (m + 1) / (m + 1)) - 1)
                     for m in range(13))
    val = integrate(lambda t: np.exp(1j * t) * np.exp(-t / 4), CompositeRule(0, 20, 12, 60000))
    re = quad(lambda t: math.cos(t) * math.exp(-t / 4), 0, 20, epsabs=1e-13, epsrel=1e-13)[0]
    im = quad(lambda t: math.sin(t) * math.exp(-t / 4), 0, 20, epsabs=1e-13, epsrel=1e-13)[0]
    quad_err = abs(val - complex(re, im))
    ok = moment_err < 1e-12 and weight_err < 1e-12 and quad_err < 1e-10
    detail = (f"moment rel err {moment_err:.1e}, weights vs Vandermonde oracle {weight_err:.1e}, "
              f"oscillatory integrand vs adaptive {quad_err:.1e}")
    assert report(6, ok, detail)


def test_criterion_07_error_surface(riskneutral):
    bs = BsParams()
    ks, taus = (1.0, 1.65, 0.55, 0.85), TABLE_MATURITIES
    err = error_surface(SPOT, RATE, riskneutral, bs, ks, taus)
    atm_positive = bool(np.all(err[0] > 0))
    corners = max(abs(err[1, 0]), abs(err[2, 0]))
    sign = err[3, 0]
    ok = atm_positive and corners < 0.02 and sign < 0
    detail = (f"ATM errors {np.round(err[0], 2).tolist()}; |corner| max {corners:.3f} at tau=0.25; "
              f"Error(0.85, 0.25) = {sign:.3f}")
    assert report(7, ok, detail)


def test_criterion_08_calibration_properties():
    y = sample_returns(SP500_PARAMS, 50, seed=101)
    x0 = SP500_PARAMS.as_array() * 1.07
    p = GtsParams.from_array(x0)
    cfg = likelihood_config(p, y)
    grad = score_and_hessian(p, y, cfg)[0]
    fd_err = 0.0
    for j in range(7):
        e = np.zeros(7)
        e[j] = 1e-5
        fd = (log_likelihood(GtsParams.from_array(x0 + e), y, cfg)
              - log_likelihood(GtsParams.from_array(x0 - e), y, cfg)) / 2e-5
        fd_err = max(fd_err, abs(grad[j] - fd) / max(abs(fd), 1e-2))
    data = sample_returns(SP500_PARAMS, 3500, seed=13)
    res = fit(data, init=GtsParams.from_array(SP500_PARAMS.as_array() * 1.05))
    ll = np.array([s.log_ml for s in res])
    monotone = bool(np.all(np.diff(ll) >= 0))
    ok = fd_err < 1e-4 and monotone and res.converged and res.final.max_eigen < 0
    detail = (f"score vs FD rel err {fd_err:.1e}; {len(res)} states, monotone={monotone}; "
              f"{res.message}, max eigen {res.final.max_eigen:.3f}")
    assert report(8, ok, detail)


def test_criterion_09_calibration_reproduction():
    path = os.environ.get("GTS_SP500_CSV")
    if not path:
        ACCEPTANCE_LINES.append((9, "SKIP", "GTS_SP500_CSV not set; data-gated"))
        pytest.skip("GTS_SP500_CSV not set")
    y = log_returns(load_prices(path))
    grad, _, max_eigen, ll = score_and_hessian(SP500_PARAMS, y)
    gnorm = float(np.linalg.norm(grad))
    ok = abs(ll - (-4659.19)) <= 0.05 and gnorm < 0.01
    detail = f"log ML {ll:.3f} (target -4659.19), grad norm {gnorm:.4f}, max eigen {max_eigen:.4f}"
    assert report(9, ok, detail)


@pytest.mark.xfail(strict=True, reason="ER(q=-2)/ER(q_opt) is about 2.5 at M=2; analysis in the decision ledger")
def test_criterion_10_payoff_reconstruction():
    q1, er1 = optimal_q(1.0)
    ratio = payoff_error(1.0, -2.0) / er1
    qs = [q1] + [optimal_q(k)[0] for k in (0.55, 1.65)]
    spread = (max(qs) - min(qs)) / abs(np.mean(qs))
    ok = ratio >= 10 and spread < 0.10
    detail = (f"ER(q=-2)/ER(q_opt) = {ratio:.2f} at k=1 (need >= 10); q_opt = "
              f"{', '.join(f'{q:.4f}' for q in qs)} for k=1, 0.55, 1.65, spread {spread:.2%} (need < 10%)")
    assert report(10, ok, detail)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
