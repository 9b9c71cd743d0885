"""European call pricing: Black-Scholes, CDF-based GTS and contour-integral GTS.

Under the Esscher martingale measure the log return ``Y_tau`` over the life
of the option is GTS with the shifted decay rates, so

* the extended formula needs the CDF of ``Y_tau`` under the ``h*`` and
  ``h* + 1`` measures at ``log(K / S)``;
* the generalized formula integrates the Fourier transform of the call payoff
  against the characteristic function along ``Im(xi) = q < -1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import ndtr

from .errors import ContourError, DomainError, InvalidMeasure
from .gts_core import (
    EsscherSolution,
    SP500_PARAMS,
    annualized_volatility,
    characteristic_exponent,
    esscher_shift,
)
from .quadrature import CompositeRule, integrate
from .transform import FrftConfig, auto_config, cdf_grid, fourier_sum, survival

#: Volatility of the benchmark model: the annualized second cumulant of the
#: fitted S&P 500 parameters (0.20771...).
DEFAULT_SIGMA_STAR = annualized_volatility(SP500_PARAMS)
DEFAULT_Q = -3.0
#: The contour integrand only decays once |xi| passes the tempering rates
#: (about 80 per year), so the upper limit is well beyond 20.
DEFAULT_CONTOUR_RULE = CompositeRule(a=0.0, b=200.0, Q=12, n=5000 * 12)
PAYOFF_RULE = CompositeRule(a=0.0, b=20.0, Q=12, n=5000 * 12)
RESIDUAL_TOL = 1e-6

TABLE_MONEYNESS = tuple(round(1.65 - 0.05 * i, 2) for i in range(23))
TABLE_MATURITIES = (0.25, 0.5, 0.75, 1.0)


class Engine(enum.Enum):
    BlackScholes = "bs"
    GtsExtended = "extended"
    GtsGeneralized = "generalized"


@dataclass(frozen=True)
class PricingRequest:
    spot: float
    strike: float
    tau: float
    rate: float
    riskneutral: EsscherSolution | None = None
    engine: Engine = Engine.GtsExtended

    def __post_init__(self):
        if not (self.spot > 0 and self.strike > 0 and self.tau > 0):
            raise DomainError("spot, strike and tau must be positive")


@dataclass(frozen=True)
class BsParams:
    sigma_star: float = DEFAULT_SIGMA_STAR

    def __post_init__(self):
        if not self.sigma_star > 0:
            raise DomainError("sigma_star must be positive")


@dataclass(frozen=True)
class ContourConfig:
    q: float = DEFAULT_Q
    rule: CompositeRule = field(default_factory=lambda: DEFAULT_CONTOUR_RULE)

    def __post_init__(self):
        if not self.q < -1:
            raise DomainError("contour shift q must be < -1")


def bs_price(req: PricingRequest, bs: BsParams = BsParams()) -> float:
    s, k, tau, r, sig = req.spot, req.strike, req.tau, req.rate, bs.sigma_star
    vol = sig * math.sqrt(tau)
    d1 = (math.log(s / k) + (r + 0.5 * sig**2) * tau) / vol
    d2 = d1 - vol
    return float(s * ndtr(d1) - k * math.exp(-r * tau) * ndtr(d2))


def _riskneutral(req):
    if req.riskneutral is None:
        raise DomainError("GTS pricing needs a risk-neutral EsscherSolution")
    params = req.riskneutral.shifted
    params.check_pricing()
    return params


def share_measure(riskneutral: EsscherSolution):
    """Parameters under the h* + 1 measure (stock as numeraire)."""
    params = riskneutral.shifted
    if params.lambda_plus <= 1.0:
        raise InvalidMeasure(f"lambda_plus={params.lambda_plus} leaves no room for h*+1")
    return esscher_shift(params, 1.0)


@dataclass(frozen=True)
class CdfPair:
    """CDF grids of Y_tau under the h* and h* + 1 measures."""

    tau: float
    money: object
    share: object


def cdf_pair(riskneutral: EsscherSolution, tau: float, config: FrftConfig | None = None,
             cover=None) -> CdfPair:
    params = riskneutral.shifted
    params.check_pricing()
    shifted1 = share_measure(riskneutral)
    h = riskneutral.h_star
    cfg0 = config or auto_config(params, tau, cover=cover)
    cfg1 = config or auto_config(shifted1, tau, cover=cover)
    return CdfPair(tau, cdf_grid(params, tau, cfg0, h=h), cdf_grid(shifted1, tau, cfg1, h=h + 1))


def extended_terms(req: PricingRequest, pair: CdfPair | None = None):
    """The two survival probabilities entering the extended formula."""
    _riskneutral(req)
    if pair is None:
        pair = cdf_pair(req.riskneutral, req.tau)
    x = math.log(req.strike / req.spot)
    return float(survival(pair.share, x)), float(survival(pair.money, x))


def gts_call_extended(req: PricingRequest, pair: CdfPair | None = None) -> float:
    """S [1 - F_{h*+1}(log K/S)] - K exp(-r tau) [1 - F_{h*}(log K/S)]."""
    share, money = extended_terms(req, pair)
    return req.spot * share - req.strike * math.exp(-req.rate * req.tau) * money


def _contour_integrand(params, x0, tau, q, sign):
    def g(u):
        z = sign * u + 1j * q
        iz = 1j * z
        return np.exp(iz * x0 + tau * characteristic_exponent(params, z)) / (iz * (iz - 1.0))
    return g


def gts_call_generalized(req: PricingRequest, contour: ContourConfig = ContourConfig(),
                         return_residual: bool = False):
    """Contour-integral price ``K e^{-r tau} / 2pi * int g(xi + i q) d xi``.

    Both half-lines are integrated with the same composite rule; by Hermitian
    symmetry their sum is real, and the leftover imaginary part is checked.
    """
    params = _riskneutral(req)
    q = contour.q
    if params.lambda_plus + q <= 0:
        raise ContourError(f"contour Im = {q} outside the strip of analyticity")
    x0 = math.log(req.spot / req.strike)
    right = integrate(_contour_integrand(params, x0, req.tau, q, 1.0), contour.rule)
    left = integrate(_contour_integrand(params, x0, req.tau, q, -1.0), contour.rule)
    scale = req.strike * math.exp(-req.rate * req.tau) / (2 * math.pi)
    total = scale * (right + left)
    price, residual = total.real, total.imag
    if abs(residual) > RESIDUAL_TOL * max(abs(price), 1e-6 * req.strike):
        raise ContourError(f"imaginary residual {residual:.3g} for price {price:.6g}")
    return (price, residual) if return_residual else price


def price(req: PricingRequest, bs: BsParams = BsParams(),
          contour: ContourConfig = ContourConfig()) -> float:
    if req.engine is Engine.BlackScholes:
        return bs_price(req, bs)
    if req.engine is Engine.GtsExtended:
        return gts_call_extended(req)
    return gts_call_generalized(req, contour)


# Payoff reconstruction and the choice of contour shift.

def payoff_transform(y, k: float):
    """Fourier transform of ``(e^x - k)^+``, valid for ``Im(y) < -1``."""
    iy = 1j * np.asarray(y, dtype=complex)
    return k * np.exp(-iy * math.log(k)) / (iy * (iy - 1.0))


def payoff_inverse_fourier(x, k: float, q: float, rule: CompositeRule = PAYOFF_RULE):
    """Numerical inverse transform of the payoff along ``Im(y) = q``.

    Scalars (and irregular arrays) are summed directly; uniform arrays are
    evaluated together with one fractional FFT.
    """
    if not q < -1:
        raise DomainError("q must be < -1")
    if k <= 0:
        raise DomainError("k must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    xi = rule.nodes()
    coef = rule.node_weights() * payoff_transform(xi + 1j * q, k)
    uniform = xs.size > 2 and np.allclose(np.diff(xs), xs[1] - xs[0], rtol=1e-12, atol=0)
    if uniform:
        dx = xs[1] - xs[0]
        n = max(xs.size, coef.size)
        padded = np.zeros(n, dtype=complex)
        padded[: coef.size] = coef
        sums = fourier_sum(padded, xi[0], rule.step, xs[0], dx)[: xs.size]
    else:
        sums = np.array([np.sum(coef * np.exp(1j * xi * xv)) for xv in xs])
    out = (sums * np.exp(-q * xs)).real / math.pi
    return out if np.ndim(x) else float(out[0])


def payoff_error(k: float, q: float, M: float = 2.0, m: int = 401,
                 rule: CompositeRule = PAYOFF_RULE) -> float:
    """Root-mean-square gap between the payoff and its reconstruction on [-M, M]."""
    xs = np.linspace(-M, M, m)
    exact = np.maximum(np.exp(xs) - k, 0.0)
    approx = payoff_inverse_fourier(xs, k, q, rule)
    return float(np.sqrt(np.mean((exact - approx) ** 2)))


def optimal_q(k: float, q_range=(-4.0, -1.0001), M: float = 2.0, m: int = 401,
              rule: CompositeRule = PAYOFF_RULE, scan: int = 41):
    """Minimize ``payoff_error`` over q: a scan, then golden-section refinement.

    The scan is uniform in ``log(-1 - q)``, the distance to the pole at
    ``q = -1`` that governs how the error behaves.
    """
    lo, hi = q_range
    if not lo < hi < -1:
        raise DomainError("q_range must lie inside (-inf, -1)")
    dist = np.geomspace(-1 - hi, -1 - lo, scan)
    qs = -1 - dist
    errs = np.array([payoff_error(k, q, M, m, rule) for q in qs])
    i = int(np.argmin(errs))
    if 0 < i < scan - 1:
        res = minimize_scalar(
            lambda s: payoff_error(k, -1 - math.exp(s), M, m, rule),
            bracket=(math.log(dist[i - 1]), math.log(dist[i]), math.log(dist[i + 1])),
            method="golden",
            tol=1e-6,
        )
        if res.fun < errs[i]:
            return -1 - math.exp(res.x), float(res.fun)
    return float(qs[i]), float(errs[i])


# Tables and the GTS-minus-Black-Scholes surface.

@dataclass
class TableRow:
    k: float
    tau: float
    strike: float
    bsm: float
    gts_extended: float
    gts_generalized: float
    error: float
    failure: str = ""


def price_table(spot: float, rate: float, riskneutral: EsscherSolution,
                bs: BsParams = BsParams(), k_grid=TABLE_MONEYNESS,
                tau_grid=TABLE_MATURITIES, contour: ContourConfig = ContourConfig(),
                engines=(Engine.BlackScholes, Engine.GtsExtended, Engine.GtsGeneralized),
                frft_config: FrftConfig | None = None):
    """Price every (k, tau) cell; per-cell failures are recorded, not raised.

    Moneyness is ``k = S / K``.  Cells are computed in a fixed order, so the
    result is deterministic.
    """
    engines = set(engines)
    rows = []
    cover = [math.log(1.0 / k) for k in k_grid]
    for tau in tau_grid:
        pair, pair_error = None, ""
        if Engine.GtsExtended in engines:
            try:
                pair = cdf_pair(riskneutral, tau, frft_config, cover=cover)
            except Exception as exc:  # noqa: BLE001 - reported per cell
                pair_error = f"extended: {exc}"
        for k in k_grid:
            strike = spot / k
            req = PricingRequest(spot, strike, tau, rate, riskneutral)
            row = TableRow(k, tau, strike, math.nan, math.nan, math.nan, math.nan)
            failures = []
            if Engine.BlackScholes in engines:
                row.bsm = bs_price(req, bs)
            if Engine.GtsExtended in engines:
                if pair is None:
                    failures.append(pair_error)
                else:
                    try:
                        row.gts_extended = gts_call_extended(req, pair)
                    except Exception as exc:  # noqa: BLE001
                        failures.append(f"extended: {exc}")
            if Engine.GtsGeneralized in engines:
                try:
                    row.gts_generalized = gts_call_generalized(req, contour)
                except Exception as exc:  # noqa: BLE001
                    failures.append(f"generalized: {exc}")
            row.error = row.gts_extended - row.bsm
            row.failure = "; ".join(failures)
            rows.append(row)
    return rows


def error_surface(spot: float, rate: float, riskneutral: EsscherSolution,
                  bs: BsParams, k_grid, tau_grid,
                  frft_config: FrftConfig | None = None) -> np.ndarray:
    """``Error[i, j] = extended GTS price - Black-Scholes price`` at (k_i, tau_j)."""
    k_grid, tau_grid = list(k_grid), list(tau_grid)
    if not k_grid or not tau_grid:
        raise DomainError("error surface needs nonempty grids")
    out = np.empty((len(k_grid), len(tau_grid)))
    cover = [math.log(1.0 / k) for k in k_grid]
    for j, tau in enumerate(tau_grid):
        pair = cdf_pair(riskneutral, tau, frft_config, cover=cover)
        for i, k in enumerate(k_grid):
            req = PricingRequest(spot, spot / k, tau, rate, riskneutral)
            try:
                out[i, j] = gts_call_extended(req, pair) - bs_price(req, bs)
            except Exception as exc:
                raise type(exc)(f"cell k={k}, tau={tau}: {exc}") from exc
    return out
