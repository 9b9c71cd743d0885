"""Generalized tempered stable (GTS) distribution and its Esscher transform.

A GTS law is described by seven numbers: a location ``mu`` and, for each
tail, a stability index ``beta``, an intensity ``alpha`` and an exponential
decay rate ``lambda``.  Its characteristic exponent is::

    Psi(xi) = i mu xi
              + alpha_p Gamma(-beta_p) ((lambda_p - i xi)**beta_p - lambda_p**beta_p)
              + alpha_m Gamma(-beta_m) ((lambda_m + i xi)**beta_m - lambda_m**beta_m)

and ``Y_t`` has exponent ``t * Psi``.  Everything here is a pure function of
immutable values.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma, polygamma

from .errors import DomainError, InvalidMeasure, NoSolution

#: Days per year used to annualize daily parameters.  360 reproduces the
#: published Esscher parameter, volatility and option prices.
DAYS_PER_YEAR = 360

PARAM_NAMES = (
    "mu",
    "beta_plus",
    "beta_minus",
    "alpha_plus",
    "alpha_minus",
    "lambda_plus",
    "lambda_minus",
)


class Unit(enum.Enum):
    PercentDaily = "percent_daily"
    DecimalAnnual = "decimal_annual"


class Activity(enum.Enum):
    FiniteActivity = "finite"
    InfiniteActivity = "infinite"


@dataclass(frozen=True)
class GtsParams:
    mu: float
    beta_plus: float
    beta_minus: float
    alpha_plus: float
    alpha_minus: float
    lambda_plus: float
    lambda_minus: float
    unit: Unit = Unit.PercentDaily

    def __post_init__(self):
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise DomainError(f"non-finite GTS parameter in {values}")
        if self.alpha_plus < 0 or self.alpha_minus < 0:
            raise DomainError("alpha_plus and alpha_minus must be >= 0")
        if self.lambda_plus < 0 or self.lambda_minus < 0:
            raise DomainError("lambda_plus and lambda_minus must be >= 0")
        if self.beta_plus >= 2 or self.beta_minus >= 2:
            raise DomainError("stability indexes must be < 2")

    def as_array(self) -> np.ndarray:
        """Parameters in the order (mu, beta+, beta-, alpha+, alpha-, lambda+, lambda-)."""
        return np.array([getattr(self, name) for name in PARAM_NAMES], dtype=float)

    @classmethod
    def from_array(cls, values, unit: Unit = Unit.PercentDaily) -> "GtsParams":
        return cls(*(float(v) for v in values), unit=unit)

    def as_dict(self) -> dict:
        out = {name: float(getattr(self, name)) for name in PARAM_NAMES}
        out["unit"] = self.unit.value
        return out

    def check_pricing(self):
        """Raise unless both stability indexes lie in [0, 1]."""
        for name in ("beta_plus", "beta_minus"):
            b = getattr(self, name)
            if not 0.0 <= b <= 1.0:
                raise DomainError(f"{name}={b} outside [0, 1] required for pricing")


#: Maximum-likelihood fit to S&P 500 daily log returns (percent units).
SP500_PARAMS = GtsParams(
    mu=-0.693477,
    beta_plus=0.682290,
    beta_minus=0.242579,
    alpha_plus=0.458582,
    alpha_minus=0.414443,
    lambda_plus=0.822222,
    lambda_minus=0.727607,
)


@dataclass(frozen=True)
class EsscherSolution:
    h_star: float
    risk_free_rate: float
    shifted: GtsParams


def _gamma_neg(beta: float) -> float:
    """Gamma(-beta), rejecting the poles at non-negative integers."""
    if beta >= 0 and float(beta).is_integer():
        raise DomainError(f"Gamma(-beta) has a pole at beta={beta}")
    return float(gamma(-beta))


def levy_density(params: GtsParams, x):
    """Density of the Lévy measure at ``x != 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x == 0):
        raise DomainError("the Lévy density is singular at x = 0")
    p = params
    ax = np.abs(x)
    with np.errstate(over="ignore", invalid="ignore"):
        right = p.alpha_plus * np.exp(-p.lambda_plus * ax) / ax ** (1 + p.beta_plus)
        left = p.alpha_minus * np.exp(-p.lambda_minus * ax) / ax ** (1 + p.beta_minus)
    out = np.where(x > 0, right, left)
    return out if out.ndim else float(out)


def total_levy_mass(params: GtsParams):
    """Total mass of the Lévy measure and the activity class it implies."""
    p = params
    if p.beta_plus >= 0 or p.beta_minus >= 0:
        return math.inf, Activity.InfiniteActivity
    mass = 0.0
    for a, b, lam in ((p.alpha_plus, p.beta_plus, p.lambda_plus),
                      (p.alpha_minus, p.beta_minus, p.lambda_minus)):
        if a > 0:
            mass += a * lam**b * _gamma_neg(b)
    return mass, Activity.FiniteActivity


def _check_branch(arg):
    bad = (np.imag(arg) == 0) & (np.real(arg) <= 0)
    if np.any(bad):
        raise DomainError("power argument on the principal-branch cut")


def characteristic_exponent(params: GtsParams, xi):
    """Psi(xi) with ``E[exp(i xi Y_1)] = exp(Psi(xi))``; accepts complex arrays."""
    p = params
    xi = np.asarray(xi, dtype=complex)
    a_plus = p.lambda_plus - 1j * xi
    a_minus = p.lambda_minus + 1j * xi
    _check_branch(a_plus)
    _check_branch(a_minus)
    out = 1j * p.mu * xi
    if p.alpha_plus:
        out = out + p.alpha_plus * _gamma_neg(p.beta_plus) * (
            a_plus**p.beta_plus - p.lambda_plus**p.beta_plus
        )
    if p.alpha_minus:
        out = out + p.alpha_minus * _gamma_neg(p.beta_minus) * (
            a_minus**p.beta_minus - p.lambda_minus**p.beta_minus
        )
    return out if out.ndim else complex(out)


def log_mgf(params: GtsParams, h):
    """Psi(-i h), the cumulant generating function of Y_1, for real ``h``."""
    p = params
    h = np.asarray(h, dtype=float)
    if np.any(h <= -p.lambda_minus) or np.any(h >= p.lambda_plus):
        raise DomainError(
            f"h outside the MGF domain ({-p.lambda_minus}, {p.lambda_plus})"
        )
    out = p.mu * h
    if p.alpha_plus:
        out = out + p.alpha_plus * _gamma_neg(p.beta_plus) * (
            (p.lambda_plus - h) ** p.beta_plus - p.lambda_plus**p.beta_plus
        )
    if p.alpha_minus:
        out = out + p.alpha_minus * _gamma_neg(p.beta_minus) * (
            (p.lambda_minus + h) ** p.beta_minus - p.lambda_minus**p.beta_minus
        )
    return out if out.ndim else float(out)


def mgf(params: GtsParams, h, t: float = 1.0):
    """E[exp(h Y_t)] for -lambda_minus < h < lambda_plus."""
    if t <= 0:
        raise DomainError("t must be positive")
    return np.exp(t * log_mgf(params, h))


def esscher_exponent(params: GtsParams, h, z):
    """Log-MGF of Y_1 under the Esscher measure with parameter ``h``, at ``z``."""
    return log_mgf(params, np.add(h, z)) - log_mgf(params, h)


def esscher_shift(params: GtsParams, h_star: float) -> GtsParams:
    """GTS parameters of the Esscher-transformed law (only the decay rates move)."""
    if not -params.lambda_minus < h_star < params.lambda_plus:
        raise DomainError(
            f"h={h_star} outside ({-params.lambda_minus}, {params.lambda_plus})"
        )
    return replace(
        params,
        lambda_plus=params.lambda_plus - h_star,
        lambda_minus=params.lambda_minus + h_star,
    )


def esscher_rate_range(params: GtsParams):
    """Admissible h-interval and the interval of rates it maps onto."""
    eps = 1e-8 * (params.lambda_plus + params.lambda_minus)
    lo = -params.lambda_minus + eps
    hi = params.lambda_plus - 1.0 - eps
    if hi <= lo:
        raise InvalidMeasure(
            "lambda_plus + lambda_minus must exceed 1 for a martingale measure"
        )
    return (lo, hi), (esscher_exponent(params, lo, 1.0), esscher_exponent(params, hi, 1.0))


def solve_esscher(params: GtsParams, r: float) -> EsscherSolution:
    """Find h* with ``esscher_exponent(params, h*, 1) == r``.

    The map h -> esscher_exponent(params, h, 1) is strictly increasing, so a
    bracketing root finder on the admissible interval always converges.
    """
    (lo, hi), (r_lo, r_hi) = esscher_rate_range(params)
    if not r_lo <= r <= r_hi:
        raise NoSolution(
            f"rate {r} outside attainable range [{r_lo:.6g}, {r_hi:.6g}]",
            r_range=(r_lo, r_hi),
        )

    def residual(h):
        return esscher_exponent(params, h, 1.0) - r

    h_star = brentq(residual, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    shifted = esscher_shift(params, h_star)
    if shifted.lambda_plus <= 1.0:
        raise InvalidMeasure(f"shifted lambda_plus={shifted.lambda_plus} <= 1")
    return EsscherSolution(h_star=float(h_star), risk_free_rate=float(r), shifted=shifted)


def cumulant(params: GtsParams, n: int) -> float:
    """n-th cumulant of Y_1 for n in 1..4."""
    if n not in (1, 2, 3, 4):
        raise DomainError("only cumulants 1..4 are supported")
    p = params
    out = p.mu if n == 1 else 0.0
    for sign, a, b, lam in ((1, p.alpha_plus, p.beta_plus, p.lambda_plus),
                            ((-1) ** n, p.alpha_minus, p.beta_minus, p.lambda_minus)):
        if a == 0:
            continue
        if b >= n:
            raise DomainError(f"cumulant {n} needs beta < {n}")
        if float(n - b).is_integer() and n - b <= 0:
            raise DomainError("Gamma pole in cumulant")
        out += sign * a * float(gamma(n - b)) * lam ** (b - n)
    return float(out)


def rescale(params: GtsParams, amplitude_c: float, time_factor_s: float,
            unit: Unit | None = None) -> GtsParams:
    """Law of ``c * Y_s`` where ``Y`` has the given parameters."""
    if amplitude_c <= 0 or time_factor_s <= 0:
        raise DomainError("scale factors must be positive")
    c, s = amplitude_c, time_factor_s
    p = params
    return GtsParams(
        mu=s * c * p.mu,
        beta_plus=p.beta_plus,
        beta_minus=p.beta_minus,
        alpha_plus=s * p.alpha_plus * c**p.beta_plus,
        alpha_minus=s * p.alpha_minus * c**p.beta_minus,
        lambda_plus=p.lambda_plus / c,
        lambda_minus=p.lambda_minus / c,
        unit=p.unit if unit is None else unit,
    )


def to_decimal_annual(params: GtsParams, days_per_year: float = DAYS_PER_YEAR) -> GtsParams:
    """Convert percent-per-day parameters to decimal-per-year ones."""
    if params.unit is Unit.DecimalAnnual:
        return params
    return rescale(params, 0.01, days_per_year, unit=Unit.DecimalAnnual)


def annualized_volatility(params: GtsParams, days_per_year: float = DAYS_PER_YEAR) -> float:
    """Annualized volatility (decimal) implied by the second cumulant."""
    return math.sqrt(cumulant(to_decimal_annual(params, days_per_year), 2))


# Parameter derivatives of the characteristic exponent, used by the
# likelihood score.  Each tail contributes T = alpha * G(beta) * P(beta, lambda)
# with G(beta) = Gamma(-beta) and P = A**beta - lambda**beta, A = lambda + c.

def _tail_derivatives(alpha, beta, lam, a):
    g = _gamma_neg(beta)
    psi0 = float(polygamma(0, -beta))
    psi1 = float(polygamma(1, -beta))
    g1 = -g * psi0
    g2 = g * (psi0**2 + psi1)
    la, ll = np.log(a), math.log(lam)
    ab, lb = a**beta, lam**beta
    p = ab - lb
    p_b = ab * la - lb * ll
    p_bb = ab * la**2 - lb * ll**2
    p_l = beta * (a ** (beta - 1) - lam ** (beta - 1))
    p_ll = beta * (beta - 1) * (a ** (beta - 2) - lam ** (beta - 2))
    p_bl = a ** (beta - 1) * (1 + beta * la) - lam ** (beta - 1) * (1 + beta * ll)
    first = {
        "alpha": g * p,
        "beta": alpha * (g1 * p + g * p_b),
        "lambda": alpha * g * p_l,
    }
    second = {
        ("alpha", "alpha"): np.zeros_like(p),
        ("alpha", "beta"): g1 * p + g * p_b,
        ("alpha", "lambda"): g * p_l,
        ("beta", "beta"): alpha * (g2 * p + 2 * g1 * p_b + g * p_bb),
        ("beta", "lambda"): alpha * (g1 * p_l + g * p_bl),
        ("lambda", "lambda"): alpha * g * p_ll,
    }
    return first, second


def exponent_derivatives(params: GtsParams, xi):
    """First and second derivatives of Psi(xi) in the order of ``PARAM_NAMES``.

    Returns ``(d1, d2)`` with shapes ``(7, len(xi))`` and ``(7, 7, len(xi))``.
    """
    p = params
    xi = np.asarray(xi, dtype=complex)
    d1 = np.zeros((7,) + xi.shape, dtype=complex)
    d2 = np.zeros((7, 7) + xi.shape, dtype=complex)
    d1[0] = 1j * xi
    sides = (
        (p.alpha_plus, p.beta_plus, p.lambda_plus, p.lambda_plus - 1j * xi, (1, 3, 5)),
        (p.alpha_minus, p.beta_minus, p.lambda_minus, p.lambda_minus + 1j * xi, (2, 4, 6)),
    )
    for alpha, beta, lam, a, (ib, ia, il) in sides:
        first, second = _tail_derivatives(alpha, beta, lam, a)
        index = {"beta": ib, "alpha": ia, "lambda": il}
        for name, val in first.items():
            d1[index[name]] = val
        for (u, v), val in second.items():
            d2[index[u], index[v]] = val
            d2[index[v], index[u]] = val
    return d1, d2
