"""Maximum-likelihood fitting of GTS parameters to daily percent returns.

Densities and their parameter derivatives all come from the same Fourier
inversion: the derivative of the density with respect to a parameter is the
inverse transform of ``phi * dPsi/dV``, and second derivatives use
``phi * (d2Psi/dVdW + dPsi/dV dPsi/dW)``.  On a fixed grid the returned score
and Hessian are therefore the exact derivatives of the discretized
log-likelihood.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gamma

from .errors import DataOutOfRange, DomainError, NonFinite, OutOfRange, TruncationError
from .gts_core import (
    PARAM_NAMES,
    GtsParams,
    Unit,
    characteristic_exponent,
    exponent_derivatives,
)
from .market_data import ReturnSeries
from .transform import FrftConfig, auto_config, density_grid, invert, query

DENSITY_FLOOR = 1e-300
#: beta is kept this far from 0 and 1.  At beta = 0 the factor Gamma(-beta)
#: has a pole that cancels against the power difference; closer than 1e-3
#: that cancellation costs the second derivatives most of their digits.
BETA_EPS = 1e-3
POSITIVE_EPS = 1e-8
LOWER = np.array([-np.inf, BETA_EPS, BETA_EPS] + [POSITIVE_EPS] * 4)
UPPER = np.array([np.inf, 1 - BETA_EPS, 1 - BETA_EPS] + [np.inf] * 4)


@dataclass
class FitState:
    params: GtsParams
    log_ml: float
    grad_norm: float
    max_eigen: float
    iteration: int


@dataclass
class FitResult:
    states: list = field(default_factory=list)
    converged: bool = False
    message: str = ""
    #: density grid of the last likelihood evaluation
    config: FrftConfig | None = None

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def final(self) -> FitState:
        return self.states[-1]


#: The likelihood grid resolves the characteristic function well past the
#: 1e-12 edge check, so the fit can move the parameters without leaving it.
LIKELIHOOD_DECAY_TOL = 1e-14
MAX_LIKELIHOOD_POINTS = 2**20


def likelihood_config(params: GtsParams, data: ReturnSeries, n_points: int = 2**14) -> FrftConfig:
    """Density grid for ``params`` wide enough to hold every observation."""
    r = _data_array(data)
    return auto_config(params, 1.0, n_points=n_points, cover=[r.min(), r.max()],
                       decay_tol=LIKELIHOOD_DECAY_TOL, max_points=MAX_LIKELIHOOD_POINTS)


def _data_array(data):
    return np.asarray(data.returns if isinstance(data, ReturnSeries) else data, dtype=float)


def log_likelihood(params: GtsParams, data: ReturnSeries, config: FrftConfig | None = None) -> float:
    """Sum of log densities of the observations under ``params`` (tau = 1)."""
    y = _data_array(data)
    if config is None:
        config = likelihood_config(params, ReturnSeries.from_values(y))
    grid = density_grid(params, 1.0, config)
    try:
        f = query(grid, y)
    except OutOfRange as exc:
        raise DataOutOfRange(str(exc)) from None
    return float(np.sum(np.log(np.maximum(f, DENSITY_FLOOR))))


def score_and_hessian(params: GtsParams, data: ReturnSeries, config: FrftConfig | None = None):
    """Gradient, Hessian and largest Hessian eigenvalue of the log-likelihood.

    Parameter order is ``PARAM_NAMES``.  Also returns the log-likelihood as a
    fourth element, since it falls out of the same transforms.
    """
    y = _data_array(data)
    if config is None:
        config = likelihood_config(params, ReturnSeries.from_values(y))
    grid = density_grid(params, 1.0, config)
    if y.min() < grid.x[0] or y.max() > grid.x[-1]:
        raise DataOutOfRange("observations outside the density grid")
    center = float(grid.x[config.n_points // 2])
    z = config.frequencies()
    phi = np.exp(characteristic_exponent(params, -z))
    d1, d2 = exponent_derivatives(params, -z)

    raw_f = np.interp(y, grid.x, grid.values)
    f = np.maximum(raw_f, DENSITY_FLOOR)
    fj = np.empty((7, y.size))
    for j in range(7):
        fj[j] = np.interp(y, grid.x, invert(phi * d1[j], config, center).real)
    hess = np.empty((7, 7))
    for j in range(7):
        for k in range(j, 7):
            spec = phi * (d2[j, k] + d1[j] * d1[k])
            fjk = np.interp(y, grid.x, invert(spec, config, center).real)
            hess[j, k] = hess[k, j] = np.sum(fjk / f - fj[j] * fj[k] / f**2)
    grad = np.sum(fj / f, axis=1)
    hess = 0.5 * (hess + hess.T)
    max_eigen = float(np.linalg.eigvalsh(hess)[-1])
    log_ml = float(np.sum(np.log(f)))
    return grad, hess, max_eigen, log_ml


def initial_guess(data: ReturnSeries, unit: Unit = Unit.PercentDaily) -> GtsParams:
    """Symmetric GTS (beta = 1/2 on both sides) matching the sample mean and variance."""
    y = _data_array(data)
    mean, var = float(np.mean(y)), float(np.var(y))
    if var <= 0:
        raise DomainError("constant data cannot be fitted")
    lam = 1.0 / math.sqrt(var)
    alpha = var * lam**1.5 / (2 * gamma(1.5))
    return GtsParams(mean, 0.5, 0.5, alpha, alpha, lam, lam, unit=unit)


def project(values: np.ndarray) -> np.ndarray:
    """Clip a parameter vector into beta in (0, 1), alpha > 0, lambda > 0."""
    return np.clip(np.array(values, dtype=float), LOWER, UPPER)


def free_mask(x, grad) -> np.ndarray:
    """Coordinates not pinned by a bound that the gradient pushes against."""
    at_lower = (x <= LOWER) & (grad < 0)
    at_upper = (x >= UPPER) & (grad > 0)
    return ~(at_lower | at_upper)


def _ascent_direction(grad, hess):
    """Newton direction, or a shifted-Newton one when the Hessian is indefinite.

    The shift works on the Jacobi-scaled Hessian ``D H D`` with
    ``D = diag(|H_jj|^-1/2)``, so parameters of very different magnitude
    (percent versus decimal units, say) are treated alike.  Subtracting
    ``nu * I`` with ``nu`` above the largest scaled eigenvalue makes the
    system negative definite, so the result is always an ascent direction.
    """
    diag = np.abs(np.diag(hess))
    d = 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0))
    scaled = hess * np.outer(d, d)
    max_eigen = float(np.linalg.eigvalsh(scaled)[-1])
    if max_eigen < 0:
        return -np.linalg.solve(hess, grad)
    nu = max_eigen + 1e-2
    return -d * np.linalg.solve(scaled - nu * np.eye(len(grad)), d * grad)


def fit(data: ReturnSeries, init: GtsParams | None = None, tol: float = 1e-3,
        max_iter: int = 200, config: FrftConfig | None = None,
        max_halvings: int = 60) -> FitResult:
    """Damped Newton ascent on the log-likelihood.

    Newton steps are used while the Hessian is negative definite, gradient
    steps otherwise; each step is halved until the log-likelihood increases,
    then projected back into the parameter domain.  The returned trajectory
    holds one state per accepted iterate, so its ``log_ml`` never decreases.

    The density grid stays fixed while it resolves the candidates.  If the
    line search stalls only because candidates leave it, and the caller did
    not pass ``config``, the grid is rebuilt around the current iterate.

    A coordinate sitting on its bound with the gradient pointing outward is
    held fixed.  ``grad_norm`` and ``max_eigen`` then describe the remaining
    free coordinates; in the interior they are the usual full-space values.
    """
    y = _data_array(data)
    if init is None:
        init = initial_guess(y)
    unit = init.unit
    may_regrid = config is None
    if may_regrid:
        config = likelihood_config(init, y)
    x = project(init.as_array())
    result = FitResult()

    def evaluate(vec):
        p = GtsParams.from_array(vec, unit)
        return p, score_and_hessian(p, y, config)

    def line_search(direction, floor):
        """Halve until the log-likelihood beats ``floor``; report grid exits."""
        step, truncated = 1.0, False
        for _ in range(max_halvings):
            cand = project(x + step * direction)
            try:
                cll = log_likelihood(GtsParams.from_array(cand, unit), y, config)
            except TruncationError:
                cll, truncated = -math.inf, True
            except (DataOutOfRange, DomainError):
                cll = -math.inf
            if cll > floor:
                return cand, False
            step *= 0.5
        return None, truncated

    params, (grad, hess, _, ll) = evaluate(x)
    result.config = config
    for it in range(max_iter + 1):
        if not math.isfinite(ll):
            raise NonFinite("log-likelihood is not finite",
                            last_state=result.states[-1] if result.states else None)
        free = free_mask(x, grad)
        sub = hess[np.ix_(free, free)]
        eig = float(np.linalg.eigvalsh(sub)[-1])
        gnorm = float(np.linalg.norm(grad[free]))
        result.states.append(FitState(params, ll, gnorm, eig, it))
        if gnorm < tol:
            result.converged = eig < 0
            pinned = [PARAM_NAMES[j] for j in np.flatnonzero(~free)]
            if not result.converged:
                result.message = "stationary, not a maximum"
            elif pinned:
                result.message = "converged with " + ", ".join(pinned) + " on the bound"
            else:
                result.message = "converged"
            return result
        if it == max_iter:
            break
        direction = np.zeros_like(x)
        direction[free] = _ascent_direction(grad[free], sub)
        cand, truncated = line_search(direction, ll)
        if cand is None and truncated and may_regrid:
            # the stored log_ml stays the floor, so the trajectory stays monotone
            try:
                config = likelihood_config(params, y)
            except TruncationError as exc:
                result.message = f"density grid cannot follow the iterate: {exc}"
                return result
            _, (grad, hess, _, ll) = evaluate(x)
            result.config = config
            free = free_mask(x, grad)
            direction = np.zeros_like(x)
            direction[free] = _ascent_direction(grad[free], hess[np.ix_(free, free)])
            cand, _ = line_search(direction, max(ll, result.states[-1].log_ml))
        if cand is None:
            result.message = "line search failed to increase the log-likelihood"
            return result
        x = cand
        params, (grad, hess, _, ll) = evaluate(x)
    result.message = "iteration limit reached"
    return result


TRAJECTORY_HEADER = ["iteration", *PARAM_NAMES, "log_ml", "grad_norm", "max_eigen"]


def write_trajectory(states, path):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_HEADER)
        for s in states:
            writer.writerow([s.iteration, *(repr(float(v)) for v in s.params.as_array()),
                             repr(s.log_ml), repr(s.grad_norm), repr(s.max_eigen)])
