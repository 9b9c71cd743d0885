"""Command-line front end: ``gtsprice {fit,esscher,price,qcalib,surface,density}``.

Settings come from built-in defaults, then an optional ``--config`` INI file,
then command-line flags.  Every command writes CSV files into ``--out`` along
with ``effective_config.ini``; ``--figures`` also renders PNGs there.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import calibration, market_data, pricing
from .config import ENGINES, RunConfig, load_config, read_params, write_config, write_params
from .errors import GtsError, NoSolution
from .gts_core import (
    GtsParams,
    annualized_volatility,
    esscher_exponent,
    esscher_rate_range,
    esscher_shift,
    solve_esscher,
    to_decimal_annual,
)
from .quadrature import CompositeRule
from .transform import cdf_grid, density_grid, query

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_PARTIAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _float_list(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _common(parser):
    parser.add_argument("--config", help="INI run configuration")
    parser.add_argument("--params", help="parameter file ([params] section) or 'sp500'/'fit'")
    parser.add_argument("--rate", type=float, help="risk-free rate, continuously compounded")
    parser.add_argument("--spot", type=float, help="spot price")
    parser.add_argument("--sigma-star", type=float, help="Black-Scholes volatility")
    parser.add_argument("--engine", choices=ENGINES, help="pricing engine(s)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--data", help="price CSV (Date, Adj Close)")
    parser.add_argument("--days-per-year", type=float, help="days per year for annualization")
    parser.add_argument("--q", type=float, help="contour shift (< -1)")
    parser.add_argument("--k-grid", type=_float_list, help="comma-separated moneyness S/K values")
    parser.add_argument("--tau-grid", type=_float_list, help="comma-separated maturities (years)")
    parser.add_argument("--figures", action="store_true", default=None,
                        help="also render PNG figures next to the CSV output")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gtsprice",
        description="European call pricing under a generalized tempered stable process.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "fit": "fit GTS parameters to a price series by maximum likelihood",
        "esscher": "solve for the Esscher martingale parameter h*",
        "price": "price one option (--strike, --tau) or the full moneyness x maturity table",
        "qcalib": "scan the payoff-reconstruction error for the optimal contour shift",
        "surface": "GTS minus Black-Scholes price over the moneyness x maturity grid",
        "density": "density and CDF curves under the h* and h*+1 measures",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p)
        if name == "price":
            p.add_argument("--strike", type=float, help="strike for a single quote")
            p.add_argument("--tau", type=float, help="maturity for a single quote")
        if name == "fit":
            p.add_argument("--tol", type=float, default=1e-3, help="gradient-norm tolerance")
            p.add_argument("--max-iter", type=int, default=200)
            p.add_argument("--strict", action="store_true",
                           help="exit with status 3 unless the fit converges")
        if name == "qcalib":
            p.add_argument("--payoff-half-width", type=float, help="M: x-window is [-M, M]")
            p.add_argument("--payoff-points", type=int, help="m: number of x samples")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config)
    updates = {}
    if args.params:
        if args.params in ("fit",):
            updates["params"] = "fit"
        elif args.params == "sp500":
            updates["params"] = RunConfig().params
        else:
            updates["params"] = read_params(args.params)
    mapping = {
        "rate": "rate", "spot": "spot", "sigma_star": "sigma_star", "engine": "engine",
        "out": "out", "data": "data", "days_per_year": "days_per_year", "q": "q",
        "k_grid": "moneyness_grid", "tau_grid": "maturity_grid", "figures": "figures",
        "strike": "strike", "tau": "tau", "payoff_half_width": "payoff_m_half_width",
        "payoff_points": "payoff_points",
    }
    for attr, key in mapping.items():
        value = getattr(args, attr, None)
        if value is not None:
            updates[key] = value
    return replace(cfg, **updates)


def _log(msg):
    print(msg, file=sys.stderr)


def _fit_params(cfg: RunConfig, out: Path, tol=1e-3, max_iter=200):
    if not cfg.data:
        raise UsageError("fitting needs --data PATH")
    prices = market_data.load_prices(cfg.data)
    if prices.dropped:
        _log(f"dropped {prices.dropped} rows without a close price")
    returns = market_data.log_returns(prices)
    market_data.write_returns(returns, out / "returns.csv")
    result = calibration.fit(returns, tol=tol, max_iter=max_iter)
    calibration.write_trajectory(result.states, out / "trajectory.csv")
    write_params(result.final.params, out / "params.ini")
    return result, returns


def _params(cfg: RunConfig, out: Path) -> GtsParams:
    if cfg.params == "fit":
        return _fit_params(cfg, out)[0].final.params
    return cfg.params


def _riskneutral(cfg, out):
    params = _params(cfg, out)
    annual = to_decimal_annual(params, cfg.days_per_year)
    return params, annual, solve_esscher(annual, cfg.rate)


def _sigma_star(cfg, params):
    if cfg.sigma_star is not None:
        return cfg.sigma_star
    return annualized_volatility(params, cfg.days_per_year)


def cmd_fit(cfg, out, args):
    result, returns = _fit_params(cfg, out, args.tol, args.max_iter)
    s = market_data.summary(returns, cfg.days_per_year)
    final = result.final
    print(f"observations {s.count}  annualized volatility {s.annualized_volatility:.4f}")
    print(f"{result.message} after {final.iteration} iterations: "
          f"log ML {final.log_ml:.4f}  |grad| {final.grad_norm:.3g}  max eigen {final.max_eigen:.4g}")
    if cfg.figures:
        from . import plots
        plots.trajectory_figure([st.log_ml for st in result], [st.grad_norm for st in result],
                                out / "trajectory.png")
    if not result.converged:
        _log(f"warning: fit did not converge ({result.message})")
        if args.strict:
            return EXIT_PARTIAL
    return EXIT_OK


def cmd_esscher(cfg, out, args):
    params = _params(cfg, out)
    annual = to_decimal_annual(params, cfg.days_per_year)
    try:
        sol = solve_esscher(annual, cfg.rate)
    except NoSolution as exc:
        lo, hi = exc.r_range
        raise GtsError(f"no Esscher solution: attainable rates are [{lo:.6g}, {hi:.6g}]") from None
    print(f"h* = {sol.h_star:.6f}")
    print(f"lambda_plus~ = {sol.shifted.lambda_plus:.6f}  lambda_minus~ = {sol.shifted.lambda_minus:.6f}")
    write_params(sol.shifted, out / "riskneutral_params.ini")
    _write_csv(out / "esscher.csv", ["rate", "h_star", "lambda_plus", "lambda_minus"],
               [[_fmt(cfg.rate), _fmt(sol.h_star), _fmt(sol.shifted.lambda_plus),
                 _fmt(sol.shifted.lambda_minus)]])
    (lo, hi), _ = esscher_rate_range(annual)
    hs = np.linspace(lo, hi, 201)
    psi = esscher_exponent(annual, hs, 1.0)
    _write_csv(out / "esscher_curve.csv", ["h", "psi_h_1"],
               [[_fmt(a), _fmt(b)] for a, b in zip(hs, psi)])
    rates = np.round(np.linspace(0.0, 0.10, 101), 10)
    hstars = [solve_esscher(annual, r).h_star for r in rates]
    _write_csv(out / "esscher_rates.csv", ["rate", "h_star"],
               [[_fmt(a), _fmt(b)] for a, b in zip(rates, hstars)])
    if cfg.figures:
        from . import plots
        plots.esscher_figure(hs, psi, rates, hstars, out / "esscher.png")
    return EXIT_OK


def _contour(cfg):
    return pricing.ContourConfig(q=cfg.q, rule=CompositeRule(0.0, cfg.contour_b, 12, cfg.contour_n))


def _engines(cfg):
    if cfg.engine == "all":
        return tuple(pricing.Engine)
    return (pricing.Engine(cfg.engine),)


def cmd_price(cfg, out, args):
    params, annual, rn = _riskneutral(cfg, out)
    bs = pricing.BsParams(_sigma_star(cfg, params))
    contour = _contour(cfg)
    if cfg.strike is not None or cfg.tau is not None:
        if cfg.strike is None or cfg.tau is None:
            raise UsageError("a single quote needs both --strike and --tau")
        rows = []
        for engine in _engines(cfg):
            req = pricing.PricingRequest(cfg.spot, cfg.strike, cfg.tau, cfg.rate, rn, engine)
            value = pricing.price(req, bs, contour)
            print(f"{engine.value:12s} {value:.6f}")
            rows.append([engine.value, _fmt(value)])
        _write_csv(out / "quote.csv", ["engine", "price"], rows)
        return EXIT_OK
    if not cfg.moneyness_grid or not cfg.maturity_grid:
        raise UsageError("the price table needs nonempty moneyness and maturity grids")
    table = pricing.price_table(cfg.spot, cfg.rate, rn, bs, cfg.moneyness_grid,
                                cfg.maturity_grid, contour, _engines(cfg))
    header = ["k", "tau", "bsm", "gts_extended", "gts_generalized", "error"]
    full, rounded, failures = [], [], []
    for r in table:
        vals = [r.bsm, r.gts_extended, r.gts_generalized, r.error]
        full.append([_fmt(r.k), _fmt(r.tau)] + [_fmt(v) for v in vals])
        rounded.append([f"{r.k:.2f}", f"{r.tau:g}"]
                       + ["" if math.isnan(v) else f"{v:.2f}" for v in vals])
        if r.failure:
            failures.append([_fmt(r.k), _fmt(r.tau), r.failure])
    _write_csv(out / "price_table.csv", header, rounded)
    _write_csv(out / "price_table_full.csv", header, full)
    print(f"h* = {rn.h_star:.6f}  sigma* = {bs.sigma_star:.6f}  cells = {len(table)}")
    if failures:
        _write_csv(out / "price_table_failures.csv", ["k", "tau", "failure"], failures)
        for k, tau, msg in failures:
            _log(f"cell k={k} tau={tau}: {msg}")
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_qcalib(cfg, out, args):
    M, m = cfg.payoff_m_half_width, cfg.payoff_points
    rows, samples = [], []
    xs = np.linspace(-M, M, m)
    results = {}
    for k in cfg.moneyness_grid:
        q_opt, er = pricing.optimal_q(k, M=M, m=m)
        results[k] = q_opt
        er2 = pricing.payoff_error(k, -2.0, M, m)
        rows.append([_fmt(k), _fmt(q_opt), _fmt(er), _fmt(er2)])
        exact = np.maximum(np.exp(xs) - k, 0.0)
        rec_opt = pricing.payoff_inverse_fourier(xs, k, q_opt)
        rec_2 = pricing.payoff_inverse_fourier(xs, k, -2.0)
        samples += [[_fmt(k), _fmt(x), _fmt(a), _fmt(b), _fmt(c)]
                    for x, a, b, c in zip(xs, exact, rec_opt, rec_2)]
        print(f"k={k:g}  q_opt={q_opt:.6f}  ER={er:.4g}  ER(q=-2)={er2:.4g}")
    _write_csv(out / "qcalib.csv", ["k", "q_opt", "er_min", "er_q_minus2"], rows)
    _write_csv(out / "payoff_samples.csv", ["k", "x", "payoff", "recon_q_opt", "recon_q_minus2"],
               samples)
    if cfg.figures:
        from . import plots
        ks = list(cfg.moneyness_grid)
        plots.qcalib_figure(ks, [float(r[1]) for r in rows], [float(r[2]) for r in rows],
                            out / "qcalib.png")
        k0 = min(ks, key=lambda v: abs(v - 1.0))
        plots.payoff_figure(xs, np.maximum(np.exp(xs) - k0, 0.0), {
            results[k0]: pricing.payoff_inverse_fourier(xs, k0, results[k0]),
            -2.0: pricing.payoff_inverse_fourier(xs, k0, -2.0),
        }, k0, out / "payoff.png")
    return EXIT_OK


def cmd_surface(cfg, out, args):
    if not cfg.moneyness_grid or not cfg.maturity_grid:
        raise UsageError("the error surface needs nonempty moneyness and maturity grids")
    params, annual, rn = _riskneutral(cfg, out)
    bs = pricing.BsParams(_sigma_star(cfg, params))
    err = pricing.error_surface(cfg.spot, cfg.rate, rn, bs, cfg.moneyness_grid, cfg.maturity_grid)
    rows = [[_fmt(k), _fmt(t), _fmt(err[i, j])]
            for i, k in enumerate(cfg.moneyness_grid) for j, t in enumerate(cfg.maturity_grid)]
    _write_csv(out / "surface.csv", ["k", "tau", "error"], rows)
    print(f"{len(rows)} cells, error range [{err.min():.4f}, {err.max():.4f}]")
    if cfg.figures:
        from . import plots
        plots.surface_figure(np.array(cfg.moneyness_grid), np.array(cfg.maturity_grid), err,
                             out / "surface.png")
    return EXIT_OK


DENSITY_TAUS = (1.0 / 12.0, 0.25, 0.5)


def cmd_density(cfg, out, args):
    params, annual, rn = _riskneutral(cfg, out)
    share = esscher_shift(rn.shifted, 1.0)
    xs = np.linspace(-0.5, 0.5, 401)
    rows, dens, cdfs = [], {}, {}
    for tau in DENSITY_TAUS:
        f0 = query(density_grid(rn.shifted, tau, h=rn.h_star), xs)
        f1 = query(density_grid(share, tau, h=rn.h_star + 1), xs)
        c0 = query(cdf_grid(rn.shifted, tau, h=rn.h_star), xs)
        c1 = query(cdf_grid(share, tau, h=rn.h_star + 1), xs)
        dens[tau], cdfs[tau] = (xs, f0, f1), (xs, c0, c1)
        rows += [[_fmt(tau), _fmt(x), _fmt(a), _fmt(b), _fmt(c), _fmt(d)]
                 for x, a, b, c, d in zip(xs, f0, f1, c0, c1)]
    _write_csv(out / "density.csv",
               ["tau", "x", "f_hstar", "f_hstar_plus_1", "cdf_hstar", "cdf_hstar_plus_1"], rows)
    if cfg.figures:
        from . import plots
        plots.density_figure(dens, out / "density.png", "density")
        plots.density_figure(cdfs, out / "cdf.png", "CDF")
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "esscher": cmd_esscher,
    "price": cmd_price,
    "qcalib": cmd_qcalib,
    "surface": cmd_surface,
    "density": cmd_density,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        write_config(cfg, out / "effective_config.ini")
        return COMMANDS[args.command](cfg, out, args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return EXIT_USAGE
    except GtsError as exc:
        _log(f"{type(exc).__name__}: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
