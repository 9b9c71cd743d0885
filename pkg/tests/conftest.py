import csv
from pathlib import Path

import numpy as np
import pytest

from gtsprice.gts_core import SP500_PARAMS, GtsParams, solve_esscher, to_decimal_annual
from gtsprice.transform import cdf_grid

DATA = Path(__file__).parent / "data"

#: Parameter sets in percent-per-day units covering skew, symmetric and
#: low-activity shapes; all have beta in (0, 1) so they are valid for pricing.
PARAM_SETS = {
    "sp500": SP500_PARAMS,
    "symmetric": GtsParams(0.05, 0.5, 0.5, 0.6, 0.6, 1.0, 1.0),
    "right_heavy": GtsParams(-0.1, 0.9, 0.3, 0.4, 0.5, 0.6, 1.4),
    "low_beta": GtsParams(0.0, 0.35, 0.4, 2.0, 1.8, 1.5, 1.2),
    "near_one": GtsParams(0.2, 0.95, 0.95, 0.2, 0.25, 0.9, 0.8),
}


@pytest.fixture(scope="session")
def annual():
    return to_decimal_annual(SP500_PARAMS)


@pytest.fixture(scope="session")
def riskneutral(annual):
    return solve_esscher(annual, 0.06)


@pytest.fixture(scope="session")
def golden_table():
    with open(DATA / "price_table_golden.csv") as handle:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(handle)]


def sample_returns(params, n, seed):
    """Draw n one-period GTS returns by inverting the numerical CDF."""
    grid = cdf_grid(params, 1.0)
    u, idx = np.unique(grid.values, return_index=True)
    draws = np.random.default_rng(seed).uniform(1e-6, 1 - 1e-6, n)
    return np.interp(draws, u, grid.x[idx])


@pytest.fixture(scope="session")
def synthetic_returns():
    return sample_returns(SP500_PARAMS, 2000, seed=20240101)


#: (criterion, verdict, detail) triples filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, detail in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {detail}")
