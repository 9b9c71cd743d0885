"""European call pricing under a generalized tempered stable (GTS) Levy process."""

from .gts_core import (
    DAYS_PER_YEAR,
    SP500_PARAMS,
    EsscherSolution,
    GtsParams,
    Unit,
    characteristic_exponent,
    solve_esscher,
    to_decimal_annual,
)
from .pricing import BsParams, ContourConfig, Engine, PricingRequest, price, price_table

__version__ = "0.1.0"

__all__ = [
    "DAYS_PER_YEAR",
    "SP500_PARAMS",
    "BsParams",
    "ContourConfig",
    "Engine",
    "EsscherSolution",
    "GtsParams",
    "PricingRequest",
    "Unit",
    "characteristic_exponent",
    "price",
    "price_table",
    "solve_esscher",
    "to_decimal_annual",
]
