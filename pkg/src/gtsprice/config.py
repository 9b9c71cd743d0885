"""Run configuration: INI files, parameter files and command-line overrides."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .errors import ParseError
from .gts_core import DAYS_PER_YEAR, PARAM_NAMES, SP500_PARAMS, GtsParams, Unit
from .pricing import TABLE_MATURITIES, TABLE_MONEYNESS

ENGINES = ("bs", "extended", "generalized", "all")


@dataclass(frozen=True)
class RunConfig:
    params: GtsParams | str = SP500_PARAMS
    rate: float = 0.06
    spot: float = 4437.86
    sigma_star: float | None = None
    days_per_year: float = DAYS_PER_YEAR
    moneyness_grid: tuple = TABLE_MONEYNESS
    maturity_grid: tuple = TABLE_MATURITIES
    engine: str = "all"
    q: float = -3.0
    contour_b: float = 200.0
    contour_n: int = 60000
    frft_points: int = 2**14
    payoff_m_half_width: float = 2.0
    payoff_points: int = 401
    strike: float | None = None
    tau: float | None = None
    data: str | None = None
    out: str = "out"
    figures: bool = False
    extra: dict = field(default_factory=dict, compare=False)


def _floats(text):
    items = [t.strip() for t in text.replace(";", ",").split(",")]
    return tuple(float(t) for t in items if t)


def params_to_ini(params: GtsParams, section="params") -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp[section] = {k: repr(v) if isinstance(v, float) else str(v)
                   for k, v in params.as_dict().items()}
    return cp


def write_params(params: GtsParams, path):
    with open(path, "w") as handle:
        params_to_ini(params).write(handle)


def _params_from_section(sec, where) -> GtsParams:
    try:
        values = [float(sec[name]) for name in PARAM_NAMES]
    except KeyError as exc:
        raise ParseError(f"{where}: missing parameter {exc.args[0]}") from None
    except ValueError as exc:
        raise ParseError(f"{where}: {exc}") from None
    unit = Unit(sec.get("unit", Unit.PercentDaily.value))
    return GtsParams.from_array(values, unit)


def read_params(path) -> GtsParams:
    cp = configparser.ConfigParser()
    if not cp.read(path):
        raise ParseError(f"cannot read parameter file {path}")
    if "params" not in cp:
        raise ParseError(f"{path}: no [params] section")
    return _params_from_section(cp["params"], path)


def load_config(path=None) -> RunConfig:
    """Read an INI run configuration; absent keys keep their defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    cp = configparser.ConfigParser()
    try:
        with open(path) as handle:
            cp.read_file(handle)
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from None
    updates = {}
    if "params" in cp:
        sec = cp["params"]
        source = sec.get("source", "").strip()
        if source in ("", "inline"):
            updates["params"] = _params_from_section(sec, path)
        elif source == "sp500":
            updates["params"] = SP500_PARAMS
        elif source == "fit":
            updates["params"] = "fit"
        else:
            updates["params"] = read_params(Path(path).parent / source)
    types = {f.name: f.type for f in fields(RunConfig)}
    for section in ("run", "market", "grids", "engine", "paths"):
        if section not in cp:
            continue
        for key, raw in cp[section].items():
            if key not in types or key in ("params", "extra"):
                raise ParseError(f"{path}: unknown key {key!r} in [{section}]")
            updates[key] = _coerce(key, raw, path)
    return replace(cfg, **updates)


def _coerce(key, raw, where):
    raw = raw.strip()
    try:
        if key in ("moneyness_grid", "maturity_grid"):
            return _floats(raw)
        if key in ("contour_n", "frft_points", "payoff_points"):
            return int(raw)
        if key == "figures":
            return raw.lower() in ("1", "true", "yes", "on")
        if key in ("data", "out", "engine"):
            return raw or None
        if key in ("sigma_star", "strike", "tau"):
            return None if raw in ("", "none", "auto") else float(raw)
        return float(raw)
    except ValueError:
        raise ParseError(f"{where}: bad value {raw!r} for {key}") from None


def write_config(cfg: RunConfig, path):
    """Write the effective configuration so that it can be re-run verbatim."""
    cp = configparser.ConfigParser()
    if isinstance(cfg.params, GtsParams):
        cp["params"] = {"source": "inline", **{k: repr(v) if isinstance(v, float) else v
                                               for k, v in cfg.params.as_dict().items()}}
    else:
        cp["params"] = {"source": cfg.params}

    def fmt(v):
        if isinstance(v, tuple):
            return ", ".join(repr(x) for x in v)
        if v is None:
            return ""
        return repr(v) if isinstance(v, float) else str(v)

    cp["market"] = {k: fmt(getattr(cfg, k)) for k in ("rate", "spot", "sigma_star", "days_per_year")}
    cp["grids"] = {k: fmt(getattr(cfg, k)) for k in ("moneyness_grid", "maturity_grid", "strike", "tau")}
    cp["engine"] = {k: fmt(getattr(cfg, k)) for k in (
        "engine", "q", "contour_b", "contour_n", "frft_points",
        "payoff_m_half_width", "payoff_points")}
    cp["paths"] = {"data": fmt(cfg.data), "out": fmt(cfg.out), "figures": fmt(cfg.figures)}
    with open(path, "w") as handle:
        cp.write(handle)
