import pytest

from gtsprice.config import RunConfig, load_config, read_params, write_config, write_params
from gtsprice.errors import ParseError
from gtsprice.gts_core import SP500_PARAMS, GtsParams, Unit


def test_defaults():
    cfg = load_config(None)
    assert cfg.params == SP500_PARAMS
    assert (cfg.rate, cfg.spot, cfg.days_per_year, cfg.q) == (0.06, 4437.86, 360, -3.0)
    assert len(cfg.moneyness_grid) == 23 and cfg.maturity_grid == (0.25, 0.5, 0.75, 1.0)
    assert cfg.sigma_star is None


def test_params_round_trip(tmp_path):
    p = GtsParams(0.1, 0.3, 0.7, 1.5, 2.5, 3.0, 4.0, unit=Unit.DecimalAnnual)
    write_params(p, tmp_path / "p.ini")
    assert read_params(tmp_path / "p.ini") == p


def test_config_round_trip(tmp_path):
    cfg = RunConfig(rate=0.03, sigma_star=0.25, moneyness_grid=(0.9, 1.1), maturity_grid=(0.5,),
                    engine="bs", strike=100.0, tau=0.5, out=str(tmp_path), figures=True)
    write_config(cfg, tmp_path / "c.ini")
    assert load_config(tmp_path / "c.ini") == cfg


def test_params_sources(tmp_path):
    write_params(SP500_PARAMS, tmp_path / "fitted.ini")
    (tmp_path / "a.ini").write_text("[params]\nsource = fitted.ini\n")
    (tmp_path / "b.ini").write_text("[params]\nsource = fit\n[paths]\ndata = x.csv\n")
    assert load_config(tmp_path / "a.ini").params == SP500_PARAMS
    b = load_config(tmp_path / "b.ini")
    assert b.params == "fit" and b.data == "x.csv"


@pytest.mark.parametrize("text", [
    "[market]\nrate = abc\n",
    "[market]\nbogus = 1\n",
    "[params]\nmu = 0.1\n",
    "not an ini file",
])
def test_bad_config(tmp_path, text):
    (tmp_path / "c.ini").write_text(text)
    with pytest.raises(ParseError):
        load_config(tmp_path / "c.ini")


def test_missing_config(tmp_path):
    with pytest.raises(ParseError):
        load_config(tmp_path / "none.ini")
    with pytest.raises(ParseError):
        read_params(tmp_path / "none.ini")
