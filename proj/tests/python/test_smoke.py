import math
from pathlib import Path

import numpy as np
import pytest

import lsgb

CONFIGS = sorted((Path(__file__).resolve().parents[2] / "configs").glob("*.json"))


def test_analytic_round_trip():
    assert lsgb.analytic.garcke_angle(1.0) == pytest.approx(2 * math.pi / 3)
    p = lsgb.analytic.garcke_from_lambda_ratio(0.2)
    assert p["r_gamma"] == pytest.approx(3.0)
    assert p["v"] == pytest.approx(math.pi - p["xi0"])
    assert lsgb.analytic.lambda_ratio_from_gamma_ratio(p["r_gamma"]) == pytest.approx(0.2)
    assert sum(lsgb.analytic.young_angles(1.2, 0.9, 1.0)) == pytest.approx(2 * math.pi)


def test_wetting_limit_raises():
    with pytest.raises(lsgb.WettingLimitError):
        lsgb.analytic.garcke_angle(0.4)


def test_initial_fields():
    d = lsgb.build_garcke(lambda_top=0.5, h=0.05)
    assert len(d["psi"]) == 3
    psi = d["psi"][0]
    assert isinstance(psi, np.ndarray) and psi.ndim == 2
    assert d["lambda"] == [0.5, 1.0, 1.0]
    # The top grain is positive near the top edge and negative at the bottom.
    assert psi[-1, psi.shape[1] // 2] > 0 > psi[0, psi.shape[1] // 2]


def test_short_garcke_run():
    r = lsgb.run_garcke(h=0.04, t_end=0.1)
    assert r["steps"] > 0
    assert len(r["tj_t"]) == len(r["tj_y"]) > 0
    assert r["tj_y"][-1] < r["tj_y"][0]
    assert all(0 < a < 360 for a in r["angles_deg"])


def test_config_errors():
    assert '"h"' in lsgb.check_config('{"grid": {"h": 0.01}}')
    with pytest.raises(lsgb.ConfigError, match="unknown key"):
        lsgb.check_config('{"grid": {"hh": 0.01}}')
    with pytest.raises(lsgb.ConfigError):
        lsgb.run_garcke(formulation="bogus")


def test_analytic_acceptance_criterion():
    (res,) = lsgb.acceptance(only=["C11"])
    assert res["id"] == "C11" and res["passed"]


@pytest.mark.parametrize("path", CONFIGS, ids=[p.name for p in CONFIGS])
def test_shipped_configs_parse(path):
    assert lsgb.check_config(path.read_text())
