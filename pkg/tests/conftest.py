import json
import os
from pathlib import Path

import numpy as np
import pytest

from arspi.distributions import Rng
from arspi.ingest import PrecipSeries

ORACLES = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())

# posterior means (SDs) per accumulation window, in the order beta1, beta2, sigma
COLORADO_POSTERIOR = {
    3: {"beta1": (0.3756, 0.0299), "beta2": (0.7220, 0.0200), "sigma": (0.4411, 0.0091),
        "alpha": (-6.8149, 0.7851), "phi": (0.0026, 0.5724)},
    6: {"beta1": (0.2465, 0.0291), "beta2": (0.8854, 0.0133), "sigma": (0.1916, 0.0039)},
    12: {"beta1": (0.1388, 0.0245), "beta2": (0.9523, 0.0084), "sigma": (0.0650, 0.0013)},
    24: {"beta1": (0.0885, 0.0205), "beta2": (0.9755, 0.0057), "sigma": (0.0313, 0.0006)},
}
COLORADO_DIC = {3: 4632.639, 6: 4526.911, 12: 3726.612, 24: 3636.744}

COLORADO_ENV = "ARSPI_COLORADO_CSV"


def colorado_path():
    """Path to the 1893-1991 monthly file, or None when it has not been supplied."""
    p = os.environ.get(COLORADO_ENV)
    return Path(p) if p else None


def synthetic_precip(n_months=240, seed=7, dry_prob=0.05, start=(1893, 1)) -> PrecipSeries:
    gen = Rng(seed).generator
    vals = gen.gamma(1.3, 1.1, n_months)
    vals[gen.random(n_months) < dry_prob] = 0.0
    return PrecipSeries(start[0], start[1], np.round(vals, 2))


@pytest.fixture
def oracles():
    return ORACLES


def pytest_addoption(parser):
    parser.addoption("--run-colorado", action="store_true", default=False,
                     help="run the long Colorado reproduction checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-colorado") or os.environ.get("ARSPI_RUN_COLORADO") == "1":
        return
    skip = pytest.mark.skip(reason="opt-in: pass --run-colorado (and set ARSPI_COLORADO_CSV)")
    for item in items:
        if "colorado" in item.keywords:
            item.add_marker(skip)
