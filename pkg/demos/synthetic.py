"""Synthetic monthly rainfall shared by the demo scripts.

Gamma-distributed totals with a seasonal mean and the odd completely dry
month, roughly in inches. Good enough to exercise every code path.
"""

import numpy as np

from arspi import PrecipSeries


def monthly_precip(years=60, seed=1893, start_year=1893, dry_prob=0.03):
    rng = np.random.default_rng(seed)
    n = 12 * years
    month = np.arange(n) % 12
    mean = 1.2 + 0.6 * np.cos(2 * np.pi * (month - 6) / 12)
    x = rng.gamma(1.6, mean / 1.6)
    x[rng.random(n) < dry_prob] = 0.0
    return PrecipSeries(start_year, 1, np.round(x, 2))
