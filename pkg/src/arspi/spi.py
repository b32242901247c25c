"""Conventional SPI: Gamma fit by Thom's approximation on wet moving totals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import GammaParams, gamma_cdf, std_normal_quantile
from .errors import AllDry, DegenerateWet
from .indexseries import IndexSeries
from .ingest import MtrSeries


@dataclass(frozen=True)
class GammaFit:
    params: GammaParams
    b_statistic: float
    zero_prob: float
    n_wet: int
    n_total: int


def thom_fit(wet) -> tuple[GammaParams, float]:
    """Thom's maximum-likelihood approximation for Gamma shape and scale.

    Shape is ``(1 + sqrt(1 + 4B/3)) / (4B)`` with ``B = ln(mean y) - mean(ln y)``,
    and scale is ``mean(y) / shape``.
    """
    y = np.asarray(wet, dtype=float)
    if y.size == 0:
        raise AllDry("no wet values to fit")
    ybar = float(y.mean())
    b = math.log(ybar) - float(np.log(y).mean())
    # rounding can leave B a hair above zero when every value is equal
    if y.size < 2 or np.all(y == y[0]) or not b > 0:
        raise DegenerateWet(f"wet values carry no spread (B = {b!r})")
    shape = (1.0 + math.sqrt(1.0 + 4.0 * b / 3.0)) / (4.0 * b)
    return GammaParams(shape, ybar / shape), b


def fit_gamma_mom(mtr: MtrSeries) -> GammaFit:
    """Fit the Gamma distribution to the wet windows of ``mtr``.

    The probability of a dry window is the dry fraction over all windows.
    """
    wet = mtr.values[~mtr.dry_mask]
    params, b = thom_fit(wet)
    n_total = len(mtr)
    return GammaFit(params, b, (n_total - wet.size) / n_total, int(wet.size), n_total)


def adjusted_cdf(y, fit: GammaFit):
    """Zero-inflated CDF: ``pi`` at ``y = 0``, ``pi + (1 - pi) F(y)`` above."""
    pi = fit.zero_prob
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < 0):
        raise ValueError("adjusted_cdf needs y >= 0")
    g = pi + (1.0 - pi) * np.asarray(gamma_cdf(np.where(y_arr > 0, y_arr, 0.0), fit.params))
    g = np.where(y_arr > 0, g, pi)
    return float(g) if g.ndim == 0 else g


def _spi_values(values: np.ndarray, fit: GammaFit) -> np.ndarray:
    eps = 1.0 / (2.0 * fit.n_total)
    g = np.clip(adjusted_cdf(values, fit), eps, 1.0 - eps)
    return std_normal_quantile(np.atleast_1d(g))


def spi_series(mtr: MtrSeries, per_month: bool = False) -> IndexSeries:
    """SPI for every window of ``mtr``.

    With ``per_month`` a separate Gamma (and dry probability) is fitted for
    each calendar month in which a window ends.
    """
    if not per_month:
        index = _spi_values(mtr.values, fit_gamma_mom(mtr))
    else:
        index = np.empty(len(mtr))
        month_of = (mtr.start_month - 1 + mtr.origin_index + np.arange(len(mtr))) % 12
        for m in range(12):
            sel = np.flatnonzero(month_of == m)
            if sel.size == 0:
                continue
            sub = MtrSeries(mtr.window, 0, mtr.values[sel])
            index[sel] = _spi_values(sub.values, fit_gamma_mom(sub))
    return IndexSeries.from_mtr("spi", mtr, np.arange(len(mtr)), index)
