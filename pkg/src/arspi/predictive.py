"""Posterior-predictive draws of moving totals and the ARSPI transform.

At each window ``t`` one value is simulated per posterior draw from the
one-step conditional law given the observed previous window, and the observed
total is located in the empirical CDF of those values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .distributions import Rng, std_normal_quantile
from .errors import EmptyPosterior, IndexOutOfRange
from .indexseries import IndexSeries
from .ingest import MtrSeries
from .mcmc import PosteriorDraws
from .model import PARAM_NAMES, default_pi0

DEFAULT_M = 45_000

_B1, _B2, _SIG, _ALPHA, _PHI = (PARAM_NAMES.index(n) for n in ("beta1", "beta2", "sigma", "alpha", "phi"))
_DEFAULT = object()


@dataclass(frozen=True)
class PredictiveSample:
    time_index: int
    draws: np.ndarray

    def __post_init__(self):
        d = np.sort(np.asarray(self.draws, dtype=float))
        if d.size == 0:
            raise ValueError("predictive sample must be non-empty")
        d.setflags(write=False)
        object.__setattr__(self, "draws", d)

    def __len__(self):
        return self.draws.size


def select_draws(draws: PosteriorDraws, m: int) -> np.ndarray:
    """``m`` parameter rows taken in (chain, iteration) order.

    Fewer than available: an equally spaced subsample. More: the draws are
    cycled.
    """
    flat = draws.flat()
    n = flat.shape[0]
    if n == 0:
        raise EmptyPosterior("no posterior draws")
    if m < 1:
        raise ValueError("M must be >= 1")
    idx = (np.arange(m) * n) // m if m <= n else np.arange(m) % n
    return flat[idx]


class _Stepper:
    """Walks the per-draw logit path forward one window at a time."""

    def __init__(self, theta: np.ndarray, pi0):
        self.beta1 = theta[:, _B1]
        self.beta2 = theta[:, _B2]
        self.sigma = theta[:, _SIG]
        self.alpha = theta[:, _ALPHA]
        self.phi = theta[:, _PHI]
        if pi0 is None:
            self.logit = self.alpha / (1.0 - self.phi)
        else:
            self.logit = np.full(theta.shape[0], np.log(pi0) - np.log1p(-pi0))
        self.t = 0

    def advance_to(self, t: int):
        while self.t < t:
            self.logit = self.alpha + self.phi * self.logit
            self.t += 1

    def dry_probability(self) -> np.ndarray:
        return expit(self.logit)

    def draw(self, prev_encoded: float, rng: Rng) -> np.ndarray:
        m = self.beta1.size
        u = rng.generator.random(m)
        eps = rng.generator.standard_normal(m)
        wet = np.exp(self.beta1 + self.beta2 * np.log(prev_encoded) + self.sigma * eps)
        return np.where(u < self.dry_probability(), 1.0, wet)


def predictive_draws(draws: PosteriorDraws, mtr: MtrSeries, t: int, m: int = DEFAULT_M,
                     rng: Rng | None = None, pi0=_DEFAULT) -> PredictiveSample:
    """Sample ``m`` one-step predictive values for window ``t`` (0-based, ``t >= 1``)."""
    if not 1 <= t < len(mtr):
        raise IndexOutOfRange(f"window {t} outside 1..{len(mtr) - 1}")
    if pi0 is _DEFAULT:
        pi0 = default_pi0(mtr)
    rng = rng if rng is not None else Rng(0)
    step = _Stepper(select_draws(draws, m), pi0)
    step.advance_to(t)
    return PredictiveSample(t, step.draw(float(mtr.encoded_values[t - 1]), rng))


def empirical_cdf(sample: PredictiveSample, x: float) -> float:
    """Fraction of predictive draws ``<= x``."""
    return float(np.searchsorted(sample.draws, x, side="right")) / sample.draws.size


def arspi_value(sample: PredictiveSample, observed: float) -> float:
    """Gaussian transform of the clamped empirical CDF at ``observed``."""
    m = sample.draws.size
    eps = 1.0 / (2.0 * m)
    f = min(max(empirical_cdf(sample, observed), eps), 1.0 - eps)
    return std_normal_quantile(f)


def arspi_series(draws: PosteriorDraws, mtr: MtrSeries, m: int = DEFAULT_M,
                 rng: Rng | None = None, pi0=_DEFAULT) -> IndexSeries:
    """ARSPI for windows ``1..T-1``; window ``t`` uses stream ``rng.spawn(t)``.

    Observed values enter in encoded form, matching the predictive draws. The
    first window has no lagged value and is omitted.
    """
    if len(mtr) < 2:
        raise ValueError("need at least two windows")
    if pi0 is _DEFAULT:
        pi0 = default_pi0(mtr)
    rng = rng if rng is not None else Rng(0)
    step = _Stepper(select_draws(draws, m), pi0)
    enc = mtr.encoded_values
    values = np.empty(len(mtr) - 1)
    for t in range(1, len(mtr)):
        step.advance_to(t)
        sample = PredictiveSample(t, step.draw(float(enc[t - 1]), rng.spawn(t)))
        values[t - 1] = arspi_value(sample, float(enc[t]))
    return IndexSeries.from_mtr("arspi", mtr, np.arange(1, len(mtr)), values)
