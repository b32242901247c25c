"""Spike-and-slab log-normal AR(1) model for moving-total rainfall.

Each window is dry with probability ``pi_t`` (encoded value 1) or wet, in
which case ``log r_t ~ N(beta1 + beta2 log r_{t-1}, sigma^2)``. The dry
probability follows ``logit pi_t = alpha + phi logit pi_{t-1}``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import expit, logit

from .distributions import LOG_SQRT_2PI, Rng, lognormal_logpdf
from .errors import DomainError, NonFiniteLikelihood
from .ingest import MtrSeries

PARAM_NAMES = ("beta1", "beta2", "sigma", "alpha", "phi", "nu", "sigma_beta", "nu1", "nu2")
POSITIVE = ("sigma", "nu", "sigma_beta", "nu1", "nu2")
BOUNDED = ("beta2", "phi")

#: variance of the normal prior on ``alpha``
ALPHA_PRIOR_VAR = 0.25
#: rate of the exponential priors on ``nu``, ``nu1`` and ``nu2``
EXP_RATE = 0.1


@dataclass(frozen=True)
class ArspiParams:
    """Model parameters plus the hierarchical hyperparameters.

    Construction does not enforce the support; use :meth:`in_support` or
    :meth:`check`. ``log_prior`` returns ``-inf`` outside it.
    """

    beta1: float
    beta2: float
    sigma: float
    alpha: float
    phi: float
    nu: float = 10.0
    sigma_beta: float = 10.0 / 9.0
    nu1: float = 10.0
    nu2: float = 10.0

    def in_support(self) -> bool:
        vals = (self.beta1, self.beta2, self.sigma, self.alpha, self.phi,
                self.nu, self.sigma_beta, self.nu1, self.nu2)
        if not all(math.isfinite(v) for v in vals):
            return False
        return (abs(self.beta2) < 1 and abs(self.phi) < 1 and self.sigma > 0 and self.nu > 0
                and self.sigma_beta > 0 and self.nu1 > 0 and self.nu2 > 0)

    def check(self) -> "ArspiParams":
        if not self.in_support():
            raise DomainError(f"parameters outside support: {self}")
        return self

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in PARAM_NAMES], dtype=float)

    @classmethod
    def from_array(cls, arr) -> "ArspiParams":
        return cls(*(float(v) for v in arr))

    def replace(self, **changes) -> "ArspiParams":
        vals = asdict(self)
        vals.update(changes)
        return ArspiParams(**vals)

    def to_csv(self) -> str:
        return ",".join(PARAM_NAMES) + "\n" + ",".join(repr(float(getattr(self, n))) for n in PARAM_NAMES) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "ArspiParams":
        lines = [ln for ln in text.strip().splitlines() if ln.strip()]
        header = [h.strip() for h in lines[0].split(",")]
        row = [float(v) for v in lines[1].split(",")]
        if sorted(header) != sorted(PARAM_NAMES):
            raise ValueError(f"parameter CSV must have columns {PARAM_NAMES}")
        return cls(**dict(zip(header, row)))


def stationary_pi(alpha: float, phi: float) -> float:
    """Fixed point ``logit^-1(alpha / (1 - phi))`` of the dry-probability recursion."""
    return float(expit(alpha / (1.0 - phi)))


def default_pi0(mtr: MtrSeries) -> float | None:
    """Empirical dry fraction when it lies in (0, 1); ``None`` means use the stationary value."""
    frac = mtr.n_dry / len(mtr)
    return frac if 0.0 < frac < 1.0 else None


def logit_path(alpha: float, phi: float, length: int, logit0: float) -> np.ndarray:
    """``L[0] = logit0``, ``L[t] = alpha + phi L[t-1]``."""
    x = np.full(length, alpha, dtype=float)
    x[0] = logit0
    return lfilter([1.0], [1.0, -phi], x)


def _initial_logit(alpha: float, phi: float, pi0: float | None) -> float:
    if pi0 is None:
        return alpha / (1.0 - phi)
    if not 0.0 < pi0 < 1.0:
        raise DomainError(f"pi0 must lie in (0, 1), got {pi0!r}")
    return float(logit(pi0))


@dataclass(frozen=True)
class PiPath:
    values: np.ndarray

    def __len__(self):
        return self.values.size


def pi_path(p: ArspiParams, length: int, pi0: float | None) -> PiPath:
    """Dry probabilities ``pi_0 .. pi_{length-1}`` starting from ``pi0``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    lp = logit_path(p.alpha, p.phi, length, _initial_logit(p.alpha, p.phi, pi0))
    return PiPath(expit(lp))


def log_likelihood(p: ArspiParams, mtr: MtrSeries, pi0: float | None = None) -> float:
    """Log-likelihood conditional on the first window.

    Dry windows contribute ``log pi_t``; wet windows ``log(1 - pi_t)`` plus the
    log-normal density with location ``beta1 + beta2 log r_{t-1}`` where
    ``r_{t-1}`` is the encoded previous window.
    """
    n = len(mtr)
    if n < 2:
        raise ValueError("need at least two windows")
    lp = logit_path(p.alpha, p.phi, n, _initial_logit(p.alpha, p.phi, pi0))[1:]
    dry = mtr.dry_mask[1:]
    enc = mtr.encoded_values
    # log pi = -softplus(-L), log(1 - pi) = -softplus(L)
    spike = np.where(dry, -np.logaddexp(0.0, -lp), -np.logaddexp(0.0, lp))
    wet = ~dry
    loc = p.beta1 + p.beta2 * np.log(enc[:-1][wet])
    with np.errstate(all="ignore"):
        slab = lognormal_logpdf(enc[1:][wet], loc, p.sigma) if wet.any() else 0.0
        total = float(np.sum(spike) + np.sum(slab))
    if not math.isfinite(total):
        raise NonFiniteLikelihood(f"log-likelihood is {total} at {p}")
    return total


def _invgamma_logpdf(x: float, shape: float, rate: float) -> float:
    return shape * math.log(rate) - math.lgamma(shape) - (shape + 1.0) * math.log(x) - rate / x


def log_prior(p: ArspiParams, alpha_var: float = ALPHA_PRIOR_VAR) -> float:
    """Joint log density of the hierarchical prior; ``-inf`` outside the support.

    beta1 ~ N(0, sigma_beta^2), beta2 ~ U(-1, 1), alpha ~ N(0, alpha_var),
    phi ~ U(-1, 1), sigma ~ InvGamma(nu/2, nu/2), sigma_beta ~ InvGamma(nu1, nu2),
    nu, nu1, nu2 ~ Exp(rate 0.1). Inverse-gamma second arguments are rates.
    """
    if not p.in_support():
        return -math.inf
    lr = math.log(EXP_RATE)
    sb = p.sigma_beta
    return (
        -0.5 * (p.beta1 / sb) ** 2 - math.log(sb) - LOG_SQRT_2PI
        - math.log(2.0)
        - 0.5 * p.alpha * p.alpha / alpha_var - 0.5 * math.log(alpha_var) - LOG_SQRT_2PI
        - math.log(2.0)
        + _invgamma_logpdf(p.sigma, 0.5 * p.nu, 0.5 * p.nu)
        + lr - EXP_RATE * p.nu
        + _invgamma_logpdf(sb, p.nu1, p.nu2)
        + lr - EXP_RATE * p.nu1
        + lr - EXP_RATE * p.nu2
    )


def log_posterior(p: ArspiParams, mtr: MtrSeries, pi0: float | None = None,
                  alpha_var: float = ALPHA_PRIOR_VAR) -> float:
    """Unnormalised log posterior (prior plus likelihood)."""
    lprior = log_prior(p, alpha_var)
    if lprior == -math.inf:
        return -math.inf
    return lprior + log_likelihood(p, mtr, pi0)


def simulate_series(p: ArspiParams, length: int, pi0: float | None, r0: float, rng: Rng,
                    start_year: int = 1, start_month: int = 1) -> MtrSeries:
    """Draw ``length`` windows from the model given the lagged value ``r0``.

    ``pi0`` is the dry probability of the first simulated window (``None`` for
    the stationary value). Dry windows come back as raw 0 / encoded 1.
    """
    p.check()
    if length < 1:
        raise ValueError("length must be >= 1")
    if not r0 > 0:
        raise DomainError("r0 must be positive")
    pis = pi_path(p, length, pi0).values
    u = rng.generator.random(length)
    eps = rng.generator.standard_normal(length)
    dry = u < pis
    out = np.empty(length)
    log_prev = math.log(r0)
    for t in range(length):
        if dry[t]:
            out[t] = 0.0
            log_prev = 0.0
        else:
            log_prev = p.beta1 + p.beta2 * log_prev + p.sigma * eps[t]
            out[t] = math.exp(log_prev)
    return MtrSeries(1, 0, out, start_year, start_month)
