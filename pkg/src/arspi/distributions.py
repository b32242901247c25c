"""Special functions and variate generators used across the package.

Only the handful of distributions the index pipeline needs live here: the
two-parameter Gamma (classic SPI), the log-normal slab of the AR model, the
standard normal CDF / quantile used for the Gaussian mapping, and seeded
random streams for simulation and MCMC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

_EPS = 1e-14
_MAX_ITER = 100_000
_TINY = 1e-300


@dataclass(frozen=True)
class GammaParams:
    """Shape ``k`` and scale ``tau`` of a two-parameter Gamma distribution."""

    shape: float
    scale: float

    def __post_init__(self):
        for name in ("shape", "scale"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"Gamma {name} must be positive and finite, got {v!r}")

    @property
    def mean(self) -> float:
        return self.shape * self.scale


def gamma_logpdf(y, p: GammaParams):
    """Log density of Gamma(shape k, scale tau) at ``y > 0``.

    Returns ``(k-1) ln y - y/tau - ln Gamma(k) - k ln tau``; accepts scalars or
    arrays.
    """
    y_arr = np.asarray(y, dtype=float)
    if np.any(~(y_arr > 0)):
        raise DomainError("gamma_logpdf is defined for y > 0 only")
    k, tau = p.shape, p.scale
    out = (k - 1.0) * np.log(y_arr) - y_arr / tau - math.lgamma(k) - k * math.log(tau)
    return float(out) if out.ndim == 0 else out


def _lower_series(a: float, x: float) -> float:
    # P(a, x) by the power series; converges fast for x < a + 1
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(a * math.log(x) - x - math.lgamma(a))


def _upper_continued_fraction(a: float, x: float) -> float:
    # Q(a, x) by the Legendre continued fraction, modified Lentz evaluation
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(a * math.log(x) - x - math.lgamma(a)) * h


def regularized_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function P(a, x)."""
    if not a > 0:
        raise DomainError(f"shape must be positive, got {a!r}")
    if x < 0 or math.isnan(x):
        raise DomainError(f"x must be non-negative, got {x!r}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < a + 1.0:
        return min(1.0, _lower_series(a, x))
    return max(0.0, 1.0 - _upper_continued_fraction(a, x))


def gamma_cdf(y, p: GammaParams):
    """Gamma CDF ``P(k, y/tau)`` for scalar or array ``y >= 0``."""
    if np.ndim(y) == 0:
        return regularized_lower_gamma(p.shape, float(y) / p.scale)
    y_arr = np.asarray(y, dtype=float)
    flat = [regularized_lower_gamma(p.shape, v / p.scale) for v in y_arr.ravel()]
    return np.array(flat, dtype=float).reshape(y_arr.shape)


def lognormal_logpdf(y, m, sigma):
    """Log density of ``exp(N(m, sigma^2))`` at ``y``; broadcasts over arrays."""
    y_arr = np.asarray(y, dtype=float)
    s = np.asarray(sigma, dtype=float)
    if np.any(~(y_arr > 0)):
        raise DomainError("lognormal_logpdf is defined for y > 0 only")
    if np.any(~(s > 0)):
        raise DomainError("lognormal scale must be positive")
    ly = np.log(y_arr)
    z = (ly - m) / s
    out = -0.5 * z * z - np.log(s) - LOG_SQRT_2PI - ly
    return float(out) if np.ndim(out) == 0 else out


_erfc = np.frompyfunc(math.erfc, 1, 1)


def std_normal_cdf(x):
    """Standard normal CDF via the complementary error function."""
    if np.ndim(x) == 0:
        return 0.5 * math.erfc(-float(x) / math.sqrt(2.0))
    x_arr = np.asarray(x, dtype=float)
    return 0.5 * _erfc(-x_arr / math.sqrt(2.0)).astype(float)


# Acklam's rational approximation (relative error ~1.2e-9 before refinement)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _quantile_lower_half(u: float) -> float:
    if u < _P_LOW:
        q = math.sqrt(-2.0 * math.log(u))
        x = ((((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5])
             / ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0))
    else:
        q = u - 0.5
        r = q * q
        x = ((((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
             / (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0))
    # one Halley step on Phi(x) - u
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - u
    t = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - t / (1.0 + 0.5 * x * t)


def _quantile_scalar(u: float) -> float:
    if not (0.0 < u < 1.0):
        raise DomainError(f"normal quantile needs 0 < u < 1, got {u!r}")
    if u == 0.5:
        return 0.0
    if u > 0.5:
        return -_quantile_lower_half(1.0 - u)
    return _quantile_lower_half(u)


def std_normal_quantile(u):
    """Inverse standard normal CDF for ``0 < u < 1`` (scalar or array)."""
    if np.ndim(u) == 0:
        return _quantile_scalar(float(u))
    u_arr = np.asarray(u, dtype=float)
    flat = [_quantile_scalar(v) for v in u_arr.ravel()]
    return np.array(flat, dtype=float).reshape(u_arr.shape)


@dataclass(frozen=True)
class Rng:
    """Seeded, splittable random stream backed by the counter-based Philox generator.

    ``Rng(seed).spawn(i)`` derives an independent stream from ``(seed, i)`` via
    ``numpy.random.SeedSequence`` spawn keys, so stream ``i`` is the same no
    matter how many other streams were derived before it.
    """

    seed: int
    key: tuple = ()
    generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must be a 64-bit unsigned integer")
        ss = np.random.SeedSequence(int(self.seed), spawn_key=tuple(int(k) for k in self.key))
        object.__setattr__(self, "generator", np.random.Generator(np.random.Philox(ss)))

    def spawn(self, *keys: int) -> "Rng":
        return Rng(self.seed, self.key + tuple(keys))


def draw_uniform(rng: Rng, low=0.0, high=1.0, size=None):
    if not high > low:
        raise DomainError("uniform needs high > low")
    return rng.generator.uniform(low, high, size)


def draw_normal(rng: Rng, loc=0.0, scale=1.0, size=None):
    if np.any(np.asarray(scale) <= 0):
        raise DomainError("normal scale must be positive")
    return rng.generator.normal(loc, scale, size)


def draw_gamma(rng: Rng, p: GammaParams, size=None):
    return rng.generator.gamma(p.shape, p.scale, size)


def draw_lognormal(rng: Rng, m=0.0, sigma=1.0, size=None):
    if np.any(np.asarray(sigma) <= 0):
        raise DomainError("lognormal scale must be positive")
    return np.exp(rng.generator.normal(m, sigma, size))


def draw_bernoulli(rng: Rng, p, size=None):
    """0/1 variates; ``p`` may be an array broadcast against ``size``."""
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1)) or np.any(np.isnan(p_arr)):
        raise DomainError("Bernoulli probability must lie in [0, 1]")
    if size is None:
        size = p_arr.shape
    u = rng.generator.random(size)
    out = (u < p_arr).astype(np.int64)
    return int(out) if out.ndim == 0 else out
