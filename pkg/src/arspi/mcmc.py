"""Adaptive Metropolis-within-Gibbs sampling of the ARSPI posterior.

Every parameter is updated in turn by a scalar random-walk proposal in an
unconstrained coordinate (log for positive parameters, inverse tanh for the
two autoregressive coefficients). Proposal scales adapt by Robbins-Monro on
their logarithm during burn-in and are frozen afterwards.
"""

from __future__ import annotations

import csv
import io
import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .distributions import LOG_SQRT_2PI, Rng
from .errors import EmptyPosterior, InsufficientChains, NonFiniteLikelihood
from .ingest import MtrSeries
from .model import (
    ALPHA_PRIOR_VAR,
    PARAM_NAMES,
    ArspiParams,
    default_pi0,
    log_likelihood,
    log_prior,
)

N_PARAMS = len(PARAM_NAMES)
_LOG_COORDS = (2, 5, 6, 7, 8)
_TANH_COORDS = (1, 4)
_LN2 = math.log(2.0)

DEFAULT_SEED = 1893


@dataclass(frozen=True)
class McmcConfig:
    n_chains: int = 3
    iterations: int = 150_000
    burn_in: int = 5_000
    thin: int = 10
    base_seed: int = DEFAULT_SEED
    target_acceptance: float = 0.44
    adaptation_window: int = 100
    alpha_prior_var: float = ALPHA_PRIOR_VAR

    def __post_init__(self):
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("need 0 <= burn_in < iterations")
        if not 0 < self.target_acceptance < 1:
            raise ValueError("target_acceptance must lie in (0, 1)")
        if self.adaptation_window < 1:
            raise ValueError("adaptation_window must be >= 1")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be a 64-bit unsigned integer")

    @property
    def n_retained(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass(frozen=True)
class SamplerRun:
    """Output of :func:`metropolis_within_gibbs` for a single chain."""

    samples: np.ndarray
    log_target: np.ndarray
    iterations: np.ndarray
    acceptance: np.ndarray
    scales: np.ndarray


def metropolis_within_gibbs(log_target, z0, n_iter, burn_in, thin, rng: Rng, scales=None,
                            target_acceptance=0.44, adaptation_window=100) -> SamplerRun:
    """Single-site adaptive random-walk Metropolis on an unconstrained vector.

    ``log_target(z)`` may return ``-inf`` (or NaN, treated as ``-inf``).
    Draws are kept after iteration ``i`` (1-based) when ``i > burn_in`` and
    ``(i - burn_in) % thin == 0``.
    """
    z = np.array(z0, dtype=float)
    d = z.size
    log_s = np.log(np.full(d, 0.1) if scales is None else np.asarray(scales, dtype=float))
    current = log_target(z)
    if not math.isfinite(current):
        raise NonFiniteLikelihood(f"log target is {current} at the initial point")

    n_keep = (n_iter - burn_in) // thin
    samples = np.empty((n_keep, d))
    lt = np.empty(n_keep)
    iters = np.empty(n_keep, dtype=np.int64)
    accepted = np.zeros(d, dtype=np.int64)
    # the frozen scale is the mean log scale over the second half of burn-in,
    # which is far less noisy than the last Robbins-Monro iterate
    avg_from = burn_in // 2
    log_s_sum = np.zeros(d)
    gen = rng.generator
    k = 0
    block = 1024
    for it in range(n_iter):
        if it % block == 0:
            noise = gen.standard_normal((block, d))
            logu = np.log(gen.random((block, d)))
        row = it % block
        adapting = it < burn_in
        if adapting:
            gain = (1.0 + it / adaptation_window) ** -0.6
        for j in range(d):
            old = z[j]
            z[j] = old + math.exp(log_s[j]) * noise[row, j]
            proposed = log_target(z)
            diff = proposed - current
            if diff >= 0 or logu[row, j] < diff:  # NaN compares False -> reject
                current = proposed
                if not adapting:
                    accepted[j] += 1
            else:
                z[j] = old
            if adapting:
                a = 1.0 if diff >= 0 else (math.exp(diff) if diff == diff else 0.0)
                log_s[j] += gain * (a - target_acceptance)
        if adapting and it >= avg_from:
            log_s_sum += log_s
            if it == burn_in - 1:
                log_s = log_s_sum / (burn_in - avg_from)
        i = it + 1
        if i > burn_in and (i - burn_in) % thin == 0 and k < n_keep:
            samples[k] = z
            lt[k] = current
            iters[k] = i
            k += 1
    n_post = n_iter - burn_in
    return SamplerRun(samples, lt, iters, accepted / max(n_post, 1), np.exp(log_s))


def to_unconstrained(p: ArspiParams, center: float = 0.0) -> np.ndarray:
    """Sampler coordinates of ``p``.

    Coordinate 0 is the centred intercept ``beta1 + beta2 * center``; with
    ``center`` at the mean lagged log rainfall it is nearly uncorrelated
    with ``beta2``, which single-site updates need when ``beta2`` is near 1.
    """
    z = p.as_array()
    z[0] = p.beta1 + p.beta2 * center
    z[list(_LOG_COORDS)] = np.log(z[list(_LOG_COORDS)])
    z[list(_TANH_COORDS)] = np.arctanh(z[list(_TANH_COORDS)])
    return z


def from_unconstrained(z, center: float = 0.0) -> np.ndarray:
    x = np.array(z, dtype=float)
    x[list(_LOG_COORDS)] = np.exp(x[list(_LOG_COORDS)])
    x[list(_TANH_COORDS)] = np.tanh(x[list(_TANH_COORDS)])
    x[0] = z[0] - x[1] * center
    return x


def _log_sech2(u: float) -> float:
    # log(1 - tanh(u)^2) without cancellation
    a = abs(u)
    return 2.0 * (_LN2 - a - math.log1p(math.exp(-2.0 * a)))


def log_jacobian(z) -> float:
    # the intercept shift is volume preserving
    return (z[2] + z[5] + z[6] + z[7] + z[8]) + _log_sech2(z[1]) + _log_sech2(z[4])


class ArspiTarget:
    """Log posterior of the ARSPI model in unconstrained coordinates.

    The slab term uses centred sufficient statistics of the wet transitions;
    the spike term depends only on ``(alpha, phi)`` and is memoised, so
    updates of the other seven coordinates never recompute it.
    With ``mtr=None`` the target is the prior alone.
    """

    def __init__(self, mtr: MtrSeries | None, pi0: float | None = None,
                 alpha_var: float = ALPHA_PRIOR_VAR):
        self.mtr = mtr
        self.pi0 = pi0
        self.alpha_var = alpha_var
        self._cache: OrderedDict = OrderedDict()
        self.center = 0.0
        if mtr is None:
            return
        enc = mtr.encoded_values
        dry = mtr.dry_mask[1:]
        wet = ~dry
        x = np.log(enc[:-1][wet])
        w = np.log(enc[1:][wet])
        self.n_wet = int(wet.sum())
        self.n_steps = len(mtr) - 1
        self.dry = dry
        self.sum_w = float(w.sum())
        if self.n_wet:
            self.mx, self.mw = float(x.mean()), float(w.mean())
            xc, wc = x - self.mx, w - self.mw
            self.sxx = float(xc @ xc)
            self.sww = float(wc @ wc)
            self.sxw = float(xc @ wc)
            self.center = self.mx

    def slab(self, beta1: float, beta2: float, sigma: float) -> float:
        if self.n_wet == 0:
            return 0.0
        d = self.mw - beta1 - beta2 * self.mx
        q = self.sww - 2.0 * beta2 * self.sxw + beta2 * beta2 * self.sxx + self.n_wet * d * d
        return (-self.sum_w - self.n_wet * (math.log(sigma) + LOG_SQRT_2PI)
                - 0.5 * q / (sigma * sigma))

    def spike(self, alpha: float, phi: float) -> float:
        key = (alpha, phi)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if self.pi0 is None and self.n_wet == self.n_steps:
            # stationary start keeps the logit path constant; no dry terms
            val = -self.n_steps * float(np.logaddexp(0.0, alpha / (1.0 - phi)))
            self._cache[key] = val
            if len(self._cache) > 4:
                self._cache.popitem(last=False)
            return val
        l0 = alpha / (1.0 - phi) if self.pi0 is None else math.log(self.pi0 / (1.0 - self.pi0))
        x = np.full(self.n_steps + 1, alpha)
        x[0] = l0
        lp = lfilter([1.0], [1.0, -phi], x)[1:]
        val = float(np.sum(np.where(self.dry, -np.logaddexp(0.0, -lp), -np.logaddexp(0.0, lp))))
        self._cache[key] = val
        if len(self._cache) > 4:
            self._cache.popitem(last=False)
        return val

    def log_posterior(self, p: ArspiParams) -> float:
        lp = log_prior(p, self.alpha_var)
        if self.mtr is None or lp == -math.inf:
            return lp
        return lp + self.slab(p.beta1, p.beta2, p.sigma) + self.spike(p.alpha, p.phi)

    def __call__(self, z) -> float:
        g, u2, ls, a, uphi, lnu, lsb, lnu1, lnu2 = z.tolist()
        b2 = math.tanh(u2)
        try:
            p = ArspiParams(g - b2 * self.center, b2, math.exp(ls), a, math.tanh(uphi),
                            math.exp(lnu), math.exp(lsb), math.exp(lnu1), math.exp(lnu2))
        except OverflowError:
            return -math.inf
        val = self.log_posterior(p)
        if val == -math.inf:
            return val
        return val + ls + lnu + lsb + lnu1 + lnu2 + _log_sech2(u2) + _log_sech2(uphi)


def initial_point(mtr: MtrSeries | None, rng: Rng) -> ArspiParams:
    """Data-informed, in-support starting values for one chain."""
    beta2, phi = rng.generator.uniform(-0.5, 0.5, 2)
    if mtr is None:
        beta1, sigma, alpha = 0.0, 1.0, 0.0
    else:
        lw = np.log(mtr.values[~mtr.dry_mask])
        beta1 = float(lw.mean()) * (1.0 - beta2) if lw.size else 0.0
        sigma = float(lw.std()) if lw.size > 1 and lw.std() > 0 else 1.0
        frac = min(max(mtr.n_dry / len(mtr), 1e-4), 1.0 - 1e-4)
        alpha = math.log(frac / (1.0 - frac))
    # hyperparameters at their prior means; InvGamma(10, 10) has mean 10/9
    return ArspiParams(beta1, float(beta2), sigma, alpha, float(phi), 10.0, 10.0 / 9.0, 10.0, 10.0)


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained draws, shaped ``(n_chains, n_retained, 9)`` in parameter order."""

    samples: np.ndarray
    log_posterior: np.ndarray
    iterations: np.ndarray
    acceptance: np.ndarray = field(default=None)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 3 or s.shape[2] != N_PARAMS:
            raise ValueError("samples must have shape (chains, draws, 9)")
        object.__setattr__(self, "samples", s)
        acc = self.acceptance
        if acc is None:
            acc = np.full((s.shape[0], N_PARAMS), np.nan)
        object.__setattr__(self, "acceptance", np.asarray(acc, dtype=float))

    @property
    def n_chains(self) -> int:
        return self.samples.shape[0]

    @property
    def n_retained(self) -> int:
        return self.samples.shape[1]

    @property
    def n_total(self) -> int:
        return self.n_chains * self.n_retained

    def param(self, name: str) -> np.ndarray:
        """``(n_chains, n_retained)`` array of one parameter."""
        return self.samples[:, :, PARAM_NAMES.index(name)]

    def flat(self) -> np.ndarray:
        """All draws in (chain, iteration) order, shape ``(n_total, 9)``."""
        return self.samples.reshape(-1, N_PARAMS)

    def mean(self) -> ArspiParams:
        return ArspiParams.from_array(self.flat().mean(axis=0))

    def sd(self) -> np.ndarray:
        return self.flat().std(axis=0, ddof=1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("chain,iteration," + ",".join(PARAM_NAMES) + ",log_posterior\n")
        for c in range(self.n_chains):
            for k in range(self.n_retained):
                vals = ",".join(repr(float(v)) for v in self.samples[c, k])
                buf.write(f"{c},{int(self.iterations[k])},{vals},{float(self.log_posterior[c, k])!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "PosteriorDraws":
        rows = list(csv.reader(io.StringIO(text)))
        expected = ["chain", "iteration", *PARAM_NAMES, "log_posterior"]
        if [h.strip() for h in rows[0]] != expected:
            raise ValueError("unexpected posterior CSV header")
        body = np.array([[float(v) for v in r] for r in rows[1:] if r])
        if body.size == 0:
            raise EmptyPosterior("posterior file has no draws")
        chains = body[:, 0].astype(int)
        n_chains = chains.max() + 1
        per = np.bincount(chains)
        if np.any(per != per[0]):
            raise ValueError("chains must have equal retained counts")
        body = body.reshape(n_chains, per[0], -1)
        return cls(body[:, :, 2:-1], body[:, :, -1], body[0, :, 1].astype(np.int64))


def _run_one_chain(args):
    mtr, cfg, pi0, chain = args
    rng = Rng(cfg.base_seed).spawn(chain)
    start = initial_point(mtr, rng)
    target = ArspiTarget(mtr, pi0, cfg.alpha_prior_var)
    run = metropolis_within_gibbs(
        target, to_unconstrained(start, target.center), cfg.iterations, cfg.burn_in, cfg.thin, rng,
        target_acceptance=cfg.target_acceptance, adaptation_window=cfg.adaptation_window,
    )
    samples = np.array([from_unconstrained(z, target.center) for z in run.samples]).reshape(-1, N_PARAMS)
    jac = np.array([log_jacobian(z) for z in run.samples])
    return samples, run.log_target - jac, run.iterations, run.acceptance


_DEFAULT = object()


def run_chains(mtr: MtrSeries | None, cfg: McmcConfig, pi0=_DEFAULT, n_jobs: int = 1) -> PosteriorDraws:
    """Run ``cfg.n_chains`` independent chains; chain ``c`` uses stream ``(base_seed, c)``.

    ``mtr=None`` samples the prior only. ``pi0`` defaults to
    :func:`~arspi.model.default_pi0` of the data.
    """
    if pi0 is _DEFAULT:
        pi0 = default_pi0(mtr) if mtr is not None else None
    jobs = [(mtr, cfg, pi0, c) for c in range(cfg.n_chains)]
    if n_jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_one_chain, jobs))
    else:
        results = [_run_one_chain(j) for j in jobs]
    return PosteriorDraws(
        np.stack([r[0] for r in results]),
        np.stack([r[1] for r in results]),
        results[0][2],
        np.stack([r[3] for r in results]),
    )


def gelman_rubin(chains) -> float:
    """Potential scale reduction factor for a ``(n_chains, n)`` array."""
    x = np.asarray(chains, dtype=float)
    m, n = x.shape
    if m < 2:
        raise InsufficientChains("PSRF needs at least two chains")
    if n < 10:
        raise InsufficientChains("PSRF needs at least 10 draws per chain")
    means = x.mean(axis=1)
    w = x.var(axis=1, ddof=1).mean()
    b = n * means.var(ddof=1)
    var_hat = (n - 1) / n * w + b / n
    return float(math.sqrt(var_hat / w)) if w > 0 else math.inf


def psrf(draws: PosteriorDraws, param: str) -> float:
    return gelman_rubin(draws.param(param))


@dataclass(frozen=True)
class DicResult:
    d_bar: float
    d_at_mean: float
    p_d: float
    dic: float


def dic_from_loglik(thetas, loglik) -> DicResult:
    """DIC for draws ``thetas`` (rows) under log-likelihood function ``loglik``."""
    th = np.asarray(thetas, dtype=float)
    if th.shape[0] == 0:
        raise EmptyPosterior("no draws")
    dev = np.array([-2.0 * loglik(row) for row in th])
    d_bar = float(dev.mean())
    d_hat = float(-2.0 * loglik(th.mean(axis=0)))
    p_d = d_bar - d_hat
    return DicResult(d_bar, d_hat, p_d, d_bar + p_d)


def dic(draws: PosteriorDraws, mtr: MtrSeries, pi0=_DEFAULT) -> DicResult:
    """DIC with the deviance at the coordinatewise posterior mean."""
    if draws.n_total == 0:
        raise EmptyPosterior("no draws")
    if pi0 is _DEFAULT:
        pi0 = default_pi0(mtr)
    return dic_from_loglik(draws.flat(), lambda row: log_likelihood(ArspiParams.from_array(row), mtr, pi0))


def export_traces(draws: PosteriorDraws) -> str:
    """Long-format ``chain,iteration,param,value`` CSV, params sorted by name."""
    if draws.n_total == 0:
        raise EmptyPosterior("no draws")
    order = sorted(range(N_PARAMS), key=lambda j: PARAM_NAMES[j])
    buf = io.StringIO()
    buf.write("chain,iteration,param,value\n")
    for c in range(draws.n_chains):
        for k in range(draws.n_retained):
            it = int(draws.iterations[k])
            for j in order:
                buf.write(f"{c},{it},{PARAM_NAMES[j]},{float(draws.samples[c, k, j])!r}\n")
    return buf.getvalue()
