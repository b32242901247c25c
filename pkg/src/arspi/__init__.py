"""Classic and auto-regressive Standardized Precipitation Indices.

The classic SPI maps a Gamma fit of moving-total rainfall to a standard
normal scale. The ARSPI replaces that fit with the posterior-predictive law
of a spike-and-slab log-normal AR(1) model estimated by MCMC.
"""

from .analysis import (
    DroughtEvent,
    MismatchReport,
    extract_events,
    mismatch,
    return_period,
)
from .distributions import (
    GammaParams,
    Rng,
    gamma_cdf,
    gamma_logpdf,
    lognormal_logpdf,
    regularized_lower_gamma,
    std_normal_cdf,
    std_normal_quantile,
)
from .indexseries import Category, IndexSeries, classify
from .ingest import MtrSeries, PrecipSeries, acf, moving_total, pacf, parse_precip_csv, read_precip_csv
from .mcmc import McmcConfig, PosteriorDraws, dic, gelman_rubin, psrf, run_chains
from .model import ArspiParams, log_likelihood, log_posterior, log_prior, pi_path, simulate_series
from .predictive import arspi_series, arspi_value, empirical_cdf, predictive_draws
from .spi import fit_gamma_mom, spi_series

__version__ = "0.1.0"
