"""Command-line pipeline: ingestion, fitting, index construction and analysis.

Exit codes: 0 success, 1 computation error, 2 I/O or usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .distributions import Rng
from .errors import ArspiError, ChecksumMismatch
from .indexseries import IndexSeries
from .ingest import PrecipSeries, acf, format_precip_csv, moving_total, pacf, read_precip_csv
from .mcmc import DEFAULT_SEED, McmcConfig, PosteriorDraws, dic, export_traces, psrf, run_chains
from .model import PARAM_NAMES, ArspiParams, default_pi0, simulate_series
from .predictive import DEFAULT_M, arspi_series
from .spi import spi_series
from .svg import line_plot

CATEGORY_HELP = (
    "Categories: ExtremeWet >= 2, SevereWet [1.5, 2), ModerateWet [1, 1.5), MildWet [0, 1), "
    "MildDrought (-1, 0), ModerateDrought (-1.5, -1], SevereDrought (-2, -1.5], "
    "ExtremeDrought <= -2. An index of exactly 0 is MildWet."
)


class UsageError(Exception):
    """Bad flags, config keys or missing files (exit code 2)."""


@dataclass
class RunConfig:
    input: Path | None = None
    window: int = 3
    chains: int = 3
    iterations: int = 150_000
    burn_in: int = 5_000
    thin: int = 10
    seed: int = DEFAULT_SEED
    m: int = DEFAULT_M
    out: Path = Path(".")
    per_month: bool = False
    thresholds: tuple = analysis.EVENT_THRESHOLDS
    jobs: int = 1

    def mcmc(self) -> McmcConfig:
        return McmcConfig(self.chains, self.iterations, self.burn_in, self.thin, self.seed)


_KEY_TYPES = {
    "input": Path, "window": int, "chains": int, "iterations": int, "burn_in": int, "thin": int,
    "seed": int, "m": int, "out": Path, "jobs": int,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {text!r}")


def _parse_thresholds(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise UsageError(f"bad thresholds {text!r}") from None


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment. Dashes in keys act as underscores."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    out = {}
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        try:
            if key in _KEY_TYPES:
                out[key] = _KEY_TYPES[key](value)
            elif key == "per_month":
                out[key] = _parse_bool(value)
            elif key == "thresholds":
                out[key] = _parse_thresholds(value)
            else:
                raise UsageError(f"{path}:{n}: unknown key {key!r}")
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}: {value!r}") from None
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    merged = read_config(args.config) if args.config else {}
    for key in (*_KEY_TYPES, "per_month", "thresholds"):
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    for key, val in merged.items():
        setattr(cfg, key, val)
    if cfg.window < 1:
        raise UsageError("window must be >= 1")
    return cfg


# ---------------------------------------------------------------- helpers

def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _require_input(cfg: RunConfig) -> Path:
    if cfg.input is None:
        raise UsageError("an input file is required (--input or 'input =' in the config)")
    if not Path(cfg.input).is_file():
        raise UsageError(f"input file not found: {cfg.input}")
    return Path(cfg.input)


def _load_mtr(cfg: RunConfig):
    path = _require_input(cfg)
    return path, moving_total(read_precip_csv(path), cfg.window)


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _index_plot(series: dict, title: str) -> str:
    return line_plot(
        {k: (v.t, v.values) for k, v in series.items()},
        title=title, xlabel="month index t", ylabel="index", hlines=(-2, -1.5, -1, 0, 1, 1.5, 2),
    )


def _read_index(path: Path, kind: str, window: int) -> IndexSeries:
    if not path.is_file():
        raise UsageError(f"index file not found: {path}")
    return IndexSeries.from_csv(path.read_text(encoding="utf-8"), kind=kind, window=window)


# --------------------------------------------------------------- commands

def cmd_spi(cfg: RunConfig) -> list[Path]:
    _, mtr = _load_mtr(cfg)
    idx = spi_series(mtr, per_month=cfg.per_month)
    z = cfg.window
    return [
        _write(cfg.out / f"spi_{z}.csv", idx.to_csv()),
        _write(cfg.out / f"spi_{z}.svg", _index_plot({"SPI": idx}, f"SPI, {z}-month totals")),
    ]


def format_summary(draws: PosteriorDraws, result, window: int) -> str:
    """Posterior mean/SD table with PSRF, followed by the DIC line."""
    mean = draws.flat().mean(axis=0)
    sd = draws.sd()
    lines = [f"window {window}: {draws.n_chains} chains x {draws.n_retained} retained draws",
             f"{'parameter':<12}{'mean':>12}{'sd':>12}{'psrf':>10}"]
    for j, name in enumerate(PARAM_NAMES):
        r = psrf(draws, name) if draws.n_chains > 1 and draws.n_retained >= 10 else math.nan
        lines.append(f"{name:<12}{mean[j]:>12.4f}{sd[j]:>12.4f}{r:>10.4f}")
    lines.append(f"DIC {window}-MTR: {result.dic:.2f} (Dbar {result.d_bar:.2f}, pD {result.p_d:.2f})")
    return "\n".join(lines) + "\n"


def cmd_arspi_fit(cfg: RunConfig) -> list[Path]:
    path, mtr = _load_mtr(cfg)
    mcfg = cfg.mcmc()
    pi0 = default_pi0(mtr)
    draws = run_chains(mtr, mcfg, pi0=pi0, n_jobs=cfg.jobs)
    z = cfg.window
    post = _write(cfg.out / f"posterior_{z}.csv", draws.to_csv())
    trace = _write(cfg.out / f"trace_{z}.csv", export_traces(draws))
    summary = _write(cfg.out / f"summary_{z}.txt", format_summary(draws, dic(draws, mtr, pi0), z))
    meta = {
        "window": z,
        "data_file": path.name,
        "data_sha256": _sha256(path),
        "posterior_sha256": _sha256(post),
        "pi0": pi0,
        "chains": mcfg.n_chains,
        "iterations": mcfg.iterations,
        "burn_in": mcfg.burn_in,
        "thin": mcfg.thin,
        "seed": mcfg.base_seed,
    }
    meta_path = _write(cfg.out / f"posterior_{z}.json", json.dumps(meta, indent=2) + "\n")
    return [post, trace, summary, meta_path]


def cmd_arspi_index(cfg: RunConfig, posterior: Path | None = None) -> list[Path]:
    path, mtr = _load_mtr(cfg)
    z = cfg.window
    posterior = Path(posterior) if posterior else cfg.out / f"posterior_{z}.csv"
    if not posterior.is_file():
        raise UsageError(f"posterior file not found: {posterior}")
    post_sha = _sha256(posterior)
    meta_path = posterior.with_suffix(".json")
    pi0 = default_pi0(mtr)
    if meta_path.is_file():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        if meta.get("posterior_sha256") != post_sha:
            raise ChecksumMismatch(f"{posterior} does not match the checksum in {meta_path}")
        if meta.get("data_sha256") != _sha256(path):
            raise ChecksumMismatch(f"{path} is not the data file the posterior was fitted to")
        pi0 = meta.get("pi0", pi0)
    else:
        print(f"warning: no metadata next to {posterior}; checksums not verified", file=sys.stderr)
    draws = PosteriorDraws.from_csv(posterior.read_text(encoding="utf-8"))
    idx = arspi_series(draws, mtr, cfg.m, Rng(cfg.seed), pi0=pi0)
    out = [_write(cfg.out / f"arspi_{z}.csv", idx.to_csv())]
    sidecar = {"window": z, "M": cfg.m, "seed": cfg.seed, "clamp_epsilon": 1.0 / (2.0 * cfg.m),
               "pi0": pi0, "posterior_sha256": post_sha}
    out.append(_write(cfg.out / f"arspi_{z}.json", json.dumps(sidecar, indent=2) + "\n"))
    spi_path = cfg.out / f"spi_{z}.csv"
    if spi_path.is_file():
        spi = _read_index(spi_path, "spi", z)
        out.append(_write(cfg.out / f"compare_{z}.svg",
                          _index_plot({"SPI": spi, "ARSPI": idx}, f"SPI and ARSPI, {z}-month totals")))
    return out


def _thr_tag(thr: float) -> str:
    return f"{thr:+.2f}"


def cmd_analyze(cfg: RunConfig, spi_path: Path | None = None, arspi_path: Path | None = None) -> list[Path]:
    z = cfg.window
    spi = _read_index(Path(spi_path) if spi_path else cfg.out / f"spi_{z}.csv", "spi", z)
    ars = _read_index(Path(arspi_path) if arspi_path else cfg.out / f"arspi_{z}.csv", "arspi", z)
    rep = analysis.mismatch(spi, ars)
    out = [_write(cfg.out / f"mismatch_{z}.csv", rep.to_csv())]
    print(f"window {z}: {rep.aligned_length} aligned months, "
          f"type 1 {rep.type1_count} ({100 * rep.type1_rate:.2f}%), "
          f"type 2 {rep.type2_count} ({100 * rep.type2_rate:.2f}%)")
    for name, idx in (("spi", spi), ("arspi", ars)):
        years = len(idx) / 12.0
        for thr in cfg.thresholds:
            events = analysis.extract_events(idx, thr)
            tag = f"{name}_{z}_{_thr_tag(thr)}"
            out.append(_write(cfg.out / f"events_{tag}.csv", analysis.events_to_csv(events, idx)))
            table = analysis.return_period_table(events, years)
            out.append(_write(cfg.out / f"returns_{tag}.csv", analysis.return_table_to_csv(table)))
    return out


def _parse_start(text: str) -> tuple[int, int]:
    try:
        y, m = (int(v) for v in text.split("-"))
    except ValueError:
        raise UsageError(f"--start must look like YYYY-MM, got {text!r}") from None
    if not 1 <= m <= 12:
        raise UsageError(f"--start month {m} outside 1..12")
    return y, m


def cmd_simulate(params_path: Path, length: int, seed: int, out: Path, start: str = "1900-01",
                 r0: float | None = None) -> list[Path]:
    """Synthetic monthly CSV (fit it with window 1) plus the ground-truth parameters."""
    if not Path(params_path).is_file():
        raise UsageError(f"parameter file not found: {params_path}")
    try:
        p = ArspiParams.from_csv(Path(params_path).read_text(encoding="utf-8"))
    except (ValueError, IndexError) as exc:
        raise UsageError(f"cannot parse {params_path}: {exc}") from None
    p.check()
    y, m = _parse_start(start)
    if r0 is None:
        r0 = math.exp(p.beta1 / (1.0 - p.beta2))
    mtr = simulate_series(p, length, None, r0, Rng(seed), y, m)
    series = PrecipSeries(y, m, mtr.values)
    return [
        _write(out / "simulated.csv", format_precip_csv(series)),
        _write(out / "truth_params.csv", p.to_csv()),
    ]


def cmd_acf(cfg: RunConfig, max_lag: int = 36, scale: str = "log") -> list[Path]:
    _, mtr = _load_mtr(cfg)
    x = np.log(mtr.encoded_values) if scale == "log" else mtr.values
    z = cfg.window
    return [
        _write(cfg.out / f"acf_{z}.csv", acf(x, max_lag).to_csv()),
        _write(cfg.out / f"pacf_{z}.csv", pacf(x, max_lag).to_csv()),
    ]


# ------------------------------------------------------------------ parser

def _common(p: argparse.ArgumentParser, data=True):
    p.add_argument("--config", type=Path, help="file of 'key = value' lines; flags win")
    p.add_argument("--out", type=Path, help="output directory (default: current directory)")
    p.add_argument("--window", type=int, help="accumulation window in months (default 3)")
    if data:
        p.add_argument("--input", type=Path, help="monthly CSV with header year,month,precip")


def _mcmc_flags(p: argparse.ArgumentParser):
    p.add_argument("--chains", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--seed", type=int, help=f"base seed (default {DEFAULT_SEED})")
    p.add_argument("--jobs", type=int, help="worker processes for the chains")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="arspi", description=__doc__.splitlines()[0], epilog=CATEGORY_HELP)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spi", help="classic SPI", epilog=CATEGORY_HELP)
    _common(p)
    p.add_argument("--per-month", dest="per_month", action="store_const", const=True,
                   help="fit a separate Gamma for each calendar month")

    p = sub.add_parser("arspi", help="fit the model or build the ARSPI")
    asub = p.add_subparsers(dest="arspi_command", required=True)
    f = asub.add_parser("fit", help="MCMC fit; writes posterior, trace, summary")
    _common(f)
    _mcmc_flags(f)
    i = asub.add_parser("index", help="ARSPI from a fitted posterior", epilog=CATEGORY_HELP)
    _common(i)
    i.add_argument("--posterior", type=Path, help="posterior CSV (default OUT/posterior_<window>.csv)")
    i.add_argument("--m", type=int, help=f"predictive draws per month (default {DEFAULT_M})")
    i.add_argument("--seed", type=int, help=f"predictive seed (default {DEFAULT_SEED})")

    p = sub.add_parser("analyze", help="mismatch, events and return periods", epilog=CATEGORY_HELP)
    _common(p, data=False)
    p.add_argument("--spi", type=Path, help="SPI CSV (default OUT/spi_<window>.csv)")
    p.add_argument("--arspi-file", dest="arspi_file", type=Path,
                   help="ARSPI CSV (default OUT/arspi_<window>.csv)")
    p.add_argument("--thresholds", type=_parse_thresholds, help="event thresholds, e.g. '0,-1,-1.5,-2'")

    p = sub.add_parser("simulate", help="synthetic series from known parameters")
    p.add_argument("--params", type=Path, required=True, help=f"CSV with columns {','.join(PARAM_NAMES)}")
    p.add_argument("--length", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--start", default="1900-01", help="first month, YYYY-MM")
    p.add_argument("--r0", type=float, help="lagged total before the first window")
    p.add_argument("--out", type=Path, default=Path("."))

    p = sub.add_parser("acf", help="ACF and PACF of the moving totals")
    _common(p)
    p.add_argument("--max-lag", dest="max_lag", type=int, default=36)
    p.add_argument("--scale", choices=("log", "raw"), default="log",
                   help="log of the encoded totals (default) or raw totals")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.command == "simulate":
            if args.length < 1:
                raise UsageError("--length must be >= 1")
            written = cmd_simulate(args.params, args.length, args.seed, args.out, args.start, args.r0)
        else:
            cfg = build_config(args)
            if args.command == "spi":
                written = cmd_spi(cfg)
            elif args.command == "arspi" and args.arspi_command == "fit":
                written = cmd_arspi_fit(cfg)
            elif args.command == "arspi":
                written = cmd_arspi_index(cfg, args.posterior)
            elif args.command == "analyze":
                written = cmd_analyze(cfg, args.spi, args.arspi_file)
            else:
                written = cmd_acf(cfg, args.max_lag, args.scale)
    except UsageError as exc:
        print(f"arspi: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"arspi: error: {exc}", file=sys.stderr)
        return 2
    except (ArspiError, ValueError) as exc:
        print(f"arspi: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
