"""Monthly precipitation input, moving totals and autocorrelation diagnostics."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CalendarGap,
    DegenerateSeries,
    DuplicateMonth,
    EmptyInput,
    MalformedRow,
    NegativeValue,
    WindowTooLong,
)

HEADER = ("year", "month", "precip")


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def month_offset(year: int, month: int, offset: int) -> tuple[int, int]:
    """Calendar (year, month) ``offset`` months after ``(year, month)``."""
    n = year * 12 + (month - 1) + offset
    return n // 12, n % 12 + 1


@dataclass(frozen=True)
class PrecipSeries:
    """Consecutive monthly precipitation depths anchored at ``start_year``/``start_month``."""

    start_year: int
    start_month: int
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.start_month <= 12:
            raise ValueError(f"start_month must be in 1..12, got {self.start_month}")
        vals = _frozen_array(self.values)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("precipitation series must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("precipitation values must be finite and non-negative")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size

    def calendar(self, index: int) -> tuple[int, int]:
        return month_offset(self.start_year, self.start_month, index)


@dataclass(frozen=True)
class MtrSeries:
    """Moving-total rainfall over ``window`` months.

    ``origin_index`` is the position in the parent precipitation series of the
    last month of the first complete window. Windows with a raw total of
    exactly zero are dry; their encoded value is 1 so that ``log`` of it is 0.
    """

    window: int
    origin_index: int
    values: np.ndarray
    start_year: int = 1
    start_month: int = 1
    dry_mask: np.ndarray = field(init=False)
    encoded_values: np.ndarray = field(init=False)

    def __post_init__(self):
        vals = _frozen_array(self.values)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("MTR series must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(vals)) or np.any(vals < 0):
            raise ValueError("MTR values must be finite and non-negative")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        dry = vals == 0
        dry.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dry_mask", dry)
        object.__setattr__(self, "encoded_values", _frozen_array(np.where(dry, 1.0, vals)))

    def __len__(self):
        return self.values.size

    @property
    def n_dry(self) -> int:
        return int(self.dry_mask.sum())

    def parent_index(self, i) -> np.ndarray:
        return self.origin_index + np.asarray(i)

    def calendar(self, i: int) -> tuple[int, int]:
        """Calendar month at which window ``i`` ends."""
        return month_offset(self.start_year, self.start_month, self.origin_index + int(i))


def parse_precip_csv(text) -> PrecipSeries:
    """Parse ``year,month,precip`` CSV text (or a text stream) into a series.

    Errors carry the 1-based file row, with the header on row 1.
    """
    if not isinstance(text, str):
        text = text.read()
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise EmptyInput("file is empty", row=1)
    header = tuple(c.strip().lower() for c in rows[0])
    if header != HEADER:
        raise MalformedRow(f"expected header {','.join(HEADER)!r}, got {','.join(rows[0])!r}", row=1)
    if len(rows) == 1:
        raise EmptyInput("no data rows after header", row=2)

    values = []
    first = prev = None
    for row_no, row in enumerate(rows[1:], start=2):
        if len(row) != 3:
            raise MalformedRow(f"expected 3 fields, got {len(row)}", row=row_no)
        try:
            year = int(row[0])
            month = int(row[1])
            precip = float(row[2])
        except ValueError:
            raise MalformedRow(f"cannot parse {','.join(row)!r}", row=row_no) from None
        if not 1 <= month <= 12:
            raise MalformedRow(f"month {month} outside 1..12", row=row_no)
        if not np.isfinite(precip):
            raise MalformedRow(f"non-finite precipitation {row[2]!r}", row=row_no)
        if precip < 0:
            raise NegativeValue(f"negative precipitation {precip}", row=row_no)
        if prev is not None:
            expected = month_offset(*prev, 1)
            if (year, month) == prev:
                raise DuplicateMonth(f"{year}-{month:02d} repeated", row=row_no)
            if (year, month) != expected:
                raise CalendarGap(
                    f"expected {expected[0]}-{expected[1]:02d}, got {year}-{month:02d}", row=row_no
                )
        else:
            first = (year, month)
        prev = (year, month)
        values.append(precip)
    return PrecipSeries(first[0], first[1], np.array(values))


def read_precip_csv(path) -> PrecipSeries:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_precip_csv(fh.read())


def format_precip_csv(series: PrecipSeries) -> str:
    lines = [",".join(HEADER)]
    for i, v in enumerate(series.values):
        y, m = series.calendar(i)
        lines.append(f"{y},{m},{float(v)!r}")
    return "\n".join(lines) + "\n"


def moving_total(series: PrecipSeries, window: int) -> MtrSeries:
    """Sum ``window`` consecutive months; incomplete leading windows are dropped."""
    if window < 1:
        raise ValueError("window must be >= 1")
    x = series.values
    if window > x.size:
        raise WindowTooLong(f"window {window} exceeds series length {x.size}")
    totals = np.convolve(x, np.ones(window), mode="valid")
    # rounding in the running sum can leave tiny residues on all-zero windows
    runs_of_zero = np.convolve((x == 0).astype(int), np.ones(window, dtype=int), mode="valid")
    totals = np.where(runs_of_zero == window, 0.0, totals)
    return MtrSeries(window, window - 1, totals, series.start_year, series.start_month)


@dataclass(frozen=True)
class AcfResult:
    """Correlation coefficients at lags ``0..max_lag`` with a symmetric band."""

    lags: np.ndarray
    coefficients: np.ndarray
    confidence_band: float
    kind: str = "acf"

    def significant_lags(self) -> np.ndarray:
        mask = np.abs(self.coefficients) > self.confidence_band
        mask[0] = False
        return self.lags[mask]

    def to_csv(self) -> str:
        lines = ["lag,coefficient,band"]
        for lag, c in zip(self.lags, self.coefficients):
            lines.append(f"{int(lag)},{float(c)!r},{self.confidence_band!r}")
        return "\n".join(lines) + "\n"


def _check_acf_input(values, max_lag):
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise ValueError("need at least 2 observations")
    if not 0 <= max_lag < x.size:
        raise ValueError(f"max_lag must be in [0, {x.size - 1}]")
    xc = x - x.mean()
    c0 = float(np.dot(xc, xc))
    if c0 == 0 or np.all(x == x[0]):
        raise DegenerateSeries("series has zero variance")
    return xc, c0


def _sample_acf(xc, c0, max_lag):
    n = xc.size
    r = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        r[k] = np.dot(xc[: n - k], xc[k:]) / c0
    return r


def acf(values, max_lag: int) -> AcfResult:
    """Sample autocorrelation with the biased (lag-0 denominator) estimator."""
    xc, c0 = _check_acf_input(values, max_lag)
    r = _sample_acf(xc, c0, max_lag)
    r[0] = 1.0
    return AcfResult(np.arange(max_lag + 1), r, 1.96 / np.sqrt(xc.size), "acf")


def pacf(values, max_lag: int) -> AcfResult:
    """Partial autocorrelation by the Durbin-Levinson recursion on the sample ACF."""
    xc, c0 = _check_acf_input(values, max_lag)
    r = _sample_acf(xc, c0, max_lag)
    r[0] = 1.0
    out = np.zeros(max_lag + 1)
    out[0] = 1.0
    phi = np.zeros(0)
    v = 1.0
    for k in range(1, max_lag + 1):
        num = r[k] - np.dot(phi, r[k - 1 : 0 : -1]) if k > 1 else r[1]
        a = num / v
        phi = np.append(phi - a * phi[::-1], a)
        v *= 1.0 - a * a
        out[k] = a
    return AcfResult(np.arange(max_lag + 1), out, 1.96 / np.sqrt(xc.size), "pacf")
