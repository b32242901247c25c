"""SPI/ARSPI disagreement, drought events and empirical return periods."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, NonFinite
from .indexseries import IndexSeries

CHARACTERISTICS = ("duration", "severity", "peak")
EVENT_THRESHOLDS = (0.0, -1.0, -1.5, -2.0)


@dataclass(frozen=True)
class MismatchReport:
    """Type 1: ARSPI > 0 while SPI < -1.5. Type 2: ARSPI < -1.5 while SPI > 0."""

    window: int
    t: np.ndarray
    year: np.ndarray
    month: np.ndarray
    spi: np.ndarray
    arspi: np.ndarray
    type1: np.ndarray
    type2: np.ndarray

    @property
    def aligned_length(self) -> int:
        return int(self.t.size)

    @property
    def type1_count(self) -> int:
        return int(self.type1.sum())

    @property
    def type2_count(self) -> int:
        return int(self.type2.sum())

    @property
    def type1_rate(self) -> float:
        return self.type1_count / self.aligned_length

    @property
    def type2_rate(self) -> float:
        return self.type2_count / self.aligned_length

    @property
    def type1_t(self) -> np.ndarray:
        return self.t[self.type1]

    @property
    def type2_t(self) -> np.ndarray:
        return self.t[self.type2]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,year,month,spi,arspi,type\n")
        for i in np.flatnonzero(self.type1 | self.type2):
            kind = 1 if self.type1[i] else 2
            buf.write(f"{int(self.t[i])},{int(self.year[i])},{int(self.month[i])},"
                      f"{float(self.spi[i])!r},{float(self.arspi[i])!r},{kind}\n")
        return buf.getvalue()


def mismatch(spi: IndexSeries, arspi: IndexSeries) -> MismatchReport:
    """Compare two indices on their common time points."""
    common, i_spi, i_ar = np.intersect1d(spi.t, arspi.t, assume_unique=True, return_indices=True)
    if common.size == 0:
        raise AlignmentError("SPI and ARSPI share no time points")
    if spi.window and arspi.window and spi.window != arspi.window:
        raise AlignmentError(f"window mismatch: {spi.window} vs {arspi.window}")
    if np.any(spi.year[i_spi] != arspi.year[i_ar]) or np.any(spi.month[i_spi] != arspi.month[i_ar]):
        raise AlignmentError("SPI and ARSPI calendars disagree")
    s = spi.values[i_spi]
    a = arspi.values[i_ar]
    return MismatchReport(
        spi.window or arspi.window, common, spi.year[i_spi], spi.month[i_spi], s, a,
        (a > 0) & (s < -1.5), (a < -1.5) & (s > 0),
    )


@dataclass(frozen=True)
class DroughtEvent:
    """A maximal run below the threshold; indices are positions in the series."""

    start_index: int
    end_index: int
    severity: float
    peak: float

    @property
    def duration(self) -> int:
        return self.end_index - self.start_index + 1

    def characteristic(self, name: str) -> float:
        if name not in CHARACTERISTICS:
            raise ValueError(f"characteristic must be one of {CHARACTERISTICS}")
        return float(getattr(self, name))


def extract_events(index, threshold: float = 0.0) -> list[DroughtEvent]:
    """Runs of consecutive values strictly below ``threshold``.

    Severity is the negated sum over the run and peak the negated minimum.
    """
    v = np.asarray(index.values if isinstance(index, IndexSeries) else index, dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFinite("index series contains non-finite values")
    below = np.concatenate(([False], v < threshold, [False])).astype(np.int8)
    edges = np.diff(below)
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1) - 1
    return [
        DroughtEvent(int(s), int(e), float(-v[s:e + 1].sum()), float(-v[s:e + 1].min()))
        for s, e in zip(starts, ends)
    ]


def return_period(events, characteristic: str, level: float, series_years: float) -> float:
    """Mean recurrence in years of events whose characteristic exceeds ``level``.

    ``(N / n) / P(C > c)`` with ``P`` the empirical survival fraction over the
    ``n`` events; ``inf`` when no event exceeds the level.
    """
    if not events:
        raise ValueError("need at least one event")
    c = np.array([e.characteristic(characteristic) for e in events])
    n = c.size
    survival = np.count_nonzero(c > level) / n
    if survival == 0:
        return math.inf
    return (series_years / n) / survival


def events_to_csv(events, index: IndexSeries | None = None) -> str:
    buf = io.StringIO()
    buf.write("start_t,end_t,duration,severity,peak\n")
    for e in events:
        s, t = (int(index.t[e.start_index]), int(index.t[e.end_index])) if index is not None \
            else (e.start_index, e.end_index)
        buf.write(f"{s},{t},{e.duration},{e.severity!r},{e.peak!r}\n")
    return buf.getvalue()


def return_period_table(events, series_years: float) -> list[tuple[str, float, float]]:
    """Return periods at every distinct observed level of each characteristic."""
    rows = []
    if not events:
        return rows
    for name in CHARACTERISTICS:
        for level in np.unique([e.characteristic(name) for e in events]):
            rows.append((name, float(level), return_period(events, name, float(level), series_years)))
    return rows


def return_table_to_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("characteristic,level,return_years\n")
    for name, level, years in rows:
        buf.write(f"{name},{level!r},{years!r}\n")
    return buf.getvalue()
