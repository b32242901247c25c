"""Drought categories and the per-month index container shared by SPI and ARSPI."""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFinite
from .ingest import MtrSeries, month_offset


class Category(enum.IntEnum):
    """Drought / wetness classes, ordered from driest to wettest."""

    ExtremeDrought = 0
    SevereDrought = 1
    ModerateDrought = 2
    MildDrought = 3
    MildWet = 4
    ModerateWet = 5
    SevereWet = 6
    ExtremeWet = 7

    @property
    def is_drought(self) -> bool:
        return self <= Category.MildDrought


# probability mass of each class under a standard normal index
CATEGORY_PROBABILITY = {
    Category.ExtremeWet: 0.023,
    Category.SevereWet: 0.044,
    Category.ModerateWet: 0.092,
    Category.MildWet: 0.341,
    Category.MildDrought: 0.341,
    Category.ModerateDrought: 0.092,
    Category.SevereDrought: 0.044,
    Category.ExtremeDrought: 0.023,
}

_WET_LOWER = ((2.0, Category.ExtremeWet), (1.5, Category.SevereWet), (1.0, Category.ModerateWet),
              (0.0, Category.MildWet))
_DRY_UPPER = ((-2.0, Category.ExtremeDrought), (-1.5, Category.SevereDrought),
              (-1.0, Category.ModerateDrought))


def classify(value: float) -> Category:
    """Map an index value to its category.

    Wet classes are closed below (``0.0`` is mild wet, ``2.0`` extreme wet);
    drought classes are closed above (``-1.0`` is moderate drought, ``-2.0``
    extreme drought).
    """
    v = float(value)
    if not math.isfinite(v):
        raise NonFinite(f"cannot classify {value!r}")
    for lower, cat in _WET_LOWER:
        if v >= lower:
            return cat
    for upper, cat in _DRY_UPPER:
        if v <= upper:
            return cat
    return Category.MildDrought


def classify_array(values) -> np.ndarray:
    """Vectorised :func:`classify`; returns integer category codes."""
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        raise NonFinite("cannot classify non-finite values")
    wet = np.searchsorted([0.0, 1.0, 1.5, 2.0], v, side="right") + 3
    dry = np.searchsorted([-2.0, -1.5, -1.0], v, side="left")
    return np.where(v >= 0, wet, dry).astype(np.int64)


@dataclass(frozen=True)
class IndexSeries:
    """SPI or ARSPI values, one per MTR window, with calendar labels.

    ``t`` is the position in the parent monthly series of the window's last
    month, so two indices computed from the same data align on ``t``.
    """

    kind: str
    window: int
    t: np.ndarray
    year: np.ndarray
    month: np.ndarray
    mtr: np.ndarray
    values: np.ndarray
    categories: tuple = field(init=False)

    def __post_init__(self):
        arrays = {}
        for name, dtype in (("t", np.int64), ("year", np.int64), ("month", np.int64),
                            ("mtr", float), ("values", float)):
            arr = np.array(getattr(self, name), dtype=dtype)
            arr.setflags(write=False)
            arrays[name] = arr
            object.__setattr__(self, name, arr)
        n = arrays["t"].size
        if any(a.size != n for a in arrays.values()):
            raise ValueError("IndexSeries columns must have equal length")
        codes = classify_array(arrays["values"])
        object.__setattr__(self, "categories", tuple(Category(c) for c in codes))

    def __len__(self):
        return self.t.size

    @classmethod
    def from_mtr(cls, kind: str, mtr: MtrSeries, positions, values) -> "IndexSeries":
        """Build from index values at window ``positions`` of ``mtr``."""
        pos = np.asarray(positions, dtype=np.int64)
        t = mtr.origin_index + pos
        ym = [month_offset(mtr.start_year, mtr.start_month, int(k)) for k in t]
        year = [y for y, _ in ym]
        month = [m for _, m in ym]
        return cls(kind, mtr.window, t, year, month, mtr.values[pos], values)

    @property
    def column(self) -> str:
        return "index" if self.kind == "spi" else self.kind

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"t,year,month,mtr,{self.column},category\n")
        for i in range(len(self)):
            buf.write(
                f"{int(self.t[i])},{int(self.year[i])},{int(self.month[i])},"
                f"{float(self.mtr[i])!r},{float(self.values[i])!r},{self.categories[i].name}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, kind: str | None = None, window: int = 0) -> "IndexSeries":
        rows = list(csv.reader(io.StringIO(text)))
        header = [h.strip() for h in rows[0]]
        if header[:4] != ["t", "year", "month", "mtr"] or len(header) != 6:
            raise ValueError(f"unexpected index CSV header {header}")
        if kind is None:
            kind = "spi" if header[4] == "index" else header[4]
        body = [r for r in rows[1:] if r]
        cols = list(zip(*body)) if body else [[]] * 6
        return cls(
            kind,
            window,
            [int(v) for v in cols[0]],
            [int(v) for v in cols[1]],
            [int(v) for v in cols[2]],
            [float(v) for v in cols[3]],
            [float(v) for v in cols[4]],
        )
