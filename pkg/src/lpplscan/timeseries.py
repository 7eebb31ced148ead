"""Price series ingestion, validation, and windowing.

Time is a real-valued day count. ISO-8601 dates are mapped to days since
1970-01-01; raw numeric timestamps are passed through unchanged, which lets
callers work in trading time instead of calendar time if they prefer.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import CsvFormatError, WindowError

EPOCH = date(1970, 1, 1)

DEFAULT_MIN_WINDOW_POINTS = 30


def parse_time(text: str) -> float:
    """Parse a timestamp cell: ISO-8601 date or raw real number of days."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    try:
        return float((date.fromisoformat(text) - EPOCH).days)
    except ValueError:
        raise CsvFormatError(f"unparseable timestamp: {text!r}") from None


def format_time(t: float, *, as_date: bool = False) -> str:
    if as_date and float(t).is_integer():
        return (EPOCH + timedelta(days=int(t))).isoformat()
    return format(t, ".12g")


@dataclass(frozen=True)
class PriceSeries:
    """Immutable, time-sorted series of strictly positive prices."""

    times: np.ndarray
    prices: np.ndarray
    label: str = ""
    log_prices: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        prices = np.asarray(self.prices, dtype=float)
        if times.ndim != 1 or prices.ndim != 1 or len(times) != len(prices):
            raise ValueError("times and prices must be 1-d arrays of equal length")
        if len(times) < 2:
            raise ValueError("a price series needs at least 2 observations")
        if not np.all(np.isfinite(times)) or not np.all(np.isfinite(prices)):
            raise ValueError("times and prices must be finite")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(prices <= 0):
            raise ValueError("all prices must be positive")
        times.setflags(write=False)
        prices.setflags(write=False)
        log_prices = np.log(prices)
        log_prices.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "log_prices", log_prices)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def t_start(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])


@dataclass(frozen=True)
class FitWindow:
    """Half-open index range [start, stop) resolving [t1, t2] within a series."""

    t1: float
    t2: float
    start: int
    stop: int

    def __post_init__(self):
        if not self.t1 < self.t2:
            raise WindowError(f"window start {self.t1} must precede end {self.t2}")
        if self.stop <= self.start:
            raise WindowError("window resolves to an empty index range")

    @property
    def n_points(self) -> int:
        return self.stop - self.start

    @property
    def length(self) -> float:
        return self.t2 - self.t1

    def times(self, series: PriceSeries) -> np.ndarray:
        return series.times[self.start : self.stop]

    def log_prices(self, series: PriceSeries) -> np.ndarray:
        return series.log_prices[self.start : self.stop]


def slice_window(
    series: PriceSeries,
    t1: float,
    t2: float,
    min_points: int = DEFAULT_MIN_WINDOW_POINTS,
) -> FitWindow:
    """Window covering every observation with t1 <= time <= t2."""
    if not t1 < t2:
        raise WindowError(f"window start {t1} must precede end {t2}")
    start = int(np.searchsorted(series.times, t1, side="left"))
    stop = int(np.searchsorted(series.times, t2, side="right"))
    n = stop - start
    if n < min_points:
        raise WindowError(
            f"window [{t1}, {t2}] holds {n} observations, fewer than the "
            f"minimum of {min_points}"
        )
    return FitWindow(t1=t1, t2=t2, start=start, stop=stop)


@dataclass(frozen=True)
class CsvOptions:
    date_column: str = "date"
    price_column: str = "price"


@dataclass(frozen=True)
class RejectedRow:
    line: int
    reason: str


@dataclass(frozen=True)
class LoadResult:
    series: PriceSeries
    rejected: tuple[RejectedRow, ...]
    deduplicated: int


def load_csv(source, options: CsvOptions = CsvOptions(), label: str = "") -> LoadResult:
    """Read a header CSV into a validated PriceSeries.

    Rows with unparseable timestamps or non-positive/unparseable prices are
    rejected and reported by line number. Duplicate timestamps with equal
    price are deduplicated; with different prices they are a hard error.
    """
    if isinstance(source, bytes):
        source = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise CsvFormatError("empty file") from None
    header = [h.strip() for h in header]
    try:
        t_idx = header.index(options.date_column)
        p_idx = header.index(options.price_column)
    except ValueError:
        raise CsvFormatError(
            f"missing column: need {options.date_column!r} and "
            f"{options.price_column!r}, got {header}"
        ) from None

    rows: list[tuple[float, float]] = []
    rejected: list[RejectedRow] = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) <= max(t_idx, p_idx):
            rejected.append(RejectedRow(line_no, "too few columns"))
            continue
        try:
            t = parse_time(row[t_idx])
        except CsvFormatError as exc:
            rejected.append(RejectedRow(line_no, str(exc)))
            continue
        try:
            p = float(row[p_idx])
        except ValueError:
            rejected.append(RejectedRow(line_no, f"unparseable price: {row[p_idx]!r}"))
            continue
        if not math.isfinite(p) or p <= 0:
            rejected.append(RejectedRow(line_no, f"non-positive price: {row[p_idx]!r}"))
            continue
        rows.append((t, p))

    if len(rows) < 2:
        raise CsvFormatError(f"only {len(rows)} valid rows; need at least 2")

    rows.sort(key=lambda tp: tp[0])
    times: list[float] = []
    prices: list[float] = []
    deduplicated = 0
    for t, p in rows:
        if times and t == times[-1]:
            if p == prices[-1]:
                deduplicated += 1
                continue
            raise CsvFormatError(
                f"duplicate timestamp {t} with conflicting prices "
                f"{prices[-1]} and {p}"
            )
        times.append(t)
        prices.append(p)

    if len(times) < 2:
        raise CsvFormatError("fewer than 2 distinct timestamps after deduplication")

    series = PriceSeries(np.array(times), np.array(prices), label=label)
    return LoadResult(series=series, rejected=tuple(rejected), deduplicated=deduplicated)


def save_csv(series: PriceSeries, sink) -> None:
    """Write `time,price,log_price` with 12 significant digits."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["time", "price", "log_price"])
    for t, p, lp in zip(series.times, series.prices, series.log_prices):
        writer.writerow([format(t, ".12g"), format(p, ".12g"), format(lp, ".12g")])


def dumps_csv(series: PriceSeries) -> str:
    buf = io.StringIO()
    save_csv(series, buf)
    return buf.getvalue()
