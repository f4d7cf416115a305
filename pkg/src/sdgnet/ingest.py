"""Reading and cleaning indicator panels.

Canonical long CSV schema::

    country_code,indicator_id,sdg_goal,year,value

with one row per (country, indicator, year); an empty ``value`` cell marks
a missing observation. A wide variant with one column per year is accepted
through :func:`normalize_wide`.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, NamedTuple

from .exceptions import DomainError, DuplicateKeyError, ParseError

logger = logging.getLogger(__name__)

LONG_COLUMNS = ("country_code", "indicator_id", "sdg_goal", "year", "value")
WIDE_KEY_COLUMNS = ("country_code", "indicator_id", "sdg_goal")
DEFAULT_WINDOW = (2000, 2024)
CONSTANCY_TOL = 1e-9


class RawRecord(NamedTuple):
    country_code: str
    indicator_id: str
    sdg_goal: int
    year: int
    value: float | None  # None = missing


@dataclass(frozen=True)
class IndicatorSeries:
    country_code: str
    indicator_id: str
    sdg_goal: int
    years: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if not 1 <= self.sdg_goal <= 17:
            raise DomainError(f"sdg_goal {self.sdg_goal} not in 1..17")
        if len(self.years) != len(self.values):
            raise DomainError("years and values differ in length")
        for v in self.values:
            if not (math.isfinite(v) and 0.0 <= v <= 100.0):
                raise DomainError(f"{self.indicator_id}: score {v} outside [0, 100]")

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.years, self.values))


@dataclass(frozen=True)
class CountryPanel:
    country_code: str
    series: tuple[IndicatorSeries, ...]

    @property
    def retained_count(self) -> int:
        return len(self.series)

    @property
    def indicator_ids(self) -> list[str]:
        return [s.indicator_id for s in self.series]

    def to_records(self) -> list[RawRecord]:
        return [
            RawRecord(s.country_code, s.indicator_id, s.sdg_goal, y, v)
            for s in self.series
            for y, v in zip(s.years, s.values)
        ]


class DropEntry(NamedTuple):
    country_code: str
    indicator_id: str
    reason: str  # "missing" | "constant" | "out_of_range"


@dataclass
class CleanResult:
    """Output of :func:`clean_panel`.

    ``panels`` holds usable countries only (at least two retained
    indicators); countries below that are listed in ``unusable`` and their
    surviving series are still reported in ``retained_ids``.
    """

    panels: dict[str, CountryPanel]
    drop_log: list[DropEntry]
    unusable: list[str] = field(default_factory=list)
    retained_ids: dict[str, list[str]] = field(default_factory=dict)

    def records(self) -> list[RawRecord]:
        return [r for p in self.panels.values() for r in p.to_records()]


class PerformanceCategory(enum.Enum):
    WORST = "Worst"
    MODERATE = "Moderate"
    BEST = "Best"


def _open_text(source) -> IO[str]:
    # str is CSV *text*, never a path
    data = source.read() if hasattr(source, "read") else source
    if isinstance(data, (bytes, bytearray)):
        data = bytes(data).decode("utf-8-sig")
    if not isinstance(data, str):
        raise TypeError(f"cannot read CSV from {type(source).__name__}")
    return io.StringIO(data.lstrip("\ufeff"), newline="")


def _parse_goal(text: str, line: int) -> int:
    try:
        goal = int(text)
    except ValueError:
        raise ParseError(f"unparsable sdg_goal {text!r}", line) from None
    if not 1 <= goal <= 17:
        raise ParseError(f"sdg_goal {goal} not in 1..17", line)
    return goal


def _parse_value(text: str, line: int) -> float | None:
    text = text.strip()
    if text == "":
        return None
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"unparsable value {text!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", line)
    return value


def parse_long_csv(stream) -> list[RawRecord]:
    """Parse a long-format panel.

    ``stream`` may be a text/binary file object, ``bytes`` or a ``str``
    holding the CSV text. Row order is preserved. Raises
    :class:`ParseError` on malformed rows and :class:`DuplicateKeyError`
    when a (country, indicator, year) key repeats.
    """
    reader = csv.reader(_open_text(stream))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty input", 1) from None
    if tuple(header) != LONG_COLUMNS:
        raise ParseError(f"expected header {','.join(LONG_COLUMNS)}, got {','.join(header)}", 1)

    records = []
    seen = {}
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(LONG_COLUMNS):
            raise ParseError(f"expected {len(LONG_COLUMNS)} columns, got {len(row)}", line)
        country, indicator, goal, year, value = (c.strip() for c in row)
        try:
            year_i = int(year)
        except ValueError:
            raise ParseError(f"unparsable year {year!r}", line) from None
        key = (country, indicator, year_i)
        if key in seen:
            raise DuplicateKeyError(
                f"duplicate key {key} (first seen on line {seen[key]})", line
            )
        seen[key] = line
        records.append(
            RawRecord(country, indicator, _parse_goal(goal, line), year_i, _parse_value(value, line))
        )
    return records


@dataclass
class WideResult:
    records: list[RawRecord]
    warnings: list[str]


def normalize_wide(stream, window: tuple[int, int] = DEFAULT_WINDOW) -> WideResult:
    """Reshape a wide table (one column per year) into long records.

    Year columns outside ``window`` and non-year columns are skipped and
    reported in ``warnings``; blank cells become missing values.
    """
    reader = csv.reader(_open_text(stream))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        return WideResult([], ["empty input"])
    if tuple(header[:3]) != WIDE_KEY_COLUMNS:
        raise ParseError(f"wide header must start with {','.join(WIDE_KEY_COLUMNS)}", 1)

    lo, hi = window
    year_cols = []
    warnings = []
    for pos, name in enumerate(header[3:], start=3):
        try:
            year = int(name)
        except ValueError:
            warnings.append(f"ignored non-year column {name!r}")
            continue
        if lo <= year <= hi:
            year_cols.append((pos, year))
        else:
            warnings.append(f"ignored year column {year} outside {lo}-{hi}")
    if not year_cols:
        warnings.append("no year columns inside the window")
        for w in warnings:
            logger.warning(w)
        return WideResult([], warnings)

    records = []
    seen = set()
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} columns, got {len(row)}", line)
        country, indicator = row[0].strip(), row[1].strip()
        if (country, indicator) in seen:
            raise DuplicateKeyError(f"duplicate row for ({country}, {indicator})", line)
        seen.add((country, indicator))
        goal = _parse_goal(row[2].strip(), line)
        for pos, year in year_cols:
            records.append(RawRecord(country, indicator, goal, year, _parse_value(row[pos], line)))
    for w in warnings:
        logger.warning(w)
    return WideResult(records, warnings)


def clean_panel(
    records: Iterable[RawRecord],
    window: tuple[int, int] = DEFAULT_WINDOW,
    constancy_tol: float = CONSTANCY_TOL,
) -> CleanResult:
    """Group records per country and drop unusable indicator series.

    An indicator is dropped when any year of the window is missing
    (reason ``"missing"``), when a score falls outside [0, 100]
    (``"out_of_range"``), or when its range is below ``constancy_tol``
    (``"constant"``). Records outside the window are ignored.
    """
    lo, hi = window
    if lo > hi:
        raise DomainError(f"empty year window {window}")
    years = tuple(range(lo, hi + 1))

    # country -> indicator -> (goal, {year: value}); dicts keep first-seen order
    grouped: dict[str, dict[str, tuple[int, dict[int, float | None]]]] = {}
    for rec in records:
        by_ind = grouped.setdefault(rec.country_code, {})
        goal, values = by_ind.setdefault(rec.indicator_id, (rec.sdg_goal, {}))
        if rec.year in values:
            raise DuplicateKeyError(
                f"duplicate key ({rec.country_code}, {rec.indicator_id}, {rec.year})"
            )
        if lo <= rec.year <= hi:
            values[rec.year] = rec.value

    panels = {}
    drop_log = []
    unusable = []
    retained_ids = {}
    for country, by_ind in grouped.items():
        kept = []
        for indicator, (goal, values) in by_ind.items():
            vals = [values.get(y) for y in years]
            if any(v is None for v in vals):
                drop_log.append(DropEntry(country, indicator, "missing"))
                continue
            if any(not 0.0 <= v <= 100.0 for v in vals):
                drop_log.append(DropEntry(country, indicator, "out_of_range"))
                continue
            if max(vals) - min(vals) < constancy_tol:
                drop_log.append(DropEntry(country, indicator, "constant"))
                continue
            kept.append(IndicatorSeries(country, indicator, goal, years, tuple(vals)))
        retained_ids[country] = [s.indicator_id for s in kept]
        if len(kept) < 2:
            logger.warning("%s: only %d usable indicator(s), no network possible", country, len(kept))
            unusable.append(country)
            continue
        panels[country] = CountryPanel(country, tuple(kept))
    return CleanResult(panels, drop_log, unusable, retained_ids)


def categorize_country(
    sdg_index_score: float, cutoffs: tuple[float, float] = (50.0, 80.0)
) -> PerformanceCategory:
    """Map an SDG Index score onto a performance band.

    >>> categorize_country(50.0)
    <PerformanceCategory.MODERATE: 'Moderate'>
    """
    if not (math.isfinite(sdg_index_score) and 0.0 <= sdg_index_score <= 100.0):
        raise DomainError(f"SDG Index score {sdg_index_score} outside [0, 100]")
    low, high = cutoffs
    if sdg_index_score < low:
        return PerformanceCategory.WORST
    if sdg_index_score < high:
        return PerformanceCategory.MODERATE
    return PerformanceCategory.BEST


def read_index_scores(stream) -> dict[str, float]:
    """Read ``country_code,sdg_index_score`` rows."""
    reader = csv.reader(_open_text(stream))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty scores file", 1) from None
    if header != ["country_code", "sdg_index_score"]:
        raise ParseError("expected header country_code,sdg_index_score", 1)
    scores = {}
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"expected 2 columns, got {len(row)}", line)
        code = row[0].strip()
        if code in scores:
            raise DuplicateKeyError(f"duplicate country {code}", line)
        try:
            scores[code] = float(row[1])
        except ValueError:
            raise ParseError(f"unparsable score {row[1]!r}", line) from None
    return scores


def write_drop_log(entries: Iterable[DropEntry], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["country_code", "indicator_id", "reason"])
    writer.writerows(entries)


def write_long_csv(records: Iterable[RawRecord], fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(LONG_COLUMNS)
    for r in records:
        writer.writerow([r.country_code, r.indicator_id, r.sdg_goal, r.year,
                         "" if r.value is None else repr(r.value)])
