"""CSV ingestion of daily cumulative case data and window slicing.

Accepted headers::

    date,confirmed,recovered,deaths   (infected derived as active cases)
    date,infected,recovered,deaths    (infected taken as given)

Deaths are always folded into the removed compartment.
"""

from __future__ import annotations

import csv
import datetime as dt
import enum
import io
from dataclasses import dataclass

import numpy as np

from .epidemic import EpidemicSeries
from .exceptions import (
    DuplicateDateError,
    InsufficientSpanError,
    InvalidInputError,
    MalformedRowError,
    MissingDatesError,
)

_HEADERS = {
    ("date", "confirmed", "recovered", "deaths"): "confirmed",
    ("date", "infected", "recovered", "deaths"): "infected",
}


class Convention(str, enum.Enum):
    """How the infected stock ``I(t)`` is read from a record."""

    ACTIVE_COLUMN = "active_column"
    DERIVED_ACTIVE = "derived_active"


@dataclass(frozen=True)
class DailyRecord:
    """One day of cumulative counts.

    ``first`` is the second CSV column: cumulative confirmed cases, or the
    infected count itself when the file carries an ``infected`` column.
    """

    date: dt.date
    first: int
    recovered: int
    deaths: int
    first_column: str = "confirmed"

    @property
    def confirmed(self):
        return self.first if self.first_column == "confirmed" else None

    @property
    def infected(self):
        return self.first if self.first_column == "infected" else None


@dataclass(frozen=True)
class CaseTable:
    records: tuple
    first_column: str
    warnings: tuple = ()


@dataclass(frozen=True)
class WindowSpec:
    start_date: dt.date
    T: int
    W: int

    def __post_init__(self):
        if int(self.T) < 4:
            raise InvalidInputError(f"T must be at least 4, got {self.T}")
        if int(self.W) < 1:
            raise InvalidInputError(f"W must be at least 1, got {self.W}")


def _parse_count(text, line, column):
    try:
        value = int(text.strip())
    except ValueError:
        raise MalformedRowError(line, f"{column} is not an integer: {text!r}") from None
    if value < 0:
        raise MalformedRowError(line, f"{column} is negative: {value}")
    return value


def parse_csv(stream) -> CaseTable:
    """Parse a case CSV from a text stream or string.

    Rows are returned sorted by date. Decreasing cumulative values are kept
    and reported in ``warnings``.
    """
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    reader = csv.reader(stream)
    try:
        header = tuple(h.strip().lower() for h in next(reader))
    except StopIteration:
        raise MalformedRowError(1, "empty input") from None
    if header and header[0].startswith("\ufeff"):
        header = (header[0][1:],) + header[1:]
    if header not in _HEADERS:
        raise MalformedRowError(1, f"unexpected header {','.join(header)!r}")
    first_column = _HEADERS[header]

    by_date = {}
    for line, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 4:
            raise MalformedRowError(line, f"expected 4 fields, got {len(row)}")
        try:
            date = dt.date.fromisoformat(row[0].strip())
        except ValueError:
            raise MalformedRowError(line, f"invalid ISO date {row[0]!r}") from None
        if date in by_date:
            raise DuplicateDateError(date, line)
        by_date[date] = DailyRecord(
            date,
            _parse_count(row[1], line, first_column),
            _parse_count(row[2], line, "recovered"),
            _parse_count(row[3], line, "deaths"),
            first_column,
        )

    records = tuple(by_date[d] for d in sorted(by_date))
    warnings = []
    monotone = ["recovered", "deaths"]
    if first_column == "confirmed":
        monotone.insert(0, "first")
    for prev, cur in zip(records, records[1:]):
        for attr in monotone:
            if getattr(cur, attr) < getattr(prev, attr):
                name = first_column if attr == "first" else attr
                warnings.append(
                    f"{cur.date}: cumulative {name} decreased from "
                    f"{getattr(prev, attr)} to {getattr(cur, attr)}"
                )
    return CaseTable(records, first_column, tuple(warnings))


def read_csv(path) -> CaseTable:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_csv(fh)


def infected_count(record: DailyRecord, convention: Convention):
    convention = Convention(convention)
    if convention is Convention.ACTIVE_COLUMN:
        if record.first_column != "infected":
            raise InvalidInputError("active_column convention needs an 'infected' column")
        return record.first
    if record.first_column != "confirmed":
        raise InvalidInputError("derived_active convention needs a 'confirmed' column")
    return record.first - record.recovered - record.deaths


def to_series(records, population, convention) -> EpidemicSeries:
    infected = [infected_count(rec, convention) for rec in records]
    removed = [rec.recovered + rec.deaths for rec in records]
    return EpidemicSeries(np.array(infected, float), np.array(removed, float), population)


def build_window(records, spec: WindowSpec, population, convention, horizon_extra=None):
    """Slice ``T`` known days from ``spec.start_date`` and the following truth days.

    ``horizon_extra`` defaults to ``spec.W``. Every day in the span must be
    present; gaps are never interpolated.
    """
    if isinstance(records, CaseTable):
        records = records.records
    extra = spec.W if horizon_extra is None else int(horizon_extra)
    span = spec.T + extra
    by_date = {rec.date: rec for rec in records}
    days = [spec.start_date + dt.timedelta(days=k) for k in range(span)]
    if not records or days[0] < records[0].date or days[-1] > records[-1].date:
        raise InsufficientSpanError(
            f"records do not cover {days[0]} .. {days[-1]} "
            f"(T={spec.T} plus {extra} truth days)"
        )
    missing = [d for d in days if d not in by_date]
    if missing:
        raise MissingDatesError(missing)
    chosen = [by_date[d] for d in days]
    known = to_series(chosen[: spec.T], population, convention)
    truth = to_series(chosen[spec.T :], population, convention) if extra else None
    return known, truth


def window_dates(spec: WindowSpec, horizon_extra=None):
    extra = spec.W if horizon_extra is None else horizon_extra
    return [spec.start_date + dt.timedelta(days=k) for k in range(spec.T + extra)]
