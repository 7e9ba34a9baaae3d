import datetime as dt
import io

import numpy as np
import pytest

from firsir.data import (
    Convention,
    DailyRecord,
    WindowSpec,
    build_window,
    infected_count,
    parse_csv,
    read_csv,
    to_series,
    window_dates,
)
from firsir.exceptions import (
    DuplicateDateError,
    InsufficientSpanError,
    InvalidInputError,
    MalformedRowError,
    MissingDatesError,
)

from conftest import DAYS, START

HEADER = "date,confirmed,recovered,deaths\n"
D = Convention.DERIVED_ACTIVE


def contiguous_csv(days, start=START):
    rows = [HEADER.strip()]
    for k in range(days):
        rows.append(f"{start + dt.timedelta(days=k)},{1000 + 50 * k},{10 * k},{k}")
    return "\n".join(rows) + "\n"


class TestParseCsv:
    def test_single_row(self):
        table = parse_csv(HEADER + "2020-05-01,100,20,5\n")
        assert table.records == (DailyRecord(dt.date(2020, 5, 1), 100, 20, 5),)
        assert table.records[0].confirmed == 100
        assert table.warnings == ()

    def test_duplicate_date(self):
        with pytest.raises(DuplicateDateError) as exc:
            parse_csv(HEADER + "2020-05-01,100,20,5\n2020-05-01,110,21,5\n")
        assert exc.value.line == 3

    def test_monotonicity_warning(self):
        table = parse_csv(HEADER + "2020-05-01,100,20,5\n2020-05-02,90,20,5\n")
        assert len(table.records) == 2
        assert len(table.warnings) == 1
        assert "confirmed decreased from 100 to 90" in table.warnings[0]

    def test_sorted_by_date(self):
        table = parse_csv(HEADER + "2020-05-03,3,0,0\n2020-05-01,1,0,0\n2020-05-02,2,0,0\n")
        assert [r.first for r in table.records] == [1, 2, 3]

    def test_crlf_and_bom(self):
        text = "\ufeff" + HEADER.replace("\n", "\r\n") + "2020-05-01,100,20,5\r\n2020-05-02,110,25,5\r\n"
        lf = parse_csv(HEADER + "2020-05-01,100,20,5\n2020-05-02,110,25,5\n")
        assert parse_csv(io.StringIO(text, newline="")).records == lf.records

    def test_infected_header(self):
        table = parse_csv("date,infected,recovered,deaths\n2020-05-01,75,20,5\n")
        assert table.first_column == "infected"
        assert table.records[0].infected == 75 and table.records[0].confirmed is None

    @pytest.mark.parametrize(
        "row, fragment",
        [
            ("2020-05-02,abc,1,1", "not an integer"),
            ("2020-05-02,1,1", "expected 4 fields"),
            ("2020-13-02,1,1,1", "invalid ISO date"),
            ("2020-05-02,1,-1,1", "negative"),
        ],
    )
    def test_malformed_row_reports_line(self, row, fragment):
        with pytest.raises(MalformedRowError, match=fragment) as exc:
            parse_csv(HEADER + "2020-05-01,1,0,0\n" + row + "\n")
        assert exc.value.line == 3

    def test_bad_header(self):
        with pytest.raises(MalformedRowError):
            parse_csv("day,cases\n2020-05-01,1\n")

    def test_empty(self):
        with pytest.raises(MalformedRowError):
            parse_csv("")

    def test_blank_lines_skipped(self):
        assert len(parse_csv(HEADER + "\n2020-05-01,1,0,0\n\n").records) == 1

    def test_read_csv(self, synthetic_csv):
        table = read_csv(synthetic_csv)
        assert len(table.records) == DAYS
        assert table.records[0].date == START


class TestConventions:
    def test_derived_active(self):
        rec = DailyRecord(dt.date(2020, 5, 1), 100, 20, 5)
        assert infected_count(rec, "derived_active") == 75

    def test_active_column(self):
        rec = DailyRecord(dt.date(2020, 5, 1), 75, 20, 5, "infected")
        assert infected_count(rec, Convention.ACTIVE_COLUMN) == 75

    def test_mismatched_convention(self):
        with pytest.raises(InvalidInputError):
            infected_count(DailyRecord(dt.date(2020, 5, 1), 100, 20, 5), "active_column")

    def test_unknown_convention(self):
        with pytest.raises(ValueError):
            infected_count(DailyRecord(dt.date(2020, 5, 1), 100, 20, 5), "cumulative")

    def test_removed_includes_deaths(self):
        s = to_series([DailyRecord(dt.date(2020, 5, 1), 100, 20, 5)], 1000, D)
        assert s.removed.tolist() == [25.0]
        assert s.infected.tolist() == [75.0]


class TestWindowSpec:
    def test_minimum_T(self):
        with pytest.raises(InvalidInputError):
            WindowSpec(START, 3, 7)

    def test_minimum_W(self):
        with pytest.raises(InvalidInputError):
            WindowSpec(START, 45, 0)


class TestBuildWindow:
    def test_lengths(self):
        known, truth = build_window(parse_csv(contiguous_csv(52)), WindowSpec(START, 45, 7), 1e6, D)
        assert len(known) == 45 and len(truth) == 7

    def test_missing_interior_day(self):
        lines = contiguous_csv(52).splitlines()
        del lines[20]
        with pytest.raises(MissingDatesError) as exc:
            build_window(parse_csv("\n".join(lines)), WindowSpec(START, 45, 7), 1e6, D)
        assert exc.value.dates == [START + dt.timedelta(days=19)]

    def test_insufficient_span(self):
        with pytest.raises(InsufficientSpanError):
            build_window(parse_csv(contiguous_csv(51)), WindowSpec(START, 45, 7), 1e6, D)

    def test_start_before_data(self):
        with pytest.raises(InsufficientSpanError):
            build_window(parse_csv(contiguous_csv(60)), WindowSpec(START - dt.timedelta(days=1), 45, 7), 1e6, D)

    def test_later_start(self):
        start = START + dt.timedelta(days=5)
        known, _ = build_window(parse_csv(contiguous_csv(60)), WindowSpec(start, 45, 7), 1e6, D)
        assert known.removed[0] == 55  # recovered 50 + deaths 5 on day 5

    def test_horizon_extra(self):
        known, truth = build_window(parse_csv(contiguous_csv(50)), WindowSpec(START, 45, 7), 1e6, D, horizon_extra=3)
        assert len(truth) == 3

    @pytest.mark.parametrize("offset", [0, 17, 100, 193])
    def test_concatenation_is_contiguous_slice(self, synthetic_csv, offset):
        table = read_csv(synthetic_csv)
        spec = WindowSpec(START + dt.timedelta(days=offset), 45, 7)
        known, truth = build_window(table, spec, 1e7, D)
        chosen = table.records[offset : offset + 52]
        full = to_series(chosen, 1e7, D)
        np.testing.assert_array_equal(np.concatenate([known.infected, truth.infected]), full.infected)
        np.testing.assert_array_equal(np.concatenate([known.removed, truth.removed]), full.removed)
        assert [r.date for r in chosen] == window_dates(spec)

    def test_removed_is_recovered_plus_deaths(self, synthetic_csv):
        table = read_csv(synthetic_csv)
        known, truth = build_window(table, WindowSpec(START, 45, 7), 1e7, D)
        expected = [r.recovered + r.deaths for r in table.records[:52]]
        assert np.concatenate([known.removed, truth.removed]).tolist() == expected
