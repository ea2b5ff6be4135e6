import dataclasses

import numpy as np
import pandas as pd
import pytest
from hypothesis import given
from hypothesis import strategies as st

from park_ems import synthetic
from park_ems.errors import (EmptyDataset, InsufficientHistory, InvalidValue, MisalignedSeries,
                             MissingColumn, MissingFile, NegativeValue, NonContiguousTimestamps)
from park_ems.ingest import (HISTORY_DAYS, IngestOptions, NormStats, baseline_history,
                             compute_norm_stats, eligible_days, load_dataset, write_dataset)


@pytest.fixture
def data_dir(tmp_path, month):
    write_dataset(month, tmp_path)
    return tmp_path


def _edit(path, fn):
    df = pd.read_csv(path, dtype={"day_type": str})
    df = fn(df)
    df.to_csv(path, index=False)


class TestLoad:
    def test_happy_path(self, data_dir):
        ds = load_dataset(data_dir)
        assert ds.n_slots == 720
        assert ds.n_days == 30

    def test_round_trip(self, data_dir, month, tmp_path_factory):
        ds = load_dataset(data_dir)
        for name in ("production_load", "office_load", "pv_energy", "price", "outdoor_temp"):
            assert np.array_equal(getattr(ds, name), getattr(month, name)), name
        assert np.array_equal(ds.timestamps, month.timestamps)
        assert np.array_equal(ds.day_type, month.day_type)
        assert ds.ev_visits == month.ev_visits
        assert ds.dr_events == month.dr_events
        again = tmp_path_factory.mktemp("again")
        write_dataset(ds, again)
        for f in ("loads.csv", "pv.csv", "price.csv", "weather.csv", "ev_schedule.csv",
                  "dr_events.csv"):
            assert (again / f).read_bytes() == (data_dir / f).read_bytes()

    def test_missing_hour(self, data_dir):
        # drop hour 13 of day 2 (0-based slot 24 + 13)
        _edit(data_dir / "price.csv", lambda df: df.drop(index=24 + 13))
        with pytest.raises(NonContiguousTimestamps) as exc:
            load_dataset(data_dir)
        assert exc.value.file.endswith("price.csv")
        assert exc.value.row == 24 + 13 + 2

    def test_duplicate_hour(self, data_dir):
        def dup(df):
            return pd.concat([df.iloc[:5], df.iloc[4:5], df.iloc[5:]], ignore_index=True)
        _edit(data_dir / "pv.csv", dup)
        with pytest.raises(NonContiguousTimestamps):
            load_dataset(data_dir)

    def test_negative_load(self, data_dir):
        def neg(df):
            df.loc[7, "production_kwh"] = -5
            return df
        _edit(data_dir / "loads.csv", neg)
        with pytest.raises(NegativeValue) as exc:
            load_dataset(data_dir)
        assert (exc.value.column, exc.value.row) == ("production_kwh", 9)
        assert "loads.csv" in str(exc.value)

    def test_non_positive_price(self, data_dir):
        def zero(df):
            df.loc[3, "price_rmb_per_kwh"] = 0.0
            return df
        _edit(data_dir / "price.csv", zero)
        with pytest.raises(NegativeValue):
            load_dataset(data_dir)

    def test_missing_column(self, data_dir):
        _edit(data_dir / "weather.csv", lambda df: df.rename(columns={"temp_c": "t"}))
        with pytest.raises(MissingColumn) as exc:
            load_dataset(data_dir)
        assert exc.value.column == "temp_c"

    def test_missing_file(self, data_dir):
        (data_dir / "pv.csv").unlink()
        with pytest.raises(MissingFile):
            load_dataset(data_dir)

    def test_misaligned(self, data_dir):
        def shift(df):
            df["timestamp"] = pd.to_datetime(df["timestamp"]) + pd.Timedelta(hours=1)
            df["timestamp"] = df["timestamp"].dt.strftime("%Y-%m-%dT%H:%M")
            return df
        _edit(data_dir / "weather.csv", shift)
        with pytest.raises(MisalignedSeries):
            load_dataset(data_dir)

    def test_partial_day(self, data_dir):
        for f in ("loads.csv", "pv.csv", "price.csv", "weather.csv"):
            _edit(data_dir / f, lambda df: df.iloc[:-3])
        with pytest.raises(MisalignedSeries):
            load_dataset(data_dir)

    def test_empty(self, data_dir):
        for f in ("loads.csv", "pv.csv", "price.csv", "weather.csv"):
            _edit(data_dir / f, lambda df: df.iloc[:0])
        with pytest.raises(EmptyDataset):
            load_dataset(data_dir)

    def test_bad_day_type(self, data_dir):
        def bad(df):
            df.loc[30, "day_type"] = "H"
            return df
        _edit(data_dir / "loads.csv", bad)
        with pytest.raises(InvalidValue):
            load_dataset(data_dir)

    def test_ev_arrival_after_departure(self, data_dir):
        def bad(df):
            df.loc[0, "arrival_hour"] = 18
            return df
        _edit(data_dir / "ev_schedule.csv", bad)
        with pytest.raises(InvalidValue):
            load_dataset(data_dir)

    def test_dr_outside_horizon(self, data_dir):
        def bad(df):
            df.loc[0, "date"] = "2031-01-01"
            return df
        _edit(data_dir / "dr_events.csv", bad)
        with pytest.raises(MisalignedSeries):
            load_dataset(data_dir)


def _toy_calendar(types):
    """Ten-day dataset whose production load on day d is the constant 100 + d."""
    ds = synthetic.generate(1, synthetic.SyntheticProfile(days=len(types)))
    prod = np.repeat(100.0 + np.arange(len(types)), 24)
    return dataclasses.replace(ds, production_load=prod, day_type=np.array(types))


class TestBaselineHistory:
    TYPES = list("WWNWWNNWWW")

    def test_mixed_calendar_skips_other_day_type(self):
        ds = _toy_calendar(self.TYPES)
        hist = baseline_history(ds, 9)
        assert hist.shape == (24, 5)
        # working days before day 9: 8, 7, 4, 3, 1
        assert hist[0].tolist() == [108.0, 107.0, 104.0, 103.0, 101.0]

    def test_working_day_six_uses_five_predecessors(self):
        ds = _toy_calendar(list("WWWWWW"))
        assert baseline_history(ds, 5)[0].tolist() == [104.0, 103.0, 102.0, 101.0, 100.0]

    def test_insufficient_non_working(self):
        ds = _toy_calendar(self.TYPES)
        with pytest.raises(InsufficientHistory) as exc:
            baseline_history(ds, 6)
        assert (exc.value.needed, exc.value.found) == (HISTORY_DAYS["N"], 2)

    def test_never_looks_forward(self, month):
        for day in eligible_days(month):
            hist = baseline_history(month, day)
            rows = month.production_load.reshape(-1, 24)
            later = rows[day:]
            for col in hist.T:
                assert not any(np.array_equal(col, r) for r in later)

    def test_exclude_dr_days(self):
        ds = _toy_calendar(self.TYPES)
        ds = dataclasses.replace(ds, options=IngestOptions(exclude_dr_days_from_baseline=True))
        # every synthetic day carries a DR event, so nothing qualifies
        with pytest.raises(InsufficientHistory):
            baseline_history(ds, 9)

    def test_eligible_days_of_synthetic_month(self, month):
        assert eligible_days(month) == list(range(8, 30))


class TestNormStats:
    def test_channels(self, month):
        stats = compute_norm_stats(month, 22.0, [(0.2, 1.0), (0.2, 1.0)])
        ch = dict(zip(stats.channels, zip(stats.mins, stats.maxs)))
        assert ch["soc_ess"] == (0.2, 1.0)
        assert ch["indoor_temp"] == (15.0, 29.0)
        assert ch["outdoor_temp"] == (month.outdoor_temp.min(), month.outdoor_temp.max())

    def test_constant_price(self, month):
        flat = dataclasses.replace(month, price=np.full(month.n_slots, 0.8))
        stats = compute_norm_stats(flat, 22.0, [(0.2, 1.0), (0.2, 1.0)])
        k = stats.channels.index("price")
        assert stats.constant[k]
        x = np.zeros(9)
        x[k] = 0.8
        assert stats.normalize(x)[k] == 0.5

    @given(st.lists(st.floats(-1e3, 1e3), min_size=9, max_size=9))
    def test_normalize_into_unit_box(self, xs):
        stats = NormStats(np.zeros(9), np.array([1, 2, 3, 4, 5, 6, 7, 8, 9.0]))
        y = stats.normalize(np.array(xs))
        assert ((0 <= y) & (y <= 1)).all()

    def test_endpoints(self):
        stats = NormStats(np.zeros(9), np.full(9, 4.0))
        assert (stats.normalize(np.zeros(9)) == 0).all()
        assert (stats.normalize(np.full(9, 4.0)) == 1).all()
        assert (stats.normalize(np.full(9, 9.0)) == 1).all()

    def test_dict_round_trip(self, month):
        stats = compute_norm_stats(month, 22.0, [(0.2, 1.0), (0.2, 1.0)])
        again = NormStats.from_dict(stats.to_dict())
        assert np.array_equal(again.mins, stats.mins) and np.array_equal(again.maxs, stats.maxs)

    def test_empty_dataset(self, month):
        with pytest.raises(EmptyDataset):
            compute_norm_stats(month, 22.0, [(0.2, 1.0), (0.2, 1.0)], days=[])
