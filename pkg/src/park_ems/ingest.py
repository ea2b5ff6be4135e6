"""Loading, validation and derived statistics for the park's hourly inputs.

A dataset directory holds six CSV files::

    loads.csv        timestamp, production_kwh, office_kwh, day_type (W|N)
    pv.csv           timestamp, pv_kwh
    price.csv        timestamp, price_rmb_per_kwh
    weather.csv      timestamp, temp_c
    ev_schedule.csv  date, arrival_hour, departure_hour, arrival_soc
    dr_events.csv    date, start_hour, end_hour, invited_kwh, price_rmb_per_kwh

Hourly files must cover whole days starting at 00:00 with identical timestamps.
Row numbers in error messages are file line numbers (the header is line 1).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from .economics import HOURS_PER_DAY, DrEvent
from .errors import (EmptyDataset, InsufficientHistory, InvalidValue, MisalignedSeries,
                     MissingColumn, MissingFile, NegativeValue, NonContiguousTimestamps)

WORKING, NON_WORKING = "W", "N"
HISTORY_DAYS = {WORKING: 5, NON_WORKING: 3}

FILES = {
    "loads": ("loads.csv", ("timestamp", "production_kwh", "office_kwh", "day_type")),
    "pv": ("pv.csv", ("timestamp", "pv_kwh")),
    "price": ("price.csv", ("timestamp", "price_rmb_per_kwh")),
    "weather": ("weather.csv", ("timestamp", "temp_c")),
    "ev": ("ev_schedule.csv", ("date", "arrival_hour", "departure_hour", "arrival_soc")),
    "dr": ("dr_events.csv", ("date", "start_hour", "end_hour", "invited_kwh",
                             "price_rmb_per_kwh")),
}

STATE_CHANNELS = ("production_load", "office_load", "baseline_load", "outdoor_temp",
                  "indoor_temp", "pv_energy", "price", "soc_ess", "soc_ev")


@dataclass(frozen=True)
class IngestOptions:
    exclude_dr_days_from_baseline: bool = False


@dataclass(frozen=True)
class EvVisit:
    """Single daily EV stay; present on slots ``arrival_slot <= t < departure_slot``."""

    day: int
    arrival_slot: int
    departure_slot: int
    arrival_soc: float

    @property
    def last_slot(self) -> int:
        return self.departure_slot - 1


@dataclass(frozen=True, eq=False)
class ParkDataset:
    timestamps: np.ndarray  # datetime64[m]
    production_load: np.ndarray
    office_load: np.ndarray
    pv_energy: np.ndarray
    price: np.ndarray
    outdoor_temp: np.ndarray
    day_type: np.ndarray  # one 'W'/'N' per day
    ev_visits: tuple[EvVisit, ...] = ()
    dr_events: tuple[DrEvent, ...] = ()
    options: IngestOptions = field(default_factory=IngestOptions)

    def __post_init__(self):
        n = len(self.timestamps)
        if n == 0:
            raise EmptyDataset("dataset has no slots")
        for name in ("production_load", "office_load", "pv_energy", "price", "outdoor_temp"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise MisalignedSeries(f"series {name} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if n % HOURS_PER_DAY:
            raise MisalignedSeries(f"{n} slots is not a whole number of days")
        if len(self.day_type) != n // HOURS_PER_DAY:
            raise MisalignedSeries("day_type needs one entry per day")
        present = np.zeros(n, dtype=bool)
        visit_by_day = {}
        for v in self.ev_visits:
            present[v.arrival_slot:v.departure_slot] = True
            visit_by_day[v.day] = v
        event_at = np.full(n, -1, dtype=int)
        for k, ev in enumerate(self.dr_events):
            if not (0 <= ev.start_slot and ev.end_slot < n):
                raise MisalignedSeries(f"DR event {k} lies outside the horizon")
            event_at[ev.start_slot:ev.end_slot + 1] = k
        object.__setattr__(self, "ev_present", present)
        object.__setattr__(self, "_visit_by_day", visit_by_day)
        object.__setattr__(self, "_event_at", event_at)

    @property
    def n_slots(self) -> int:
        return len(self.timestamps)

    @property
    def n_days(self) -> int:
        return self.n_slots // HOURS_PER_DAY

    def day_slots(self, day: int) -> range:
        return range(day * HOURS_PER_DAY, (day + 1) * HOURS_PER_DAY)

    def event_at(self, t: int) -> DrEvent | None:
        k = self._event_at[t]
        return None if k < 0 else self.dr_events[k]

    def visit_on(self, day: int) -> EvVisit | None:
        return self._visit_by_day.get(day)

    def dr_days(self) -> set[int]:
        return {ev.start_slot // HOURS_PER_DAY for ev in self.dr_events}

    def dates(self) -> list[str]:
        return [str(self.timestamps[d * HOURS_PER_DAY].astype("datetime64[D]"))
                for d in range(self.n_days)]


@dataclass(frozen=True)
class DatasetPaths:
    loads: str
    pv: str
    price: str
    weather: str
    ev: str
    dr: str

    @classmethod
    def from_dir(cls, directory: str | os.PathLike) -> "DatasetPaths":
        d = Path(directory)
        return cls(**{key: str(d / name) for key, (name, _) in FILES.items()})


def _read(path: str, columns: Sequence[str]) -> pd.DataFrame:
    if not os.path.exists(path):
        raise MissingFile("input file not found", file=path)
    df = pd.read_csv(path, encoding="utf-8", float_precision="round_trip", dtype={"day_type": str})
    for col in columns:
        if col not in df.columns:
            raise MissingColumn("required column missing", file=path, column=col)
    return df


def _check_numeric(df: pd.DataFrame, path: str, col: str, *, positive=False,
                   nonneg=False) -> np.ndarray:
    values = pd.to_numeric(df[col], errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise InvalidValue("non-numeric or missing value", file=path, column=col,
                           row=int(bad[0]) + 2)
    if nonneg:
        neg = np.flatnonzero(values < 0)
        if neg.size:
            raise NegativeValue(f"negative value {values[neg[0]]}", file=path, column=col,
                                row=int(neg[0]) + 2)
    if positive:
        neg = np.flatnonzero(values <= 0)
        if neg.size:
            raise NegativeValue(f"value {values[neg[0]]} must be > 0", file=path, column=col,
                                row=int(neg[0]) + 2)
    return values


def _hourly_index(df: pd.DataFrame, path: str) -> np.ndarray:
    try:
        ts = pd.to_datetime(df["timestamp"], format="ISO8601")
    except (ValueError, TypeError) as exc:
        raise InvalidValue(f"unparseable timestamp: {exc}", file=path, column="timestamp")
    stamps = ts.to_numpy().astype("datetime64[m]")
    if len(stamps) == 0:
        raise EmptyDataset("no rows", file=path)
    step = np.diff(stamps).astype(int)
    bad = np.flatnonzero(step != 60)
    if bad.size:
        i = int(bad[0])
        kind = "duplicate" if step[i] == 0 else "gap or disorder"
        raise NonContiguousTimestamps(f"{kind} after {stamps[i]}", file=path,
                                      column="timestamp", row=i + 3)
    return stamps


def _day_lookup(stamps: np.ndarray) -> dict[str, int]:
    days = stamps[::HOURS_PER_DAY].astype("datetime64[D]")
    return {str(d): k for k, d in enumerate(days)}


def _int_column(df, path, col, lo, hi):
    values = _check_numeric(df, path, col)
    for i, v in enumerate(values):
        if v != int(v) or not lo <= v <= hi:
            raise InvalidValue(f"{v} is not an integer in [{lo}, {hi}]", file=path,
                               column=col, row=i + 2)
    return values.astype(int)


def load_dataset(paths: DatasetPaths | str | os.PathLike,
                 options: IngestOptions | None = None) -> ParkDataset:
    """Read, validate and align a dataset directory (or explicit file paths)."""
    options = options or IngestOptions()
    if not isinstance(paths, DatasetPaths):
        paths = DatasetPaths.from_dir(paths)

    frames = {key: _read(getattr(paths, key), FILES[key][1]) for key in FILES}
    stamps = {}
    for key in ("loads", "pv", "price", "weather"):
        stamps[key] = _hourly_index(frames[key], getattr(paths, key))
    ref = stamps["loads"]
    for key in ("pv", "price", "weather"):
        other = stamps[key]
        if len(other) != len(ref) or not np.array_equal(other, ref):
            n = min(len(other), len(ref))
            diff = np.flatnonzero(other[:n] != ref[:n])
            row = int(diff[0]) + 2 if diff.size else n + 2
            raise MisalignedSeries("timestamps differ from loads.csv", file=getattr(paths, key),
                                   column="timestamp", row=row)
    if (ref[0] - ref[0].astype("datetime64[D]")).astype(int) != 0 or len(ref) % HOURS_PER_DAY:
        raise MisalignedSeries("hourly series must cover whole days from 00:00",
                               file=paths.loads, column="timestamp")

    loads = frames["loads"]
    prod = _check_numeric(loads, paths.loads, "production_kwh", nonneg=True)
    office = _check_numeric(loads, paths.loads, "office_kwh", nonneg=True)
    pv = _check_numeric(frames["pv"], paths.pv, "pv_kwh", nonneg=True)
    price = _check_numeric(frames["price"], paths.price, "price_rmb_per_kwh", positive=True)
    temp = _check_numeric(frames["weather"], paths.weather, "temp_c")

    day_col = loads["day_type"].astype(str).str.strip().to_numpy()
    bad = np.flatnonzero(~np.isin(day_col, [WORKING, NON_WORKING]))
    if bad.size:
        raise InvalidValue(f"day_type must be W or N, got {day_col[bad[0]]!r}", file=paths.loads,
                           column="day_type", row=int(bad[0]) + 2)
    per_day = day_col.reshape(-1, HOURS_PER_DAY)
    for d, row in enumerate(per_day):
        if (row != row[0]).any():
            k = int(np.flatnonzero(row != row[0])[0])
            raise InvalidValue("day_type changes within a day", file=paths.loads,
                               column="day_type", row=d * HOURS_PER_DAY + k + 2)
    day_type = per_day[:, 0].copy()

    lookup = _day_lookup(ref)
    visits = _parse_ev(frames["ev"], paths.ev, lookup)
    events = _parse_dr(frames["dr"], paths.dr, lookup)
    return ParkDataset(ref, prod, office, pv, price, temp, day_type, visits, events, options)


def _date_index(value, path, col, row, lookup) -> int:
    key = str(value).strip()[:10]
    if key not in lookup:
        raise MisalignedSeries(f"date {value!r} outside dataset horizon", file=path,
                               column=col, row=row)
    return lookup[key]


def _parse_ev(df, path, lookup) -> tuple[EvVisit, ...]:
    if df.empty:
        return ()
    arr = _int_column(df, path, "arrival_hour", 0, 23)
    dep = _int_column(df, path, "departure_hour", 0, 23)
    soc = _check_numeric(df, path, "arrival_soc")
    visits, seen = [], set()
    for i in range(len(df)):
        row = i + 2
        day = _date_index(df["date"].iloc[i], path, "date", row, lookup)
        if arr[i] >= dep[i]:
            raise InvalidValue("arrival_hour must precede departure_hour", file=path,
                               column="departure_hour", row=row)
        if not 0.0 <= soc[i] <= 1.0:
            raise InvalidValue("arrival_soc must be in [0, 1]", file=path,
                               column="arrival_soc", row=row)
        if day in seen:
            raise InvalidValue("at most one EV stay per day", file=path, column="date", row=row)
        seen.add(day)
        base = day * HOURS_PER_DAY
        visits.append(EvVisit(day, base + int(arr[i]), base + int(dep[i]), float(soc[i])))
    return tuple(sorted(visits, key=lambda v: v.day))


def _parse_dr(df, path, lookup) -> tuple[DrEvent, ...]:
    if df.empty:
        return ()
    start = _int_column(df, path, "start_hour", 0, 23)
    end = _int_column(df, path, "end_hour", 0, 23)
    invited = _check_numeric(df, path, "invited_kwh", positive=True)
    price = _check_numeric(df, path, "price_rmb_per_kwh", positive=True)
    events = []
    for i in range(len(df)):
        row = i + 2
        day = _date_index(df["date"].iloc[i], path, "date", row, lookup)
        if start[i] > end[i]:
            raise InvalidValue("start_hour must not exceed end_hour", file=path,
                               column="end_hour", row=row)
        base = day * HOURS_PER_DAY
        events.append(DrEvent(base + int(start[i]), base + int(end[i]),
                              float(invited[i]), float(price[i])))
    events.sort(key=lambda e: e.start_slot)
    for a, b in zip(events, events[1:]):
        if b.start_slot <= a.end_slot:
            raise InvalidValue("overlapping DR events", file=path, column="start_hour")
    return tuple(events)


def _fmt_stamp(stamps: np.ndarray) -> list[str]:
    return [str(s)[:16] for s in stamps.astype("datetime64[m]")]


def write_dataset(ds: ParkDataset, directory: str | os.PathLike) -> DatasetPaths:
    """Write ``ds`` as the six CSV files; floats use shortest round-trip repr."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    paths = DatasetPaths.from_dir(out)
    stamps = _fmt_stamp(ds.timestamps)
    day_col = np.repeat(ds.day_type, HOURS_PER_DAY)
    pd.DataFrame({"timestamp": stamps, "production_kwh": ds.production_load,
                  "office_kwh": ds.office_load, "day_type": day_col}).to_csv(paths.loads, index=False)
    pd.DataFrame({"timestamp": stamps, "pv_kwh": ds.pv_energy}).to_csv(paths.pv, index=False)
    pd.DataFrame({"timestamp": stamps, "price_rmb_per_kwh": ds.price}).to_csv(paths.price,
                                                                              index=False)
    pd.DataFrame({"timestamp": stamps, "temp_c": ds.outdoor_temp}).to_csv(paths.weather,
                                                                          index=False)
    dates = ds.dates()
    pd.DataFrame({
        "date": [dates[v.day] for v in ds.ev_visits],
        "arrival_hour": [v.arrival_slot % HOURS_PER_DAY for v in ds.ev_visits],
        "departure_hour": [v.departure_slot % HOURS_PER_DAY for v in ds.ev_visits],
        "arrival_soc": [v.arrival_soc for v in ds.ev_visits],
    }, columns=list(FILES["ev"][1])).to_csv(paths.ev, index=False)
    pd.DataFrame({
        "date": [dates[e.start_slot // HOURS_PER_DAY] for e in ds.dr_events],
        "start_hour": [e.start_slot % HOURS_PER_DAY for e in ds.dr_events],
        "end_hour": [e.end_slot % HOURS_PER_DAY for e in ds.dr_events],
        "invited_kwh": [e.invited_load for e in ds.dr_events],
        "price_rmb_per_kwh": [e.unit_price for e in ds.dr_events],
    }, columns=list(FILES["dr"][1])).to_csv(paths.dr, index=False)
    return paths


def baseline_history(ds: ParkDataset, day: int) -> np.ndarray:
    """Production loads of the N preceding same-type days, shape ``(24, N)``.

    Column 0 is the most recent qualifying day. N is 5 for working days and
    3 for non-working days.
    """
    kind = ds.day_type[day]
    needed = HISTORY_DAYS[kind]
    skip = ds.dr_days() if ds.options.exclude_dr_days_from_baseline else set()
    chosen = []
    for d in range(day - 1, -1, -1):
        if ds.day_type[d] == kind and d not in skip:
            chosen.append(d)
            if len(chosen) == needed:
                break
    if len(chosen) < needed:
        raise InsufficientHistory(day, needed, len(chosen))
    prod = ds.production_load.reshape(-1, HOURS_PER_DAY)
    return prod[chosen].T.copy()


def has_history(ds: ParkDataset, day: int) -> bool:
    try:
        baseline_history(ds, day)
    except InsufficientHistory:
        return False
    return True


def eligible_days(ds: ParkDataset) -> list[int]:
    return [d for d in range(ds.n_days) if has_history(ds, d)]


def daily_baseline(ds: ParkDataset, day: int) -> np.ndarray:
    """Per-hour baseline load for ``day`` (24 values)."""
    return baseline_history(ds, day).mean(axis=1)


@dataclass(frozen=True)
class NormStats:
    mins: np.ndarray
    maxs: np.ndarray
    channels: tuple[str, ...] = STATE_CHANNELS

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=float)
        maxs = np.asarray(self.maxs, dtype=float)
        if mins.shape != (len(self.channels),) or maxs.shape != mins.shape:
            raise ValueError("NormStats needs one min and max per channel")
        if (mins > maxs).any():
            raise ValueError("NormStats min exceeds max")
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def constant(self) -> np.ndarray:
        return self.mins == self.maxs

    def normalize(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        span = np.where(self.constant, 1.0, self.maxs - self.mins)
        scaled = np.clip((x - self.mins) / span, 0.0, 1.0)
        return np.where(self.constant, 0.5, scaled)

    def to_dict(self) -> dict:
        return {"channels": list(self.channels), "mins": self.mins.tolist(),
                "maxs": self.maxs.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(np.array(d["mins"], dtype=float), np.array(d["maxs"], dtype=float),
                   tuple(d["channels"]))


def compute_norm_stats(ds: ParkDataset, init_temp: float, soc_bounds: Sequence[tuple[float, float]],
                       comfort_band: tuple[float, float] = (20.0, 24.0),
                       days: Sequence[int] | None = None) -> NormStats:
    """Min-max statistics over ``days`` (default: the whole dataset).

    ``soc_bounds`` is ``[(min, max) for ESS, (min, max) for EV]``. The indoor
    channel spans the comfort band widened by 5 degC, stretched to include
    ``init_temp`` if needed.
    """
    if ds.n_slots == 0:
        raise EmptyDataset("cannot compute statistics of an empty dataset")
    days = list(range(ds.n_days)) if days is None else list(days)
    if not days:
        raise EmptyDataset("no days selected for statistics")
    slots = np.concatenate([np.arange(d * HOURS_PER_DAY, (d + 1) * HOURS_PER_DAY) for d in days])
    base_days = [d for d in days if has_history(ds, d)]
    if base_days:
        base = np.concatenate([daily_baseline(ds, d) for d in base_days])
    else:
        base = ds.production_load[slots]
    lo_t = min(comfort_band[0] - 5.0, init_temp)
    hi_t = max(comfort_band[1] + 5.0, init_temp)
    (ess_lo, ess_hi), (ev_lo, ev_hi) = soc_bounds
    series = [ds.production_load[slots], ds.office_load[slots], base,
              ds.outdoor_temp[slots]]
    mins = [s.min() for s in series] + [lo_t, ds.pv_energy[slots].min(),
                                        ds.price[slots].min(), ess_lo, ev_lo]
    maxs = [s.max() for s in series] + [hi_t, ds.pv_energy[slots].max(),
                                        ds.price[slots].max(), ess_hi, ev_hi]
    return NormStats(np.array(mins, dtype=float), np.array(maxs, dtype=float))
