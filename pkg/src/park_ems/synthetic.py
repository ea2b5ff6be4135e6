"""Seeded synthetic park month for desk-scale experiments.

Profiles (all hourly, values in kWh per slot):

* production load: night floor ~120 kWh, working-day shift plateau peaking
  near 266 kWh at 10:00-11:00 and 14:00-16:00; non-working days run at 55 %.
* office load: 45 kWh during 08:00-18:00 on working days, 12 kWh otherwise.
* PV: half-sine between 06:00 and 18:00 with a daily clearness factor in
  [0.55, 1.0] times ``pv_peak``.
* outdoor temperature: daily mean 27.5 +- 1 degC, diurnal swing of +-3 degC
  peaking at 14:00, plus small hourly noise.
* price: three-level time-of-use tariff (valley 00:00-07:59, peak 10:00-11:59 and
  15:00-20:59, flat otherwise).
* EV: working days only, on site 08:00-17:00, arrival SoC in [0.30, 0.45].
* DR: one event every day over 18:00-20:59, 100 kWh invited, unit price in
  [3, 5] RMB/kWh.

Day types follow the calendar (Saturday and Sunday are non-working).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .economics import HOURS_PER_DAY, DrEvent
from .ingest import NON_WORKING, WORKING, EvVisit, IngestOptions, ParkDataset

VALLEY_HOURS = range(0, 8)
PEAK_HOURS = (10, 11, 15, 16, 17, 18, 19, 20)


@dataclass(frozen=True)
class SyntheticProfile:
    start_date: str = "2024-09-01"
    days: int = 30
    pv_peak: float = 150.0
    valley_price: float = 0.30
    flat_price: float = 0.65
    peak_price: float = 1.05
    mean_temp: float = 27.5
    temp_swing: float = 3.0
    ev_arrival_hour: int = 8
    ev_departure_hour: int = 17
    ev_soc_range: tuple[float, float] = (0.30, 0.45)
    dr_start_hour: int = 18
    dr_end_hour: int = 20
    dr_invited: float = 100.0
    dr_price_range: tuple[float, float] = (3.0, 5.0)


def tou_tariff(profile: SyntheticProfile) -> np.ndarray:
    price = np.full(HOURS_PER_DAY, profile.flat_price)
    price[list(VALLEY_HOURS)] = profile.valley_price
    price[list(PEAK_HOURS)] = profile.peak_price
    return price


def _production_shape() -> np.ndarray:
    h = np.arange(HOURS_PER_DAY)
    shape = np.full(HOURS_PER_DAY, 120.0)
    shift = (h >= 7) & (h <= 21)
    shape[shift] = 215.0
    shape[[10, 11, 14, 15, 16]] = 262.0
    shape[[12, 13]] = 230.0
    return shape


def generate(seed: int = 0, profile: SyntheticProfile | None = None) -> ParkDataset:
    profile = profile or SyntheticProfile()
    rng = np.random.default_rng(seed)
    n_days = profile.days
    start = np.datetime64(profile.start_date, "D")
    day_dates = start + np.arange(n_days)
    # numpy weekday: 1970-01-01 was a Thursday
    weekday = (day_dates.astype(int) + 3) % 7
    day_type = np.where(weekday >= 5, NON_WORKING, WORKING)

    hours = np.arange(HOURS_PER_DAY)
    stamps = (day_dates.astype("datetime64[m]")[:, None]
              + (hours * 60).astype("timedelta64[m]")[None, :]).ravel()

    prod_shape = _production_shape()
    sun = np.clip(np.sin(np.pi * (hours - 6) / 12.0), 0.0, None)
    sun[(hours < 6) | (hours > 18)] = 0.0
    tariff = tou_tariff(profile)

    prod, office, pv, temp, price = [], [], [], [], []
    visits, events = [], []
    for d in range(n_days):
        working = day_type[d] == WORKING
        level = 1.0 if working else 0.55
        prod.append(prod_shape * level * rng.normal(1.0, 0.03, HOURS_PER_DAY))
        off = np.where(working & (hours >= 8) & (hours < 18), 45.0, 12.0)
        office.append(off * rng.normal(1.0, 0.05, HOURS_PER_DAY))
        clear = rng.uniform(0.55, 1.0)
        pv.append(profile.pv_peak * clear * sun * rng.normal(1.0, 0.03, HOURS_PER_DAY))
        mean = profile.mean_temp + rng.uniform(-1.0, 1.0)
        diurnal = profile.temp_swing * np.cos(2 * np.pi * (hours - 14) / HOURS_PER_DAY)
        temp.append(mean + diurnal + rng.normal(0.0, 0.3, HOURS_PER_DAY))
        price.append(tariff)

        base = d * HOURS_PER_DAY
        if working:
            soc = rng.uniform(*profile.ev_soc_range)
            visits.append(EvVisit(d, base + profile.ev_arrival_hour,
                                  base + profile.ev_departure_hour, round(float(soc), 4)))
        p_dr = rng.uniform(*profile.dr_price_range)
        events.append(DrEvent(base + profile.dr_start_hour, base + profile.dr_end_hour,
                              profile.dr_invited, round(float(p_dr), 3)))

    cat = lambda xs: np.round(np.maximum(np.concatenate(xs), 0.0), 4)
    return ParkDataset(
        timestamps=stamps,
        production_load=cat(prod),
        office_load=cat(office),
        pv_energy=cat(pv),
        price=np.concatenate(price),
        outdoor_temp=np.round(np.concatenate(temp), 3),
        day_type=day_type,
        ev_visits=tuple(visits),
        dr_events=tuple(events),
        options=IngestOptions(),
    )
