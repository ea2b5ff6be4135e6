"""Monetary and penalty terms settled per slot."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from .dynamics import DT_HOURS
from .errors import WrongHistoryLength

HOURS_PER_DAY = 24

# (lower ratio bound, inclusive?, multiplier); evaluated top-down in dr_revenue
REVENUE_TIERS = ((2.0, False, 2.0), (0.8, False, 1.0), (0.5, True, 0.6))


@dataclass(frozen=True)
class CarbonSpec:
    tax_rate: float = 0.06
    intensity: float = 0.28088  # kgCO2/kWh

    def __post_init__(self):
        if self.tax_rate < 0 or self.intensity < 0:
            raise ValueError("carbon tax rate and intensity must be >= 0")


@dataclass(frozen=True)
class DrEvent:
    """A dispatched DR window; ``end_slot`` is inclusive."""

    start_slot: int
    end_slot: int
    invited_load: float  # kWh
    unit_price: float  # RMB/kWh

    def __post_init__(self):
        if self.start_slot > self.end_slot:
            raise ValueError("DR event start_slot must not exceed end_slot")
        if self.invited_load <= 0 or self.unit_price <= 0:
            raise ValueError("DR invited_load and unit_price must be > 0")

    def covers(self, t: int) -> bool:
        return self.start_slot <= t <= self.end_slot


@dataclass(frozen=True)
class CostBreakdown:
    dr_revenue: float = 0.0
    grid_cost: float = 0.0
    carbon_cost: float = 0.0
    deg_cost: float = 0.0
    temp_penalty: float = 0.0
    soc_penalty: float = 0.0
    response_ratio: float = 0.0
    adjusted_load: float = 0.0

    LEDGER_TERMS = ("dr_revenue", "grid_cost", "carbon_cost", "deg_cost",
                    "temp_penalty", "soc_penalty")

    @property
    def total_cost(self) -> float:
        """Operating cost in RMB; comfort and SoC penalties are not money."""
        return self.grid_cost + self.carbon_cost + self.deg_cost - self.dr_revenue

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def intra_day_hour(t: int, hours_per_day: int = HOURS_PER_DAY) -> int:
    """Map a 1-based global slot index to its 1-based hour of day."""
    return (t - 1) % hours_per_day + 1


def baseline_load(history: Sequence[float], n_required: int | None = None) -> float:
    """Mean production load at one hour over the preceding similar days."""
    if n_required is not None and len(history) != n_required:
        raise WrongHistoryLength(
            f"expected {n_required} history entries, got {len(history)}")
    if len(history) == 0:
        raise WrongHistoryLength("baseline history is empty")
    return float(np.mean(np.asarray(history, dtype=float)))


def adjusted_load(base: float, actual_pro: float, q_pv: float,
                  q_bat_discharged: float, r_dis: float) -> tuple[float, float]:
    """Return ``(delta_l, q_pro)``: the DR adjustment and battery energy credited to production."""
    if not 0.0 <= r_dis <= 1.0:
        raise ValueError(f"r_dis must be in [0, 1], got {r_dis}")
    if q_bat_discharged < 0:
        raise ValueError("q_bat_discharged must be >= 0")
    q_pro = r_dis * q_bat_discharged
    return base - actual_pro + q_pv + q_pro, q_pro


def discharged_energy(ess_kw: float, ev_kw: float) -> float:
    """Net battery energy delivered in a slot; charging counts as zero."""
    return max(0.0, -(ess_kw + ev_kw) * DT_HOURS)


def revenue_multiplier(ratio: float) -> float:
    for bound, inclusive, mult in REVENUE_TIERS:
        if ratio > bound or (inclusive and ratio == bound):
            return mult
    return 0.0


def dr_revenue(delta_l: float, event: DrEvent) -> tuple[float, float]:
    """Tiered DR compensation for one event hour; returns ``(revenue, ratio)``."""
    ratio = delta_l / event.invited_load
    return revenue_multiplier(ratio) * event.unit_price * delta_l, ratio


def grid_cost(grid_energy: float, price: float, feed_in_price: float | None = None) -> float:
    if grid_energy < 0 and feed_in_price is not None:
        return grid_energy * feed_in_price
    return grid_energy * price


def carbon_cost(spec: CarbonSpec, grid_energy: float) -> float:
    return spec.tax_rate * spec.intensity * max(0.0, grid_energy)


def temp_penalty(t_in: float, lo: float, hi: float) -> float:
    """Degrees outside ``[lo, hi]``."""
    return max(0.0, t_in - hi) + max(0.0, lo - t_in)


def soc_departure_penalty(soc: float, soc_lim: float, is_departure_slot: bool) -> float:
    if not is_departure_slot:
        return 0.0
    return max(0.0, soc_lim - soc)
