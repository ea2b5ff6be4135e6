"""Chained daily rollouts, per-slot traces, cost ledgers and strategy comparison."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .economics import CostBreakdown
from .env import EVAL, ParkEnv, Policy, Transition

TERMS = CostBreakdown.LEDGER_TERMS
STATE_COLUMNS = ("production_load", "office_load", "baseline_load", "outdoor_temp",
                 "indoor_temp", "pv_energy", "price", "soc_ess", "soc_ev")
TRACE_COLUMNS = (("timestamp",) + STATE_COLUMNS
                 + ("raw_ess", "raw_ev", "raw_rdis", "raw_hvac",
                    "ess_kw", "ev_kw", "r_dis", "hvac_kw", "hvac_mode", "grid_kw")
                 + TERMS + ("response_ratio", "adjusted_load", "indoor_temp_next",
                            "soc_ev_next", "comfort_violation", "ev_departure", "reward", "done"))
LEDGER_COLUMNS = (("day", "date") + TERMS
                  + ("total_cost", "reward", "slots", "violation_slots", "departures",
                     "departures_met"))

_VIOLATION_TOL = 1e-9


@dataclass
class DayLedger:
    day: int
    date: str
    terms: dict[str, float]
    reward: float
    slots: int
    violation_slots: int
    departures: int
    departures_met: int

    @property
    def total_cost(self) -> float:
        t = self.terms
        return t["grid_cost"] + t["carbon_cost"] + t["deg_cost"] - t["dr_revenue"]


@dataclass
class RolloutResult:
    transitions: list[Transition] = field(default_factory=list)
    days: list[DayLedger] = field(default_factory=list)
    timestamps: list[str] = field(default_factory=list)
    soc_lim: float = 0.6

    def totals(self) -> dict[str, float]:
        out = {k: math.fsum(d.terms[k] for d in self.days) for k in TERMS}
        out["total_cost"] = math.fsum(d.total_cost for d in self.days)
        out["reward"] = math.fsum(d.reward for d in self.days)
        return out

    @property
    def total_cost(self) -> float:
        return self.totals()["total_cost"]

    @property
    def n_slots(self) -> int:
        return sum(d.slots for d in self.days)

    @property
    def violation_rate(self) -> float:
        n = self.n_slots
        return sum(d.violation_slots for d in self.days) / n if n else 0.0

    @property
    def departure_success_rate(self) -> float:
        n = sum(d.departures for d in self.days)
        return sum(d.departures_met for d in self.days) / n if n else 1.0


def rollout(env: ParkEnv, policy: Policy, days: Sequence[int] | None = None,
            carry_over: bool = True) -> RolloutResult:
    """Evaluate ``policy`` day by day, carrying ESS SoC and indoor temperature over."""
    days = env.eligible_days() if days is None else list(days)
    dates = env.ds.dates()
    stamps = env.ds.timestamps
    result = RolloutResult(soc_lim=env.park.soc_lim)
    carry = None
    for day in days:
        s = env.reset(day, EVAL, carry)
        day_tr = []
        while not env.done:
            tr = env.step(policy(env, s))
            day_tr.append(tr)
            result.timestamps.append(str(stamps[tr.slot])[:16])
            s = tr.next_state
        carry = env.carry_out() if carry_over else None
        result.transitions.extend(day_tr)
        result.days.append(_ledger(day, dates[day], day_tr, env.park.soc_lim))
    return result


def _ledger(day: int, date: str, trs: Sequence[Transition], soc_lim: float) -> DayLedger:
    terms = {k: math.fsum(getattr(tr.costs, k) for tr in trs) for k in TERMS}
    departures = [tr for tr in trs if tr.ev_departure]
    met = sum(1 for tr in departures if tr.next_state.soc_ev >= soc_lim - _VIOLATION_TOL)
    return DayLedger(day, date, terms, math.fsum(tr.reward for tr in trs), len(trs),
                     sum(1 for tr in trs if tr.comfort_violation > _VIOLATION_TOL),
                     len(departures), met)


def _f(x: float) -> str:
    return repr(float(x))


def write_trace(result: RolloutResult, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for stamp, tr in zip(result.timestamps, result.transitions):
            c = tr.controls
            row = [stamp] + [_f(v) for v in tr.state.to_array()]
            row += [_f(v) for v in tr.action.to_array()]
            row += [_f(c.ess_kw), _f(c.ev_kw), _f(c.r_dis), _f(c.hvac.power), int(c.hvac.mode),
                    _f(tr.flows.grid)]
            row += [_f(getattr(tr.costs, k)) for k in TERMS]
            row += [_f(tr.costs.response_ratio), _f(tr.costs.adjusted_load),
                    _f(tr.next_state.indoor_temp), _f(tr.next_state.soc_ev),
                    _f(tr.comfort_violation), int(tr.ev_departure), _f(tr.reward), int(tr.done)]
            w.writerow(row)


def write_cost_breakdown(result: RolloutResult, path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(LEDGER_COLUMNS)
        for d in result.days:
            w.writerow([d.day, d.date] + [_f(d.terms[k]) for k in TERMS]
                       + [_f(d.total_cost), _f(d.reward), d.slots, d.violation_slots,
                          d.departures, d.departures_met])
        tot = result.totals()
        w.writerow(["total", ""] + [_f(tot[k]) for k in TERMS]
                   + [_f(tot["total_cost"]), _f(tot["reward"]), result.n_slots,
                      sum(d.violation_slots for d in result.days),
                      sum(d.departures for d in result.days),
                      sum(d.departures_met for d in result.days)])


@dataclass
class ComparisonRow:
    strategy: str
    totals: dict[str, float]
    violation_rate: float
    departure_success_rate: float


@dataclass
class ComparisonReport:
    """Rows in input order; the first row is the reference ("proposed") strategy."""

    rows: list[ComparisonRow]

    def saving(self, row: ComparisonRow) -> float:
        """Fractional saving of the reference strategy against ``row``."""
        ref = self.rows[0].totals["total_cost"]
        base = row.totals["total_cost"]
        if base == 0:
            return float("nan")
        return (base - ref) / base

    def write_csv(self, path: str | os.PathLike) -> None:
        ref = self.rows[0].totals
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["strategy", *TERMS, "total_cost", "saving_pct",
                        *[f"delta_{k}" for k in (*TERMS, "total_cost")],
                        "violation_rate", "departure_success_rate"])
            for k, row in enumerate(self.rows):
                saving = "" if k == 0 else _f(100.0 * self.saving(row))
                w.writerow([row.strategy, *[_f(row.totals[t]) for t in TERMS],
                            _f(row.totals["total_cost"]), saving,
                            *[_f(row.totals[t] - ref[t]) for t in (*TERMS, "total_cost")],
                            _f(row.violation_rate), _f(row.departure_success_rate)])

    def format_table(self) -> str:
        lines = [f"{'Method':<12} {'Total cost (RMB)':>18} {'Saving':>9}"]
        for k, row in enumerate(self.rows):
            saving = "--" if k == 0 else f"{100.0 * self.saving(row):.2f}%"
            lines.append(f"{row.strategy:<12} {row.totals['total_cost']:>18,.2f} {saving:>9}")
        return "\n".join(lines)


def comparison_row(name: str, result: RolloutResult) -> ComparisonRow:
    return ComparisonRow(name, result.totals(), result.violation_rate,
                         result.departure_success_rate)


def power_balance_residuals(result: RolloutResult) -> np.ndarray:
    return np.array([tr.flows.residual for tr in result.transitions])

