"""Rule-based comparison strategies.

Every baseline emits a raw :class:`~park_ems.env.Action`, so its requests are
clamped and settled by exactly the same pipeline as the learned policy.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .dynamics import HvacCommand, HvacMode, HvacSpec
from .env import Action, ParkEnv, SlotContext
from .errors import ConfigError


class BaselineKind(str, enum.Enum):
    RULE_BASED_DR = "dr-rule"
    TOU_ARBITRAGE = "tou"
    NO_DISPATCH = "none"


@dataclass(frozen=True)
class TouThresholds:
    charge_price: float
    discharge_price: float

    def __post_init__(self):
        if not self.charge_price < self.discharge_price:
            raise ConfigError(
                f"charge price {self.charge_price} must be below discharge price "
                f"{self.discharge_price}")

    @classmethod
    def from_prices(cls, prices, lo_pct: float = 25.0, hi_pct: float = 75.0) -> "TouThresholds":
        prices = np.asarray(prices, dtype=float)
        return cls(float(np.percentile(prices, lo_pct)), float(np.percentile(prices, hi_pct)))


@dataclass(frozen=True)
class RuleDrOptions:
    off_peak_start: int = 0  # inclusive hour
    off_peak_end: int = 6  # inclusive hour

    def is_off_peak(self, hour: int) -> bool:
        return self.off_peak_start <= hour <= self.off_peak_end


def thermostat_hvac(t_in: float, spec: HvacSpec) -> HvacCommand:
    if t_in > spec.comfort_max:
        return HvacCommand(HvacMode.COOL, spec.max_power)
    if t_in < spec.comfort_min:
        return HvacCommand(HvacMode.HEAT, spec.max_power)
    return HvacCommand()


def _hvac_raw(ctx: SlotContext) -> float:
    # signed so that either HVAC mode rule reproduces the thermostat command
    cmd = thermostat_hvac(ctx.indoor_temp, ctx.hvac)
    return int(cmd.mode) * cmd.power / ctx.hvac.max_power


def _battery_action(direction: float, ctx: SlotContext, raw_rdis: float) -> Action:
    ev = direction if ctx.ev_present else 0.0
    return Action(direction, ev, raw_rdis, _hvac_raw(ctx))


def rule_dr_policy(ctx: SlotContext, opts: RuleDrOptions = RuleDrOptions()) -> Action:
    if ctx.dr_active:
        return _battery_action(-1.0, ctx, 1.0)
    if opts.is_off_peak(ctx.hour):
        return _battery_action(1.0, ctx, 0.0)
    return _battery_action(0.0, ctx, 0.0)


def tou_arbitrage_policy(ctx: SlotContext, th: TouThresholds) -> Action:
    if ctx.price <= th.charge_price:
        return _battery_action(1.0, ctx, 0.0)
    if ctx.price >= th.discharge_price:
        return _battery_action(-1.0, ctx, 1.0)
    return _battery_action(0.0, ctx, 0.0)


def no_dispatch_policy(ctx: SlotContext) -> Action:
    return Action(0.0, 0.0, 0.0, _hvac_raw(ctx))


def make_policy(kind: BaselineKind | str, env: ParkEnv,
                thresholds: TouThresholds | None = None,
                rule_opts: RuleDrOptions | None = None):
    """Return ``policy(env, state) -> Action`` for a baseline.

    TOU thresholds default to the 25th/75th percentiles of the env's price series.
    """
    kind = BaselineKind(kind)
    if kind is BaselineKind.RULE_BASED_DR:
        opts = rule_opts or RuleDrOptions()
        return lambda e, s: rule_dr_policy(e.context(), opts)
    if kind is BaselineKind.TOU_ARBITRAGE:
        th = thresholds or TouThresholds.from_prices(env.ds.price)
        return lambda e, s: tou_arbitrage_policy(e.context(), th)
    return lambda e, s: no_dispatch_policy(e.context())


def participates_in_dr(kind: BaselineKind | str) -> bool:
    return BaselineKind(kind) is not BaselineKind.NO_DISPATCH

