"""Daily-episode MDP over the park simulator.

Observation order (nine channels): production load, office load, DR baseline,
outdoor temperature, indoor temperature, PV energy, price, ESS SoC, EV SoC.
The action is four values in [-1, 1]: ESS power, EV power, energy
distribution ratio and HVAC power magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable

import numpy as np

from . import ageing
from .dynamics import (DT_HOURS, BatterySpec, BatteryState, Chemistry, HvacCommand, HvacMode,
                       HvacSpec, PowerFlows, battery_step, clamp_battery_power, grid_power,
                       pv_available, thermal_step)
from .economics import (HOURS_PER_DAY, CarbonSpec, CostBreakdown, adjusted_load, carbon_cost,
                        discharged_energy, dr_revenue, grid_cost, soc_departure_penalty,
                        temp_penalty)
from .errors import ConfigError, EpisodeFinished
from .ingest import ParkDataset, daily_baseline, eligible_days

TRAIN, EVAL = "train", "eval"
HVAC_MODE_RULES = ("midpoint", "sign")


@dataclass(frozen=True)
class ParkSpec:
    hvac: HvacSpec = field(default_factory=HvacSpec)
    ess: BatterySpec = field(default_factory=lambda: BatterySpec(chemistry=Chemistry.LFP))
    ev: BatterySpec = field(default_factory=lambda: BatterySpec(chemistry=Chemistry.NMC))
    carbon: CarbonSpec = field(default_factory=CarbonSpec)
    pv_max: float = 200.0  # kW
    soc_lim: float = 0.6
    feed_in_price: float | None = None
    hvac_mode_rule: str = "midpoint"  # or "sign"

    def __post_init__(self):
        if self.hvac_mode_rule not in HVAC_MODE_RULES:
            raise ConfigError(f"hvac_mode_rule must be one of {HVAC_MODE_RULES}")


@dataclass(frozen=True)
class EnvState:
    production_load: float
    office_load: float
    baseline_load: float
    outdoor_temp: float
    indoor_temp: float
    pv_energy: float
    price: float
    soc_ess: float
    soc_ev: float

    def to_array(self) -> np.ndarray:
        return np.array([getattr(self, f.name) for f in fields(self)], dtype=float)


STATE_DIM = len(fields(EnvState))
ACTION_DIM = 4


@dataclass(frozen=True)
class Action:
    raw_ess: float = 0.0
    raw_ev: float = 0.0
    raw_rdis: float = 0.0
    raw_hvac: float = 0.0

    def clipped(self) -> "Action":
        return Action(*np.clip(self.to_array(), -1.0, 1.0).tolist())

    def to_array(self) -> np.ndarray:
        return np.array([self.raw_ess, self.raw_ev, self.raw_rdis, self.raw_hvac], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Action":
        a = np.asarray(a, dtype=float).ravel()
        return cls(*(float(x) for x in a[:ACTION_DIM]))


@dataclass(frozen=True)
class RewardWeights:
    dr_revenue: float = 1.0
    grid_cost: float = 1.0
    temp_penalty: float = 50.0
    soc_penalty: float = 200.0
    deg_cost: float = 1.0
    carbon_cost: float = 1.0

    def __post_init__(self):
        if any(getattr(self, f.name) < 0 for f in fields(self)):
            raise ConfigError("reward weights must be >= 0")

    def combine(self, c: CostBreakdown) -> float:
        return (self.dr_revenue * c.dr_revenue - self.grid_cost * c.grid_cost
                - self.temp_penalty * c.temp_penalty - self.soc_penalty * c.soc_penalty
                - self.deg_cost * c.deg_cost - self.carbon_cost * c.carbon_cost)


@dataclass(frozen=True)
class EpisodeConfig:
    steps_per_episode: int = HOURS_PER_DAY
    initial_soc_ess: float = 0.5
    initial_soc_ev: float = 0.35
    initial_indoor_temp: float | None = None  # None: middle of the comfort band
    training_comfort_shrink: float = 0.5
    weights: RewardWeights = field(default_factory=RewardWeights)
    reward_divisor: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.steps_per_episode <= HOURS_PER_DAY:
            raise ConfigError("steps_per_episode must be in [1, 24]")
        if self.training_comfort_shrink < 0:
            raise ConfigError("training_comfort_shrink must be >= 0")
        if self.reward_divisor <= 0:
            raise ConfigError("reward_divisor must be > 0")


@dataclass(frozen=True)
class PhysicalControls:
    ess_kw: float
    ev_kw: float
    r_dis: float
    hvac: HvacCommand


@dataclass(frozen=True)
class Transition:
    slot: int
    state: EnvState
    action: Action
    reward: float
    next_state: EnvState
    done: bool
    costs: CostBreakdown
    controls: PhysicalControls
    flows: PowerFlows
    reward_raw: float
    ev_departure: bool
    comfort_violation: float  # degC outside the nominal band after the step


@dataclass(frozen=True)
class CarryIn:
    soc_ess: float
    indoor_temp: float
    soc_ev: float | None = None


@dataclass(frozen=True)
class SlotContext:
    """What a rule-based policy may read at the start of a slot."""

    slot: int
    hour: int
    price: float
    indoor_temp: float
    soc_ess: float
    soc_ev: float
    ev_present: bool
    dr_active: bool
    hvac: HvacSpec


def with_calibrated_ageing(park: ParkSpec, cycle: ageing.CycleSummary,
                           params: ageing.AgeingParams | None = None) -> ParkSpec:
    """Fill zero ageing coefficients from the representative-cycle calibration."""
    from dataclasses import replace
    out = {}
    for name in ("ess", "ev"):
        spec: BatterySpec = getattr(park, name)
        if spec.ageing_coeff == 0.0:
            alpha = ageing.representative_cycle_calibration(spec, cycle, params=params).value
            spec = replace(spec, ageing_coeff=alpha)
        out[name] = spec
    return replace(park, **out)


def map_action(a: Action, park: ParkSpec, ess: BatteryState, ev: BatteryState,
               ev_present: bool, t_in: float) -> PhysicalControls:
    """Scale a raw action to admissible physical controls.

    HVAC power is ``|raw_hvac| * max_power``. Under the ``midpoint`` rule the
    mode follows the indoor temperature (cool above the middle of the comfort
    band, heat below it) and the sign of ``raw_hvac`` is ignored; under the
    ``sign`` rule negative values cool and positive values heat.
    """
    a = a.clipped()
    ess_kw = clamp_battery_power(park.ess, ess, a.raw_ess * park.ess.rated_power)
    ev_kw = clamp_battery_power(park.ev, ev, a.raw_ev * park.ev.rated_power) if ev_present else 0.0
    r_dis = (a.raw_rdis + 1.0) / 2.0
    power = abs(a.raw_hvac) * park.hvac.max_power
    if park.hvac_mode_rule == "sign":
        signal = a.raw_hvac
    else:
        signal = park.hvac.comfort_mid - t_in
    if power > 0 and signal < 0:
        cmd = HvacCommand(HvacMode.COOL, power)
    elif power > 0 and signal > 0:
        cmd = HvacCommand(HvacMode.HEAT, power)
    else:
        cmd = HvacCommand()
    return PhysicalControls(ess_kw + 0.0, ev_kw + 0.0, r_dis, cmd)


def normalize_state(s: EnvState | np.ndarray, stats) -> np.ndarray:
    x = s.to_array() if isinstance(s, EnvState) else np.asarray(s, dtype=float)
    return stats.normalize(x)


class ParkEnv:
    """One park instance stepping through a single day per episode.

    ``dr_participation=False`` settles no DR revenue at all (passive operation).
    """

    def __init__(self, ds: ParkDataset, park: ParkSpec | None = None,
                 episode: EpisodeConfig | None = None, dr_participation: bool = True):
        self.ds = ds
        self.park = park or ParkSpec()
        self.cfg = episode or EpisodeConfig()
        self.dr_participation = dr_participation
        hv = self.park.hvac
        if 2 * self.cfg.training_comfort_shrink >= hv.comfort_max - hv.comfort_min:
            raise ConfigError("training_comfort_shrink must be below half the comfort band")
        self.rng = np.random.default_rng(self.cfg.seed)
        self._eligible = eligible_days(ds)
        self.mode = TRAIN
        self._t = None
        self._end = None
        self._done = True

    # -- episode control ---------------------------------------------------

    def eligible_days(self) -> list[int]:
        return list(self._eligible)

    def sample_day(self, rng: np.random.Generator | None = None) -> int:
        rng = self.rng if rng is None else rng
        if not self._eligible:
            raise ConfigError("dataset has no day with enough baseline history")
        return self._eligible[int(rng.integers(len(self._eligible)))]

    @property
    def initial_indoor_temp(self) -> float:
        t0 = self.cfg.initial_indoor_temp
        return self.park.hvac.comfort_mid if t0 is None else t0

    def penalty_band(self) -> tuple[float, float]:
        lo, hi = self.park.hvac.comfort_min, self.park.hvac.comfort_max
        if self.mode == TRAIN:
            shrink = self.cfg.training_comfort_shrink
            return lo + shrink, hi - shrink
        return lo, hi

    def reset(self, day: int, mode: str = TRAIN, carry_in: CarryIn | None = None) -> EnvState:
        if mode not in (TRAIN, EVAL):
            raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
        self._baseline = daily_baseline(self.ds, day)
        self.mode = mode
        self.day = day
        self._t = day * HOURS_PER_DAY
        self._end = self._t + self.cfg.steps_per_episode
        self._done = False
        visit = self.ds.visit_on(day)
        if mode == TRAIN:
            soc_ess, t_in, soc_ev = (self.cfg.initial_soc_ess, self.initial_indoor_temp,
                                     self.cfg.initial_soc_ev)
        else:
            if carry_in is None:
                soc_ess, t_in = self.cfg.initial_soc_ess, self.initial_indoor_temp
                soc_ev = self.cfg.initial_soc_ev
            else:
                soc_ess, t_in = carry_in.soc_ess, carry_in.indoor_temp
                soc_ev = self.cfg.initial_soc_ev if carry_in.soc_ev is None else carry_in.soc_ev
            if visit is not None:
                soc_ev = visit.arrival_soc
        self.ess = BatteryState(float(soc_ess))
        self.ev = BatteryState(float(min(max(soc_ev, self.park.ev.soc_min), self.park.ev.soc_max)))
        self.t_in = float(t_in)
        return self.observe()

    def carry_out(self) -> CarryIn:
        return CarryIn(self.ess.soc, self.t_in, self.ev.soc)

    @property
    def slot(self) -> int:
        return self._t

    @property
    def done(self) -> bool:
        return self._done

    # -- observation -------------------------------------------------------

    def _exogenous(self, t: int) -> tuple[float, ...]:
        ds = self.ds
        return (float(ds.production_load[t]), float(ds.office_load[t]),
                float(self._baseline[t % HOURS_PER_DAY]), float(ds.outdoor_temp[t]))

    def _state_at(self, t: int) -> EnvState:
        pro, off, base, t_out = self._exogenous(t)
        return EnvState(pro, off, base, t_out, self.t_in,
                        pv_available(self.ds, t, self.park.pv_max), float(self.ds.price[t]),
                        self.ess.soc, self.ev.soc)

    def observe(self) -> EnvState:
        if self._t is None:
            raise EpisodeFinished("call reset() first")
        return self._state_at(min(self._t, self._end - 1))

    def context(self) -> SlotContext:
        t = self._t
        return SlotContext(t, t % HOURS_PER_DAY, float(self.ds.price[t]), self.t_in,
                           self.ess.soc, self.ev.soc, bool(self.ds.ev_present[t]),
                           self.ds.event_at(t) is not None, self.park.hvac)

    # -- dynamics ----------------------------------------------------------

    def step(self, action: Action | np.ndarray) -> Transition:
        if self._done:
            raise EpisodeFinished("episode is over; call reset()")
        if not isinstance(action, Action):
            action = Action.from_array(action)
        action = action.clipped()
        park, ds, t = self.park, self.ds, self._t
        state = self._state_at(t)

        present = bool(ds.ev_present[t])
        ctrl = map_action(action, park, self.ess, self.ev, present, self.t_in)
        self.ess = battery_step(park.ess, self.ess, ctrl.ess_kw)
        if present:
            self.ev = battery_step(park.ev, self.ev, ctrl.ev_kw)
        self.t_in = thermal_step(park.hvac, self.t_in, float(ds.outdoor_temp[t]), ctrl.hvac)

        pv = state.pv_energy
        load = state.production_load + state.office_load
        grid = grid_power(load, ctrl.hvac.power, ctrl.ess_kw, ctrl.ev_kw, pv)
        flows = PowerFlows(grid, pv, load, ctrl.hvac.power, ctrl.ess_kw, ctrl.ev_kw)

        q_grid = grid * DT_HOURS
        visit = ds.visit_on(t // HOURS_PER_DAY)
        departure = visit is not None and visit.last_slot == t
        lo, hi = self.penalty_band()
        revenue, ratio, delta_l = 0.0, 0.0, 0.0
        event = ds.event_at(t) if self.dr_participation else None
        if event is not None:
            q_dis = discharged_energy(ctrl.ess_kw, ctrl.ev_kw)
            delta_l, _ = adjusted_load(state.baseline_load, state.production_load,
                                       pv * DT_HOURS, q_dis, ctrl.r_dis)
            revenue, ratio = dr_revenue(delta_l, event)
        costs = CostBreakdown(
            dr_revenue=revenue,
            grid_cost=grid_cost(q_grid, state.price, park.feed_in_price),
            carbon_cost=carbon_cost(park.carbon, q_grid),
            deg_cost=(ageing.step_deg_cost(park.ess.ageing_coeff, ctrl.ess_kw)
                      + ageing.step_deg_cost(park.ev.ageing_coeff, ctrl.ev_kw)),
            temp_penalty=temp_penalty(self.t_in, lo, hi),
            soc_penalty=soc_departure_penalty(self.ev.soc, park.soc_lim, departure),
            response_ratio=ratio,
            adjusted_load=delta_l,
        )
        reward_raw = self.cfg.weights.combine(costs)

        self._t += 1
        done = self._t >= self._end
        self._done = done
        next_state = self._state_at(t if done else self._t)
        violation = temp_penalty(self.t_in, park.hvac.comfort_min, park.hvac.comfort_max)
        return Transition(t, state, action, reward_raw / self.cfg.reward_divisor, next_state,
                          done, costs, ctrl, flows, reward_raw, departure, violation)


Policy = Callable[[ParkEnv, EnvState], Action]
