"""Deterministic one-slot physics: thermal zone, batteries and the grid balance.

All quantities are per hourly slot, so kW and kWh are numerically
interchangeable (``DT_HOURS == 1``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .errors import InadmissiblePower, SlotOutOfRange

DT_HOURS = 1.0
_TOL = 1e-9


class Chemistry(str, enum.Enum):
    LFP = "LFP"
    NMC = "NMC"


class HvacMode(enum.IntEnum):
    HEAT = 1
    COOL = -1
    OFF = 0


@dataclass(frozen=True)
class HvacSpec:
    efficiency_ratio: float = 3.2
    conductance: float = 18.0  # kW/degC
    inertia: float = 0.85
    max_power: float = 50.0  # kW
    comfort_min: float = 20.0
    comfort_max: float = 24.0

    def __post_init__(self):
        if not 0.0 <= self.inertia < 1.0:
            raise ValueError(f"inertia must be in [0, 1), got {self.inertia}")
        if self.conductance <= 0 or self.efficiency_ratio <= 0 or self.max_power <= 0:
            raise ValueError("conductance, efficiency_ratio and max_power must be > 0")
        if self.comfort_min >= self.comfort_max:
            raise ValueError("comfort_min must be below comfort_max")

    @property
    def comfort_mid(self) -> float:
        return 0.5 * (self.comfort_min + self.comfort_max)


@dataclass(frozen=True)
class HvacCommand:
    mode: HvacMode = HvacMode.OFF
    power: float = 0.0

    def __post_init__(self):
        if self.power < 0:
            raise ValueError(f"HVAC power must be >= 0, got {self.power}")
        if self.mode == HvacMode.OFF and self.power != 0:
            raise ValueError("HVAC off requires zero power")


@dataclass(frozen=True)
class BatterySpec:
    chemistry: Chemistry = Chemistry.LFP
    capacity: float = 400.0  # kWh
    rated_power: float = 100.0  # kW
    charge_eff: float = 0.95
    discharge_eff: float = 0.95
    soc_min: float = 0.2
    soc_max: float = 1.0
    standby_loss: float = 0.0  # kWh per idle slot
    procurement_cost: float = 1000.0  # RMB/kWh
    ageing_coeff: float = 0.0  # RMB per kWh throughput

    def __post_init__(self):
        object.__setattr__(self, "chemistry", Chemistry(self.chemistry))
        if not (0 < self.charge_eff <= 1 and 0 < self.discharge_eff <= 1):
            raise ValueError("efficiencies must lie in (0, 1]")
        if not 0 <= self.soc_min < self.soc_max <= 1:
            raise ValueError("need 0 <= soc_min < soc_max <= 1")
        if self.capacity <= 0 or self.rated_power <= 0:
            raise ValueError("capacity and rated_power must be > 0")
        if self.standby_loss < 0 or self.ageing_coeff < 0:
            raise ValueError("standby_loss and ageing_coeff must be >= 0")


@dataclass(frozen=True)
class BatteryState:
    soc: float


@dataclass(frozen=True)
class PowerFlows:
    """One slot of the park balance; ``grid`` positive means purchase."""

    grid: float
    pv: float
    load: float
    hvac: float
    ess: float
    ev: float

    @property
    def residual(self) -> float:
        return self.grid + self.pv - (self.load + self.hvac + self.ess + self.ev)


def thermal_step(spec: HvacSpec, t_in: float, t_out: float, cmd: HvacCommand) -> float:
    """Indoor temperature after one slot of the first-order zone model."""
    drive = int(cmd.mode) * spec.efficiency_ratio * cmd.power / spec.conductance
    return spec.inertia * t_in + (1.0 - spec.inertia) * (t_out + drive)


def charge_bound(spec: BatterySpec, state: BatteryState) -> float:
    return max(0.0, (spec.soc_max - state.soc) * spec.capacity / spec.charge_eff)


def discharge_bound(spec: BatterySpec, state: BatteryState) -> float:
    """Most negative admissible power (<= 0)."""
    return min(0.0, (spec.soc_min - state.soc) * spec.capacity * spec.discharge_eff)


def clamp_battery_power(spec: BatterySpec, state: BatteryState, requested: float) -> float:
    """Clip a signed power request to the rated limit, then to the SoC window.

    Positive is charging. The sign of the result matches the request or the
    result is zero, so charging and discharging never coincide.
    """
    p = min(max(requested, -spec.rated_power), spec.rated_power)
    if p > 0:
        return min(p, charge_bound(spec, state))
    if p < 0:
        return max(p, discharge_bound(spec, state))
    return 0.0


def battery_step(spec: BatterySpec, state: BatteryState, power: float) -> BatteryState:
    if abs(power) > spec.rated_power + _TOL:
        raise InadmissiblePower(f"|{power}| kW exceeds rated {spec.rated_power} kW")
    if power > 0:
        soc = state.soc + power * DT_HOURS * spec.charge_eff / spec.capacity
    elif power < 0:
        soc = state.soc + power * DT_HOURS / (spec.capacity * spec.discharge_eff)
    else:
        soc = max(spec.soc_min, state.soc - spec.standby_loss / spec.capacity)
    if soc > spec.soc_max + _TOL or soc < spec.soc_min - _TOL:
        raise InadmissiblePower(
            f"power {power} kW drives SoC {state.soc} to {soc}, "
            f"outside [{spec.soc_min}, {spec.soc_max}]")
    return BatteryState(min(max(soc, spec.soc_min), spec.soc_max))


def grid_power(load: float, hvac: float, ess: float, ev: float, pv: float) -> float:
    """Grid exchange that closes the balance; negative means export."""
    return load + hvac + ess + ev - pv


def pv_available(ds, t: int, pv_max: float) -> float:
    if not 0 <= t < ds.n_slots:
        raise SlotOutOfRange(f"slot {t} outside horizon of {ds.n_slots} slots")
    return min(max(float(ds.pv_energy[t]), 0.0), pv_max)
