"""Empirical cycle-ageing laws and their conversion into a dispatch cost.

Both capacity-loss laws return percent of nominal capacity. The fitted
coefficients correspond to cycling at 40 degC; there is no temperature input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import DT_HOURS, BatterySpec, Chemistry
from .errors import ZeroThroughput


@dataclass(frozen=True)
class AgeingParams:
    # LFP
    a1: float = 0.0630
    a2: float = 0.0971
    a3: float = 4.0253
    a4: float = 1.0923
    z_cyc: float = 0.5
    # NMC
    b1: float = 7.348e-3
    b2: float = 7.60e-4
    b3: float = 4.081e-3
    v0: float = 3.667  # V
    v_avg: float = 3.7  # V
    c0: float = 2.05  # Ah

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not math.isfinite(value):
                raise ValueError(f"ageing parameter {name} must be finite")


@dataclass(frozen=True)
class CycleSummary:
    c_rate: float
    dod: float
    efc: float

    def __post_init__(self):
        # dod == 0 is let through so calibration can report ZeroThroughput
        if not 0.0 <= self.dod <= 1.0:
            raise ValueError(f"dod must be in [0, 1], got {self.dod}")
        if self.c_rate <= 0:
            raise ValueError(f"c_rate must be > 0, got {self.c_rate}")
        if self.efc < 0:
            raise ValueError(f"efc must be >= 0, got {self.efc}")


@dataclass(frozen=True)
class AgeingCoefficient:
    value: float  # RMB per kWh of throughput

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("ageing coefficient must be >= 0")


def lfp_stress_factors(p: AgeingParams, c: CycleSummary) -> tuple[float, float]:
    k_c = p.a1 * c.c_rate + p.a2
    k_d = p.a3 * (c.dod - 0.6) ** 3 + p.a4
    return k_c, k_d


def lfp_capacity_loss(p: AgeingParams, c: CycleSummary) -> float:
    k_c, k_d = lfp_stress_factors(p, c)
    return k_c * k_d * c.efc ** p.z_cyc


def nmc_capacity_loss(p: AgeingParams, c: CycleSummary) -> float:
    b_cap = p.b1 * (p.v_avg - p.v0) ** 2 + p.b2 + p.b3 * c.dod
    charge_throughput = c.efc * p.c0 * c.dod  # Ah
    return b_cap * math.sqrt(charge_throughput)


def capacity_loss(chemistry: Chemistry, p: AgeingParams, c: CycleSummary) -> float:
    if Chemistry(chemistry) is Chemistry.LFP:
        return lfp_capacity_loss(p, c)
    return nmc_capacity_loss(p, c)


def ageing_coefficient(frac_loss: float, capacity: float, throughput: float,
                       cost_per_kwh: float) -> AgeingCoefficient:
    """Procurement cost of lost capacity spread over the energy cycled."""
    if throughput <= 0:
        raise ZeroThroughput(f"throughput must be > 0 kWh, got {throughput}")
    return AgeingCoefficient(frac_loss * capacity / throughput * cost_per_kwh)


def step_deg_cost(coeff: AgeingCoefficient | float, power: float) -> float:
    alpha = coeff.value if isinstance(coeff, AgeingCoefficient) else coeff
    return alpha * abs(power) * DT_HOURS


def representative_cycle_calibration(spec: BatterySpec, c: CycleSummary,
                                     cost_per_kwh: float | None = None,
                                     params: AgeingParams | None = None) -> AgeingCoefficient:
    """Ageing coefficient from the marginal loss of one more equivalent full cycle.

    ``c.efc`` is the reference cycle count at which the slope of the loss
    curve is taken; one EFC cycles ``2 * dod * capacity`` kWh.
    """
    params = params or AgeingParams()
    cost = spec.procurement_cost if cost_per_kwh is None else cost_per_kwh
    throughput = 2.0 * c.dod * spec.capacity
    if throughput <= 0:
        raise ZeroThroughput(f"dod={c.dod} gives zero throughput per cycle")
    n = max(c.efc, 1.0)
    now = capacity_loss(spec.chemistry, params, CycleSummary(c.c_rate, c.dod, n))
    before = capacity_loss(spec.chemistry, params, CycleSummary(c.c_rate, c.dod, n - 1.0))
    frac_loss = (now - before) / 100.0
    return ageing_coefficient(frac_loss, spec.capacity, throughput, cost)
