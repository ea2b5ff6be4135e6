import copy
import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from park_ems import synthetic
from park_ems.baselines import (BaselineKind, RuleDrOptions, TouThresholds, make_policy,
                                no_dispatch_policy, participates_in_dr, rule_dr_policy,
                                thermostat_hvac, tou_arbitrage_policy)
from park_ems.dynamics import HvacMode, HvacSpec
from park_ems.env import (EVAL, Action, CarryIn, ParkEnv, ParkSpec, SlotContext, map_action,
                          with_calibrated_ageing)
from park_ems.errors import ConfigError
from park_ems.evaluation import rollout

from .conftest import REFERENCE_CYCLE

HVAC = HvacSpec()


def ctx(hour=12, price=0.65, t_in=22.0, soc=0.5, present=False, dr=False):
    return SlotContext(hour, hour, price, t_in, soc, soc, present, dr, HVAC)


class TestThermostat:
    def test_hot(self):
        c = thermostat_hvac(25.0, HVAC)
        assert (c.mode, c.power) == (HvacMode.COOL, 50.0)

    def test_cold(self):
        c = thermostat_hvac(19.0, HVAC)
        assert (c.mode, c.power) == (HvacMode.HEAT, 50.0)

    def test_in_band(self):
        assert thermostat_hvac(22.0, HVAC).mode is HvacMode.OFF
        assert thermostat_hvac(24.0, HVAC).mode is HvacMode.OFF

    @pytest.mark.parametrize("rule", ["midpoint", "sign"])
    @pytest.mark.parametrize("t_in", [19.0, 22.0, 25.0])
    def test_either_rule_reproduces_thermostat(self, park, rule, t_in):
        from park_ems.dynamics import BatteryState
        p = dataclasses.replace(park, hvac_mode_rule=rule)
        a = no_dispatch_policy(ctx(t_in=t_in))
        c = map_action(a, p, BatteryState(0.5), BatteryState(0.5), False, t_in)
        assert c.hvac == thermostat_hvac(t_in, HVAC)


class TestRuleDr:
    def test_dr_hour_discharges(self):
        a = rule_dr_policy(ctx(hour=18, soc=0.8, dr=True, present=True))
        assert (a.raw_ess, a.raw_ev, a.raw_rdis) == (-1.0, -1.0, 1.0)

    def test_off_peak_charges(self):
        a = rule_dr_policy(ctx(hour=3, soc=0.3))
        assert a.raw_ess == 1.0 and a.raw_ev == 0.0

    def test_idle_otherwise(self):
        a = rule_dr_policy(ctx(hour=12))
        assert (a.raw_ess, a.raw_ev) == (0.0, 0.0)

    def test_off_peak_window_is_configurable(self):
        opts = RuleDrOptions(off_peak_start=22, off_peak_end=23)
        assert rule_dr_policy(ctx(hour=23), opts).raw_ess == 1.0
        assert rule_dr_policy(ctx(hour=3), opts).raw_ess == 0.0


class TestTou:
    TH = TouThresholds(0.4, 1.0)

    def test_charge(self):
        assert tou_arbitrage_policy(ctx(price=0.3), self.TH).raw_ess == 1.0

    def test_discharge(self):
        a = tou_arbitrage_policy(ctx(price=1.1), self.TH)
        assert a.raw_ess == -1.0 and a.raw_rdis == 1.0

    def test_dead_band(self):
        assert tou_arbitrage_policy(ctx(price=0.7), self.TH).raw_ess == 0.0

    def test_ignores_dr_signal(self):
        a = tou_arbitrage_policy(ctx(price=0.7, dr=True), self.TH)
        b = tou_arbitrage_policy(ctx(price=0.7, dr=False), self.TH)
        assert a == b

    def test_threshold_order(self):
        with pytest.raises(ConfigError):
            TouThresholds(1.0, 1.0)

    def test_percentiles(self, month):
        th = TouThresholds.from_prices(month.price)
        assert th.charge_price == np.percentile(month.price, 25)
        assert th.discharge_price == np.percentile(month.price, 75)


class TestNoDispatch:
    def test_never_moves_batteries(self, month, park):
        env = ParkEnv(month, park, dr_participation=participates_in_dr("none"))
        res = rollout(env, make_policy("none", env))
        for tr in res.transitions:
            assert tr.controls.ess_kw == tr.controls.ev_kw == 0.0
            assert tr.controls.r_dis == 0.5
            assert tr.next_state.soc_ess == env.cfg.initial_soc_ess
            assert tr.flows.grid == pytest.approx(
                tr.flows.load + tr.flows.hvac - tr.flows.pv, abs=1e-12)
        assert res.totals()["dr_revenue"] == 0.0

    def test_hot_slot_cools(self):
        from park_ems.dynamics import BatteryState
        a = no_dispatch_policy(ctx(t_in=25.5))
        c = map_action(a, ParkSpec(), BatteryState(.5), BatteryState(.5), False, 25.5)
        assert c.hvac.mode is HvacMode.COOL and c.hvac.power == 50.0


def test_kinds_are_exhaustive():
    assert {k.value for k in BaselineKind} == {"dr-rule", "tou", "none"}
    assert participates_in_dr("tou") and participates_in_dr("dr-rule")
    assert not participates_in_dr("none")


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.25, 1.0), st.integers(8, 13))
def test_rule_dr_response_at_least_tou(seed, soc, day):
    """From the same state, the DR rule's response ratio is never below the TOU rule's."""
    ds = synthetic.generate(seed, synthetic.SyntheticProfile(days=14))
    park = with_calibrated_ageing(ParkSpec(), REFERENCE_CYCLE)
    env = ParkEnv(ds, park)
    env.reset(day, EVAL, CarryIn(soc_ess=soc, indoor_temp=22.0))
    rule = make_policy("dr-rule", env)
    tou = make_policy("tou", env)
    while not env.done:
        if env.context().dr_active:
            a, b = copy.deepcopy(env), copy.deepcopy(env)
            ra = a.step(rule(a, a.observe())).costs.response_ratio
            rb = b.step(tou(b, b.observe())).costs.response_ratio
            assert ra >= rb - 1e-12
        env.step(Action(raw_hvac=0.0))
