"""Run configuration: one structured YAML/JSON file per experiment.

Every key is optional and falls back to the documented default below; unknown
keys are rejected so a typo never silently reverts a setting. Nested sections
mirror the dataclasses they build::

    seed: 0                      # PARK_EMS_SEED overrides this
    output_dir: runs/default
    data:
      train_dir: data            # directory holding the six CSV files
      eval_dir: null             # null: evaluate on train_dir
      exclude_dr_days_from_baseline: false
      period_start: null         # first evaluation date (YYYY-MM-DD), inclusive
      period_end: null           # last evaluation date, inclusive
    park:
      hvac: {efficiency_ratio: 3.2, conductance: 18.0, inertia: 0.85,
             max_power: 50.0, comfort_min: 20.0, comfort_max: 24.0}
      ess: {chemistry: LFP, capacity: 400.0, rated_power: 100.0, charge_eff: 0.95,
            discharge_eff: 0.95, soc_min: 0.2, soc_max: 1.0, standby_loss: 0.0,
            procurement_cost: 1000.0, ageing_coeff: 0.0}   # 0: calibrate
      ev: {chemistry: NMC, ...same keys...}
      carbon: {tax_rate: 0.06, intensity: 0.28088}
      pv_max: 200.0
      soc_lim: 0.6
      feed_in_price: null        # null: exports are not paid
      hvac_mode_rule: midpoint   # or sign
    episode:
      steps_per_episode: 24
      initial_soc_ess: 0.5
      initial_soc_ev: 0.35
      initial_indoor_temp: null  # null: middle of the comfort band
      training_comfort_shrink: 0.5
      reward_divisor: 100.0
      seed: 0                    # training-day sampling inside the env
      weights: {dr_revenue: 1, grid_cost: 1, temp_penalty: 50,
                soc_penalty: 200, deg_cost: 1, carbon_cost: 1}
    ddpg:
      hidden: [256, 256]
      actor_lr: 1.0e-4
      critic_lr: 1.0e-3
      gamma: 0.99
      tau: 0.001
      batch_size: 64
      buffer_size: 1000000
      episodes: 7500
      updates_per_step: 1
      optimizer: adam            # or sgd
      ou_rate: 0.15
      ou_scale: 0.2
      ou_scale_final: null       # null: constant noise scale
      final_init_scale: 3.0e-3
      grad_clip: null
    baselines:
      tou_low_percentile: 25.0   # charge at or below this price percentile
      tou_high_percentile: 75.0  # discharge at or above this one
      tou_charge_price: null     # explicit thresholds win over percentiles
      tou_discharge_price: null
      off_peak_start: 0          # rule-based DR charging window, inclusive hours
      off_peak_end: 6
    ageing:
      params: {a1: 0.0630, a2: 0.0971, a3: 4.0253, a4: 1.0923, z_cyc: 0.5,
               b1: 7.348e-3, b2: 7.60e-4, b3: 4.081e-3, v0: 3.667, v_avg: 3.7, c0: 2.05}
      c_rate: 0.25               # representative cycle used to calibrate alpha
      dod: 0.8
      efc: 1000.0
"""

from __future__ import annotations

import dataclasses
import enum
import json
import os
import types
import typing
from dataclasses import dataclass, field, fields, is_dataclass, replace
from pathlib import Path
from typing import Any

import yaml

from .ageing import AgeingParams, CycleSummary
from .baselines import RuleDrOptions, TouThresholds
from .ddpg.core import DdpgConfig
from .env import EpisodeConfig, ParkSpec
from .errors import ConfigError
from .ingest import IngestOptions

SEED_ENV = "PARK_EMS_SEED"


@dataclass(frozen=True)
class DataConfig:
    train_dir: str = "data"
    eval_dir: str | None = None
    exclude_dr_days_from_baseline: bool = False
    period_start: str | None = None
    period_end: str | None = None

    @property
    def ingest_options(self) -> IngestOptions:
        return IngestOptions(self.exclude_dr_days_from_baseline)

    @property
    def eval_path(self) -> str:
        return self.eval_dir if self.eval_dir is not None else self.train_dir


@dataclass(frozen=True)
class BaselineConfig:
    tou_low_percentile: float = 25.0
    tou_high_percentile: float = 75.0
    tou_charge_price: float | None = None
    tou_discharge_price: float | None = None
    off_peak_start: int = 0
    off_peak_end: int = 6

    def __post_init__(self):
        if not 0 <= self.tou_low_percentile < self.tou_high_percentile <= 100:
            raise ConfigError("need 0 <= tou_low_percentile < tou_high_percentile <= 100")
        if (self.tou_charge_price is None) != (self.tou_discharge_price is None):
            raise ConfigError("set both tou_charge_price and tou_discharge_price or neither")
        if not 0 <= self.off_peak_start <= self.off_peak_end <= 23:
            raise ConfigError("off-peak window must satisfy 0 <= start <= end <= 23")

    def thresholds(self, prices) -> TouThresholds:
        if self.tou_charge_price is not None:
            return TouThresholds(self.tou_charge_price, self.tou_discharge_price)
        return TouThresholds.from_prices(prices, self.tou_low_percentile, self.tou_high_percentile)

    @property
    def rule_options(self) -> RuleDrOptions:
        return RuleDrOptions(self.off_peak_start, self.off_peak_end)


@dataclass(frozen=True)
class AgeingConfig:
    params: AgeingParams = field(default_factory=AgeingParams)
    c_rate: float = 0.25
    dod: float = 0.8
    efc: float = 1000.0

    @property
    def cycle(self) -> CycleSummary:
        return CycleSummary(self.c_rate, self.dod, self.efc)


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    output_dir: str = "runs/default"
    data: DataConfig = field(default_factory=DataConfig)
    park: ParkSpec = field(default_factory=ParkSpec)
    episode: EpisodeConfig = field(default_factory=EpisodeConfig)
    ddpg: DdpgConfig = field(default_factory=DdpgConfig)
    baselines: BaselineConfig = field(default_factory=BaselineConfig)
    ageing: AgeingConfig = field(default_factory=AgeingConfig)

    def to_dict(self) -> dict:
        return _plain(self)


# ---------------------------------------------------------------- building


def _plain(obj: Any) -> Any:
    if is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (tuple, list)):
        return [_plain(x) for x in obj]
    return obj


def _coerce(value: Any, hint: Any, where: str) -> Any:
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin in (typing.Union, types.UnionType):
        if value is None:
            if type(None) in args:
                return None
            raise ConfigError(f"{where}: null is not allowed")
        (inner,) = [a for a in args if a is not type(None)]
        return _coerce(value, inner, where)
    if value is None:
        raise ConfigError(f"{where}: null is not allowed")
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{where}: expected a list")
        return tuple(_coerce(v, args[0], f"{where}[{k}]") for k, v in enumerate(value))
    if isinstance(hint, type) and issubclass(hint, enum.Enum):
        try:
            return hint(value)
        except ValueError:
            raise ConfigError(f"{where}: {value!r} is not one of "
                              f"{[m.value for m in hint]}") from None
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if hint in (int, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        if hint is int:
            if float(value) != int(value):
                raise ConfigError(f"{where}: expected an integer, got {value!r}")
            return int(value)
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    return value


def _merge(base: Any, overrides: Any, where: str) -> Any:
    if not isinstance(overrides, dict):
        raise ConfigError(f"{where or 'config'}: expected a mapping, got {overrides!r}")
    cls = type(base)
    hints = typing.get_type_hints(cls)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(overrides) - known)
    if unknown:
        raise ConfigError(f"{where or 'config'}: unknown key(s) {unknown}")
    updates = {}
    for key, value in overrides.items():
        path = f"{where}.{key}" if where else key
        current = getattr(base, key)
        if is_dataclass(current):
            updates[key] = _merge(current, value, path)
        else:
            updates[key] = _coerce(value, hints[key], path)
    try:
        return replace(base, **updates)
    except ConfigError as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where or 'config'}: {exc}") from None


def from_dict(raw: dict | None, env: dict | None = None) -> RunConfig:
    """Build a RunConfig from a plain mapping, then apply ``PARK_EMS_SEED``."""
    cfg = _merge(RunConfig(), raw or {}, "")
    env = os.environ if env is None else env
    if env.get(SEED_ENV, "") != "":
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
        cfg = replace(cfg, seed=seed)
    return cfg


def load(path: str | os.PathLike | None, env: dict | None = None) -> RunConfig:
    """Read YAML (or JSON, which YAML accepts); ``None`` gives all defaults."""
    if path is None:
        return from_dict({}, env)
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        raw = yaml.safe_load(p.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = f" line {mark.line + 1}" if mark is not None else ""
        raise ConfigError(f"{p}{line}: invalid YAML ({exc})") from None
    try:
        return from_dict(raw if raw is not None else {}, env)
    except ConfigError as exc:
        raise ConfigError(f"{p}: {exc}") from None


def with_overrides(cfg: RunConfig, **kwargs) -> RunConfig:
    """Apply CLI flag overrides (seed, output_dir, data paths); ``None`` means unset."""
    top = {k: v for k, v in kwargs.items() if k in ("seed", "output_dir") and v is not None}
    data = {k: v for k, v in kwargs.items() if k in {f.name for f in fields(DataConfig)}
            and v is not None}
    if data:
        top["data"] = dataclasses.replace(cfg.data, **data)
    return replace(cfg, **top)


def write_snapshot(cfg: RunConfig, path: str | os.PathLike) -> None:
    """Resolved configuration, re-loadable with :func:`load`."""
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.to_dict(), fh, sort_keys=False, default_flow_style=False)


def dumps_json(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=False)
