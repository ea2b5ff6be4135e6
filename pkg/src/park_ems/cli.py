"""``park-ems`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import ageing, config, synthetic
from .baselines import BaselineKind, make_policy, participates_in_dr
from .ddpg import PolicyCheckpoint, actor_policy, train, write_learning_curve
from .dynamics import BatterySpec, Chemistry
from .env import ParkEnv, ParkSpec, with_calibrated_ageing
from .errors import ConfigError, ParkEmsError
from .evaluation import (ComparisonReport, comparison_row, rollout, write_cost_breakdown,
                         write_trace)
from .ingest import ParkDataset, load_dataset, write_dataset

log = logging.getLogger("park_ems")

STRATEGIES = ("ddpg", *(k.value for k in BaselineKind))


# ---------------------------------------------------------------- helpers


def _park(cfg: config.RunConfig) -> ParkSpec:
    return with_calibrated_ageing(cfg.park, cfg.ageing.cycle, cfg.ageing.params)


def _env(cfg: config.RunConfig, ds: ParkDataset, dr_participation: bool = True) -> ParkEnv:
    return ParkEnv(ds, _park(cfg), cfg.episode, dr_participation)


def _out_dir(cfg: config.RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _period_days(env: ParkEnv, cfg: config.RunConfig) -> list[int]:
    """Eligible days restricted to the configured evaluation period."""
    start, end = cfg.data.period_start, cfg.data.period_end
    dates = env.ds.dates()
    days = [d for d in env.eligible_days()
            if (start is None or dates[d] >= start) and (end is None or dates[d] <= end)]
    if not days:
        raise ConfigError(f"evaluation period {start}..{end} contains no eligible day")
    return days


def _strategy_policy(name: str, env: ParkEnv, cfg: config.RunConfig,
                     checkpoint: str | None):
    if name == "ddpg":
        if checkpoint is None:
            raise ConfigError("--strategy ddpg needs --checkpoint")
        ckpt = PolicyCheckpoint.load(checkpoint)
        rule = ckpt.extra.get("hvac_mode_rule", env.park.hvac_mode_rule)
        if rule != env.park.hvac_mode_rule:
            raise ConfigError(f"checkpoint was trained with hvac_mode_rule={rule!r}, "
                              f"config has {env.park.hvac_mode_rule!r}")
        return actor_policy(ckpt)
    return make_policy(name, env, cfg.baselines.thresholds(env.ds.price),
                       cfg.baselines.rule_options)


def _evaluate(name: str, cfg: config.RunConfig, ds: ParkDataset, checkpoint: str | None):
    dr = name == "ddpg" or participates_in_dr(name)
    env = _env(cfg, ds, dr)
    policy = _strategy_policy(name, env, cfg, checkpoint)
    return rollout(env, policy, _period_days(env, cfg))


def _load_config(args) -> config.RunConfig:
    cfg = config.load(getattr(args, "config", None))
    return config.with_overrides(cfg, seed=getattr(args, "seed", None),
                                 output_dir=getattr(args, "output_dir", None),
                                 train_dir=getattr(args, "train_dir", None),
                                 eval_dir=getattr(args, "eval_dir", None),
                                 period_start=getattr(args, "period_start", None),
                                 period_end=getattr(args, "period_end", None))


# ---------------------------------------------------------------- commands


def cmd_gen_data(args) -> int:
    profile = synthetic.SyntheticProfile(days=args.days, start_date=args.start_date)
    ds = synthetic.generate(args.seed, profile)
    paths = write_dataset(ds, args.out)
    print(f"wrote {ds.n_days} days to {Path(paths.loads).parent}")
    return 0


def cmd_train(args) -> int:
    cfg = _load_config(args)
    ds = load_dataset(cfg.data.train_dir, cfg.data.ingest_options)
    out = _out_dir(cfg)
    config.write_snapshot(cfg, out / "config_resolved.yaml")
    park = _park(cfg)
    result = train(lambda: ParkEnv(ds, park, cfg.episode), cfg.ddpg, cfg.seed)
    result.checkpoint.extra = {"hvac_mode_rule": park.hvac_mode_rule,
                               "ess_ageing_coeff": park.ess.ageing_coeff,
                               "ev_ageing_coeff": park.ev.ageing_coeff}
    result.checkpoint.save(out / "checkpoint.npz")
    write_learning_curve(result.curve, out / "learning_curve.csv")
    first = np.mean([e.sum_reward for e in result.curve[:10]]) if result.curve else float("nan")
    last = np.mean([e.sum_reward for e in result.curve[-10:]]) if result.curve else float("nan")
    print(f"trained {cfg.ddpg.episodes} episodes; first-10 reward {first:.4f}, "
          f"last-10 reward {last:.4f}; outputs in {out}")
    return 0


def cmd_evaluate(args) -> int:
    cfg = _load_config(args)
    ds = load_dataset(cfg.data.eval_path, cfg.data.ingest_options)
    result = _evaluate(args.strategy, cfg, ds, args.checkpoint)
    out = _out_dir(cfg)
    write_trace(result, out / "trace.csv")
    write_cost_breakdown(result, out / "cost_breakdown.csv")
    tot = result.totals()
    print(f"{args.strategy}: total cost {tot['total_cost']:,.2f} RMB over {len(result.days)} days "
          f"(comfort violations {100 * result.violation_rate:.2f}% of slots, "
          f"EV departures met {100 * result.departure_success_rate:.1f}%)")
    return 0


def cmd_compare(args) -> int:
    if len(args.strategies) < 2:
        raise ConfigError("compare needs at least two strategies")
    cfg = _load_config(args)
    ds = load_dataset(cfg.data.eval_path, cfg.data.ingest_options)
    rows = [comparison_row(name, _evaluate(name, cfg, ds, args.checkpoint))
            for name in args.strategies]
    report = ComparisonReport(rows)
    out = _out_dir(cfg)
    report.write_csv(out / "comparison.csv")
    print(report.format_table())
    return 0


def cmd_age_curves(args) -> int:
    params = config.load(args.config).ageing.params if args.config else ageing.AgeingParams()
    efc = np.arange(0.0, args.efc_max + 0.5 * args.efc_step, args.efc_step)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["efc", "lfp_loss_pct", "nmc_loss_pct"])
        for n in efc:
            c = ageing.CycleSummary(args.c_rate, args.dod, float(n))
            w.writerow([repr(float(n)),
                        repr(ageing.capacity_loss(Chemistry.LFP, params, c)),
                        repr(ageing.capacity_loss(Chemistry.NMC, params, c))])
    print(f"wrote {len(efc)} rows to {args.out}")
    return 0


def cmd_age_coeff(args) -> int:
    if args.loss is not None:
        missing = [k for k in ("capacity", "throughput") if getattr(args, k) is None]
        if missing:
            raise ConfigError(f"direct mode needs --{' --'.join(missing)}")
        cost = args.cost if args.cost is not None else BatterySpec().procurement_cost
        alpha = ageing.ageing_coefficient(args.loss, args.capacity, args.throughput, cost)
    else:
        cfg = config.load(args.config) if args.config else config.RunConfig()
        chem = Chemistry(args.chemistry)
        spec = cfg.park.ess if chem is Chemistry.LFP else cfg.park.ev
        if spec.chemistry is not chem:
            spec = BatterySpec(chemistry=chem)
        if args.capacity is not None:
            spec = replace(spec, capacity=args.capacity)
        cycle = ageing.CycleSummary(args.c_rate, args.dod, args.efc)
        alpha = ageing.representative_cycle_calibration(spec, cycle, args.cost,
                                                        cfg.ageing.params)
    print(repr(alpha.value))
    return 0


def cmd_plot(args) -> int:
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        raise ConfigError("plot needs matplotlib (pip install park-ems[plot])") from None
    import pandas as pd
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.curve:
        df = pd.read_csv(args.curve)
        fig, ax = plt.subplots(figsize=(7, 3.5))
        ax.plot(df["episode"], df["sum_reward"], lw=0.6)
        ax.set_xlabel("episode")
        ax.set_ylabel("episode reward")
        fig.tight_layout()
        fig.savefig(out / "learning_curve.svg", format="svg", metadata={"Date": None})
        plt.close(fig)
    if args.trace:
        df = pd.read_csv(args.trace)
        fig, axes = plt.subplots(3, 1, figsize=(8, 7), sharex=True)
        x = np.arange(len(df))
        axes[0].plot(x, df["indoor_temp_next"], label="indoor")
        axes[0].plot(x, df["outdoor_temp"], label="outdoor", alpha=0.6)
        axes[0].set_ylabel("degC")
        axes[0].legend(loc="upper right")
        axes[1].plot(x, df["soc_ess"], label="ESS")
        axes[1].plot(x, df["soc_ev"], label="EV")
        axes[1].set_ylabel("SoC")
        axes[1].legend(loc="upper right")
        axes[2].plot(x, df["grid_kw"], label="grid")
        axes[2].plot(x, df["ess_kw"], label="ESS")
        axes[2].plot(x, df["hvac_kw"], label="HVAC")
        axes[2].set_ylabel("kW")
        axes[2].set_xlabel("slot")
        axes[2].legend(loc="upper right")
        fig.tight_layout()
        fig.savefig(out / "trace.svg", format="svg", metadata={"Date": None})
        plt.close(fig)
    if not (args.curve or args.trace):
        raise ConfigError("plot needs --curve and/or --trace")
    print(f"wrote SVG files to {out}")
    return 0


# ---------------------------------------------------------------- parser


def _run_args(p: argparse.ArgumentParser, eval_paths: bool = False) -> None:
    p.add_argument("--config", help="YAML/JSON run config (defaults apply when omitted)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--output-dir", dest="output_dir", help="override output_dir")
    p.add_argument("--train-dir", dest="train_dir", help="override data.train_dir")
    if eval_paths:
        p.add_argument("--eval-dir", dest="eval_dir", help="override data.eval_dir")
        p.add_argument("--period-start", dest="period_start", help="first date, YYYY-MM-DD")
        p.add_argument("--period-end", dest="period_end", help="last date, YYYY-MM-DD")
        p.add_argument("--checkpoint", help="checkpoint.npz for the ddpg strategy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="park-ems",
                                     description="Industrial-park energy management with DDPG")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="write the seeded synthetic month as CSV files")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--days", type=int, default=synthetic.SyntheticProfile.days)
    p.add_argument("--start-date", default=synthetic.SyntheticProfile.start_date)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train a DDPG policy")
    _run_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="chained daily rollout of one strategy")
    _run_args(p, eval_paths=True)
    p.add_argument("--strategy", choices=STRATEGIES, required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="evaluate several strategies on the same period")
    _run_args(p, eval_paths=True)
    p.add_argument("--strategies", nargs="+", choices=STRATEGIES, required=True,
                   help="first strategy is the reference for savings")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("age-curves", help="capacity loss vs EFC for both chemistries")
    p.add_argument("--config")
    p.add_argument("--c-rate", dest="c_rate", type=float, default=1.0)
    p.add_argument("--dod", type=float, default=1.0)
    p.add_argument("--efc-max", dest="efc_max", type=float, default=2000.0)
    p.add_argument("--efc-step", dest="efc_step", type=float, default=10.0)
    p.add_argument("--out", default="ageing_curves.csv")
    p.set_defaults(func=cmd_age_curves)

    p = sub.add_parser("age-coeff", help="ageing-cost coefficient alpha (RMB/kWh)")
    p.add_argument("--config")
    p.add_argument("--chemistry", choices=[c.value for c in Chemistry], default="LFP")
    p.add_argument("--c-rate", dest="c_rate", type=float, default=0.25)
    p.add_argument("--dod", type=float, default=0.8)
    p.add_argument("--efc", type=float, default=1000.0)
    p.add_argument("--loss", type=float, help="direct mode: fractional capacity loss")
    p.add_argument("--capacity", type=float, help="kWh")
    p.add_argument("--throughput", type=float, help="direct mode: kWh")
    p.add_argument("--cost", type=float, default=None,
                   help="procurement cost RMB/kWh (default: battery spec)")
    p.set_defaults(func=cmd_age_coeff)

    p = sub.add_parser("plot", help="render learning curve and/or trace as SVG")
    p.add_argument("--curve")
    p.add_argument("--trace")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ParkEmsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
