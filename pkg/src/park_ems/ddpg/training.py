"""Training loop and greedy deployment."""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..env import ACTION_DIM, STATE_DIM, TRAIN, Action, ParkEnv
from ..errors import NumericError
from ..ingest import NormStats, compute_norm_stats
from .checkpoint import PolicyCheckpoint
from .core import DdpgAgent, DdpgConfig
from .noise import OuNoise
from .replay import ReplayBuffer

log = logging.getLogger(__name__)

CURVE_COLUMNS = ("episode", "steps", "mean_reward", "sum_reward", "critic_loss_mean")


@dataclass(frozen=True)
class EpisodeLog:
    episode: int
    steps: int
    mean_reward: float
    sum_reward: float
    critic_loss_mean: float


@dataclass
class TrainResult:
    checkpoint: PolicyCheckpoint
    curve: list[EpisodeLog]
    agent: DdpgAgent


def env_norm_stats(env: ParkEnv) -> NormStats:
    park = env.park
    return compute_norm_stats(env.ds, env.initial_indoor_temp,
                              [(park.ess.soc_min, park.ess.soc_max),
                               (park.ev.soc_min, park.ev.soc_max)],
                              (park.hvac.comfort_min, park.hvac.comfort_max))


def train(env_factory: Callable[[], ParkEnv], cfg: DdpgConfig, seed: int,
          on_episode: Callable[[EpisodeLog], None] | None = None) -> TrainResult:
    """Run DDPG for ``cfg.episodes`` daily episodes.

    The seed fixes network initialisation, exploration noise, minibatch
    sampling and the training-day draw through independent child streams.
    Updates start once the buffer holds ``cfg.batch_size`` transitions.
    """
    env = env_factory()
    init_ss, noise_ss, replay_ss, day_ss = np.random.SeedSequence(seed).spawn(4)
    stats = env_norm_stats(env)
    agent = DdpgAgent(STATE_DIM, ACTION_DIM, cfg, np.random.default_rng(init_ss))
    noise = OuNoise(ACTION_DIM, cfg.ou_rate, cfg.ou_scale, np.random.default_rng(noise_ss))
    buffer = ReplayBuffer(min(cfg.buffer_size, max(cfg.episodes, 1) * env.cfg.steps_per_episode),
                          STATE_DIM, ACTION_DIM, np.random.default_rng(replay_ss))
    day_rng = np.random.default_rng(day_ss)

    curve = []
    for episode in range(1, cfg.episodes + 1):
        s = stats.normalize(env.reset(env.sample_day(day_rng), TRAIN).to_array())
        noise.reset()
        noise.scale = cfg.noise_scale(episode)
        rewards, losses = [], []
        try:
            while True:
                a = np.clip(agent.act(s) + noise.step(), -1.0, 1.0)
                tr = env.step(a)
                s_next = stats.normalize(tr.next_state.to_array())
                buffer.add(s, a, tr.reward, s_next, tr.done)
                rewards.append(tr.reward)
                if len(buffer) >= cfg.batch_size:
                    for _ in range(cfg.updates_per_step):
                        losses.append(agent.update(buffer.sample(cfg.batch_size)))
                if tr.done:
                    break
                s = s_next
        except NumericError as exc:
            raise type(exc)(f"training aborted in episode {episode}: {exc}") from exc
        entry = EpisodeLog(episode, len(rewards), float(np.mean(rewards)), float(np.sum(rewards)),
                           float(np.mean(losses)) if losses else float("nan"))
        curve.append(entry)
        if on_episode is not None:
            on_episode(entry)
        if episode % 100 == 0:
            log.info("episode %d sum_reward %.4f critic_loss %.5f", episode, entry.sum_reward,
                     entry.critic_loss_mean)

    ckpt = PolicyCheckpoint(agent.actor.copy(), agent.critic.copy(), agent.actor_target.copy(),
                            agent.critic_target.copy(), cfg, stats, cfg.episodes, seed)
    return TrainResult(ckpt, curve, agent)


def write_learning_curve(curve: Sequence[EpisodeLog], path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CURVE_COLUMNS)
        for e in curve:
            w.writerow([e.episode, e.steps, repr(e.mean_reward), repr(e.sum_reward),
                        repr(e.critic_loss_mean)])


def actor_policy(ckpt: PolicyCheckpoint):
    """Greedy ``policy(env, state)`` that acts on normalised observations without noise."""
    actor, stats = ckpt.actor, ckpt.norm_stats

    def policy(env: ParkEnv, state) -> Action:
        return Action.from_array(actor(stats.normalize(state.to_array()))[0])

    return policy


def deploy(ckpt: PolicyCheckpoint, env: ParkEnv, days: Sequence[int] | None = None,
           trace_path: str | os.PathLike | None = None):
    """Chained greedy rollout over ``days``; optionally writes ``trace.csv``."""
    from ..evaluation import rollout, write_trace
    result = rollout(env, actor_policy(ckpt), days)
    if trace_path is not None:
        write_trace(result, trace_path)
    return result
