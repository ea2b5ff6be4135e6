"""Actor-critic update rules for deterministic policy gradients."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import ConfigError, NonFiniteGradient, NonFiniteLoss
from .mlp import Mlp
from .optim import clip_by_global_norm, make_optimizer
from .replay import Batch


@dataclass(frozen=True)
class DdpgConfig:
    hidden: tuple[int, ...] = (256, 256)
    actor_lr: float = 1e-4
    critic_lr: float = 1e-3
    gamma: float = 0.99
    tau: float = 0.001
    batch_size: int = 64
    buffer_size: int = 1_000_000
    episodes: int = 7500
    updates_per_step: int = 1
    optimizer: str = "adam"
    ou_rate: float = 0.15
    ou_scale: float = 0.2
    ou_scale_final: float | None = None  # linear decay target; None keeps ou_scale
    final_init_scale: float = 3e-3
    grad_clip: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must be in (0, 1]")
        if not 0 < self.tau <= 1:
            raise ConfigError("tau must be in (0, 1]")
        if self.batch_size < 1 or self.buffer_size < self.batch_size:
            raise ConfigError("need 1 <= batch_size <= buffer_size")
        if self.episodes < 0 or self.updates_per_step < 1:
            raise ConfigError("episodes must be >= 0 and updates_per_step >= 1")
        if self.ou_scale < 0 or (self.ou_scale_final is not None and self.ou_scale_final < 0):
            raise ConfigError("OU scales must be >= 0")
        if self.optimizer not in ("adam", "sgd"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")

    def noise_scale(self, episode: int) -> float:
        """OU scale for 1-based ``episode``."""
        if self.ou_scale_final is None or self.episodes <= 1:
            return self.ou_scale
        frac = min(max((episode - 1) / (self.episodes - 1), 0.0), 1.0)
        return self.ou_scale + frac * (self.ou_scale_final - self.ou_scale)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["hidden"] = list(self.hidden)
        return d


def forward_actor(actor: Mlp, s_norm: np.ndarray) -> np.ndarray:
    return actor(s_norm)


def forward_critic(critic: Mlp, s_norm: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Q values, shape ``(batch,)``."""
    x = np.concatenate([np.atleast_2d(s_norm), np.atleast_2d(a)], axis=1)
    return critic(x)[:, 0]


def td_target(r, d, next_s, actor_target: Mlp, critic_target: Mlp, gamma: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    d = np.asarray(d, dtype=float)
    q_next = forward_critic(critic_target, next_s, forward_actor(actor_target, next_s))
    return r + gamma * (1.0 - d) * q_next


def critic_loss_and_grads(critic: Mlp, states, actions, y) -> tuple[float, list[np.ndarray]]:
    x = np.concatenate([states, actions], axis=1)
    q, cache = critic.forward(x)
    err = q[:, 0] - y
    loss = float(np.mean(err * err))
    dq = (2.0 / len(y)) * err[:, None]
    grads, _ = critic.backward(cache, dq)
    return loss, grads


def actor_objective_and_grads(actor: Mlp, critic: Mlp, states) -> tuple[float, list[np.ndarray]]:
    """Loss ``-mean Q(s, mu(s))`` and its gradient w.r.t. the actor only."""
    a, a_cache = actor.forward(states)
    x = np.concatenate([states, a], axis=1)
    q, c_cache = critic.forward(x)
    n = len(states)
    _, dx = critic.backward(c_cache, np.full((n, 1), -1.0 / n))
    da = dx[:, states.shape[1]:]
    grads, _ = actor.backward(a_cache, da)
    return -float(q.mean()), grads


def soft_update(src: Mlp, dst: Mlp, tau: float) -> None:
    for d, s in zip(dst.params, src.params):
        d *= 1.0 - tau
        d += tau * s


def _check_grads(grads, what: str) -> None:
    for g in grads:
        if not np.isfinite(g).all():
            raise NonFiniteGradient(f"non-finite {what} gradient")


def critic_update(critic: Mlp, batch: Batch, actor_target: Mlp, critic_target: Mlp,
                  gamma: float, opt, grad_clip: float | None = None) -> float:
    """One optimizer step on the mean squared TD error; returns the pre-step loss."""
    y = td_target(batch.rewards, batch.dones, batch.next_states, actor_target, critic_target,
                  gamma)
    loss, grads = critic_loss_and_grads(critic, batch.states, batch.actions, y)
    if not np.isfinite(loss):
        raise NonFiniteLoss(f"critic loss is {loss}")
    _check_grads(grads, "critic")
    opt.step(critic.params, clip_by_global_norm(grads, grad_clip))
    return loss


def actor_update(actor: Mlp, critic: Mlp, states: np.ndarray, opt,
                 grad_clip: float | None = None) -> float:
    """Ascend ``mean Q(s, mu(s))``; the critic is read but never modified."""
    obj, grads = actor_objective_and_grads(actor, critic, states)
    _check_grads(grads, "actor")
    opt.step(actor.params, clip_by_global_norm(grads, grad_clip))
    return obj


class DdpgAgent:
    """Online and target networks plus their optimizers."""

    def __init__(self, state_dim: int, action_dim: int, cfg: DdpgConfig,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.actor = Mlp.init([state_dim, *cfg.hidden, action_dim], rng, "tanh",
                              cfg.final_init_scale)
        self.critic = Mlp.init([state_dim + action_dim, *cfg.hidden, 1], rng, "linear",
                               cfg.final_init_scale)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = make_optimizer(cfg.optimizer, self.actor.params, cfg.actor_lr)
        self.critic_opt = make_optimizer(cfg.optimizer, self.critic.params, cfg.critic_lr)
        self.n_updates = 0

    def act(self, s_norm: np.ndarray) -> np.ndarray:
        return forward_actor(self.actor, s_norm)[0]

    def critic_update(self, batch: Batch) -> float:
        return critic_update(self.critic, batch, self.actor_target, self.critic_target,
                             self.cfg.gamma, self.critic_opt, self.cfg.grad_clip)

    def actor_update(self, batch: Batch) -> float:
        return actor_update(self.actor, self.critic, batch.states, self.actor_opt,
                            self.cfg.grad_clip)

    def update(self, batch: Batch) -> float:
        loss = self.critic_update(batch)
        self.actor_update(batch)
        soft_update(self.critic, self.critic_target, self.cfg.tau)
        soft_update(self.actor, self.actor_target, self.cfg.tau)
        self.n_updates += 1
        return loss

    def digest(self) -> str:
        return "|".join(n.digest() for n in (self.actor, self.critic, self.actor_target,
                                             self.critic_target))
