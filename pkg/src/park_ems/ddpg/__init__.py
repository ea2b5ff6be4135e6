from .checkpoint import PolicyCheckpoint
from .core import (DdpgAgent, DdpgConfig, actor_update, critic_update, forward_actor,
                   forward_critic, soft_update, td_target)
from .mlp import Mlp
from .noise import OuNoise
from .optim import Adam, Sgd
from .replay import Batch, ReplayBuffer
from .training import EpisodeLog, TrainResult, actor_policy, deploy, train, write_learning_curve

__all__ = ["PolicyCheckpoint", "DdpgAgent", "DdpgConfig", "actor_update", "critic_update",
           "forward_actor", "forward_critic", "soft_update", "td_target", "Mlp", "OuNoise",
           "Adam", "Sgd", "Batch", "ReplayBuffer", "EpisodeLog", "TrainResult", "actor_policy",
           "deploy", "train", "write_learning_curve"]
