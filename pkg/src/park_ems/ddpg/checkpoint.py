"""Versioned policy checkpoints.

Encoding: a NumPy ``.npz`` archive. Network arrays are stored under
``<net>/W<k>`` and ``<net>/b<k>`` for ``net`` in ``actor``, ``critic``,
``actor_target`` and ``critic_target``; a ``meta`` entry holds a JSON string
with ``format_version``, output activations, the DDPG config, the
normalisation statistics, the number of training episodes and the seed.
Arrays round-trip bit-exactly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError
from ..ingest import NormStats
from .core import DdpgConfig
from .mlp import Mlp

FORMAT_VERSION = 1
NETS = ("actor", "critic", "actor_target", "critic_target")


@dataclass
class PolicyCheckpoint:
    actor: Mlp
    critic: Mlp
    actor_target: Mlp
    critic_target: Mlp
    config: DdpgConfig
    norm_stats: NormStats
    episodes: int
    seed: int
    format_version: int = FORMAT_VERSION
    extra: dict = field(default_factory=dict)

    def save(self, path: str | os.PathLike) -> None:
        arrays = {}
        outputs = {}
        for name in NETS:
            net: Mlp = getattr(self, name)
            outputs[name] = net.output
            for k, (w, b) in enumerate(zip(net.weights, net.biases)):
                arrays[f"{name}/W{k}"] = w
                arrays[f"{name}/b{k}"] = b
        meta = {
            "format_version": self.format_version,
            "outputs": outputs,
            "config": self.config.to_dict(),
            "norm_stats": self.norm_stats.to_dict(),
            "episodes": self.episodes,
            "seed": self.seed,
            "extra": self.extra,
        }
        arrays["meta"] = np.array(json.dumps(meta, sort_keys=True))
        with open(path, "wb") as fh:
            np.savez(fh, **arrays)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "PolicyCheckpoint":
        with np.load(path, allow_pickle=False) as z:
            meta = json.loads(str(z["meta"]))
            version = meta.get("format_version")
            if version != FORMAT_VERSION:
                raise ConfigError(f"unsupported checkpoint format version {version}")
            nets = {}
            for name in NETS:
                weights, biases, k = [], [], 0
                while f"{name}/W{k}" in z:
                    weights.append(z[f"{name}/W{k}"])
                    biases.append(z[f"{name}/b{k}"])
                    k += 1
                nets[name] = Mlp(weights, biases, meta["outputs"][name])
        return cls(config=DdpgConfig(**meta["config"]),
                   norm_stats=NormStats.from_dict(meta["norm_stats"]),
                   episodes=meta["episodes"], seed=meta["seed"], format_version=version,
                   extra=meta.get("extra", {}), **nets)
