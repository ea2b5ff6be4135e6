"""Fully connected network with ReLU hidden layers and reverse-mode gradients.

Inputs are batch-major, ``x.shape == (batch, n_in)``; weights are stored as
``(n_in, n_out)`` so a layer is ``x @ W + b``.
"""

from __future__ import annotations

import hashlib
from typing import Sequence

import numpy as np

OUTPUTS = ("linear", "tanh")


class Mlp:
    def __init__(self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray],
                 output: str = "linear"):
        if output not in OUTPUTS:
            raise ValueError(f"output activation must be one of {OUTPUTS}")
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one bias per weight matrix")
        for w, b in zip(weights, biases):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"inconsistent layer shapes {w.shape} / {b.shape}")
        for w_prev, w in zip(weights, weights[1:]):
            if w_prev.shape[1] != w.shape[0]:
                raise ValueError("layer widths do not chain")
        self.weights = [np.array(w, dtype=float) for w in weights]
        self.biases = [np.array(b, dtype=float) for b in biases]
        self.output = output

    @classmethod
    def init(cls, sizes: Sequence[int], rng: np.random.Generator, output: str = "linear",
             final_scale: float = 3e-3) -> "Mlp":
        """Uniform fan-in initialisation; the last layer uses ``+-final_scale``."""
        weights, biases = [], []
        n_layers = len(sizes) - 1
        for k, (n_in, n_out) in enumerate(zip(sizes, sizes[1:])):
            bound = final_scale if k == n_layers - 1 else 1.0 / np.sqrt(n_in)
            weights.append(rng.uniform(-bound, bound, (n_in, n_out)))
            biases.append(rng.uniform(-bound, bound, n_out))
        return cls(weights, biases, output)

    @classmethod
    def zeros(cls, sizes: Sequence[int], output: str = "linear") -> "Mlp":
        return cls([np.zeros((a, b)) for a, b in zip(sizes, sizes[1:])],
                   [np.zeros(b) for b in sizes[1:]], output)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def params(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "Mlp":
        return Mlp([w.copy() for w in self.weights], [b.copy() for b in self.biases], self.output)

    def load(self, other: "Mlp") -> None:
        for dst, src in zip(self.params, other.params):
            dst[...] = src

    def forward(self, x: np.ndarray) -> tuple[np.ndarray, list]:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        cache = [x]
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if k < last:
                h = np.maximum(z, 0.0)
            else:
                h = np.tanh(z) if self.output == "tanh" else z
            cache.append(h if k == last else z)
        return h, cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache: list, dy: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Gradients of ``sum(dy * y)`` w.r.t. ``params`` (same order) and the input."""
        last = len(self.weights) - 1
        y = cache[-1]
        dz = dy * (1.0 - y * y) if self.output == "tanh" else dy
        grads: list[np.ndarray] = []
        for k in range(last, -1, -1):
            if k == 0:
                h_in = cache[0]
            else:
                h_in = np.maximum(cache[k], 0.0)
            grads.append(dz.sum(axis=0))
            grads.append(h_in.T @ dz)
            dh = dz @ self.weights[k].T
            if k > 0:
                dz = dh * (cache[k] > 0.0)
        grads.reverse()
        return grads, dh

    def digest(self) -> str:
        h = hashlib.sha256()
        for p in self.params:
            h.update(np.ascontiguousarray(p).tobytes())
        return h.hexdigest()

    def all_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.params)
