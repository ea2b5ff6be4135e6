from __future__ import annotations

import numpy as np


class OuNoise:
    """Mean-reverting exploration noise around zero, one channel per action.

    ``x <- x - rate * x * dt + scale * sqrt(dt) * N(0, 1)`` with ``dt = 1`` slot.
    """

    def __init__(self, size: int, rate: float = 0.15, scale: float = 0.2,
                 rng: np.random.Generator | None = None, dt: float = 1.0):
        self.size = size
        self.rate = rate
        self.scale = scale
        self.dt = dt
        self.rng = rng if rng is not None else np.random.default_rng()
        self.x = np.zeros(size)

    def reset(self) -> None:
        self.x = np.zeros(self.size)

    def step(self) -> np.ndarray:
        g = self.rng.standard_normal(self.size)
        self.x = self.x - self.rate * self.x * self.dt + self.scale * np.sqrt(self.dt) * g
        return self.x.copy()
