"""Synthetic level process with exactly known rate parameters.

Levels sit on the grid ``j * delta``.  On step ``j`` the path slope is

    dQ/dl = c1 exp(-alpha l_j) + sqrt(c2) exp(-beta l_j / 2) Z_j

with standard normal ``Z_j``, so mean and variance of the derivative equal
the rate envelopes at the right end point of each step.  By default the
``Z_j`` are independent; ``noise_correlation = rho`` mixes in a per-path
common factor, ``Z_j = sqrt(rho) Y + sqrt(1 - rho) eps_j``, which keeps the
per-step moments and makes the noise coherent across levels.
Cost accumulates like ``(c3 / gamma) exp(gamma l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import _streams
from ..errors import InvalidArgument
from .path import LevelPath


@dataclass(frozen=True)
class SyntheticParams:
    c1: float
    alpha: float
    c2: float
    beta: float
    c3: float = 1.0
    gamma: float = 1.0
    delta: float = 0.25
    q0: float = 0.0
    noise_correlation: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "delta"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        # zero amplitudes are allowed: c2 = 0 switches the noise off
        for name in ("c1", "c2", "c3"):
            if not getattr(self, name) >= 0:
                raise InvalidArgument(f"{name} must be non-negative")
        if not 0.0 <= self.noise_correlation <= 1.0:
            raise InvalidArgument("noise_correlation must lie in [0, 1]")

    def analytic_limit(self) -> float:
        """``E[Q(inf) - Q(0)]``, a geometric series over the steps."""
        q = math.exp(-self.alpha * self.delta)
        return self.delta * self.c1 * q / (1.0 - q)


def sample_synthetic_path(
    p: SyntheticParams,
    seed: int,
    stop_level: float | None = None,
    index: int = 0,
    steps: int | None = None,
) -> LevelPath:
    """Sample path ``index`` of the stream ``seed``.

    Refines while the current level is ``<= stop_level``, so the returned
    path ends at the first level strictly above it (and has at least one
    step).  Alternatively ``steps`` fixes the number of refinements.
    """
    if steps is None:
        if stop_level is None or not stop_level >= 0:
            raise InvalidArgument("stop_level must be given and non-negative")
        if math.isinf(stop_level):
            raise InvalidArgument("stop_level must be finite")
        n = int(math.floor(stop_level / p.delta)) + 1
    else:
        if steps < 1:
            raise InvalidArgument("steps must be at least 1")
        n = int(steps)
    j = np.arange(1, n + 1)
    lv = np.concatenate(([0.0], j * p.delta))
    if p.c2 > 0:
        z = _streams.normals(seed, _streams.TAG_Z, index, j)
        rho = p.noise_correlation
        if rho > 0:
            common = _streams.normals(seed, _streams.TAG_Z, index, 0)[0]
            z = math.sqrt(rho) * common + math.sqrt(1.0 - rho) * z
    else:
        z = np.zeros(n)
    slope = p.c1 * np.exp(-p.alpha * lv[1:]) + math.sqrt(p.c2) * np.exp(-0.5 * p.beta * lv[1:]) * z
    values = p.q0 + np.concatenate(([0.0], np.cumsum(p.delta * slope)))
    grow = np.exp(p.gamma * lv)
    costs = np.concatenate(([0.0], p.c3 / p.gamma * np.diff(grow)))
    return LevelPath(levels=lv, values=values, step_costs=costs)


@dataclass(frozen=True)
class SyntheticModel:
    params: SyntheticParams

    def sample_path(self, seed: int, index: int, stop_level: float | None = None, steps: int | None = None) -> LevelPath:
        return sample_synthetic_path(self.params, seed, stop_level, index=index, steps=steps)

    def analytic_limit(self) -> float:
        return self.params.analytic_limit()
