"""CLMC and QCLMC estimators, the MLMC reduction and an MLMC reference solver.

Every sample ``k`` draws a level ``L_r^(k) ~ Exp(r)``, refines its path until
the level passes ``min(L_r^(k), l_max)`` and contributes

    sum_{j <= J} w_j (Q_j - Q_{j-1}),
    w_j = (exp(r lt_j) - exp(r l_{j-1})) / (r (l_j - l_{j-1})),

where ``lt_j = min(l_j, L_r^(k), l_max)``, i.e. the exact integral of
``exp(r l)`` against the linearly interpolated path derivative.  CLMC draws
the levels pseudo-randomly, QCLMC from a scrambled Sobol sequence.  Path
randomness depends only on ``(seed, k)``, so both variants see the same
paths for the same master seed.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Literal, Protocol, Sequence

import numpy as np

from . import _streams
from .errors import BudgetExceeded, CappedPathError, InvalidArgument, InvalidPath
from .level_process.path import LevelPath
from .lowdisc import LevelSampleSet, exp_inverse_transform, generate_sequence, levels_from_points

log = logging.getLogger(__name__)

LevelSource = Literal["pseudo", "quasi", "explicit"]


class LevelProcess(Protocol):
    def sample_path(
        self, seed: int, index: int, stop_level: float | None = None, steps: int | None = None
    ) -> LevelPath: ...


class CappedPathWarning(UserWarning):
    pass


@dataclass(frozen=True)
class EstimatorConfig:
    m: int
    r: float
    l_max: float = math.inf
    level_source: LevelSource = "quasi"
    seed: int = 0
    levels: tuple[float, ...] | None = None  # explicit L_r values

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InvalidArgument("m must be at least 1")
        if not self.r > 0:
            raise InvalidArgument("r must be positive")
        if not self.l_max > 0:
            raise InvalidArgument("l_max must be positive")
        if self.level_source not in ("pseudo", "quasi", "explicit"):
            raise InvalidArgument(f"unknown level source {self.level_source!r}")
        if self.level_source == "explicit":
            if self.levels is None or len(self.levels) != self.m:
                raise InvalidArgument("explicit level source needs m levels")
            if any(not (x >= 0) for x in self.levels):
                raise InvalidArgument("explicit levels must be non-negative")


@dataclass
class EstimateResult:
    estimate: float
    contributions: np.ndarray
    total_cost: float
    max_level: float  # largest L_r of the level sequence
    j_stop: np.ndarray  # J^(k)
    l_tilde: list[np.ndarray]  # truncated levels used by the weights
    method: str = ""
    seed: int = 0
    capped: list[int] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.contributions)


def _stop_index(levels: np.ndarray, target: float) -> int:
    # J = min{j >= 1 : l_j >= target}; capped paths use every step
    j = int(np.searchsorted(levels[1:], target, side="left")) + 1
    return min(j, len(levels) - 1)


def contribution_weights(levels, l_r: float, r: float, l_max: float = math.inf) -> np.ndarray:
    """Weights ``w_1..w_J`` of a path with the given levels."""
    lv = np.asarray(levels, dtype=np.float64)
    if len(lv) < 2:
        raise InvalidPath("path has no refinement step")
    step = np.diff(lv)
    if np.any(step <= 0):
        raise InvalidPath("zero-length or negative level step")
    target = min(l_r, l_max)
    jj = _stop_index(lv, target)
    lo = lv[:jj]
    lt = np.minimum(lv[1 : jj + 1], target)
    return np.exp(r * lo) * np.expm1(r * (lt - lo)) / (r * step[:jj])


def per_sample_contribution(path: LevelPath, l_r: float, r: float, l_max: float = math.inf) -> float:
    """Contribution of one sample for level ``l_r``."""
    if l_r < 0:
        raise InvalidArgument("l_r must be non-negative")
    w = contribution_weights(path.levels, l_r, r, l_max)
    dq = np.diff(path.values)[: len(w)]
    return float(w @ dq)


def level_sequence(cfg: EstimatorConfig) -> LevelSampleSet:
    """The ``L_r`` values used by an estimator run."""
    if cfg.level_source == "explicit":
        return LevelSampleSet(levels=np.asarray(cfg.levels, dtype=np.float64), rate=cfg.r)
    lseed = _streams.derive_seed(cfg.seed, _streams.TAG_LEVELS)
    kind = "sobol_owen" if cfg.level_source == "quasi" else "pseudo"
    return exp_inverse_transform(generate_sequence(kind, cfg.m, lseed), cfg.r)


def _run(model: LevelProcess, cfg: EstimatorConfig, method: str) -> EstimateResult:
    lv = level_sequence(cfg).levels
    contrib = np.empty(cfg.m)
    jstop = np.empty(cfg.m, dtype=np.int64)
    l_tilde: list[np.ndarray] = []
    cost = 0.0
    capped: list[int] = []
    for k in range(cfg.m):
        l_r = float(lv[k])
        stop = min(l_r, cfg.l_max)
        try:
            path = model.sample_path(cfg.seed, k, stop_level=stop)
        except CappedPathError as err:
            path = err.path
            capped.append(k)
        contrib[k] = per_sample_contribution(path, l_r, cfg.r, cfg.l_max)
        jj = _stop_index(path.levels, stop)
        jstop[k] = jj
        l_tilde.append(np.minimum(path.levels[1 : jj + 1], stop))
        cost += path.total_cost
    if capped:
        warnings.warn(
            f"{len(capped)} capped path(s), first at sample {capped[0]}", CappedPathWarning, stacklevel=3
        )
    return EstimateResult(
        estimate=float(np.mean(contrib)),
        contributions=contrib,
        total_cost=cost,
        max_level=float(np.max(lv)),
        j_stop=jstop,
        l_tilde=l_tilde,
        method=method,
        seed=cfg.seed,
        capped=capped,
    )


def qclmc_estimate(model: LevelProcess, cfg: EstimatorConfig) -> EstimateResult:
    """QCLMC estimate of ``E[Q(l_max) - Q(0)]`` (scrambled Sobol levels)."""
    if cfg.level_source == "pseudo":
        raise InvalidArgument("QCLMC needs a quasi or explicit level source")
    return _run(model, cfg, "qclmc")


def clmc_estimate(model: LevelProcess, cfg: EstimatorConfig) -> EstimateResult:
    """CLMC estimate of ``E[Q(l_max) - Q(0)]`` (pseudo-random levels)."""
    if cfg.level_source == "quasi":
        raise InvalidArgument("CLMC needs a pseudo or explicit level source")
    return _run(model, cfg, "clmc")


def estimate(model: LevelProcess, cfg: EstimatorConfig, method: str) -> EstimateResult:
    if method == "qclmc":
        return qclmc_estimate(model, cfg)
    if method == "clmc":
        return clmc_estimate(model, cfg)
    raise InvalidArgument(f"unknown method {method!r}")


def mlmc_reduction_check(
    increments: Sequence[Sequence[float]],
    tail: Sequence[float] | None = None,
    levels: Sequence[Sequence[float]] | None = None,
) -> tuple[float, float]:
    """Evaluate the integer-level CLMC formula and the MLMC telescoping sum.

    ``increments[k]`` holds ``Q_j - Q_{j-1}`` of sample ``k`` for
    ``j = 1..J_k``; ``tail[j-1] = P(L >= j)``.  When the tail is omitted the
    empirical one ``#{k : J_k >= j} / M`` is used, which turns the second
    value into the usual MLMC estimator with ``M_j`` samples on level ``j``.
    ``levels`` may be passed to have them checked for integrality.
    """
    dq = [np.asarray(d, dtype=np.float64) for d in increments]
    m = len(dq)
    if m == 0:
        raise InvalidArgument("no samples")
    if levels is not None:
        for lv in levels:
            lv = np.asarray(lv, dtype=np.float64)
            if np.any(lv != np.round(lv)) or np.any(lv != np.arange(len(lv))):
                raise InvalidArgument("levels must be the integers 0, 1, ..., J")
    jmax = max(len(d) for d in dq)
    if tail is None:
        tail_a = np.array([sum(len(d) >= j for d in dq) / m for j in range(1, jmax + 1)])
    else:
        tail_a = np.asarray(tail, dtype=np.float64)
        if len(tail_a) < jmax:
            raise InvalidArgument("tail must cover every level reached")
    if np.any(tail_a[:jmax] <= 0):
        raise InvalidArgument("tail probabilities of reached levels must be positive")
    clmc = sum(float(np.sum(d / tail_a[: len(d)])) for d in dq) / m
    mlmc = 0.0
    for j in range(1, jmax + 1):
        m_j = m * tail_a[j - 1]
        mlmc += sum(float(d[j - 1]) for d in dq if len(d) >= j) / m_j
    return clmc, mlmc


@dataclass
class _LevelStats:
    n: int = 0
    s1: float = 0.0
    s2: float = 0.0
    cost: float = 0.0

    @property
    def mean(self) -> float:
        return self.s1 / self.n

    @property
    def var(self) -> float:
        if self.n < 2:
            return 0.0
        return max(self.s2 / self.n - self.mean**2, 0.0) * self.n / (self.n - 1)


def mlmc_reference(
    model: LevelProcess,
    tolerance: float,
    seed: int = 0,
    *,
    n0: int = 32,
    min_levels: int = 3,
    max_levels: int = 40,
    max_cost: float = math.inf,
    include_base: bool = True,
) -> float:
    """Standard MLMC with refinement index as level, run to RMSE ``tolerance``.

    Level ``j`` samples ``Q_j - Q_{j-1}`` (level 0 samples ``Q_0``, skipped
    when ``include_base`` is false).  Sample sizes follow the usual
    ``N_j ~ sqrt(V_j / C_j)`` allocation for a variance of ``tol^2 / 2``;
    levels are added until the geometric extrapolation of the remaining
    bias is below ``tol / sqrt(2)``.
    """
    if not tolerance > 0:
        raise InvalidArgument("tolerance must be positive")
    first = 0 if include_base else 1
    stats: list[_LevelStats] = []
    total_cost = 0.0

    def current() -> float:
        return sum(s.mean for s in stats if s.n)

    def add(j: int, count: int) -> None:
        nonlocal total_cost
        st = stats[j - first]
        lseed = _streams.derive_seed(seed, _streams.TAG_MLMC, j)
        for i in range(st.n, st.n + count):
            path = model.sample_path(lseed, i, steps=max(j, 1))
            y = path.values[0] if j == 0 else path.values[j] - path.values[j - 1]
            c = float(np.sum(path.step_costs[: j + 1]))
            st.s1 += y
            st.s2 += y * y
            st.cost += c
            total_cost += c
            if total_cost > max_cost:
                st.n = i + 1
                raise BudgetExceeded("MLMC reference exceeded its cost budget", current())
        st.n += count

    nlev = first + min_levels
    while True:
        while len(stats) < nlev - first:
            stats.append(_LevelStats())
            add(len(stats) - 1 + first, n0)
        v = np.array([s.var for s in stats])
        c = np.array([max(s.cost / s.n, 1e-300) for s in stats])
        budget = np.sum(np.sqrt(v * c))
        target = np.ceil(2.0 / tolerance**2 * np.sqrt(v / c) * budget).astype(int)
        grew = False
        for idx, st in enumerate(stats):
            if target[idx] > st.n:
                add(idx + first, int(target[idx] - st.n))
                grew = True
        if grew:
            continue
        # remaining bias from the geometric decay of the last two level means
        y1, y2 = abs(stats[-2].mean), abs(stats[-1].mean)
        q = min(y2 / y1, 0.9) if y1 > 0 else 0.0
        rem = y2 * q / (1.0 - q) if y2 > 0 else 0.0
        if rem <= tolerance / math.sqrt(2.0):
            return current() + (math.copysign(rem, stats[-1].mean) if y2 > 0 else 0.0)
        if nlev - first >= max_levels:
            raise BudgetExceeded("MLMC reference needs more levels than allowed", current())
        nlev += 1
