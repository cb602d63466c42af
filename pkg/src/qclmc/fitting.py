"""Rate-parameter estimation from sampled level paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bounds import RateParams
from .errors import DegenerateData, InvalidArgument
from .level_process.path import LevelPath


@dataclass
class FitReport:
    params: RateParams
    residuals: dict[str, float]  # RMS of each log-linear regression
    level_grid: np.ndarray  # averaged l_j over the window
    window: tuple[int, int]  # inclusive refinement indices
    means: np.ndarray = field(repr=False, default=None)
    variances: np.ndarray = field(repr=False, default=None)
    costs: np.ndarray = field(repr=False, default=None)


def _loglinear(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    ly = np.log(y)
    slope, icpt = np.polyfit(x, ly, 1)
    res = ly - (icpt + slope * x)
    return float(slope), float(icpt), float(np.sqrt(np.mean(res * res)))


def _check_positive(values: np.ndarray, name: str, offset: int) -> None:
    bad = np.flatnonzero(~(values > 0))
    if bad.size:
        raise DegenerateData(f"{name} is not positive at refinement {bad[0] + offset}", int(bad[0] + offset))


def estimate_rates(
    paths: Sequence[LevelPath],
    window: tuple[int, int] | None = None,
    fit_variance: bool = True,
) -> FitReport:
    """Log-linear fits of the mean, variance and cost derivative envelopes.

    For every refinement ``j`` in ``window`` the statistics of
    ``(Q_j - Q_{j-1}) / (l_j - l_{j-1})`` and ``cost_j / (l_j - l_{j-1})``
    over the paths are regressed against the averaged level ``l_j``.  The
    default window drops ``j = 1`` and the last refinement reached by all
    paths.  With ``fit_variance=False`` (noise-free data) ``c2`` is reported
    as 0 and ``beta`` as ``2 alpha``.
    """
    if len(paths) < 2 and fit_variance:
        raise InvalidArgument("need at least two paths to estimate variances")
    if not paths:
        raise InvalidArgument("no paths")
    j_avail = min(p.j_stop for p in paths)
    if window is None:
        window = (2, j_avail - 1)
    j0, j1 = int(window[0]), int(window[1])
    if j0 < 1 or j1 - j0 < 1:
        raise InvalidArgument("window needs at least two refinement indices, starting at 1")
    if j1 > j_avail:
        raise InvalidArgument(f"window end {j1} exceeds the shortest path ({j_avail} refinements)")
    sl = slice(j0, j1 + 1)
    lv = np.array([p.levels[: j1 + 1] for p in paths])
    dl = np.diff(lv, axis=1)[:, j0 - 1 : j1]
    dq = np.array([np.diff(p.values[: j1 + 1]) for p in paths])[:, j0 - 1 : j1] / dl
    dc = np.array([p.step_costs[sl] for p in paths]) / dl
    grid = lv[:, sl].mean(axis=0)

    mean = dq.mean(axis=0)
    bad = np.flatnonzero((mean == 0) | (np.sign(mean) != np.sign(mean[0])))
    if bad.size:
        idx = int(bad[0]) + j0
        raise DegenerateData(f"mean derivative changes sign or vanishes at refinement {idx}", idx)
    s1, i1, r1 = _loglinear(grid, np.abs(mean))
    residuals = {"mean": r1}
    var = dq.var(axis=0, ddof=1) if len(paths) > 1 else np.zeros_like(mean)
    if fit_variance:
        _check_positive(var, "variance", j0)
        s2, i2, r2 = _loglinear(grid, var)
        residuals["variance"] = r2
        c2, beta = math.exp(i2), -s2
    else:
        c2, beta = 0.0, -2.0 * s1
    cost = dc.mean(axis=0)
    _check_positive(cost, "cost derivative", j0)
    s3, i3, r3 = _loglinear(grid, cost)
    residuals["cost"] = r3
    alpha, gamma = -s1, s3
    for name, val in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not val > 0:
            raise DegenerateData(f"fitted {name} = {val:.4g} is not positive")
    partial = RateParams(c1=math.exp(i1), alpha=alpha, c2=c2, beta=beta, c3=math.exp(i3), gamma=gamma)
    params = partial.replace(r=recommend_r(partial))
    return FitReport(
        params=params,
        residuals=residuals,
        level_grid=grid,
        window=(j0, j1),
        means=mean,
        variances=var,
        costs=cost,
    )


def recommend_r(p: RateParams) -> float:
    """Midpoint ``(gamma + min(beta, 2 alpha)) / 2`` of the admissible r range."""
    return 0.5 * (p.gamma + min(p.beta, 2.0 * p.alpha))


def optimal_regime(p: RateParams) -> bool:
    """True when ``gamma < min(beta, 2 alpha)``, i.e. cost ``eps^-2`` is reachable."""
    return p.gamma < min(p.beta, 2.0 * p.alpha)
