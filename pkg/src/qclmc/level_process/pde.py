"""Random elliptic PDE on (0, 1) with an adaptively refined level path.

Each sample draws KL coefficients ``xi``, then alternates solve, estimate and
Dörfler refinement.  Levels are ``-ln(e_j / e_0)`` and the cost of a step is
the number of unknowns of its solve (plus any rejected solve).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .. import _streams
from ..errors import CappedPathError, InvalidArgument, ModelError
from .fem import Mesh1D, a_posteriori_indicators, dorfler_refine, solve_fem_1d
from .kl import KLBasis, MaternParams, evaluate_coefficient, evaluate_coefficient_derivative, nystrom_kl
from .path import LevelPath


@dataclass(frozen=True)
class PdeConfig:
    matern: MaternParams = field(default_factory=MaternParams)
    r_trunc: int = 20
    n_q: int = 100
    source: float = 1.0
    initial_elements: int = 8
    theta: float = 0.5
    max_refinements: int = 25

    def __post_init__(self) -> None:
        if self.r_trunc < 1 or self.n_q < self.r_trunc:
            raise InvalidArgument("need 1 <= r_trunc <= n_q")
        if self.initial_elements < 2:
            raise InvalidArgument("initial mesh needs at least two elements")
        if not 0.0 < self.theta <= 1.0:
            raise InvalidArgument("theta must lie in (0, 1]")
        if self.max_refinements < 1:
            raise InvalidArgument("max_refinements must be positive")


@dataclass(frozen=True)
class PdeSample:
    """Coefficient of one sample and the evaluators the solver needs."""

    kl: KLBasis
    xi: np.ndarray

    def coeff(self, x):
        return evaluate_coefficient(self.kl, self.xi, x)

    def coeff_dx(self, x):
        return evaluate_coefficient_derivative(self.kl, self.xi, x)


class PdeModel:
    """Level process backed by the adaptive FEM solver.

    The KL basis is built once; the model is read-only afterwards and can be
    shared between threads.
    """

    def __init__(self, config: PdeConfig | None = None) -> None:
        self.config = config or PdeConfig()

    @cached_property
    def kl(self) -> KLBasis:
        c = self.config
        return nystrom_kl(c.matern, c.r_trunc, c.n_q)

    def draw(self, seed: int, index: int) -> PdeSample:
        xi = _streams.normals(seed, _streams.TAG_XI, index, np.arange(self.config.r_trunc))
        return PdeSample(self.kl, xi)

    def sample_path(self, seed: int, index: int, stop_level: float | None = None, steps: int | None = None) -> LevelPath:
        return sample_pde_path(self, seed, stop_level, index=index, steps=steps)


def _step(sample: PdeSample, f: float, mesh: Mesh1D):
    sol = solve_fem_1d(sample.coeff, f, mesh)
    ind = a_posteriori_indicators(sol, sample.coeff, f, sample.coeff_dx)
    return sol, ind


def _make_path(levels, values, costs, errors, dofs, capped=False) -> LevelPath:
    return LevelPath(levels=levels, values=values, step_costs=costs, errors=errors, capped=capped, dofs=dofs)


def sample_pde_path(
    model: PdeModel,
    seed: int,
    stop_level: float | None = None,
    index: int = 0,
    steps: int | None = None,
) -> LevelPath:
    """Adaptive path of sample ``index``.

    Refines while the current level is ``<= stop_level`` (at least once), or
    exactly ``steps`` times when ``steps`` is given.  A refinement that does
    not lower the error estimate is retried once with the worst element
    bisected in addition; a second failure raises :class:`ModelError`.
    Hitting ``max_refinements`` first raises :class:`CappedPathError` with
    the partial path attached.
    """
    cfg = model.config
    if steps is None:
        if stop_level is None or not stop_level >= 0:
            raise InvalidArgument("stop_level must be given and non-negative")
    elif steps < 1:
        raise InvalidArgument("steps must be at least 1")
    sample = model.draw(seed, index)
    mesh = Mesh1D.uniform(cfg.initial_elements)
    sol, ind = _step(sample, cfg.source, mesh)
    if not ind.total > 0:
        raise ModelError("initial error estimate vanishes")
    e0 = ind.total
    errors, values, costs, levels = [e0], [sol.q], [float(mesh.dof)], [0.0]
    dofs = [mesh.dof]

    def more() -> bool:
        if steps is not None:
            return len(levels) - 1 < steps
        return len(levels) == 1 or levels[-1] <= stop_level

    while more():
        if len(levels) - 1 >= cfg.max_refinements:
            path = _make_path(levels, values, costs, errors, dofs, capped=True)
            raise CappedPathError(
                f"sample {index} reached {cfg.max_refinements} refinements at level {levels[-1]:.4g}",
                path,
            )
        cost = 0.0
        new_mesh = dorfler_refine(mesh, ind.phi, cfg.theta)
        new_sol, new_ind = _step(sample, cfg.source, new_mesh)
        cost += new_mesh.dof
        if not new_ind.total < errors[-1]:
            # reject; bisect the element with the largest indicator as well
            worst = np.zeros(new_mesh.n_elements, dtype=bool)
            worst[int(np.argmax(new_ind.phi))] = True
            new_mesh = new_mesh.bisect(worst)
            new_sol, new_ind = _step(sample, cfg.source, new_mesh)
            cost += new_mesh.dof
            if not new_ind.total < errors[-1]:
                raise ModelError(f"sample {index}: error estimate stalled at refinement {len(levels)}")
        mesh, sol, ind = new_mesh, new_sol, new_ind
        errors.append(ind.total)
        levels.append(-math.log(ind.total / e0))
        values.append(sol.q)
        costs.append(cost)
        dofs.append(mesh.dof)
    return _make_path(levels, values, costs, errors, dofs)
