"""The refinement trajectory of a single sample."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidPath


def _as_array(x) -> np.ndarray:
    a = np.array(x, dtype=np.float64)  # copy, the path owns its data
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LevelPath:
    """Levels, quantity-of-interest values, error estimates and step costs.

    Entry ``j`` describes refinement ``j``; entry 0 is the initial state at
    level zero.  ``errors`` is optional (the synthetic model has none); when
    present the levels must equal ``-ln(e_j / e_0)``.
    """

    levels: np.ndarray
    values: np.ndarray
    step_costs: np.ndarray
    errors: np.ndarray | None = None
    capped: bool = False
    dofs: np.ndarray | None = None  # unknowns of each accepted solve (PDE paths)

    def __post_init__(self) -> None:
        for name in ("levels", "values", "step_costs"):
            object.__setattr__(self, name, _as_array(getattr(self, name)))
        if self.errors is not None:
            object.__setattr__(self, "errors", _as_array(self.errors))
        if self.dofs is not None:
            object.__setattr__(self, "dofs", np.array(self.dofs, dtype=np.int64))
        n = len(self.levels)
        if n == 0:
            raise InvalidPath("a path needs at least the initial state")
        lengths = {len(self.values), len(self.step_costs)}
        if self.errors is not None:
            lengths.add(len(self.errors))
        if self.dofs is not None:
            lengths.add(len(self.dofs))
        if lengths != {n}:
            raise InvalidPath("levels, values, costs and errors differ in length")
        if self.levels[0] != 0.0:
            raise InvalidPath("the first level must be 0")
        if np.any(np.diff(self.levels) <= 0):
            raise InvalidPath("levels must be strictly increasing")
        if np.any(self.step_costs < 0):
            raise InvalidPath("step costs must be non-negative")
        if self.errors is not None:
            if np.any(self.errors <= 0):
                raise InvalidPath("error estimates must be positive")
            implied = -np.log(self.errors / self.errors[0])
            if not np.allclose(implied, self.levels, rtol=1e-12, atol=1e-12):
                raise InvalidPath("levels are inconsistent with the error estimates")

    @property
    def j_stop(self) -> int:
        """Index ``J`` of the last computed refinement."""
        return len(self.levels) - 1

    @property
    def total_cost(self) -> float:
        return float(self.step_costs.sum())

    def scaled(self, s: float) -> "LevelPath":
        """Copy with every value multiplied by ``s``."""
        return LevelPath(self.levels, s * self.values, self.step_costs, self.errors, self.capped, self.dofs)
