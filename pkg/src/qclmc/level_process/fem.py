"""Piecewise-linear finite elements for -(a u')' = f on (0, 1), u(0) = u(1) = 0.

Includes the residual-type error indicator and Dörfler (bulk) marking used to
drive adaptive refinement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import solve_banded

from ..errors import InvalidArgument, ModelError

Field = Callable[[np.ndarray], np.ndarray]

# 3-point Gauss-Legendre rule on [0, 1]
_GX = np.array([0.5 - math.sqrt(0.15), 0.5, 0.5 + math.sqrt(0.15)])
_GW = np.array([5.0, 8.0, 5.0]) / 18.0


def _eval(fn: Field | float, x: np.ndarray) -> np.ndarray:
    if callable(fn):
        return np.broadcast_to(np.asarray(fn(x), dtype=np.float64), x.shape)
    return np.full(x.shape, float(fn))


@dataclass(frozen=True)
class Mesh1D:
    nodes: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.nodes, dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "nodes", x)
        if len(x) < 2 or x[0] != 0.0 or x[-1] != 1.0:
            raise InvalidArgument("mesh nodes must start at 0 and end at 1")
        if np.any(np.diff(x) <= 0):
            raise InvalidArgument("mesh nodes must be strictly increasing")

    @classmethod
    def uniform(cls, n: int) -> "Mesh1D":
        if n < 1:
            raise InvalidArgument("need at least one element")
        x = np.linspace(0.0, 1.0, n + 1)
        return cls(x)

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.nodes) - 1

    @property
    def dof(self) -> int:
        """Interior nodes, i.e. unknowns of the Dirichlet problem."""
        return len(self.nodes) - 2

    def quadrature_points(self) -> np.ndarray:
        """Gauss points, shape ``(n_elements, 3)``."""
        return self.nodes[:-1, None] + self.h[:, None] * _GX[None, :]

    def bisect(self, marked) -> "Mesh1D":
        marked = np.asarray(marked, dtype=bool)
        if marked.shape != (self.n_elements,):
            raise InvalidArgument("marker array does not match the element count")
        mids = 0.5 * (self.nodes[:-1] + self.nodes[1:])[marked]
        return Mesh1D(np.sort(np.concatenate((self.nodes, mids))))


@dataclass(frozen=True)
class FemSolution:
    mesh: Mesh1D
    u: np.ndarray  # nodal values including the boundary zeros
    q: float  # H^1(0, 1) norm of the discrete solution

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.u) / self.mesh.h


def solve_fem_1d(coeff: Field | float, f: Field | float, mesh: Mesh1D) -> FemSolution:
    """Galerkin solution with P1 elements and a tridiagonal solve.

    Element integrals of ``a`` and of the load use 3-point Gauss quadrature.
    Returns the nodal solution and its H^1 norm
    ``sqrt(int u'^2 + int u^2)``.
    """
    h = mesh.h
    xq = mesh.quadrature_points()
    a = _eval(coeff, xq)
    if not np.all(np.isfinite(a)) or np.any(a <= 0):
        raise ModelError("diffusion coefficient is not positive at every quadrature point")
    fq = _eval(f, xq)
    k_el = (a @ _GW) / h  # int_K a / h^2 times h
    # load: int_K f * hat functions
    load_l = h * ((fq * (1.0 - _GX)) @ _GW)
    load_r = h * ((fq * _GX) @ _GW)
    u = np.zeros(len(mesh.nodes))
    n = mesh.dof
    if n > 0:
        diag = k_el[:-1] + k_el[1:]
        off = -k_el[1:-1]
        ab = np.zeros((3, n))
        ab[0, 1:] = off
        ab[1] = diag
        ab[2, :-1] = off
        rhs = load_r[:-1] + load_l[1:]
        u[1:-1] = solve_banded((1, 1), ab, rhs)
    s = np.diff(u) / h
    ua, ub = u[:-1], u[1:]
    sq = np.sum(h * s * s) + np.sum(h * (ua * ua + ua * ub + ub * ub) / 3.0)
    return FemSolution(mesh=mesh, u=u, q=math.sqrt(sq))


def h1_error(sol: FemSolution, exact: Field, exact_dx: Field) -> float:
    """H^1 distance between the discrete solution and a known exact solution."""
    mesh = sol.mesh
    xq = mesh.quadrature_points()
    uh = sol.u[:-1, None] + sol.slopes[:, None] * (xq - mesh.nodes[:-1, None])
    e0 = (_eval(exact, xq) - uh) ** 2
    e1 = (_eval(exact_dx, xq) - sol.slopes[:, None]) ** 2
    return math.sqrt(float(np.sum(mesh.h * ((e0 + e1) @ _GW))))


@dataclass(frozen=True)
class Indicators:
    phi: np.ndarray  # per element, >= 0
    total: float  # sqrt(sum phi^2)


def a_posteriori_indicators(
    sol: FemSolution,
    coeff: Field | float,
    f: Field | float,
    coeff_dx: Field | float = 0.0,
) -> Indicators:
    """Residual indicators with the reliability constant set to 1.

    ``phi_K^2 = h_K^2 int_K (f + a' u_h')^2 + 1/2 sum_nodes h_g (a [u_h'])^2``
    where the sum runs over the interior end points of ``K``, ``[.]`` is the
    jump of the slope and ``h_g`` the mean size of the two adjacent elements.
    """
    mesh = sol.mesh
    h = mesh.h
    s = sol.slopes
    xq = mesh.quadrature_points()
    res = _eval(f, xq) + _eval(coeff_dx, xq) * s[:, None]
    eta = h * h * h * ((res * res) @ _GW)
    if mesh.n_elements > 1:
        xi = mesh.nodes[1:-1]
        jump = _eval(coeff, xi) * (s[1:] - s[:-1])
        hg = 0.5 * (h[:-1] + h[1:])
        edge = 0.5 * hg * jump * jump
        eta[:-1] += edge
        eta[1:] += edge
    phi = np.sqrt(eta)
    return Indicators(phi=phi, total=math.sqrt(float(eta.sum())))


def dorfler_mark(phi, theta: float = 0.5) -> np.ndarray:
    """Minimal set of elements holding ``theta`` of the squared indicator mass.

    Elements are taken in order of decreasing ``phi^2``; ties go to the
    leftmost element first.
    """
    if not 0.0 < theta <= 1.0:
        raise InvalidArgument("theta must lie in (0, 1]")
    eta = np.asarray(phi, dtype=np.float64) ** 2
    marked = np.zeros(len(eta), dtype=bool)
    if theta >= 1.0:
        marked[eta > 0] = True
        return marked
    order = np.argsort(-eta, kind="stable")
    csum = np.cumsum(eta[order])
    if csum[-1] <= 0:
        return marked
    # relative slack so exact-fraction cases are not lost to rounding
    k = int(np.searchsorted(csum, theta * csum[-1] * (1.0 - 1e-12))) + 1
    marked[order[:k]] = True
    return marked


def dorfler_refine(mesh: Mesh1D, phi, theta: float = 0.5) -> Mesh1D:
    """Bisect the Dörfler-marked elements."""
    return mesh.bisect(dorfler_mark(phi, theta))
