"""Matérn covariances and their Karhunen-Loève expansion on [0, 1].

The eigenpairs come from a Nyström discretization on Gauss-Legendre nodes.
Off-node values of the eigenfunctions (and of their derivatives) use the
Nyström interpolant

    phi_m(x) = (1 / mu_m) sum_i w_i k(x, x_i) phi_m(x_i),

which is exact for the discrete eigenproblem and inherits the smoothness of
the kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import k0, k1

from ..errors import InvalidArgument

SUPPORTED_NU = (0.5, 1.0, 1.5, 2.5)


@dataclass(frozen=True)
class MaternParams:
    nu: float = 1.0
    length: float = 0.1
    variance: float = 0.5

    def __post_init__(self) -> None:
        if float(self.nu) not in SUPPORTED_NU:
            raise InvalidArgument(f"nu must be one of {SUPPORTED_NU}")
        if not self.length > 0:
            raise InvalidArgument("correlation length must be positive")
        if not self.variance > 0:
            raise InvalidArgument("variance must be positive")


def _profile(p: MaternParams, d: np.ndarray) -> np.ndarray:
    # covariance as a function of the distance d >= 0
    nu, lam, v = float(p.nu), p.length, p.variance
    if nu == 0.5:
        return v * np.exp(-d / lam)
    if nu == 1.5:
        a = math.sqrt(3.0) / lam
        return v * (1.0 + a * d) * np.exp(-a * d)
    if nu == 2.5:
        b = math.sqrt(5.0) / lam
        return v * (1.0 + b * d + (b * d) ** 2 / 3.0) * np.exp(-b * d)
    z = math.sqrt(2.0) * d / lam
    with np.errstate(invalid="ignore"):
        out = v * z * k1(z)
    return np.where(z == 0.0, v, out)


def _profile_slope(p: MaternParams, d: np.ndarray) -> np.ndarray:
    # d/dd of the profile; right derivative at d = 0
    nu, lam, v = float(p.nu), p.length, p.variance
    if nu == 0.5:
        return -v / lam * np.exp(-d / lam)
    if nu == 1.5:
        a = math.sqrt(3.0) / lam
        return -v * a * a * d * np.exp(-a * d)
    if nu == 2.5:
        b = math.sqrt(5.0) / lam
        return -v * (b * b * d / 3.0) * (1.0 + b * d) * np.exp(-b * d)
    c = math.sqrt(2.0) / lam
    z = c * d
    with np.errstate(invalid="ignore"):
        out = -v * c * z * k0(z)
    return np.where(z == 0.0, 0.0, out)


def matern_covariance(p: MaternParams, x, y) -> np.ndarray:
    """Matérn covariance ``k(x, y)``; broadcasts over ``x`` and ``y``."""
    d = np.abs(np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64))
    return _profile(p, d)


def matern_covariance_dx(p: MaternParams, x, y) -> np.ndarray:
    """Partial derivative of ``k(x, y)`` with respect to ``x``."""
    diff = np.asarray(x, dtype=np.float64) - np.asarray(y, dtype=np.float64)
    return np.sign(diff) * _profile_slope(p, np.abs(diff))


@dataclass(frozen=True)
class KLBasis:
    """Truncated KL basis: eigenvalues, node values and the Nyström rule."""

    params: MaternParams
    eigenvalues: np.ndarray  # (R,), non-increasing
    nodes: np.ndarray  # (n_q,)
    weights: np.ndarray  # (n_q,)
    node_values: np.ndarray  # (n_q, R), phi_m(x_i)

    @property
    def r_trunc(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_q(self) -> int:
        return len(self.nodes)

    def _interp(self, kmat: np.ndarray) -> np.ndarray:
        # sqrt(mu_m) phi_m = (1 / sqrt(mu_m)) sum_i w_i k(., x_i) phi_m(x_i)
        mu = self.eigenvalues
        scale = np.zeros_like(mu)
        ok = mu > 1e-14 * max(mu[0], 1e-300)
        scale[ok] = 1.0 / np.sqrt(mu[ok])
        return (kmat * self.weights) @ self.node_values * scale

    def scaled_modes(self, x) -> np.ndarray:
        """``sqrt(mu_m) phi_m(x)`` as an array of shape ``(len(x), R)``."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return self._interp(matern_covariance(self.params, x[:, None], self.nodes[None, :]))

    def scaled_mode_slopes(self, x) -> np.ndarray:
        """``sqrt(mu_m) phi_m'(x)``, shape ``(len(x), R)``."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return self._interp(matern_covariance_dx(self.params, x[:, None], self.nodes[None, :]))

    def eigenfunctions(self, x) -> np.ndarray:
        """Interpolated ``phi_m(x)``; modes with vanishing eigenvalue give 0."""
        mu = self.eigenvalues
        out = self.scaled_modes(x)
        ok = mu > 1e-14 * max(mu[0], 1e-300)
        out[:, ok] /= np.sqrt(mu[ok])
        return out


def nystrom_kl(p: MaternParams, r_trunc: int, n_q: int, domain: tuple[float, float] = (0.0, 1.0)) -> KLBasis:
    """Top ``r_trunc`` eigenpairs of the covariance operator on ``domain``.

    Solves the symmetric form ``W^1/2 K W^1/2 y = mu y`` of the Nyström
    system, so the node values ``phi = W^-1/2 y`` are orthonormal in the
    quadrature inner product.
    """
    if r_trunc < 1 or n_q < 1:
        raise InvalidArgument("r_trunc and n_q must be positive")
    if r_trunc > n_q:
        raise InvalidArgument("r_trunc cannot exceed the number of quadrature nodes")
    a, b = map(float, domain)
    if not b > a:
        raise InvalidArgument("empty domain")
    t, w = np.polynomial.legendre.leggauss(n_q)
    nodes = a + (b - a) * (t + 1.0) / 2.0
    weights = w * (b - a) / 2.0
    sw = np.sqrt(weights)
    kmat = matern_covariance(p, nodes[:, None], nodes[None, :])
    vals, vecs = np.linalg.eigh(sw[:, None] * kmat * sw[None, :])
    order = np.argsort(vals, kind="stable")[::-1][:r_trunc]
    vals, vecs = vals[order], vecs[:, order]
    if np.any(vals < -1e-12 * max(1.0, abs(vals[0]))):
        raise InvalidArgument("covariance matrix is not positive semi-definite")
    vals = np.maximum(vals, 0.0)
    # fix the sign so that each eigenvector has a positive leading entry sum
    signs = np.where(np.sum(vecs, axis=0) < 0, -1.0, 1.0)
    phi = vecs * signs / sw[:, None]
    return KLBasis(params=p, eigenvalues=vals, nodes=nodes, weights=weights, node_values=phi)


def _check_xi(kl: KLBasis, xi) -> np.ndarray:
    xi = np.asarray(xi, dtype=np.float64)
    if xi.shape != (kl.r_trunc,):
        raise InvalidArgument(f"xi must have length {kl.r_trunc}")
    return xi


def evaluate_coefficient(kl: KLBasis, xi, x) -> np.ndarray:
    """Log-normal coefficient ``exp(sum_m sqrt(mu_m) phi_m(x) xi_m)``."""
    xi = _check_xi(kl, xi)
    x = np.asarray(x, dtype=np.float64)
    return np.exp(kl.scaled_modes(x.ravel()) @ xi).reshape(x.shape)


def evaluate_coefficient_derivative(kl: KLBasis, xi, x) -> np.ndarray:
    """``a'(x) = a(x) * sum_m sqrt(mu_m) phi_m'(x) xi_m``, differentiated term-wise."""
    xi = _check_xi(kl, xi)
    x = np.asarray(x, dtype=np.float64)
    slope = (kl.scaled_mode_slopes(x.ravel()) @ xi).reshape(x.shape)
    return evaluate_coefficient(kl, xi, x) * slope
