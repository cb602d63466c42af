"""Closed-form bias, variance and MSE upper bounds for CLMC and QCLMC.

All bounds are built from two elementary integrals,

    E(x, l) = int_0^l exp(x t) dt
    G(r, b, l) = int_0^l int_0^l exp(-r max(s, t)) exp((r - b/2)(s + t)) ds dt

evaluated in forms that stay accurate next to their removable
singularities (``r = alpha``, ``r = beta/2``, ``r = beta``, ``r = 2 alpha``).
The special-case branches below are the exact limits of the general
expressions; they are switched on when the distance to the singular rate
drops under ``BRANCH_EPS``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Literal, Mapping

from .errors import DivergentBound, InvalidArgument

BRANCH_EPS = 1e-9
INF = math.inf

Method = Literal["clmc", "qclmc"]


@dataclass(frozen=True)
class RateParams:
    """Rate envelope of the level process plus discrepancy constants.

    ``c1 e^{-alpha l}`` bounds the mean of dQ/dl, ``c2 e^{-beta l}`` its
    variance and ``c3 e^{gamma l}`` the cost growth.  ``c_disc``, ``c_tilde``
    and ``kappa`` describe the level sequence: its F-discrepancy is at most
    ``c_disc M^(kappa-1)`` and its largest point is ``1 - c_tilde M^(kappa-1)``.
    """

    c1: float
    alpha: float
    c2: float
    beta: float
    c3: float = 1.0
    gamma: float = 1.0
    r: float = 1.0
    c_disc: float = 1.0
    c_tilde: float = 0.5
    kappa: float = 0.0

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "r", "c_disc", "c_tilde"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        for name in ("c1", "c2", "c3"):
            if not getattr(self, name) >= 0:
                raise InvalidArgument(f"{name} must be non-negative")
        if self.c_tilde > self.c_disc:
            raise InvalidArgument("c_tilde must not exceed c_disc")
        if not 0.0 <= self.kappa < 1.0:
            raise InvalidArgument("kappa must lie in [0, 1)")

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "RateParams":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgument(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})  # type: ignore[arg-type]

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}

    def replace(self, **changes: float) -> "RateParams":
        d = self.as_dict()
        d.update(changes)
        return RateParams(**d)


# rates fitted for a log-Gaussian coefficient with nu = 1, lambda = 0.1, v = 0.5
REFERENCE_RATES = RateParams(
    c1=5.21e-2, alpha=1.85, c2=4.13e-4, beta=3.69, c3=1.0, gamma=1.83, r=2.76
)


@dataclass
class BoundReport:
    method: str
    m: int
    l_eff: float
    bias_terms: dict[str, float] = field(default_factory=dict)
    variance_terms: dict[str, float] = field(default_factory=dict)

    @property
    def bias(self) -> float:
        return sum(self.bias_terms.values())

    @property
    def variance(self) -> float:
        return sum(self.variance_terms.values())

    @property
    def mse(self) -> float:
        return self.variance + self.bias**2

    def row(self) -> dict[str, float | str | int]:
        """Flat record with the CSV column names used by the bound study."""
        return {
            "method": self.method,
            "M": self.m,
            "l_eff": self.l_eff,
            "bias_standard": self.bias_terms.get("standard", 0.0),
            "bias_discrepancy": self.bias_terms.get("discrepancy", 0.0),
            "var_convergence": self.variance_terms.get("variance_convergence", 0.0),
            "var_bias_convergence": self.variance_terms.get("bias_convergence", 0.0),
            "var_discrepancy": self.variance_terms.get("discrepancy", 0.0),
            "mse_bound": self.mse,
        }


def exp_integral(x: float, l: float) -> float:
    """``int_0^l e^{x t} dt``, stable for ``x`` near zero; ``l`` may be inf."""
    if l == INF:
        if x < 0:
            return -1.0 / x
        return INF
    xl = x * l
    if abs(xl) < 1e-8:
        return l * (1.0 + xl / 2.0 + xl * xl / 6.0)
    return math.expm1(xl) / x


def max_kernel_integral(r: float, b: float, l: float) -> float:
    """``G(r, b, l)``: the double integral behind integral II and CLMC variance.

    Equals ``2/((r-b)(r-b/2)) e^{(r-b)l} + 4/(b(r-b/2)) e^{-bl/2} - 4/((r-b)b)``
    for generic rates; evaluated in one of two rearrangements that avoid
    cancellation near ``r = b/2`` and ``r = b`` respectively.
    """
    s = r - b / 2.0
    t = r - b
    if l == INF:
        if t >= 0:
            raise DivergentBound("G(r, b, inf) diverges for r >= b")
        return 4.0 / ((b - r) * b)
    if l == 0.0:
        return 0.0
    em = math.exp(-b * l / 2.0)
    if abs(s) < BRANCH_EPS:
        return -8.0 / b**2 * em - 4.0 / b * l * em + 8.0 / b**2
    if abs(t) < BRANCH_EPS:
        return 4.0 / b * l + 8.0 / b**2 * em - 8.0 / b**2
    if abs(s) <= abs(t):
        return 2.0 * em / t * exp_integral(s, l) + 4.0 / (b * t) * math.expm1(-b * l / 2.0)
    return 2.0 / s * (exp_integral(t, l) + 2.0 / b * math.expm1(-b * l / 2.0))


def _disc_factor(p: RateParams, m: int) -> float:
    # F-discrepancy bound c_disc M^(kappa - 1); c_disc / M for kappa = 0
    return p.c_disc * float(m) ** (p.kappa - 1.0)


def _check_m(m: int) -> None:
    if m < 1:
        raise InvalidArgument("M must be at least 1")


def effective_max_level(p: RateParams, m: int) -> float:
    """Largest transformed level ``ln(c_tilde^{-1/r} M^{(1-kappa)/r})``."""
    _check_m(m)
    return ((1.0 - p.kappa) * math.log(m) - math.log(p.c_tilde)) / p.r


def qclmc_bias_bound(p: RateParams, m: int, l_eff: float) -> tuple[float, float]:
    """Return ``(standard, discrepancy)`` bias terms of QCLMC at level ``l_eff``."""
    _check_m(m)
    if l_eff < 0:
        raise InvalidArgument("l_eff must be non-negative")
    standard = p.c1 / p.alpha * math.exp(-p.alpha * l_eff)
    k = _disc_factor(p, m) * p.c1
    if abs(p.r - p.alpha) < BRANCH_EPS:
        discrepancy = k * l_eff
    else:
        discrepancy = k * exp_integral(p.r - p.alpha, l_eff)
    return standard, discrepancy


def appendix_integral_I_closed(p: RateParams, m: int, l: float) -> float:
    """Bound on integral I: ``c_disc c2 / M^2 * (int_0^l e^{(r - beta/2)t} dt)^2``.

    For ``r != beta/2`` the square expands to
    ``4/(2r-beta)^2 (e^{(2r-beta)l} - 2 e^{(r-beta/2)l} + 1)``; at
    ``r = beta/2`` it is ``l^2``.
    """
    _check_m(m)
    if l < 0:
        raise InvalidArgument("l must be non-negative")
    s = p.r - p.beta / 2.0
    inner = l if abs(s) < BRANCH_EPS else exp_integral(s, l)
    return _disc_factor(p, m) * p.c2 / m * inner**2


def appendix_integral_II_closed(p: RateParams, m: int, l: float) -> float:
    """Bound on integral II: ``c2 / M * G(r, beta, l)``."""
    _check_m(m)
    if l < 0:
        raise InvalidArgument("l must be non-negative")
    return p.c2 / m * max_kernel_integral(p.r, p.beta, l)


def qclmc_variance_bound(p: RateParams, m: int, l_eff: float) -> tuple[float, float]:
    """Return ``(discrepancy, variance_convergence)`` variance terms of QCLMC."""
    return appendix_integral_I_closed(p, m, l_eff), appendix_integral_II_closed(p, m, l_eff)


def clmc_variance_bound(p: RateParams, m: int, l_max: float = INF) -> tuple[float, float]:
    """Return ``(variance_convergence, bias_convergence)`` variance terms of CLMC.

    The bias-convergence term is ``c1^2/M (G(r, 2 alpha, L) - E(-alpha, L)^2)``,
    i.e. the second moment of the weighted mean path minus its squared mean.
    For ``l_max = inf`` this reduces to ``4 c2/((beta-r) beta M)`` and
    ``c1^2 r/((2 alpha - r) alpha^2 M)`` and requires ``r < min(beta, 2 alpha)``.
    """
    _check_m(m)
    if l_max == INF:
        if p.r >= min(p.beta, 2.0 * p.alpha):
            raise DivergentBound("unbiased CLMC variance needs r < min(beta, 2 alpha)")
        var_conv = 4.0 * p.c2 / ((p.beta - p.r) * p.beta * m)
        bias_conv = p.c1**2 * p.r / ((2.0 * p.alpha - p.r) * p.alpha**2 * m)
        return var_conv, bias_conv
    if l_max < 0:
        raise InvalidArgument("l_max must be non-negative")
    var_conv = p.c2 / m * max_kernel_integral(p.r, p.beta, l_max)
    mean_sq = exp_integral(-p.alpha, l_max) ** 2
    bias_conv = p.c1**2 / m * (max_kernel_integral(p.r, 2.0 * p.alpha, l_max) - mean_sq)
    return var_conv, max(bias_conv, 0.0)


def clmc_bias_bound(p: RateParams, l_max: float = INF) -> float:
    if l_max == INF:
        return 0.0
    return p.c1 / p.alpha * math.exp(-p.alpha * l_max)


def mse_bound(
    method: Method,
    p: RateParams,
    m: int,
    l_eff: float | None = None,
) -> BoundReport:
    """Assemble the MSE bound of either method.

    For QCLMC ``l_eff`` is the cap ``L_max ^ Lbar`` in force and defaults to
    :func:`effective_max_level`; for CLMC it is ``L_max`` and defaults to
    infinity (the unbiased estimator).
    """
    if method == "qclmc":
        l = effective_max_level(p, m) if l_eff is None else float(l_eff)
        standard, disc_bias = qclmc_bias_bound(p, m, l)
        disc_var, conv_var = qclmc_variance_bound(p, m, l)
        return BoundReport(
            method="qclmc",
            m=m,
            l_eff=l,
            bias_terms={"standard": standard, "discrepancy": disc_bias},
            variance_terms={"variance_convergence": conv_var, "discrepancy": disc_var},
        )
    if method == "clmc":
        l = INF if l_eff is None else float(l_eff)
        conv_var, bias_var = clmc_variance_bound(p, m, l)
        return BoundReport(
            method="clmc",
            m=m,
            l_eff=l,
            bias_terms={"standard": clmc_bias_bound(p, l)},
            variance_terms={"variance_convergence": conv_var, "bias_convergence": bias_var},
        )
    raise InvalidArgument(f"unknown method {method!r}")


@dataclass(frozen=True)
class EpsilonSchedule:
    """Accuracy-driven choices of the complexity theorem.

    ``M`` must grow like ``eps**m_exponent * |ln eps|**m_log_power`` and the
    total cost is bounded by a constant times
    ``eps**cost_exponent * |ln eps|**cost_log_power``.  The constants in front
    are proof artefacts and are not tracked.  The MSE budget is split as
    ``eps^2/2`` (truncation bias), ``eps^2/4`` (discrepancy bias) and
    ``eps^2/4`` (variance).
    """

    l_max: float
    m_min_for_cap: int
    m_exponent: float
    m_log_power: int
    cost_exponent: float
    cost_log_power: int


def _delta(a: float, b: float) -> int:
    return int(abs(a - b) < BRANCH_EPS)


def epsilon_schedule(p: RateParams, eps: float) -> EpsilonSchedule:
    if not 0.0 < eps < 1.0 / math.e:
        raise InvalidArgument("eps must lie in (0, 1/e)")
    a = p.alpha
    lmin = min(p.beta, 2.0 * a)
    l_max = math.log(p.c1 * math.sqrt(2.0) / (a * eps)) / a
    # smallest M whose largest level reaches l_max (kappa = 0)
    m_cap = p.c_tilde * (p.c1 * math.sqrt(2.0) / a) ** (p.r / a) * eps ** (-p.r / a)
    return EpsilonSchedule(
        l_max=l_max,
        m_min_for_cap=max(1, math.ceil(m_cap)),
        m_exponent=-2.0 - max(0.0, (p.r - lmin) / a),
        m_log_power=_delta(p.r, p.beta),
        cost_exponent=-2.0 - max(0.0, (p.gamma - lmin) / a),
        cost_log_power=_delta(p.r, p.beta) + _delta(p.r, p.gamma),
    )
