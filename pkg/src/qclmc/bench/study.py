"""MSE-versus-M and bound-curve studies."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, fields
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .. import _streams
from ..bounds import REFERENCE_RATES, RateParams, mse_bound
from ..config import read_kv
from ..errors import InvalidArgument
from ..estimator import CappedPathWarning, EstimatorConfig, estimate, mlmc_reference
from ..fitting import recommend_r
from ..level_process import MaternParams, PdeConfig, PdeModel, SyntheticModel, SyntheticParams
from ..lowdisc import exp_inverse_transform, generate_sequence, loglog_slope

METHODS = ("clmc", "qclmc")
_METHOD_ID = {"clmc": 1, "qclmc": 2}
DEFAULT_M_LIST = tuple(16 * 2**i for i in range(10))
_Z95 = 1.959963984540054

SYNTHETIC_DEFAULTS = {
    "c1": REFERENCE_RATES.c1,
    "alpha": REFERENCE_RATES.alpha,
    "c2": REFERENCE_RATES.c2,
    "beta": REFERENCE_RATES.beta,
    "c3": 1.0,
    "gamma": REFERENCE_RATES.gamma,
}
PDE_DEFAULT_R = 2.5  # fitted 1D rates give (gamma + min(beta, 2 alpha)) / 2 close to this
_PDE_ALIASES = {"lambda": "length", "R": "r_trunc", "nu": "nu", "variance": "variance"}


def build_model(kind: str, params: Mapping[str, Any] | None = None):
    """Construct a level process from a flat parameter mapping."""
    params = dict(params or {})
    if kind == "synthetic":
        merged = {**SYNTHETIC_DEFAULTS, **params}
        names = {f.name for f in fields(SyntheticParams)}
        unknown = set(merged) - names
        if unknown:
            raise InvalidArgument(f"unknown synthetic parameters: {sorted(unknown)}")
        return SyntheticModel(SyntheticParams(**{k: float(v) for k, v in merged.items()}))
    if kind == "pde":
        matern, rest = {}, {}
        for k, v in params.items():
            k = _PDE_ALIASES.get(k, k)
            if k in ("nu", "length", "variance"):
                matern[k] = float(v)
            else:
                rest[k] = v
        names = {f.name for f in fields(PdeConfig)} - {"matern"}
        unknown = set(rest) - names
        if unknown:
            raise InvalidArgument(f"unknown pde parameters: {sorted(unknown)}")
        ints = {"r_trunc", "n_q", "initial_elements", "max_refinements"}
        rest = {k: (int(v) if k in ints else float(v)) for k, v in rest.items()}
        return PdeModel(PdeConfig(matern=MaternParams(**matern), **rest))
    raise InvalidArgument(f"unknown model {kind!r}")


def default_r(model) -> float:
    if isinstance(model, SyntheticModel):
        p = model.params
        return recommend_r(RateParams(c1=p.c1, alpha=p.alpha, c2=p.c2, beta=p.beta, gamma=p.gamma))
    return PDE_DEFAULT_R


@dataclass(frozen=True)
class StudyConfig:
    model: str = "synthetic"
    model_params: Mapping[str, Any] = field(default_factory=dict)
    methods: tuple[str, ...] = METHODS
    m_list: tuple[int, ...] = DEFAULT_M_LIST
    k_runs: int = 100
    r: float | None = None
    l_max: float = math.inf
    reference_tolerance: float | None = None
    seed: int = 0
    out_dir: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise InvalidArgument(f"methods must be a non-empty subset of {METHODS}")
        if not self.m_list or any(m < 1 for m in self.m_list):
            raise InvalidArgument("m_list must hold positive sample sizes")
        if any(b <= a for a, b in zip(self.m_list, self.m_list[1:])):
            raise InvalidArgument("m_list must be strictly increasing")
        if self.k_runs < 2:
            raise InvalidArgument("k_runs must be at least 2")
        if self.reference_tolerance is not None and not self.reference_tolerance > 0:
            raise InvalidArgument("reference_tolerance must be positive")

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "StudyConfig":
        own = {f.name for f in fields(cls)} - {"model_params"}
        kw = {k: v for k, v in data.items() if k in own}
        kw["model_params"] = {k: v for k, v in data.items() if k not in own}
        for k in ("k_runs", "seed"):
            if k in kw:
                kw[k] = int(kw[k])
        for k in ("r", "l_max", "reference_tolerance"):
            if k in kw:
                kw[k] = float(kw[k])
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "StudyConfig":
        return cls.from_mapping(read_kv(path))


def study_seed(master: int, method: str, m: int, rep: int) -> int:
    """Seed of one replication; independent of the rest of the grid."""
    return _streams.derive_seed(master, _streams.TAG_STUDY, _METHOD_ID[method], m, rep)


@dataclass(frozen=True)
class MseRow:
    method: str
    m: int
    mse: float
    mse_halfwidth: float
    mean_estimate: float
    estimate_halfwidth: float
    mean_cost: float
    mean_max_level: float
    capped: int


@dataclass
class MseStudyResult:
    rows_: list[MseRow]
    reference: float
    reference_source: str
    k_runs: int
    capped_fraction: float = 0.0

    columns = [f.name for f in fields(MseRow)]
    ylabel = "MSE"

    @property
    def warning(self) -> bool:
        return self.capped_fraction > 0.01

    def rows(self) -> list[dict[str, Any]]:
        return [{f.name: getattr(r, f.name) for f in fields(MseRow)} for r in self.rows_]

    def by_method(self, method: str) -> list[MseRow]:
        return [r for r in self.rows_ if r.method == method]

    def curves(self) -> dict[str, tuple[list[float], list[float]]]:
        out = {}
        for method in dict.fromkeys(r.method for r in self.rows_):
            rs = self.by_method(method)
            out[method] = ([r.m for r in rs], [r.mse for r in rs])
        return out

    def slopes(self) -> dict[str, float]:
        return {k: loglog_slope(*v) for k, v in self.curves().items()}

    def quotients(self) -> list[tuple[int, float]]:
        """CLMC MSE divided by QCLMC MSE at every common M."""
        q = {r.m: r.mse for r in self.by_method("qclmc")}
        return [(r.m, r.mse / q[r.m]) for r in self.by_method("clmc") if r.m in q and q[r.m] > 0]

    def mean_quotient(self) -> float:
        qs = [q for _, q in self.quotients()]
        return float(np.mean(qs)) if qs else math.nan


def _reference(model, cfg: StudyConfig, r: float) -> tuple[float, str]:
    if isinstance(model, SyntheticModel):
        return model.analytic_limit(), "analytic"
    tol = cfg.reference_tolerance
    if tol is None:
        # a tenth of the RMSE expected at the largest M, from a CLMC pilot
        pilot_m = max(cfg.m_list[0], 32)
        pilot = estimate(
            model,
            EstimatorConfig(m=pilot_m, r=r, l_max=cfg.l_max, level_source="pseudo", seed=_streams.derive_seed(cfg.seed, 0)),
            "clmc",
        )
        sd = float(np.std(pilot.contributions, ddof=1))
        tol = 0.1 * sd / math.sqrt(cfg.m_list[-1])
    ref_seed = _streams.derive_seed(cfg.seed, _streams.TAG_MLMC)
    return mlmc_reference(model, tol, ref_seed, include_base=False), "mlmc"


def run_mse_study(
    cfg: StudyConfig,
    model=None,
    progress: Callable[[str, int], None] | None = None,
) -> MseStudyResult:
    """Estimate the MSE of each method on the M grid from ``k_runs`` replications."""
    model = model or build_model(cfg.model, cfg.model_params)
    r = cfg.r if cfg.r is not None else default_r(model)
    ref, source = _reference(model, cfg, r)
    rows: list[MseRow] = []
    capped_total = samples_total = 0
    for method in cfg.methods:
        src = "quasi" if method == "qclmc" else "pseudo"
        for m in cfg.m_list:
            est = np.empty(cfg.k_runs)
            cost = np.empty(cfg.k_runs)
            lbar = np.empty(cfg.k_runs)
            capped = 0
            for k in range(cfg.k_runs):
                ecfg = EstimatorConfig(m=m, r=r, l_max=cfg.l_max, level_source=src, seed=study_seed(cfg.seed, method, m, k))
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", CappedPathWarning)
                    res = estimate(model, ecfg, method)
                est[k], cost[k], lbar[k] = res.estimate, res.total_cost, res.max_level
                capped += len(res.capped)
            sq = (est - ref) ** 2
            sqrt_k = math.sqrt(cfg.k_runs)
            rows.append(
                MseRow(
                    method=method,
                    m=m,
                    mse=float(sq.mean()),
                    mse_halfwidth=float(_Z95 * sq.std(ddof=1) / sqrt_k),
                    mean_estimate=float(est.mean()),
                    estimate_halfwidth=float(_Z95 * est.std(ddof=1) / sqrt_k),
                    mean_cost=float(cost.mean()),
                    mean_max_level=float(lbar.mean()),
                    capped=capped,
                )
            )
            capped_total += capped
            samples_total += m * cfg.k_runs
            if progress:
                progress(method, m)
    frac = capped_total / samples_total if samples_total else 0.0
    return MseStudyResult(rows_=rows, reference=ref, reference_source=source, k_runs=cfg.k_runs, capped_fraction=frac)


BOUND_COLUMNS = [
    "method",
    "M",
    "l_eff",
    "bias_standard",
    "bias_discrepancy",
    "var_convergence",
    "var_bias_convergence",
    "var_discrepancy",
    "mse_bound",
]


@dataclass
class BoundStudyResult:
    rows_: list[dict[str, Any]]
    runs: int

    columns = BOUND_COLUMNS
    ylabel = "MSE bound"

    def rows(self) -> list[dict[str, Any]]:
        return list(self.rows_)

    def curves(self) -> dict[str, tuple[list[float], list[float]]]:
        out: dict[str, tuple[list[float], list[float]]] = {}
        for row in self.rows_:
            xs, ys = out.setdefault(row["method"], ([], []))
            xs.append(row["M"])
            ys.append(row["mse_bound"])
        return out

    def column(self, method: str, name: str) -> list[float]:
        return [row[name] for row in self.rows_ if row["method"] == method]

    def bias_slope(self, method: str = "qclmc") -> float:
        ms = self.column(method, "M")
        bias = [a + b for a, b in zip(self.column(method, "bias_standard"), self.column(method, "bias_discrepancy"))]
        return loglog_slope(ms, bias)


def run_bound_study(
    params: RateParams,
    m_list: Sequence[int] = DEFAULT_M_LIST,
    runs: int = 100,
    seed: int = 0,
    kind: str = "sobol_owen",
    methods: Sequence[str] = METHODS,
) -> BoundStudyResult:
    """Bound curves over ``m_list``.

    The QCLMC terms are averaged over ``runs`` scrambled sequences, each
    evaluated at its own largest level; the CLMC curve (``l_max = inf``) is
    deterministic.
    """
    if runs < 1:
        raise InvalidArgument("runs must be at least 1")
    rows = []
    for method in methods:
        for m in m_list:
            if method == "clmc":
                rows.append(mse_bound("clmc", params, int(m)).row())
                continue
            acc: dict[str, float] = {}
            for run in range(runs):
                seq = generate_sequence(kind, int(m), _streams.derive_seed(seed, _streams.TAG_STUDY, run))
                l_bar = float(exp_inverse_transform(seq, params.r).levels.max())
                row = mse_bound("qclmc", params, int(m), l_eff=l_bar).row()
                for c in BOUND_COLUMNS[2:]:
                    acc[c] = acc.get(c, 0.0) + row[c] / runs
            rows.append({"method": "qclmc", "M": int(m), **acc})
    return BoundStudyResult(rows_=rows, runs=runs)
