"""Command line interface: ``qclmc <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    BOUND_COLUMNS,
    StudyConfig,
    build_model,
    default_r,
    export_plot_data,
    run_bound_study,
    run_mse_study,
    write_csv,
)
from .bounds import REFERENCE_RATES, RateParams, mse_bound
from .config import read_kv, write_kv
from .errors import QclmcError
from .estimator import EstimatorConfig, estimate
from .fitting import estimate_rates, optimal_regime
from .level_process import PdeModel
from .lowdisc import KINDS, discrepancy_convergence_study


def _params(path: str | None) -> RateParams:
    if path is None:
        return REFERENCE_RATES
    return RateParams.from_mapping(read_kv(path))


def _model_params(path: str | None) -> dict:
    return read_kv(path) if path else {}


def _cmd_discrepancy(a) -> int:
    study = discrepancy_convergence_study(a.kind, a.m_list, a.r, runs=a.runs, seed=a.seed)
    rows = [{"M": m, "run": run, "f_discrepancy": v} for m, run, v in study.rows]
    write_csv(a.out, rows, ["M", "run", "f_discrepancy"])
    print(f"{a.kind}: log-log slope {study.slope():.4f} over M = {a.m_list[0]}..{a.m_list[-1]}")
    return 0


def _cmd_pde_demo(a) -> int:
    model = build_model(
        "pde",
        {"nu": a.nu, "length": a.length, "variance": a.variance, "r_trunc": a.R, "n_q": max(a.n_q, a.R)},
    )
    assert isinstance(model, PdeModel)
    path = model.sample_path(a.seed, a.index, steps=a.steps)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = [
        {"j": j, "dof": int(path.dofs[j]), "e_j": float(path.errors[j]), "l_j": float(path.levels[j]),
         "Q_j": float(path.values[j]), "cost_j": float(path.step_costs[j])}
        for j in range(len(path.levels))
    ]
    write_csv(out / "steps.csv", rows, ["j", "dof", "e_j", "l_j", "Q_j", "cost_j"])
    x = np.linspace(0.0, 1.0, a.grid)
    a_x = model.draw(a.seed, a.index).coeff(x)
    write_csv(out / "coefficient.csv", [{"x": float(u), "a": float(v)} for u, v in zip(x, a_x)], ["x", "a"])
    print(f"wrote {out / 'steps.csv'} ({len(rows)} rows) and {out / 'coefficient.csv'}")
    return 0


def _cmd_estimate(a) -> int:
    model = build_model(a.model, _model_params(a.model_params))
    r = a.r if a.r is not None else default_r(model)
    src = "quasi" if a.method == "qclmc" else "pseudo"
    cfg = EstimatorConfig(m=a.m, r=r, l_max=a.l_max, level_source=src, seed=a.seed)
    res = estimate(model, cfg, a.method)
    out = {
        "estimate": res.estimate,
        "total_cost": res.total_cost,
        "max_level": res.max_level,
        "m": res.m,
        "method": a.method,
        "seed": a.seed,
        "r": r,
    }
    if res.capped:
        out["capped"] = res.capped
    if a.per_sample:
        out["per_sample"] = res.contributions.tolist()
    text = json.dumps(out, indent=2)
    if a.out:
        Path(a.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def _cmd_bounds(a) -> int:
    p = _params(a.params)
    methods = ["clmc", "qclmc"] if a.method == "both" else [a.method]
    rows = [mse_bound(meth, p, m).row() for meth in methods for m in a.m_list]
    write_csv(a.out, rows, BOUND_COLUMNS)
    print(f"wrote {len(rows)} rows to {a.out}")
    return 0


def _cmd_fit(a) -> int:
    model = build_model(a.model, _model_params(a.model_params))
    paths = [model.sample_path(a.seed, k, steps=a.steps) for k in range(a.m)]
    window = tuple(a.window) if a.window else None
    rep = estimate_rates(paths, window=window)
    header = (
        f"rates fitted from {a.m} {a.model} paths, {a.steps} refinements, window {rep.window}\n"
        f"optimal regime gamma < min(beta, 2 alpha): {optimal_regime(rep.params)}"
    )
    write_kv(a.out, rep.params.as_dict(), header=header)
    print(header)
    for k, v in rep.params.as_dict().items():
        print(f"  {k} = {v:.6g}")
    return 0


def _cmd_mse_study(a) -> int:
    cfg = StudyConfig.from_file(a.config)
    out = a.out or cfg.out_dir or "."

    def progress(method, m):
        print(f"  {method} M={m} done", file=sys.stderr)

    res = run_mse_study(cfg, progress=progress if a.verbose else None)
    files = export_plot_data(res, out, "mse_study")
    print(f"reference ({res.reference_source}) = {res.reference:.10g}")
    for meth, s in res.slopes().items():
        print(f"{meth}: MSE slope {s:.4f}")
    if "clmc" in cfg.methods and "qclmc" in cfg.methods:
        print(f"mean CLMC/QCLMC MSE quotient {res.mean_quotient():.3f}")
    if res.warning:
        print(f"warning: {100 * res.capped_fraction:.2f}% of paths were capped")
    print("wrote " + ", ".join(str(f) for f in files))
    return 0


def _cmd_bound_study(a) -> int:
    p = _params(a.params)
    res = run_bound_study(p, a.m_list, runs=a.runs, seed=a.seed)
    files = export_plot_data(res, a.out, "bound_study")
    print(f"QCLMC bias bound slope {res.bias_slope():.4f}")
    print("wrote " + ", ".join(str(f) for f in files))
    return 0


def build_parser() -> argparse.ArgumentParser:
    default_m = [16 * 2**i for i in range(10)]
    ap = argparse.ArgumentParser(prog="qclmc", description="Continuous level Monte Carlo toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("discrepancy", help="F-discrepancy of exponential level sequences versus M")
    s.add_argument("--kind", choices=KINDS, default="sobol_owen")
    s.add_argument("--m-list", type=int, nargs="+", default=[2**i for i in range(4, 15)])
    s.add_argument("--r", type=float, default=1.3)
    s.add_argument("--runs", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_discrepancy)

    s = sub.add_parser("pde-demo", help="one adaptive path of the random PDE")
    s.add_argument("--nu", type=float, default=1.0)
    s.add_argument("--lambda", dest="length", type=float, default=0.1)
    s.add_argument("--variance", type=float, default=0.5)
    s.add_argument("--R", type=int, default=20)
    s.add_argument("--n-q", type=int, default=100)
    s.add_argument("--steps", type=int, default=11)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--index", type=int, default=0)
    s.add_argument("--grid", type=int, default=201)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_pde_demo)

    s = sub.add_parser("estimate", help="run one CLMC or QCLMC estimate")
    s.add_argument("--model", choices=["synthetic", "pde"], default="synthetic")
    s.add_argument("--model-params", help="key = value file with model parameters")
    s.add_argument("--method", choices=["clmc", "qclmc"], default="qclmc")
    s.add_argument("--m", type=int, default=256)
    s.add_argument("--r", type=float, default=None)
    s.add_argument("--l-max", type=float, default=math.inf)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--per-sample", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=_cmd_estimate)

    s = sub.add_parser("bounds", help="closed-form MSE bounds on an M grid")
    s.add_argument("--params", help="key = value file mirroring RateParams (default: REFERENCE_RATES)")
    s.add_argument("--method", choices=["clmc", "qclmc", "both"], default="both")
    s.add_argument("--m-list", type=int, nargs="+", default=default_m)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_bounds)

    s = sub.add_parser("fit", help="fit rate parameters from sampled paths")
    s.add_argument("--model", choices=["synthetic", "pde"], default="synthetic")
    s.add_argument("--model-params")
    s.add_argument("--m", type=int, default=500)
    s.add_argument("--steps", type=int, default=8)
    s.add_argument("--window", type=int, nargs=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_fit)

    s = sub.add_parser("mse-study", help="MSE versus M for CLMC and QCLMC")
    s.add_argument("--config", required=True)
    s.add_argument("--out")
    s.add_argument("--verbose", action="store_true")
    s.set_defaults(func=_cmd_mse_study)

    s = sub.add_parser("bound-study", help="bound curves averaged over scrambled sequences")
    s.add_argument("--params")
    s.add_argument("--m-list", type=int, nargs="+", default=default_m)
    s.add_argument("--runs", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_bound_study)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (QclmcError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
