"""Level processes ``Q(l)``: a synthetic model and a random 1D elliptic PDE."""

from .fem import (
    FemSolution,
    Indicators,
    Mesh1D,
    a_posteriori_indicators,
    dorfler_mark,
    dorfler_refine,
    h1_error,
    solve_fem_1d,
)
from .kl import (
    SUPPORTED_NU,
    KLBasis,
    MaternParams,
    evaluate_coefficient,
    evaluate_coefficient_derivative,
    matern_covariance,
    matern_covariance_dx,
    nystrom_kl,
)
from .path import LevelPath
from .pde import PdeConfig, PdeModel, PdeSample, sample_pde_path
from .synthetic import SyntheticModel, SyntheticParams, sample_synthetic_path

__all__ = [
    "FemSolution",
    "Indicators",
    "KLBasis",
    "LevelPath",
    "MaternParams",
    "Mesh1D",
    "PdeConfig",
    "PdeModel",
    "PdeSample",
    "SUPPORTED_NU",
    "SyntheticModel",
    "SyntheticParams",
    "a_posteriori_indicators",
    "dorfler_mark",
    "dorfler_refine",
    "evaluate_coefficient",
    "evaluate_coefficient_derivative",
    "h1_error",
    "matern_covariance",
    "matern_covariance_dx",
    "nystrom_kl",
    "sample_pde_path",
    "sample_synthetic_path",
    "solve_fem_1d",
]
