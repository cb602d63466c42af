"""Experiment drivers and result export."""

from .export import ExportError, csv_text, export_plot_data, read_csv, svg_loglog, write_csv
from .study import (
    BOUND_COLUMNS,
    DEFAULT_M_LIST,
    BoundStudyResult,
    MseRow,
    MseStudyResult,
    StudyConfig,
    build_model,
    default_r,
    run_bound_study,
    run_mse_study,
    study_seed,
)

__all__ = [
    "BOUND_COLUMNS",
    "BoundStudyResult",
    "DEFAULT_M_LIST",
    "ExportError",
    "MseRow",
    "MseStudyResult",
    "StudyConfig",
    "build_model",
    "csv_text",
    "default_r",
    "export_plot_data",
    "read_csv",
    "run_bound_study",
    "run_mse_study",
    "study_seed",
    "svg_loglog",
    "write_csv",
]
