"""Paper-style figures from benchmark harness CSV files."""

from .core import (
    PLOT_KINDS,
    EmptyDataError,
    MissingColumnError,
    PlotSpec,
    RenderResult,
    fit_linear_slope,
    fit_loglog_slope,
    load_table,
    plot_convergence,
    plot_energy,
    plot_trajectory3d,
    plot_work_precision,
    render,
)

__all__ = [
    "PLOT_KINDS",
    "EmptyDataError",
    "MissingColumnError",
    "PlotSpec",
    "RenderResult",
    "fit_linear_slope",
    "fit_loglog_slope",
    "load_table",
    "plot_convergence",
    "plot_energy",
    "plot_trajectory3d",
    "plot_work_precision",
    "render",
]

__version__ = "0.1.0"
