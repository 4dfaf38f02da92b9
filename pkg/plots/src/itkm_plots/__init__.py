"""Figures from itkm experiment outputs (metrics CSV, ITKM binary matrices)."""

from .figures import PlotSpec, plot_convergence, plot_mosaic
from .io import PlotDataError, read_itkm_matrix, read_metrics_csv

__version__ = "0.1.0"

__all__ = [
    "PlotSpec",
    "plot_convergence",
    "plot_mosaic",
    "PlotDataError",
    "read_metrics_csv",
    "read_itkm_matrix",
]
