"""Figure rendering for fair-sampling experiment outputs."""

from .figures import FigureSpec, plot_rank, plot_stacked, plot_trace, render
from .io import SchemaError

__all__ = ["FigureSpec", "SchemaError", "plot_trace", "plot_stacked",
           "plot_rank", "render"]

__version__ = "0.1.0"
