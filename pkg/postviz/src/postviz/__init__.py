"""Post-processing for two-layer QG solver run directories."""

from .figures import plot_enstrophy, plot_field
from .rundir import Field, RunDirectory, RunDirectoryError
from .tables import table_report

__version__ = "0.1.0"

__all__ = [
    "Field",
    "RunDirectory",
    "RunDirectoryError",
    "plot_enstrophy",
    "plot_field",
    "table_report",
    "__version__",
]
