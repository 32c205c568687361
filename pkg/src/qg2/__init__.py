"""Two-layer quasi-geostrophic finite-volume solver with low-pass filtering."""

from .filtering import FilterConfig
from .grid import BoundaryCondition, GridSpec, ScalarField
from .physics import PhysicalParams
from .timeloop import SimState, StepConfig

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition",
    "FilterConfig",
    "GridSpec",
    "PhysicalParams",
    "ScalarField",
    "SimState",
    "StepConfig",
    "__version__",
]
