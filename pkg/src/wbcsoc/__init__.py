"""Well-balanced central schemes on overlapping cells for the shallow-water equations."""

from .grids import (BoundarySpec, ConfigurationError, Grid1D, Grid2D, OverlappingField, SideCondition,
                    apply_boundary, build_grids, cell_averages)
from .integrator import (CSOC1D, CSOC2D, SchemeConfig, TimeControls, advance_to, choose_step, compute_rhs,
                         make_solver, ssp_rk3_step)
from .swe_model import Bathymetry, DryStateError, ModelParams, regularize_bathymetry

__version__ = "0.1.0"
