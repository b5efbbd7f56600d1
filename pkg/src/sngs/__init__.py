"""Radial numerical laboratory for the Schrodinger-Newton equation with a
power nonlinearity: ground states, variational identities, scaling limits,
uniqueness scans, and sector-decomposed nondegeneracy certificates."""

__version__ = "0.1.0"

from .grid import (EVEN, ODD, RadialField, RadialGrid, differentiate,
                   integrate_radial, interpolate, load_field, make_grid,
                   save_field)
from .hartree import (HartreePotential, far_field_mass, hartree_energy,
                      hartree_potential)
from .solver import (GroundState, ModelParams, ScanResult, SolverOptions,
                     apply_jacobian, auto_rmax, continuation_path,
                     default_guess, newton_solve, reference_profile, residual,
                     uniqueness_scan)
from .diagnostics import DiagnosticsReport, identities, monotonicity_check, norm_report
from .scaling import (ScalingReport, limit_distance, limit_regime,
                      limit_study, mass_ratio_report, scale_state,
                      small_parameter)
from .linearized import (NondegeneracyReport, SectorOperator, convention_map,
                         nondegeneracy_report, quadratic_form_value,
                         sector_form, sector_spectrum, translation_mode)
from .operators import smallest_eigenpairs

__all__ = [name for name in dir() if not name.startswith("_")]
