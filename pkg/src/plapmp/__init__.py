"""Coupled p-Laplacian systems: principal curve, maximum principles and ABP bounds."""

__version__ = "0.1.0"

from .errors import (CertificationError, ConfigError, ConvergenceError, InconsistencyError,
                     PlapError)
from .geometry import Domain, boundary_normal_quotient, disk, interval, rectangle
from .pde_core import SolveOptions, apply_p_laplacian, energy, solve_dirichlet, solve_weighted_rhs
from .spectral import (EigenData, ExponentConfig, WeightPair, composed_map, curve_point,
                       eigen_residuals, eigenpair_at, principal_curve)
from .principles import (RegionClass, check_wcp_scp, check_wmp_smp, classify, cone_membership,
                         construct_violation, solve_coupled)
from .bounds import (BoundsReport, abp_check_scalar, abp_constant, ball_volume, eta,
                     lower_bound, small_measure_guarantee)

__all__ = [
    "CertificationError", "ConfigError", "ConvergenceError", "InconsistencyError", "PlapError",
    "Domain", "boundary_normal_quotient", "disk", "interval", "rectangle",
    "SolveOptions", "apply_p_laplacian", "energy", "solve_dirichlet", "solve_weighted_rhs",
    "EigenData", "ExponentConfig", "WeightPair", "composed_map", "curve_point",
    "eigen_residuals", "eigenpair_at", "principal_curve",
    "RegionClass", "check_wcp_scp", "check_wmp_smp", "classify", "cone_membership",
    "construct_violation", "solve_coupled",
    "BoundsReport", "abp_check_scalar", "abp_constant", "ball_volume", "eta",
    "lower_bound", "small_measure_guarantee",
]
