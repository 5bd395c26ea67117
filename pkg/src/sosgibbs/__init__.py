"""Period-4 boundary laws and gradient Gibbs measures of the SOS model on Cayley trees."""

__version__ = "0.1.0"

from .boundary import (  # noqa: E402
    Params, PeriodicBoundaryLaw, Tolerances, critical_tau, enumerate_laws,
    extend_periodic, fixed_point_residual, norm_identity_residual,
    recursion_residual, series_sums, solve_asymmetric, solve_symmetric,
    symmetric_polynomial,
)
from .tree import TreeBall, build_ball, path_sum  # noqa: E402
