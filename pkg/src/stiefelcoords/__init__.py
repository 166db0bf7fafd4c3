"""Riemannian normal coordinates on the Stiefel manifold St(n, p).

Exponential and logarithm maps under the one-parameter alpha-family of
metrics (alpha = 0 canonical, alpha = -1/2 Euclidean), the linear algebra
kernels they need, and a seeded experiment harness.
"""

from .estimator import RiemannianNormalCoordinates
from .exceptions import (
    AnglePiError,
    BaseMismatchError,
    DimensionError,
    IndefiniteError,
    NoConvergenceError,
    NotOrthonormalError,
    NotSpecialOrthogonalError,
    PseudoRiemannianError,
    SingularError,
    StiefelError,
    ZeroTangentError,
)
from .exp import (
    GeodesicFactors,
    exp_alpha_full,
    exp_alpha_reduced,
    exp_canonical_eas,
    exp_euclidean_eas,
    geodesic_factors,
)
from .log import (
    SOLVER_IDS,
    LogConfig,
    LogResult,
    distance_alpha,
    log_algebraic_canonical,
    log_euc_newton,
    log_geo_newton,
    log_p_shooting,
    log_shooting_full,
    para_trans_p_factors,
    stiefel_log,
)
from .manifold import (
    AlphaMetric,
    PFactors,
    inner_alpha,
    norm_alpha,
    p_factors,
    project_tangent,
    random_point,
    random_tangent,
)

__version__ = "0.1.0"

__all__ = [
    "RiemannianNormalCoordinates",
    "AlphaMetric", "PFactors", "inner_alpha", "norm_alpha", "p_factors",
    "project_tangent", "random_point", "random_tangent",
    "GeodesicFactors", "geodesic_factors", "exp_alpha_reduced", "exp_alpha_full",
    "exp_canonical_eas", "exp_euclidean_eas",
    "LogConfig", "LogResult", "SOLVER_IDS", "stiefel_log", "distance_alpha",
    "log_shooting_full", "log_p_shooting", "para_trans_p_factors",
    "log_algebraic_canonical", "log_geo_newton", "log_euc_newton",
    "StiefelError", "DimensionError", "NotOrthonormalError", "NotSpecialOrthogonalError",
    "AnglePiError", "IndefiniteError", "SingularError", "BaseMismatchError",
    "ZeroTangentError", "PseudoRiemannianError", "NoConvergenceError",
]
