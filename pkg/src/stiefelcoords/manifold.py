"""Points, tangent vectors and the alpha-family of metrics on St(n, p).

Points and tangent vectors are plain ``ndarray`` objects of shape (n, p);
the ``check_*`` helpers in :mod:`stiefelcoords.validation` enforce their
invariants at API boundaries.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import BaseMismatchError, PseudoRiemannianError, ZeroTangentError
from .linalg import compact_qr, skew, sym
from .validation import as_float_matrix, check_random_state, check_stiefel

__all__ = [
    "AlphaMetric",
    "as_metric",
    "PFactors",
    "p_factors",
    "project_tangent",
    "inner_alpha",
    "norm_alpha",
    "random_point",
    "random_tangent",
]


@dataclass(frozen=True)
class AlphaMetric:
    """The metric ``<D, E>_alpha = tr(D^T (I - nu/2 U U^T) E)``.

    ``alpha = 0`` is the canonical metric and ``alpha = -1/2`` the Euclidean
    one. ``alpha = -1`` is not allowed; ``alpha < -1`` is accepted but
    flagged as pseudo-Riemannian and rejected by the log solvers.
    """

    alpha: float = 0.0

    def __post_init__(self):
        alpha = float(self.alpha)
        if not np.isfinite(alpha):
            raise ValueError("alpha must be finite")
        if alpha == -1.0:
            raise ValueError("alpha = -1 does not define a metric")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def canonical(cls):
        return cls(0.0)

    @classmethod
    def euclidean(cls):
        return cls(-0.5)

    @property
    def mu(self):
        return self.alpha / (self.alpha + 1.0)

    @property
    def nu(self):
        return (2.0 * self.alpha + 1.0) / (self.alpha + 1.0)

    @property
    def is_riemannian(self):
        return self.alpha > -1.0

    @property
    def is_euclidean(self):
        return self.alpha == -0.5

    @property
    def is_canonical(self):
        return self.alpha == 0.0

    def require_riemannian(self):
        if not self.is_riemannian:
            raise PseudoRiemannianError(
                f"alpha = {self.alpha} < -1 gives a pseudo-Riemannian metric"
            )


def as_metric(alpha):
    """Accept an :class:`AlphaMetric` or a bare float."""
    if isinstance(alpha, AlphaMetric):
        return alpha
    return AlphaMetric(alpha)


@dataclass(frozen=True)
class PFactors:
    """Reduced form ``delta = U @ A + Q @ B`` of a tangent vector.

    ``A`` is skew-symmetric (p, p), ``B`` is (p, p) and ``Q`` has
    orthonormal columns orthogonal to ``U``.
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray

    def to_tangent(self, U):
        return U @ self.A + self.Q @ self.B


def p_factors(U, delta):
    """Split ``delta`` into ``A = U^T delta`` and a compact QR of the normal part."""
    A = skew(U.T @ delta)
    W = delta - U @ (U.T @ delta)
    Q, B = compact_qr(W, complement=U)
    return PFactors(A, B, Q)


def project_tangent(U, W):
    """Orthogonal projection ``W - U sym(U^T W)`` onto the tangent space at ``U``."""
    U = as_float_matrix(U, "U")
    W = as_float_matrix(W, "W")
    if W.shape != U.shape:
        raise BaseMismatchError(f"W has shape {W.shape}, expected {U.shape}")
    return W - U @ sym(U.T @ W)


def inner_alpha(U, delta1, delta2, alpha=0.0):
    """Inner product of two tangent vectors at ``U`` under the alpha-metric.

    Evaluated as ``tr(D1^T D2) - nu/2 tr((U^T D1)^T (U^T D2))``, which
    avoids forming ``U U^T``.
    """
    metric = as_metric(alpha)
    if delta1.shape != U.shape or delta2.shape != U.shape:
        raise BaseMismatchError("tangent vectors and base point have different shapes")
    c = 0.5 * metric.nu
    A1 = U.T @ delta1
    A2 = U.T @ delta2
    return float(np.vdot(delta1, delta2) - c * np.vdot(A1, A2))


def norm_alpha(U, delta, alpha=0.0):
    metric = as_metric(alpha)
    metric.require_riemannian()
    return float(np.sqrt(max(inner_alpha(U, delta, delta, metric), 0.0)))


def random_point(n, p, seed=None):
    """Random point from the Q-factor of a uniform [0, 1) n-by-p matrix."""
    if not 1 <= p <= n:
        raise ValueError(f"need 1 <= p <= n, got n={n}, p={p}")
    rng = check_random_state(seed)
    Q, R = np.linalg.qr(rng.uniform(size=(n, p)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def random_tangent(U, seed=None, alpha=0.0, length=1.0):
    """Random tangent vector ``U A + (I - U U^T) T`` scaled to ``length``.

    ``A = G - G^T`` for a uniform [0, 1) p-by-p matrix ``G`` and ``T`` is
    uniform n-by-p; the length is measured in the alpha-metric.
    """
    metric = as_metric(alpha)
    metric.require_riemannian()
    if length < 0:
        raise ValueError("length must be nonnegative")
    U = check_stiefel(U)
    n, p = U.shape
    rng = check_random_state(seed)
    G = rng.uniform(size=(p, p))
    A = G - G.T
    T = rng.uniform(size=(n, p))
    delta = U @ A + T - U @ (U.T @ T)
    nrm = norm_alpha(U, delta, metric)
    if nrm < 1e-300:
        raise ZeroTangentError("random tangent direction is numerically zero")
    return delta * (length / nrm)
