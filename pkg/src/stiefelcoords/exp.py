"""Riemannian exponentials on St(n, p) under the alpha-metrics.

:func:`exp_alpha_reduced` is the workhorse; it only exponentiates 2p-by-2p
and p-by-p skew matrices. The other three formulas are kept as
independent references (they use scipy's general ``expm``).
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg

from .exceptions import DimensionError
from .linalg import expm_skew
from .manifold import as_metric, p_factors
from .validation import check_stiefel, check_tangent

__all__ = [
    "GeodesicFactors",
    "geodesic_factors",
    "exp_alpha_reduced",
    "exp_canonical_eas",
    "exp_euclidean_eas",
    "exp_alpha_full",
]


class GeodesicFactors(NamedTuple):
    """Blocks of ``[[M, X], [N, Y]]`` in SO(2p); the geodesic point at time
    ``t`` is ``U @ M + Q @ N``."""

    M: np.ndarray
    N: np.ndarray
    X: np.ndarray
    Y: np.ndarray

    def matrix(self):
        return np.block([[self.M, self.X], [self.N, self.Y]])


def _reduced_generator(A, B, metric, t):
    p = A.shape[0]
    G = np.empty((2 * p, 2 * p))
    G[:p, :p] = (t / (metric.alpha + 1.0)) * A
    G[:p, p:] = -t * B.T
    G[p:, :p] = t * B
    G[p:, p:] = 0.0
    return G


def geodesic_factors(A, B, t=1.0, alpha=0.0):
    """Evaluate ``expm(t [[A/(alpha+1), -B^T], [B, 0]]) @ blkdiag(expm(t mu A), I)``.

    Parameters
    ----------
    A : ndarray of shape (p, p), skew-symmetric
    B : ndarray of shape (p, p)
    t : float
    alpha : float or AlphaMetric

    Returns
    -------
    GeodesicFactors
    """
    metric = as_metric(alpha)
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    p = A.shape[0]
    if A.shape != (p, p) or B.shape != (p, p):
        raise DimensionError("A and B must be square of equal size")
    E = expm_skew(_reduced_generator(A, B, metric, t))
    if metric.mu != 0.0:
        E[:, :p] = E[:, :p] @ expm_skew(t * metric.mu * A)
    return GeodesicFactors(E[:p, :p], E[p:, :p], E[:p, p:], E[p:, p:])


def first_block_column(A, B, t, metric):
    """``(M(t), N(t))`` only; skips forming the right-hand blocks."""
    p = A.shape[0]
    E = expm_skew(_reduced_generator(A, B, metric, t))[:, :p]
    if metric.mu != 0.0:
        E = E @ expm_skew(t * metric.mu * A)
    return E[:p], E[p:]


def exp_alpha_reduced(U, delta, alpha=0.0, t=1.0, return_factors=False):
    """Stiefel exponential ``Exp_U(t * delta)`` under the alpha-metric.

    Uses ``(I - U U^T) delta = Q B`` (compact QR, rank-deficiency aware) and
    ``A = U^T delta``, then ``[U, Q] @ expm(t [[A/(alpha+1), -B^T], [B, 0]])
    @ [expm(t mu A); 0]``. Cost is O(n p^2).

    Parameters
    ----------
    U : ndarray of shape (n, p)
    delta : ndarray of shape (n, p)
        Tangent vector at ``U``.
    alpha : float or AlphaMetric
    t : float
    return_factors : bool
        Also return the :class:`GeodesicFactors` and the frame ``Q``.

    Returns
    -------
    ndarray of shape (n, p), or ``(point, factors, Q)``
    """
    metric = as_metric(alpha)
    U = check_stiefel(U)
    delta = check_tangent(U, delta, tol=1e-10)
    pf = p_factors(U, delta)
    factors = geodesic_factors(pf.A, pf.B, t, metric)
    if t == 0.0:
        point = U.copy()
    else:
        point = U @ factors.M + pf.Q @ factors.N
    if return_factors:
        return point, factors, pf.Q
    return point


def exp_canonical_eas(U, delta, t=1.0):
    """Canonical-metric exponential ``[U, Q] expm([[A, -R^T], [R, 0]]) [I; 0]``
    with a plain Householder QR of ``(I - U U^T) delta``."""
    U = check_stiefel(U)
    delta = check_tangent(U, delta, tol=1e-10)
    p = U.shape[1]
    A = t * (U.T @ delta)
    Q, R = np.linalg.qr(t * (delta - U @ (U.T @ delta)))
    G = np.block([[A, -R.T], [R, np.zeros((p, p))]])
    E = scipy.linalg.expm(G)
    return U @ E[:p, :p] + Q @ E[p:, :p]


def exp_euclidean_eas(U, delta, t=1.0):
    """Euclidean-metric exponential
    ``[U, D] expm([[A, -D^T D], [I, A]]) [I; 0] expm(-A)`` with ``D = t delta``.

    The 2p-by-2p argument is not skew, so a general ``expm`` is used.
    """
    U = check_stiefel(U)
    delta = check_tangent(U, delta, tol=1e-10)
    p = U.shape[1]
    D = t * delta
    A = U.T @ D
    G = np.block([[A, -D.T @ D], [np.eye(p), A]])
    E = scipy.linalg.expm(G)[:, :p]
    return (U @ E[:p] + D @ E[p:]) @ scipy.linalg.expm(-A)


def exp_alpha_full(U, delta, alpha=0.0, t=1.0, max_n=200):
    """Alpha-metric exponential through the n-by-n skew exponential
    ``expm(-nu U A U^T + D U^T - U D^T) U expm(mu A)``, ``D = t delta``.

    Meant as a reference for small ``n``; raises ``DimensionError`` above
    ``max_n``.
    """
    metric = as_metric(alpha)
    U = check_stiefel(U)
    delta = check_tangent(U, delta, tol=1e-10)
    n = U.shape[0]
    if n > max_n:
        raise DimensionError(f"exp_alpha_full is limited to n <= {max_n}, got n={n}")
    D = t * delta
    A = U.T @ D
    G = -metric.nu * U @ A @ U.T + D @ U.T - U @ D.T
    return scipy.linalg.expm(G) @ U @ scipy.linalg.expm(metric.mu * A)
