"""Input validation helpers.

These follow the ``check_*`` convention of scikit-learn: each helper takes
raw user input, converts it to a float64 ndarray, verifies the structural
property and returns the cleaned array (or raises).
"""

import numpy as np

from .exceptions import (
    BaseMismatchError,
    DimensionError,
    NotOrthonormalError,
)


def as_float_matrix(X, name="X"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionError(f"{name} must be a 2-D array, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or inf")
    return X


def check_square(X, name="X"):
    X = as_float_matrix(X, name)
    if X.shape[0] != X.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {X.shape}")
    return X


def check_skew(S, tol=1e-8, name="S"):
    """Return the skew-symmetric part of ``S`` after checking it is near-skew.

    The tolerance is relative to ``max(1, ||S||_F)``.
    """
    S = check_square(S, name)
    gap = np.linalg.norm(S + S.T)
    if gap > tol * max(1.0, np.linalg.norm(S)):
        raise ValueError(f"{name} is not skew-symmetric (||S + S^T||_F = {gap:.3e})")
    return 0.5 * (S - S.T)


def orthonormality_residual(U):
    """Frobenius norm of ``U^T U - I``."""
    return np.linalg.norm(U.T @ U - np.eye(U.shape[1]))


def check_stiefel(U, tol=None, name="U"):
    """Validate a point on St(n, p).

    Parameters
    ----------
    U : array_like of shape (n, p)
    tol : float, optional
        Bound on ``||U^T U - I_p||_F``. Defaults to ``1e-11 * p``.
    """
    U = as_float_matrix(U, name)
    n, p = U.shape
    if p > n or p == 0:
        raise DimensionError(f"{name} must satisfy 1 <= p <= n, got shape {U.shape}")
    if tol is None:
        tol = 1e-11 * p
    res = orthonormality_residual(U)
    if res > tol:
        raise NotOrthonormalError(
            f"{name} does not have orthonormal columns (||U^T U - I||_F = {res:.3e})"
        )
    return U


def check_tangent(U, delta, tol=1e-11, name="delta"):
    """Validate that ``delta`` lies in the tangent space at ``U``.

    ``U`` is assumed to be validated already.
    """
    delta = as_float_matrix(delta, name)
    if delta.shape != U.shape:
        raise BaseMismatchError(
            f"{name} has shape {delta.shape} but the base point has shape {U.shape}"
        )
    A = U.T @ delta
    gap = np.linalg.norm(A + A.T)
    if gap > tol * max(1.0, np.linalg.norm(delta)):
        raise ValueError(f"{name} is not tangent at U (||sym(U^T delta)||_F = {gap:.3e})")
    return delta


def check_random_state(seed):
    """Turn ``seed`` into a ``numpy.random.Generator``.

    ``None`` gives fresh OS entropy, an int or ``SeedSequence`` seeds a new
    PCG64 generator, and an existing ``Generator`` is passed through.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
