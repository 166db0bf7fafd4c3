"""Structured dense kernels: skew exponentials, orthogonal logarithms,
compact QR, orthonormal completion, symmetric Sylvester solves, Frechet
derivatives and Cayley transforms.

Exponentials of skew matrices and logarithms of special orthogonal matrices
share one code path: the real Schur form of a normal matrix is block
diagonal, so both maps act on 1x1 and 2x2 blocks only and no complex
arithmetic is needed.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import (
    AnglePiError,
    DimensionError,
    IndefiniteError,
    NotOrthonormalError,
    NotSpecialOrthogonalError,
    SingularError,
)
from .validation import as_float_matrix, check_skew, check_square

__all__ = [
    "SchurForm",
    "skew",
    "sym",
    "real_schur_normal",
    "expm_skew",
    "logm_so",
    "so_det_sign",
    "compact_qr",
    "orthonormal_completion",
    "solve_sym_sylvester",
    "frechet_expm",
    "frechet_logm",
    "cayley",
    "cayley_inv",
    "frechet_cayley",
    "frechet_cayley_inv",
]


def skew(X):
    return 0.5 * (X - X.T)


def sym(X):
    return 0.5 * (X + X.T)


@dataclass(frozen=True)
class SchurForm:
    """Real Schur form of a normal matrix, stored block by block.

    Attributes
    ----------
    orthogonal_factor : ndarray of shape (d, d)
    sizes : tuple of int
        Block sizes along the diagonal, each 1 or 2.
    values : tuple of float
        For a 1x1 block, its entry. For a 2x2 block, the rotation angle
        ``phi`` of the block ``r * [[cos phi, -sin phi], [sin phi, cos phi]]``.
    radii : tuple of float
        Scale ``r`` of each 2x2 block (1.0 for orthogonal input, the
        magnitude of the imaginary eigenvalue for skew input). ``nan`` for
        1x1 blocks.
    """

    orthogonal_factor: np.ndarray
    sizes: tuple
    values: tuple
    radii: tuple

    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.sizes)[:-1]]).astype(int)

    def block_diagonal(self, rotation=True):
        """Assemble the quasi-diagonal factor.

        With ``rotation=True`` each 2x2 block is the rotation by its angle
        (orthogonal input); otherwise it is ``[[0, -w], [w, 0]]`` with
        ``w = values[i]`` (skew input).
        """
        d = sum(self.sizes)
        T = np.zeros((d, d))
        for i, size, val in zip(self.offsets(), self.sizes, self.values):
            if size == 1:
                T[i, i] = val
            elif rotation:
                c, s = np.cos(val), np.sin(val)
                T[i:i + 2, i:i + 2] = [[c, -s], [s, c]]
            else:
                T[i:i + 2, i:i + 2] = [[0.0, -val], [val, 0.0]]
        return T

    def reassemble(self, rotation=True):
        Z = self.orthogonal_factor
        return Z @ self.block_diagonal(rotation) @ Z.T


def real_schur_normal(X, kind):
    """Real Schur decomposition of a skew (``kind="skew"``) or orthogonal
    (``kind="orthogonal"``) matrix, reduced to its diagonal blocks.

    Entries of the quasi-triangular factor above the block diagonal are
    rounding noise for normal input and are dropped.
    """
    if kind not in ("skew", "orthogonal"):
        raise ValueError(f"unknown kind {kind!r}")
    d = X.shape[0]
    if d == 0:
        return SchurForm(np.zeros((0, 0)), (), (), ())
    T, Z = scipy.linalg.schur(X, output="real")
    sizes, values, radii = [], [], []
    i = 0
    while i < d:
        if i + 1 < d and T[i + 1, i] != 0.0:
            a, b = T[i, i], T[i, i + 1]
            c, e = T[i + 1, i], T[i + 1, i + 1]
            s = 0.5 * (c - b)
            if kind == "skew":
                values.append(s)
                radii.append(abs(s))
            else:
                values.append(np.arctan2(s, 0.5 * (a + e)))
                radii.append(np.hypot(s, 0.5 * (a + e)))
            sizes.append(2)
            i += 2
        else:
            values.append(T[i, i])
            radii.append(np.nan)
            sizes.append(1)
            i += 1
    return SchurForm(Z, tuple(sizes), tuple(values), tuple(radii))


def expm_skew(S):
    """Matrix exponential of a skew-symmetric matrix.

    The result is orthogonal with determinant +1 up to rounding.

    Parameters
    ----------
    S : array_like of shape (d, d)
        Skew-symmetric input; the symmetric part (if any, up to a relative
        1e-8) is discarded.

    Returns
    -------
    ndarray of shape (d, d)
    """
    S = check_skew(S)
    form = real_schur_normal(S, "skew")
    d = S.shape[0]
    E = np.zeros((d, d))
    for i, size, w in zip(form.offsets(), form.sizes, form.values):
        if size == 1:
            # eigenvalue of a skew matrix: zero up to rounding
            E[i, i] = 1.0
        else:
            c, s = np.cos(w), np.sin(w)
            E[i:i + 2, i:i + 2] = [[c, -s], [s, c]]
    Z = form.orthogonal_factor
    return Z @ E @ Z.T


def _orthogonal_schur(V, orth_tol):
    V = check_square(V, "V")
    d = V.shape[0]
    if orth_tol is None:
        orth_tol = 1e-10 * max(d, 1)
    res = np.linalg.norm(V.T @ V - np.eye(d))
    if res > orth_tol:
        raise NotSpecialOrthogonalError(
            f"matrix is not orthogonal (||V^T V - I||_F = {res:.3e})"
        )
    return real_schur_normal(V, "orthogonal")


def so_det_sign(V, orth_tol=None):
    """Determinant sign of an orthogonal matrix, read off its Schur form."""
    form = _orthogonal_schur(V, orth_tol)
    sign = 1.0
    for size, val in zip(form.sizes, form.values):
        if size == 1 and val < 0:
            sign = -sign
    return sign


def logm_so(V, angle_tol=1e-8, orth_tol=None):
    """Principal logarithm of a special orthogonal matrix.

    Parameters
    ----------
    V : array_like of shape (d, d)
        Orthogonal with det +1.
    angle_tol : float
        Rotation angles within this distance of +-pi are rejected.
    orth_tol : float, optional
        Bound on ``||V^T V - I||_F``; defaults to ``1e-10 * d``.

    Returns
    -------
    ndarray of shape (d, d)
        Skew-symmetric ``L`` with ``expm_skew(L) == V`` and all rotation
        angles of ``L`` in (-pi, pi).

    Raises
    ------
    NotSpecialOrthogonalError
        If ``V`` is not orthogonal or has an odd number of eigenvalues -1.
    AnglePiError
        If the principal logarithm is undefined (angle at +-pi, including
        pairs of eigenvalues -1).
    """
    form = _orthogonal_schur(V, orth_tol)
    d = sum(form.sizes)
    n_minus = 0
    L = np.zeros((d, d))
    for i, size, val in zip(form.offsets(), form.sizes, form.values):
        if size == 1:
            if val < 0:
                n_minus += 1
        else:
            if abs(val) > np.pi - angle_tol:
                raise AnglePiError(f"rotation angle {val:.12f} is within {angle_tol} of pi")
            L[i:i + 2, i:i + 2] = [[0.0, -val], [val, 0.0]]
    if n_minus % 2:
        raise NotSpecialOrthogonalError("matrix has determinant -1")
    if n_minus:
        raise AnglePiError(f"{n_minus} eigenvalues at -1 pair into rotations by pi")
    Z = form.orthogonal_factor
    return skew(Z @ L @ Z.T)


def _orthonormal_extension(B, k):
    """``k`` orthonormal columns orthogonal to the orthonormal columns of ``B``.

    Candidates are the unit vectors least represented in ``span(B)``, which
    keeps the cost at O(n * (B.shape[1] + k)) and the result deterministic.
    """
    n = B.shape[0]
    if k == 0:
        return np.zeros((n, 0))
    m = min(n, k + 8)
    weight = np.einsum("ij,ij->i", B, B) if B.shape[1] else np.zeros(n)
    idx = np.sort(np.argsort(weight, kind="stable")[:m])
    C = np.zeros((n, m))
    C[idx, np.arange(m)] = 1.0
    for _ in range(2):
        C -= B @ (B.T @ C)
    Qc, _, _ = scipy.linalg.qr(C, mode="economic", pivoting=True)
    E = Qc[:, :k]
    for _ in range(2):
        E -= B @ (B.T @ E)
        E, _ = np.linalg.qr(E)
    return E


def compact_qr(A, rank_rtol=1e-12, complement=None):
    """Compact QR decomposition with rank-deficiency handling.

    Parameters
    ----------
    A : array_like of shape (n, p), n >= p
    rank_rtol : float
        Diagonal entries of the pivoted R below ``rank_rtol * ||A||_F``
        count as zero.
    complement : ndarray of shape (n, k), optional
        Orthonormal columns that the padding columns of ``Q`` should also
        be orthogonal to (typically the base point ``U``). Ignored when
        there is no room, i.e. ``rank + k + (p - rank) > n``.

    Returns
    -------
    Q : ndarray of shape (n, p)
        Orthonormal columns.
    R : ndarray of shape (p, p)
        ``Q @ R == A``. If ``rank(A) = r < p``, the trailing ``p - r`` rows
        of ``R`` are exactly zero and the trailing ``p - r`` columns of
        ``Q`` are an orthonormal extension.
    """
    A = as_float_matrix(A, "A")
    n, p = A.shape
    if n < p:
        raise DimensionError(f"compact QR needs n >= p, got shape {A.shape}")
    norm_a = np.linalg.norm(A)
    if norm_a == 0.0:
        r = 0
        Qp = np.zeros((n, 0))
        Rp = np.zeros((0, p))
    else:
        Qp, Rp, piv = scipy.linalg.qr(A, mode="economic", pivoting=True)
        diag = np.abs(np.diag(Rp))
        r = int(np.sum(diag > rank_rtol * norm_a))
        inv = np.empty_like(piv)
        inv[piv] = np.arange(p)
        Rp = Rp[:r][:, inv]
        Qp = Qp[:, :r]
        signs = np.where(np.diag(Rp[:, piv[:r]]) < 0, -1.0, 1.0)
        Qp = Qp * signs
        Rp = signs[:, None] * Rp
    if r == p:
        return Qp, Rp
    basis = Qp
    if complement is not None and r + complement.shape[1] + (p - r) <= n:
        basis = np.hstack([Qp, complement])
    ext = _orthonormal_extension(basis, p - r)
    Q = np.hstack([Qp, ext])
    R = np.vstack([Rp, np.zeros((p - r, p))])
    return Q, R


def _leading_rank(N, zero_tol):
    """Number of rows of ``N`` up to and including the last nonzero one."""
    nz = np.flatnonzero(np.linalg.norm(N, axis=1) > zero_tol)
    return int(nz[-1]) + 1 if nz.size else 0


def orthonormal_completion(M, N, tol=1e-10, zero_tol=1e-14):
    """Complete ``[M; N]`` to a matrix ``[[M, X0], [N, Y0]]`` in SO(2p).

    When the trailing rows of ``N`` vanish (``N = [N_r; 0]``), the
    completion keeps the block structure
    ``[[M, X_r, 0], [N_r, Y_r, 0], [0, 0, I]]``.

    Returns
    -------
    X0, Y0 : ndarray of shape (p, p)

    Raises
    ------
    NotOrthonormalError
        If ``M^T M + N^T N`` differs from the identity by more than ``tol``.
    """
    M = check_square(M, "M")
    N = check_square(N, "N")
    p = M.shape[0]
    if N.shape != (p, p):
        raise DimensionError("M and N must have the same shape")
    res = np.linalg.norm(M.T @ M + N.T @ N - np.eye(p))
    if res > tol:
        raise NotOrthonormalError(f"[M; N] is not orthonormal (residual {res:.3e})")
    r = _leading_rank(N, zero_tol)
    W = np.vstack([M, N[:r]])
    Qf, _ = np.linalg.qr(W, mode="complete")
    K = Qf[:, p:]
    X0 = np.zeros((p, p))
    Y0 = np.zeros((p, p))
    X0[:, :r] = K[:p]
    Y0[:r, :r] = K[p:]
    Y0[r:, r:] = np.eye(p - r)
    V = np.block([[M, X0], [N, Y0]])
    if np.linalg.det(V) < 0:
        col = r - 1 if r > 0 else p - 1
        X0[:, col] = -X0[:, col]
        Y0[:, col] = -Y0[:, col]
    return X0, Y0


def solve_sym_sylvester(S, C, definite_tol=1e-12):
    """Solve ``S @ G + G @ S = C`` for negative definite symmetric ``S``.

    Works in the eigenbasis of ``S``: with ``S = Q diag(lam) Q^T`` the
    solution is ``G_hat[i, j] = C_hat[i, j] / (lam[i] + lam[j])``.

    Raises
    ------
    IndefiniteError
        If the largest eigenvalue of ``S`` is above ``-definite_tol``.
    """
    S = check_square(S, "S")
    C = check_square(C, "C")
    if S.shape != C.shape:
        raise DimensionError("S and C must have the same shape")
    lam, Q = np.linalg.eigh(sym(S))
    if lam.size and lam[-1] > -definite_tol:
        raise IndefiniteError(f"largest eigenvalue {lam[-1]:.3e} is not negative")
    C_hat = Q.T @ C @ Q
    G_hat = C_hat / (lam[:, None] + lam[None, :])
    return skew(Q @ G_hat @ Q.T)


def frechet_expm(S, H):
    """Exponential and its Frechet derivative via the block identity
    ``expm([[S, H], [0, S]]) = [[expm(S), L], [0, expm(S)]]``.

    Returns
    -------
    E : ndarray
        ``expm(S)``.
    L : ndarray
        Derivative of ``expm`` at ``S`` in direction ``H``.
    """
    S = check_square(S, "S")
    H = check_square(H, "H")
    if S.shape != H.shape:
        raise DimensionError("S and H must have the same shape")
    d = S.shape[0]
    big = np.zeros((2 * d, 2 * d))
    big[:d, :d] = S
    big[d:, d:] = S
    big[:d, d:] = H
    X = scipy.linalg.expm(big)
    return X[:d, :d], X[:d, d:]


def frechet_logm(X, E):
    """Principal logarithm and its Frechet derivative via the block identity
    ``logm([[X, E], [0, X]]) = [[logm(X), L], [0, logm(X)]]``."""
    X = check_square(X, "X")
    E = check_square(E, "E")
    d = X.shape[0]
    big = np.zeros((2 * d, 2 * d))
    big[:d, :d] = X
    big[d:, d:] = X
    big[:d, d:] = E
    Lbig = scipy.linalg.logm(big)
    if np.iscomplexobj(Lbig):
        if np.abs(Lbig.imag).max() > 1e-8 * max(1.0, np.abs(Lbig).max()):
            raise AnglePiError("logarithm is not real; an eigenvalue sits on the negative axis")
        Lbig = Lbig.real
    return Lbig[:d, :d], Lbig[:d, d:]


def _solve_checked(K, B, what):
    try:
        lu, piv = scipy.linalg.lu_factor(K, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularError(f"{what} is singular") from exc
    pivots = np.abs(np.diag(lu))
    if pivots.size and pivots.min() <= 1e-10 * max(1.0, pivots.max()):
        raise SingularError(f"{what} is numerically singular")
    return scipy.linalg.lu_solve((lu, piv), B)


def cayley(S):
    """Cayley transform ``(I - S/2)^{-1} (I + S/2)``."""
    S = check_square(S, "S")
    eye = np.eye(S.shape[0])
    return _solve_checked(eye - 0.5 * S, eye + 0.5 * S, "I - S/2")


def cayley_inv(Q):
    """Inverse Cayley transform ``2 (Q + I)^{-1} (Q - I)``.

    Raises
    ------
    SingularError
        If ``Q`` has an eigenvalue at -1 (within 1e-10 relative pivot).
    """
    Q = check_square(Q, "Q")
    eye = np.eye(Q.shape[0])
    return 2.0 * _solve_checked(Q + eye, Q - eye, "Q + I")


def frechet_cayley(S, H):
    """Cayley transform and its derivative ``K^{-1} H K^{-1}``, ``K = I - S/2``."""
    S = check_square(S, "S")
    eye = np.eye(S.shape[0])
    K = eye - 0.5 * S
    C = _solve_checked(K, eye + 0.5 * S, "I - S/2")
    Kinv_H = _solve_checked(K, H, "I - S/2")
    L = _solve_checked(K.T, Kinv_H.T, "I - S/2").T
    return C, L


def frechet_cayley_inv(Q, E):
    """Inverse Cayley transform and its derivative ``4 P E P``, ``P = (Q + I)^{-1}``."""
    Q = check_square(Q, "Q")
    eye = np.eye(Q.shape[0])
    K = Q + eye
    G = 2.0 * _solve_checked(K, Q - eye, "Q + I")
    P_E = _solve_checked(K, E, "Q + I")
    L = 4.0 * _solve_checked(K.T, P_E.T, "Q + I").T
    return G, L
