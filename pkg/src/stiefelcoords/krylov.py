"""Matrix-free GMRES."""

import numpy as np

from .exceptions import NoConvergenceError


def gmres_solve(apply_L, b, tol=1e-10, max_iter=None, x0=None):
    """Solve ``apply_L(x) = b`` with unrestarted GMRES.

    The operator is only ever touched through ``apply_L``; no matrix is
    formed.

    Parameters
    ----------
    apply_L : callable
        Linear map ``R^d -> R^d`` acting on 1-D float arrays.
    b : array_like of shape (d,)
    tol : float
        Relative tolerance: stop once ``||b - L x|| <= tol * ||b||``.
    max_iter : int, optional
        Maximum Krylov dimension, defaults to ``d``.
    x0 : array_like of shape (d,), optional
        Starting guess, zero by default.

    Returns
    -------
    x : ndarray of shape (d,)
    residual_history : list of float
        Absolute residual norms, starting with the initial one.

    Raises
    ------
    NoConvergenceError
        When ``max_iter`` steps did not reach the tolerance. The best
        iterate found is attached as ``exc.x``.
    """
    b = np.asarray(b, dtype=np.float64).ravel()
    d = b.size
    if max_iter is None:
        max_iter = d
    x = np.zeros(d) if x0 is None else np.asarray(x0, dtype=np.float64).ravel().copy()
    bnorm = np.linalg.norm(b)
    r0 = b - apply_L(x) if x0 is not None else b.copy()
    beta = np.linalg.norm(r0)
    history = [float(beta)]
    target = tol * bnorm
    if beta <= target:
        return x, history

    Vk = np.zeros((max_iter + 1, d))
    H = np.zeros((max_iter + 1, max_iter))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    g[0] = beta
    Vk[0] = r0 / beta

    k = 0
    for k in range(max_iter):
        w = np.asarray(apply_L(Vk[k]), dtype=np.float64).ravel()
        # classical Gram-Schmidt with one reorthogonalisation pass
        for _ in range(2):
            h = Vk[: k + 1] @ w
            H[: k + 1, k] += h
            w = w - Vk[: k + 1].T @ h
        H[k + 1, k] = np.linalg.norm(w)
        breakdown = H[k + 1, k] <= 1e-14 * max(1.0, np.abs(H[: k + 1, k]).max())
        if not breakdown:
            Vk[k + 1] = w / H[k + 1, k]

        for i in range(k):
            t = cs[i] * H[i, k] + sn[i] * H[i + 1, k]
            H[i + 1, k] = -sn[i] * H[i, k] + cs[i] * H[i + 1, k]
            H[i, k] = t
        denom = np.hypot(H[k, k], H[k + 1, k])
        cs[k], sn[k] = H[k, k] / denom, H[k + 1, k] / denom
        H[k, k] = denom
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]

        history.append(float(abs(g[k + 1])))
        if abs(g[k + 1]) <= target or breakdown:
            break

    m = k + 1
    y = _back_substitute(H[:m, :m], g[:m])
    x = x + Vk[:m].T @ y
    if history[-1] > target:
        exc = NoConvergenceError(
            f"GMRES did not reach tol={tol:.1e} in {max_iter} iterations", history
        )
        exc.x = x
        raise exc
    return x, history


def _back_substitute(R, g):
    m = R.shape[0]
    y = np.zeros(m)
    for i in range(m - 1, -1, -1):
        y[i] = (g[i] - R[i, i + 1:] @ y[i + 1:]) / R[i, i]
    return y
