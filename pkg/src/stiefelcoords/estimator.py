"""scikit-learn style transformer for Riemannian normal coordinates."""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import DimensionError, NoConvergenceError
from .exp import exp_alpha_reduced
from .log import LogConfig, default_solver, parse_solver, time_grid
from .manifold import as_metric
from .validation import check_stiefel


def _as_point_stack(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[np.newaxis]
    if X.ndim != 3:
        raise DimensionError(f"expected points of shape (k, n, p) or (n, p), got {X.shape}")
    return X


class RiemannianNormalCoordinates(TransformerMixin, BaseEstimator):
    """Map Stiefel points to tangent vectors at a fixed base point.

    ``transform`` applies the Riemannian logarithm ``Log_U`` and
    ``inverse_transform`` the exponential ``Exp_U``, so that data on
    St(n, p) can be handled by ordinary vector-space methods.

    Parameters
    ----------
    alpha : float, default=0.0
        Metric parameter; 0 is canonical, -0.5 Euclidean.
    method : str, default="auto"
        Log solver id, see :data:`stiefelcoords.log.SOLVER_IDS`. ``"auto"``
        chooses the Sylvester algebraic log for alpha = 0 and p-shooting
        otherwise.
    base_point : ndarray of shape (n, p) or None
        If None, the first sample passed to ``fit`` is used.
    tau : float, default=1e-11
    max_iter : int, default=1000
    steps : int, default=2
        Time points for the shooting solvers.
    on_failure : {"raise", "nan"}, default="raise"
        What to do with a point whose logarithm does not converge.

    Attributes
    ----------
    base_point_ : ndarray of shape (n, p)
    n_features_in_ : int
        ``n * p``.
    n_iter_ : ndarray of int
        Solver iterations for each point of the last ``transform`` call.
    """

    def __init__(self, alpha=0.0, method="auto", base_point=None, tau=1e-11,
                 max_iter=1000, steps=2, on_failure="raise"):
        self.alpha = alpha
        self.method = method
        self.base_point = base_point
        self.tau = tau
        self.max_iter = max_iter
        self.steps = steps
        self.on_failure = on_failure

    def fit(self, X, y=None):
        """Validate parameters and fix the base point.

        Parameters
        ----------
        X : array_like of shape (k, n, p) or (n, p)
            Points on St(n, p).
        y : ignored
        """
        metric = as_metric(self.alpha)
        metric.require_riemannian()
        if self.on_failure not in ("raise", "nan"):
            raise ValueError(f"on_failure must be 'raise' or 'nan', got {self.on_failure!r}")
        X = _as_point_stack(X)
        base = X[0] if self.base_point is None else self.base_point
        self.base_point_ = check_stiefel(base, name="base_point")
        if X.shape[1:] != self.base_point_.shape:
            raise DimensionError(
                f"points have shape {X.shape[1:]}, base point {self.base_point_.shape}"
            )
        method = default_solver(metric) if self.method == "auto" else self.method
        config = LogConfig(tau=self.tau, max_iter=self.max_iter,
                           time_steps=time_grid(self.steps))
        self._solver, self._config = parse_solver(method, config)
        self._metric = metric
        self.n_features_in_ = self.base_point_.size
        return self

    def transform(self, X):
        """Tangent vectors ``Log_U(X_i)`` flattened to shape (k, n * p)."""
        check_is_fitted(self, "base_point_")
        X = _as_point_stack(X)
        if X.shape[1:] != self.base_point_.shape:
            raise DimensionError(f"expected points of shape {self.base_point_.shape}")
        out = np.empty((X.shape[0], self.n_features_in_))
        n_iter = np.empty(X.shape[0], dtype=int)
        for i, point in enumerate(X):
            res = self._solver(self.base_point_, point, self._metric, self._config)
            n_iter[i] = res.iterations
            if not res.converged:
                if self.on_failure == "raise":
                    raise NoConvergenceError(
                        f"logarithm of sample {i} did not converge", res.residual_history
                    )
                out[i] = np.nan
                continue
            out[i] = res.delta.ravel()
        self.n_iter_ = n_iter
        return out

    def inverse_transform(self, X):
        """Points ``Exp_U(delta_i)`` of shape (k, n, p) from flattened tangents."""
        check_is_fitted(self, "base_point_")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[np.newaxis]
        if X.ndim != 2 or X.shape[1] != self.n_features_in_:
            raise DimensionError(f"expected shape (k, {self.n_features_in_}), got {X.shape}")
        shape = self.base_point_.shape
        return np.stack([
            exp_alpha_reduced(self.base_point_, row.reshape(shape), self._metric)
            for row in X
        ])
