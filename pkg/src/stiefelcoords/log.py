"""Riemannian logarithm on St(n, p): solvers for the geodesic endpoint problem.

Given ``U`` and ``U_tilde``, find ``delta`` tangent at ``U`` with
``Exp_U(delta) = U_tilde``. All solvers except :func:`log_shooting_full`
work on p-by-p factors: writing ``U_tilde = U M + Q N`` with one fixed frame
``Q`` (compact QR of ``(I - U U^T) U_tilde``), the answer is
``delta = U A + Q B`` and only ``A`` (skew) and ``B`` are iterated.

Every solver returns a :class:`LogResult`; running out of iterations is
reported through ``converged=False`` rather than raised.
"""

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import IndefiniteError, NoConvergenceError
from .exp import exp_alpha_reduced, first_block_column
from .krylov import gmres_solve
from .linalg import (
    cayley,
    compact_qr,
    expm_skew,
    frechet_cayley,
    frechet_expm,
    logm_so,
    orthonormal_completion,
    skew,
    solve_sym_sylvester,
    sym,
)
from .manifold import AlphaMetric, PFactors, as_metric, norm_alpha, project_tangent
from .validation import check_stiefel

__all__ = [
    "LogConfig",
    "LogResult",
    "time_grid",
    "log_shooting_full",
    "log_p_shooting",
    "para_trans_p_factors",
    "log_algebraic_canonical",
    "log_geo_newton",
    "log_euc_newton",
    "stiefel_log",
    "distance_alpha",
    "SOLVER_IDS",
    "parse_solver",
]

SYLVESTER_BOUND = np.sqrt(6.0)


def time_grid(m):
    """``m`` equidistant time points on [0, 1] (``m >= 2``)."""
    if m < 2:
        raise ValueError("need at least two time points")
    return tuple(float(t) for t in np.linspace(0.0, 1.0, m))


@dataclass(frozen=True)
class LogConfig:
    """Solver settings.

    Attributes
    ----------
    tau : float
        Convergence threshold on the solver's residual measure.
    max_iter : int
    time_steps : tuple of float
        Shooting grid ``0 = t_0 < ... < t_m = 1``.
    sylvester : bool
        Algebraic log: choose the update from the symmetric Sylvester
        equation instead of ``-C``.
    cayley : bool
        Algebraic log: use the Cayley transform for the update rotation.
        Newton solvers: use Cayley differentials in the linear systems.
    angle_tol : float
        Passed to :func:`~stiefelcoords.linalg.logm_so`.
    gmres_max_iter : int or None
        Newton solvers; defaults to ``dim Skew(2p)``.
    forcing_cap : float
        Newton solvers; GMRES relative tolerance is
        ``min(forcing_cap, residual)``.
    """

    tau: float = 1e-11
    max_iter: int = 1000
    time_steps: tuple = (0.0, 1.0)
    sylvester: bool = True
    cayley: bool = False
    angle_tol: float = 1e-8
    gmres_max_iter: int = None
    forcing_cap: float = 1e-2

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        ts = tuple(float(t) for t in self.time_steps)
        if len(ts) < 2 or ts[0] != 0.0 or ts[-1] != 1.0 or np.any(np.diff(ts) <= 0):
            raise ValueError("time_steps must increase strictly from 0.0 to 1.0")
        object.__setattr__(self, "time_steps", ts)


@dataclass
class LogResult:
    """Solver output.

    Attributes
    ----------
    delta : ndarray of shape (n, p)
    iterations : int
    residual_history : list of float
        Starts with the residual of the initial guess.
    converged : bool
    wall_time : float
        Seconds.
    factors : PFactors or None
        ``(A, B, Q)`` with ``delta = U A + Q B`` (``None`` for full shooting).
    """

    delta: np.ndarray
    iterations: int
    residual_history: list
    converged: bool
    wall_time: float
    factors: PFactors = None
    method: str = ""
    info: dict = field(default_factory=dict)


def _setup(U, U_tilde):
    U = check_stiefel(U)
    U_tilde = check_stiefel(U_tilde, name="U_tilde")
    if U.shape != U_tilde.shape:
        raise ValueError(f"shape mismatch: {U.shape} vs {U_tilde.shape}")
    M = U.T @ U_tilde
    Q, N = compact_qr(U_tilde - U @ M, complement=U)
    return U, U_tilde, M, N, Q


def _zero_result(U, Q, gamma, start, method):
    p = U.shape[1]
    zero = np.zeros((p, p))
    return LogResult(
        np.zeros_like(U), 0, [gamma], True, time.perf_counter() - start,
        PFactors(zero, zero.copy(), Q), method,
    )


def _finish(U, A, B, Q, k, hist, tau, start, method, **info):
    A = skew(A)
    return LogResult(
        U @ A + Q @ B, k, hist, bool(hist[-1] <= tau), time.perf_counter() - start,
        PFactors(A, B, Q), method, info,
    )


def log_shooting_full(U, U_tilde, alpha=0.0, config=None, callback=None):
    """Shooting on full n-by-p matrices with approximate parallel transport.

    Each sweep shoots the geodesic ``t -> Exp_U(t delta)`` on the time grid,
    projects the endpoint gap onto the tangent space at the endpoint,
    carries it back to ``U`` by successive projections (rescaling to the
    gap length each time) and subtracts it from ``delta``. The residual is
    the Frobenius norm of the endpoint gap.

    Parameters
    ----------
    callback : callable, optional
        Called as ``callback(k, delta)`` after every update.
    """
    config = config or LogConfig()
    metric = as_metric(alpha)
    metric.require_riemannian()
    start = time.perf_counter()
    U = check_stiefel(U)
    U_tilde = check_stiefel(U_tilde, name="U_tilde")
    gamma = float(np.linalg.norm(U_tilde - U))
    hist = [gamma]
    if gamma <= config.tau:
        return LogResult(np.zeros_like(U), 0, hist, True, time.perf_counter() - start,
                         method="shoot-full")
    P = project_tangent(U, U_tilde)
    delta = gamma * P / np.linalg.norm(P)
    ts = config.time_steps
    k = 0
    while gamma > config.tau and k < config.max_iter:
        points = [U] + [exp_alpha_reduced(U, delta, metric, t) for t in ts[1:]]
        gap = points[-1] - U_tilde
        gamma = float(np.linalg.norm(gap))
        hist.append(gamma)
        for Uj in reversed(points):
            gap = project_tangent(Uj, gap)
            length = np.linalg.norm(gap)
            gap = gap * (gamma / length) if length > 1e-15 else np.zeros_like(gap)
        delta = delta - gap
        # keep delta exactly tangent; rounding drifts otherwise
        delta = delta - U @ sym(U.T @ delta)
        k += 1
        if callback is not None:
            callback(k, delta)
        if not np.isfinite(gamma):
            break
    return LogResult(delta, k, hist, bool(hist[-1] <= config.tau),
                     time.perf_counter() - start, method="shoot-full")


def para_trans_p_factors(M2, N2, A1, R1, gamma, eps=1e-15):
    """Project the factor pair ``(A1, R1)`` onto the tangent space at the
    point with factors ``(M2, N2)`` and rescale it to length ``gamma``.

    A projected length at or below ``eps`` yields zeros.
    """
    S = sym(M2.T @ A1 + N2.T @ R1)
    A2 = A1 - M2 @ S
    R2 = R1 - N2 @ S
    length = np.sqrt(np.vdot(A2, A2) + np.vdot(R2, R2))
    if length > eps:
        scale = gamma / length
        return scale * A2, scale * R2
    return np.zeros_like(A2), np.zeros_like(R2)


def log_p_shooting(U, U_tilde, alpha=0.0, config=None, callback=None):
    """Shooting method carried out entirely on p-by-p factors.

    Same iteration as :func:`log_shooting_full`, but every iterate is kept
    as ``U A + Q R`` for the fixed frame ``Q``, so each sweep costs
    O(p^3) independent of ``n``. Works for every alpha > -1; the metric
    enters only through the geodesic factors.

    Parameters
    ----------
    callback : callable, optional
        Called as ``callback(k, A, R, Q)`` after every update.
    """
    config = config or LogConfig()
    metric = as_metric(alpha)
    metric.require_riemannian()
    start = time.perf_counter()
    U, U_tilde, M_hat, N_hat, Q = _setup(U, U_tilde)
    p = U.shape[1]
    eye = np.eye(p)
    gamma = float(np.sqrt(np.linalg.norm(M_hat - eye) ** 2 + np.linalg.norm(N_hat) ** 2))
    hist = [gamma]
    if gamma <= config.tau:
        return _zero_result(U, Q, gamma, start, "pshoot")
    sk = skew(M_hat)
    scale = gamma / np.sqrt(np.linalg.norm(sk) ** 2 + np.linalg.norm(N_hat) ** 2)
    A = scale * sk
    R = scale * N_hat
    ts = config.time_steps
    zero = np.zeros((p, p))
    k = 0
    while gamma > config.tau and k < config.max_iter:
        Ms, Ns = [eye], [zero]
        for t in ts[1:]:
            Mt, Nt = first_block_column(A, R, t, metric)
            Ms.append(Mt)
            Ns.append(Nt)
        As = Ms[-1] - M_hat
        Rs = Ns[-1] - N_hat
        gamma = float(np.sqrt(np.vdot(As, As) + np.vdot(Rs, Rs)))
        hist.append(gamma)
        for Mj, Nj in zip(reversed(Ms), reversed(Ns)):
            As, Rs = para_trans_p_factors(Mj, Nj, As, Rs, gamma)
        A = skew(A - As)
        R = R - Rs
        k += 1
        if callback is not None:
            callback(k, A, R, Q)
        if not np.isfinite(gamma):
            break
    return _finish(U, A, R, Q, k, hist, config.tau, start, "pshoot")


def _completion(M, N):
    X0, Y0 = orthonormal_completion(M, N)
    return np.block([[M, X0], [N, Y0]])


def log_algebraic_canonical(U, U_tilde, config=None, callback=None):
    """Algebraic Stiefel logarithm for the canonical metric.

    Completes ``[M; N]`` to ``V`` in SO(2p) and iterates
    ``V <- V @ blkdiag(I, Phi)`` until the lower-right block ``C`` of
    ``logm(V)`` vanishes (``||C||_2 <= tau``). ``Phi`` is ``expm(Gamma)``
    (or its Cayley approximation) with ``Gamma = -C``, or, with
    ``config.sylvester``, the solution of
    ``(B B^T / 12 - I/2) Gamma + Gamma (B B^T / 12 - I/2) = C``.
    When ``||B||_2 >= sqrt(6)`` that equation may be singular and the step
    falls back to ``Gamma = -C``.

    Raises
    ------
    AnglePiError
        If an iterate has no principal logarithm.
    """
    config = config or LogConfig()
    start = time.perf_counter()
    U, U_tilde, M, N, Q = _setup(U, U_tilde)
    p = U.shape[1]
    V = _completion(M, N)
    hist = []
    fallbacks = 0
    k = 0
    while True:
        L = logm_so(V, angle_tol=config.angle_tol)
        A, B, C = L[:p, :p], L[p:, :p], L[p:, p:]
        c_norm = float(np.linalg.norm(C, 2))
        hist.append(c_norm)
        if callback is not None:
            callback(k, A, B, Q)
        if c_norm <= config.tau or k >= config.max_iter or not np.isfinite(c_norm):
            break
        Gamma = None
        if config.sylvester and np.linalg.norm(B, 2) < SYLVESTER_BOUND:
            try:
                Gamma = solve_sym_sylvester(B @ B.T / 12.0 - 0.5 * np.eye(p), C)
            except IndefiniteError:
                Gamma = None
        if Gamma is None:
            if config.sylvester:
                fallbacks += 1
            Gamma = -C
        Phi = cayley(Gamma) if config.cayley else expm_skew(Gamma)
        V[:, p:] = V[:, p:] @ Phi
        k += 1
    method = "alg4" + ("-sylv" if config.sylvester else "") + ("-cay" if config.cayley else "")
    return _finish(U, A, B, Q, k, hist, config.tau, start, method,
                   sylvester_fallbacks=fallbacks)


# --- Newton solvers --------------------------------------------------------

class _SkewCoords:
    """Isometric coordinates on Skew(d): sqrt(2) times the strict upper triangle."""

    def __init__(self, d):
        self.d = d
        self.iu = np.triu_indices(d, 1)

    @property
    def dim(self):
        return len(self.iu[0])

    def vec(self, S):
        return np.sqrt(2.0) * S[self.iu]

    def mat(self, v):
        S = np.zeros((self.d, self.d))
        S[self.iu] = v / np.sqrt(2.0)
        return S - S.T


class _GeodesicMap:
    """``F(S) = expm([[(1-mu) A, -B^T], [B, 0]]) @ expm(blkdiag(mu A, -C))``
    for ``S = [[A, -B^T], [B, C]]``, and its directional derivative."""

    def __init__(self, S, p, metric, use_cayley=False):
        self.p = p
        self.mu = metric.mu
        self.use_cayley = use_cayley
        self.S_tri, self.S_di = self._split(S)
        self.E_tri = expm_skew(self.S_tri)
        self.E_di = expm_skew(self.S_di)
        self.value = self.E_tri @ self.E_di

    def _split(self, S):
        p, mu = self.p, self.mu
        tri = np.zeros_like(S)
        tri[:p, :p] = (1.0 - mu) * S[:p, :p]
        tri[p:, :p] = S[p:, :p]
        tri[:p, p:] = S[:p, p:]
        di = np.zeros_like(S)
        di[:p, :p] = mu * S[:p, :p]
        di[p:, p:] = -S[p:, p:]
        return tri, di

    def _dexp(self, X, H):
        if self.use_cayley:
            return frechet_cayley(X, H)[1]
        return frechet_expm(X, H)[1]

    def derivative(self, H):
        p = self.p
        H_tri, H_di = self._split(H)
        D_di = np.zeros_like(H)
        if self.mu != 0.0:
            D_di[:p, :p] = self._dexp(self.S_di[:p, :p], H_di[:p, :p])
        D_di[p:, p:] = self._dexp(self.S_di[p:, p:], H_di[p:, p:])
        return self._dexp(self.S_tri, H_tri) @ self.E_di + self.E_tri @ D_di


def _newton_loop(U, U_tilde, metric, config, callback, method, residual_and_rhs):
    metric.require_riemannian()
    if not metric.is_euclidean:
        raise ValueError(f"{method} is implemented for the Euclidean metric (alpha=-0.5) only")
    start = time.perf_counter()
    U, U_tilde, M, N, Q = _setup(U, U_tilde)
    p = U.shape[1]
    V = _completion(M, N)
    log_V = logm_so(V, angle_tol=config.angle_tol)
    coords = _SkewCoords(2 * p)
    gmres_max = config.gmres_max_iter or coords.dim
    S = log_V.copy()
    hist = []
    gmres_iters = []
    k = 0
    while True:
        F = _GeodesicMap(S, p, metric, config.cayley)
        res, rhs = residual_and_rhs(F, V, log_V)
        r = float(np.linalg.norm(res))
        hist.append(r)
        if callback is not None:
            callback(k, S[:p, :p], S[p:, :p], Q)
        if r <= config.tau or k >= config.max_iter or not np.isfinite(r):
            break
        FT = F.value.T

        def apply_L(v, F=F, FT=FT):
            return coords.vec(skew(FT @ F.derivative(coords.mat(v))))

        # NoConvergenceError from GMRES propagates to the caller
        h, ghist = gmres_solve(apply_L, coords.vec(rhs),
                               tol=min(config.forcing_cap, r), max_iter=gmres_max)
        gmres_iters.append(len(ghist) - 1)
        S = S + coords.mat(h)
        k += 1
    return _finish(U, S[:p, :p], S[p:, :p], Q, k, hist, config.tau, start, method,
                   gmres_iterations=gmres_iters)


def log_geo_newton(U, U_tilde, alpha=-0.5, config=None, callback=None):
    """Geodesic Newton method on Skew(2p) (Euclidean metric).

    Solves ``V^T F(S) = I`` by iterating ``S <- S + H`` where
    ``F(S)^T DF_S(H) = logm(F(S)^T V)``; the linear system is solved with
    matrix-free GMRES and ``DF_S`` is evaluated through block-triangular
    exponentials. Starts from ``S_0 = logm(V)``. The residual is
    ``||logm(F(S)^T V)||_F``.
    """
    config = config or LogConfig()

    def residual_and_rhs(F, V, log_V):
        res = logm_so(F.value.T @ V, angle_tol=config.angle_tol)
        return res, res

    return _newton_loop(U, U_tilde, as_metric(alpha), config, callback, "geonewton",
                        residual_and_rhs)


def log_euc_newton(U, U_tilde, alpha=-0.5, config=None, callback=None):
    """Classical Newton method for ``logm(F(S)) - logm(V) = 0`` (Euclidean metric).

    With ``G(S) = logm(F(S)) - logm(V)`` the Newton equation is
    ``Dlogm_{F(S)}(DF_S(H)) = -G(S)``. Because ``Dlogm`` at ``F(S)`` is the
    inverse of ``Dexpm`` at ``logm(F(S))``, this is solved in the
    equivalent form ``F(S)^T DF_S(H) = F(S)^T Dexpm_{logm F(S)}(-G(S))``,
    which shares its operator with :func:`log_geo_newton`.
    The residual is ``||G(S)||_F``.
    """
    config = config or LogConfig()

    def residual_and_rhs(F, V, log_V):
        log_F = logm_so(F.value, angle_tol=config.angle_tol)
        G = log_F - log_V
        if config.cayley:
            _, dE = frechet_cayley(log_F, -G)
        else:
            _, dE = frechet_expm(log_F, -G)
        return G, skew(F.value.T @ dE)

    return _newton_loop(U, U_tilde, as_metric(alpha), config, callback, "eucnewton",
                        residual_and_rhs)


# --- dispatch --------------------------------------------------------------

SOLVER_IDS = ("shoot-full", "pshoot", "alg4", "alg4-sylv", "alg4-sylv-cay",
              "geonewton", "eucnewton")


def parse_solver(solver_id, config=None, steps=None):
    """Map a solver id to ``(function, config)``.

    Shooting ids accept a ``-<m>`` suffix for the number of time points,
    e.g. ``"pshoot-4"``; otherwise ``steps`` (or the config's grid) is used.
    """
    config = config or LogConfig()
    base, _, suffix = solver_id.rpartition("-")
    if suffix.isdigit() and base in ("pshoot", "shoot-full"):
        solver_id, steps = base, int(suffix)
    if solver_id in ("pshoot", "shoot-full"):
        if steps is not None:
            config = replace(config, time_steps=time_grid(steps))
        fn = log_p_shooting if solver_id == "pshoot" else log_shooting_full
        return fn, config
    if solver_id == "alg4":
        return _canonical_only(log_algebraic_canonical), replace(config, sylvester=False, cayley=False)
    if solver_id == "alg4-sylv":
        return _canonical_only(log_algebraic_canonical), replace(config, sylvester=True, cayley=False)
    if solver_id == "alg4-sylv-cay":
        return _canonical_only(log_algebraic_canonical), replace(config, sylvester=True, cayley=True)
    if solver_id == "geonewton":
        return log_geo_newton, replace(config, cayley=False)
    if solver_id == "eucnewton":
        return log_euc_newton, replace(config, cayley=False)
    raise ValueError(f"unknown solver {solver_id!r}; choose from {', '.join(SOLVER_IDS)}")


def _canonical_only(fn):
    def wrapped(U, U_tilde, alpha=0.0, config=None, callback=None):
        if not as_metric(alpha).is_canonical:
            raise ValueError("the algebraic logarithm is available for the canonical metric only")
        return fn(U, U_tilde, config=config, callback=callback)

    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


def default_solver(alpha):
    return "alg4-sylv" if as_metric(alpha).is_canonical else "pshoot"


def stiefel_log(U, U_tilde, alpha=0.0, method="auto", config=None):
    """Riemannian logarithm ``Log_U(U_tilde)`` with a named solver.

    ``method="auto"`` picks the Sylvester-enhanced algebraic log for the
    canonical metric and p-shooting otherwise.
    """
    if method == "auto":
        method = default_solver(alpha)
    fn, cfg = parse_solver(method, config)
    return fn(U, U_tilde, alpha, cfg)


def distance_alpha(U, U_tilde, alpha=0.0, method="auto", config=None):
    """Riemannian distance as the alpha-norm of the computed logarithm.

    Raises
    ------
    NoConvergenceError
        If the chosen solver does not converge.
    """
    metric = as_metric(alpha)
    res = stiefel_log(U, U_tilde, metric, method, config)
    if not res.converged:
        raise NoConvergenceError("logarithm did not converge", res.residual_history)
    return norm_alpha(U, res.delta, metric)
