"""Gaussian process regression on the unit cube.

Matern 5/2 kernel with per-dimension (ARD) lengthscales. Hyperparameters are
chosen by maximizing the log marginal likelihood with a multi-start
Nelder-Mead search over log-parameters; targets are standardized internally
and the standardization is undone at prediction time. The posterior at x is

    mean(x) = k(x, X) [K + s2_eps I]^-1 y
    var(x)  = k(x, x) - k(x, X) [K + s2_eps I]^-1 k(X, x)

evaluated through a Cholesky factor of K + s2_eps I, with escalating diagonal
jitter when the factorization fails on near-duplicate rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize
from scipy.spatial.distance import cdist

LENGTHSCALE_BOUNDS = (1e-3, 1e3)
SIGNAL_BOUNDS = (1e-6, 1e3)
NOISE_BOUNDS = (1e-8, 1.0)

_SQRT5 = math.sqrt(5.0)
_JITTER_START = 1e-8
_JITTER_MAX = 1e-2


class GpFitError(RuntimeError):
    """Model construction failed (non-finite inputs or unfactorizable covariance)."""


@dataclass(frozen=True)
class KernelParams:
    """Matern 5/2 ARD kernel parameters plus observation noise."""

    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self) -> None:
        ls = np.asarray(self.lengthscales, dtype=float).reshape(-1)
        object.__setattr__(self, "lengthscales", ls)
        if not np.all(np.isfinite(ls)) or np.any(ls < LENGTHSCALE_BOUNDS[0]) or np.any(
            ls > LENGTHSCALE_BOUNDS[1]
        ):
            raise ValueError(f"lengthscales outside {LENGTHSCALE_BOUNDS}: {ls}")
        if not SIGNAL_BOUNDS[0] <= self.signal_variance <= SIGNAL_BOUNDS[1]:
            raise ValueError(f"signal_variance outside {SIGNAL_BOUNDS}: {self.signal_variance}")
        if not NOISE_BOUNDS[0] <= self.noise_variance <= NOISE_BOUNDS[1]:
            raise ValueError(f"noise_variance outside {NOISE_BOUNDS}: {self.noise_variance}")


@dataclass(frozen=True)
class Posterior:
    mean: float
    variance: float


def _matern52(sq_dist: np.ndarray, signal_variance: float) -> np.ndarray:
    r = np.sqrt(np.maximum(sq_dist, 0.0))
    return signal_variance * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq_dist) * np.exp(-_SQRT5 * r)


def kernel_matrix(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Cross-covariance matrix between row sets ``a`` and ``b``."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"dimension mismatch: {a.shape[1]} vs {b.shape[1]}")
    sq = cdist(a / params.lengthscales, b / params.lengthscales, "sqeuclidean")
    return _matern52(sq, params.signal_variance)


def kernel(a: np.ndarray, b: np.ndarray, params: KernelParams) -> float:
    """Kernel value for a single pair of locations."""
    return float(kernel_matrix(np.atleast_2d(a), np.atleast_2d(b), params)[0, 0])


@dataclass
class GpModel:
    """A fitted GP: training data, kernel parameters and Cholesky machinery.

    Immutable by convention after construction; safe for concurrent predict.
    """

    train_X: np.ndarray
    train_y: np.ndarray
    params: KernelParams
    factor: np.ndarray
    alpha: np.ndarray
    y_shift: float
    y_scale: float
    jitter: float
    lml: float
    restart_initial_lml: tuple[float, ...] = field(default_factory=tuple)

    @property
    def n(self) -> int:
        return self.train_X.shape[0]

    @property
    def d(self) -> int:
        return self.train_X.shape[1]


def _factorize(K: np.ndarray, noise_variance: float) -> tuple[np.ndarray, float]:
    """Cholesky of K + noise I with jitter escalation; returns (L, jitter used)."""
    n = K.shape[0]
    jitter = 0.0
    while True:
        try:
            shifted = K.copy()
            shifted.flat[:: n + 1] += noise_variance + jitter
            L = cholesky(shifted, lower=True, check_finite=False)
            return L, jitter
        except np.linalg.LinAlgError:
            pass
        jitter = _JITTER_START if jitter == 0.0 else jitter * 10.0
        if jitter > _JITTER_MAX:
            raise GpFitError(f"covariance factorization failed at jitter {jitter / 10.0:g}")


def _neg_log_marginal(sq_dist_per_dim: np.ndarray, y: np.ndarray, theta: np.ndarray) -> float:
    """Negative log marginal likelihood at log-parameters theta = (log ls, log sv, log nv)."""
    d = sq_dist_per_dim.shape[2]
    inv_ls_sq = np.exp(-2.0 * theta[:d])
    signal = math.exp(theta[d])
    noise = math.exp(theta[d + 1])
    sq = sq_dist_per_dim @ inv_ls_sq
    K = _matern52(sq, signal)
    n = y.size
    K.flat[:: n + 1] += noise
    try:
        L = np.linalg.cholesky(K)
    except np.linalg.LinAlgError:
        return np.inf
    alpha = cho_solve((L, True), y, check_finite=False)
    return float(0.5 * y @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * n * math.log(2.0 * math.pi))


def log_marginal_likelihood(X: np.ndarray, y: np.ndarray, params: KernelParams) -> float:
    """LML of (already standardized or raw) targets under the given parameters."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    diffs = X[:, None, :] - X[None, :, :]
    theta = np.concatenate(
        [
            np.log(params.lengthscales),
            [math.log(params.signal_variance), math.log(params.noise_variance)],
        ]
    )
    return -_neg_log_marginal(diffs**2, y, theta)


def make_model(
    X: np.ndarray,
    y: np.ndarray,
    params: KernelParams,
    *,
    standardize: bool = True,
) -> GpModel:
    """Build a model with fixed kernel parameters (no hyperparameter search)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.size or y.size < 1:
        raise ValueError(f"need |X| == |y| >= 1, got {X.shape[0]} and {y.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise GpFitError("training inputs must be finite")
    if standardize:
        y_shift = float(np.mean(y))
        sd = float(np.std(y))
        y_scale = sd if sd > 1e-12 else 1.0
    else:
        y_shift, y_scale = 0.0, 1.0
    y_std = (y - y_shift) / y_scale
    K = kernel_matrix(X, X, params)
    L, jitter = _factorize(K, params.noise_variance)
    alpha = cho_solve((L, True), y_std)
    n = y.size
    lml = -float(
        0.5 * y_std @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * n * math.log(2.0 * math.pi)
    )
    return GpModel(
        train_X=X.copy(),
        train_y=y.copy(),
        params=params,
        factor=L,
        alpha=alpha,
        y_shift=y_shift,
        y_scale=y_scale,
        jitter=jitter,
        lml=lml,
    )


def fit(
    X: np.ndarray,
    y: np.ndarray,
    seed: int,
    *,
    n_restarts: int = 8,
    noise_variance: float | None = None,
    standardize: bool = True,
    maxfev: int | None = None,
    warm_start: KernelParams | None = None,
) -> GpModel:
    """Fit kernel hyperparameters by multi-start local maximization of the LML.

    Deterministic given ``seed``. ``noise_variance`` fixes the observation
    noise instead of estimating it (clipped into its bounds). ``warm_start``
    replaces the default heuristic start with previously fitted parameters;
    the seeded random restarts are unchanged.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.shape[0] != y.size or y.size < 1:
        raise ValueError(f"need |X| == |y| >= 1, got {X.shape[0]} and {y.size}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise GpFitError("training inputs must be finite")

    d = X.shape[1]
    if standardize:
        y_shift = float(np.mean(y))
        sd = float(np.std(y))
        y_scale = sd if sd > 1e-12 else 1.0
    else:
        y_shift, y_scale = 0.0, 1.0
    y_std = (y - y_shift) / y_scale

    diffs = X[:, None, :] - X[None, :, :]
    sq_dist_per_dim = diffs**2

    fixed_noise = None
    if noise_variance is not None:
        fixed_noise = float(np.clip(noise_variance, *NOISE_BOUNDS))

    lo = np.concatenate(
        [
            np.full(d, math.log(LENGTHSCALE_BOUNDS[0])),
            [math.log(SIGNAL_BOUNDS[0]), math.log(NOISE_BOUNDS[0])],
        ]
    )
    hi = np.concatenate(
        [
            np.full(d, math.log(LENGTHSCALE_BOUNDS[1])),
            [math.log(SIGNAL_BOUNDS[1]), math.log(NOISE_BOUNDS[1])],
        ]
    )

    if fixed_noise is None:
        def objective(theta: np.ndarray) -> float:
            return _neg_log_marginal(sq_dist_per_dim, y_std, theta)
    else:
        log_noise = math.log(fixed_noise)

        def objective(theta: np.ndarray) -> float:
            return _neg_log_marginal(
                sq_dist_per_dim, y_std, np.concatenate([theta, [log_noise]])
            )

    n_params = d + 1 + (0 if fixed_noise is not None else 1)
    lo_opt, hi_opt = lo[:n_params], hi[:n_params]

    rng = np.random.default_rng(seed)
    if warm_start is not None and warm_start.lengthscales.size == d:
        first = np.concatenate(
            [
                np.log(warm_start.lengthscales),
                [math.log(warm_start.signal_variance), math.log(warm_start.noise_variance)],
            ]
        )[:n_params]
        first = np.clip(first, lo_opt, hi_opt)
    else:
        first = np.concatenate([np.full(d, math.log(0.5)), [0.0, math.log(1e-4)]])[:n_params]
    starts = [first]
    for _ in range(max(0, n_restarts - 1)):
        starts.append(rng.uniform(lo_opt, hi_opt))

    if maxfev is None:
        maxfev = 40 * n_params

    best_theta = None
    best_nll = np.inf
    initial_lmls = []
    for start in starts:
        start_nll = objective(start)
        initial_lmls.append(-start_nll)
        if start_nll < best_nll:
            best_nll, best_theta = start_nll, start
        result = minimize(
            objective,
            start,
            method="Nelder-Mead",
            bounds=list(zip(lo_opt, hi_opt)),
            options={"maxfev": maxfev, "xatol": 1e-2, "fatol": 1e-3},
        )
        if np.isfinite(result.fun) and result.fun < best_nll:
            best_nll, best_theta = float(result.fun), np.asarray(result.x)
    if best_theta is None or not np.isfinite(best_nll):
        raise GpFitError("marginal likelihood not finite at any restart")

    best_theta = np.clip(best_theta, lo_opt, hi_opt)
    params = KernelParams(
        lengthscales=np.clip(np.exp(best_theta[:d]), *LENGTHSCALE_BOUNDS),
        signal_variance=float(np.clip(np.exp(best_theta[d]), *SIGNAL_BOUNDS)),
        noise_variance=fixed_noise
        if fixed_noise is not None
        else float(np.clip(np.exp(best_theta[d + 1]), *NOISE_BOUNDS)),
    )
    model = make_model(X, y, params, standardize=standardize)
    model.restart_initial_lml = tuple(initial_lmls)
    return model


def predict_batch(model: GpModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances at the rows of ``X`` (original target units)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    k_star = kernel_matrix(X, model.train_X, model.params)
    mean_std = k_star @ model.alpha
    v = solve_triangular(model.factor, k_star.T, lower=True, check_finite=False)
    var_std = model.params.signal_variance - np.sum(v * v, axis=0)
    var_std = np.maximum(var_std, 0.0)
    mean = mean_std * model.y_scale + model.y_shift
    var = var_std * model.y_scale**2
    return mean, var


def predict(model: GpModel, x: np.ndarray) -> Posterior:
    """Posterior at a single location."""
    mean, var = predict_batch(model, np.atleast_2d(x))
    return Posterior(mean=float(mean[0]), variance=float(var[0]))
