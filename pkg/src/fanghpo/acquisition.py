"""Expected hypervolume improvement and its maximizer over the unit cube.

For two objectives the EHVI is exact. Writing A for the region of outcomes
below the reference point and not dominated by the front, Fubini gives

    EHVI = E[vol{z in A : z >= Y}] = integral over A of prod_m CDF_m(z_m) dz,

and A decomposes into axis-aligned cells induced by the sorted front
coordinates and the reference point, so each cell contributes a product of
one-dimensional Gaussian CDF integrals with closed form. For more than two
objectives a deterministic-seeded Monte Carlo average of the hypervolume
improvement is used instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .gp import GpModel, predict_batch
from .pareto import ParetoArchive, _nondominated_unique, hypervolume

_SQRT_2PI = math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class EhviConfig:
    """Budget knobs for the acquisition maximizer."""

    n_candidates: int = 1000
    n_local_refine: int = 10
    local_steps: int = 50
    mc_samples: int = 4096

    def __post_init__(self) -> None:
        for name in ("n_candidates", "n_local_refine", "local_steps", "mc_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


def _cdf_running_integral(t: np.ndarray) -> np.ndarray:
    """Antiderivative of the standard normal CDF: t*Phi(t) + phi(t), with Psi(-inf)=0."""
    out = np.zeros_like(t)
    finite = np.isfinite(t)
    tf = t[finite]
    out[finite] = tf * ndtr(tf) + np.exp(-0.5 * tf * tf) / _SQRT_2PI
    out[t == np.inf] = np.inf
    return out


def _cdf_integral(a: np.ndarray, b: np.ndarray, mean: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """Closed form of the integral of Phi((z - mean)/sd) for z in [a, b].

    Broadcasts over all arguments; ``sd == 0`` degenerates to the step
    function, giving max(0, b - max(a, mean)).
    """
    a, b, mean, sd = np.broadcast_arrays(a, b, mean, sd)
    out = np.empty(a.shape, dtype=float)
    degenerate = sd <= 0.0
    if np.any(degenerate):
        ad, bd, md = a[degenerate], b[degenerate], mean[degenerate]
        out[degenerate] = np.maximum(0.0, bd - np.maximum(ad, md))
    if np.any(~degenerate):
        g = ~degenerate
        alpha = (a[g] - mean[g]) / sd[g]
        beta = (b[g] - mean[g]) / sd[g]
        out[g] = sd[g] * (_cdf_running_integral(beta) - _cdf_running_integral(alpha))
    return np.maximum(out, 0.0)


def _clean_front(front: np.ndarray | list, reference: np.ndarray) -> np.ndarray:
    pts = np.asarray(front, dtype=float).reshape(-1, reference.size)
    pts = pts[np.all(pts < reference, axis=1)]
    if pts.shape[0] == 0:
        return pts
    return _nondominated_unique(pts)


def _ehvi2_exact_batch(
    means: np.ndarray, variances: np.ndarray, front: np.ndarray, reference: np.ndarray
) -> np.ndarray:
    """Exact bi-objective EHVI for a batch of independent Gaussian posteriors."""
    pts = _clean_front(front, reference)
    k = pts.shape[0]
    # Strip edges along objective 1 and the free ceiling along objective 2.
    v = np.concatenate([[-np.inf], pts[:, 0], [reference[0]]]) if k else np.array(
        [-np.inf, reference[0]]
    )
    ceil = np.concatenate([[reference[1]], pts[:, 1]]) if k else np.array([reference[1]])

    sd = np.sqrt(np.maximum(variances, 0.0))
    mu1 = means[:, 0:1]
    mu2 = means[:, 1:2]
    sd1 = sd[:, 0:1]
    sd2 = sd[:, 1:2]
    g1 = _cdf_integral(v[None, :-1], v[None, 1:], mu1, sd1)
    g2 = _cdf_integral(-np.inf, ceil[None, :], mu2, sd2)
    return np.sum(g1 * g2, axis=1)


def _ehvi_mc(
    mean: np.ndarray,
    variance: np.ndarray,
    front: np.ndarray,
    reference: np.ndarray,
    mc_samples: int,
    seed: int,
) -> float:
    rng = np.random.default_rng(seed)
    pts = _clean_front(front, reference)
    base = hypervolume(pts, reference)
    draws = mean + np.sqrt(np.maximum(variance, 0.0)) * rng.standard_normal(
        (mc_samples, mean.size)
    )
    total = 0.0
    for y in draws:
        if np.all(y < reference):
            total += hypervolume(np.vstack([pts, y[None, :]]), reference) - base
    return total / mc_samples


def ehvi(
    means: np.ndarray,
    variances: np.ndarray,
    front: np.ndarray | list,
    reference: np.ndarray,
    *,
    mc_samples: int = 4096,
    seed: int = 0,
) -> float:
    """Expected hypervolume improvement of an outcome with independent Gaussian margins."""
    mean = np.asarray(means, dtype=float).reshape(-1)
    var = np.asarray(variances, dtype=float).reshape(-1)
    r = np.asarray(reference, dtype=float).reshape(-1)
    if mean.size != r.size or var.size != r.size:
        raise ValueError("means/variances must have one entry per objective")
    if mean.size < 2:
        raise ValueError("at least two objectives required")
    if np.any(var < 0):
        raise ValueError("variances must be nonnegative")
    if mean.size == 2:
        return float(_ehvi2_exact_batch(mean[None, :], var[None, :], np.asarray(front), r)[0])
    return _ehvi_mc(mean, var, np.asarray(front), r, mc_samples, seed)


def ehvi_batch(
    means: np.ndarray,
    variances: np.ndarray,
    front: np.ndarray | list,
    reference: np.ndarray,
    *,
    mc_samples: int = 4096,
    seed: int = 0,
) -> np.ndarray:
    """Vectorized :func:`ehvi` over rows of means/variances."""
    means = np.atleast_2d(np.asarray(means, dtype=float))
    variances = np.atleast_2d(np.asarray(variances, dtype=float))
    r = np.asarray(reference, dtype=float).reshape(-1)
    if means.shape[1] == 2:
        return _ehvi2_exact_batch(means, np.maximum(variances, 0.0), np.asarray(front), r)
    return np.array(
        [
            _ehvi_mc(m, v, np.asarray(front), r, mc_samples, seed)
            for m, v in zip(means, variances)
        ]
    )


def _score_locations(
    X: np.ndarray,
    agp_models: list[GpModel],
    front: np.ndarray,
    reference: np.ndarray,
    config: EhviConfig,
    seed: int,
) -> np.ndarray:
    means = np.empty((X.shape[0], len(agp_models)))
    variances = np.empty_like(means)
    for m, model in enumerate(agp_models):
        means[:, m], variances[:, m] = predict_batch(model, X)
    return ehvi_batch(
        means, variances, front, reference, mc_samples=config.mc_samples, seed=seed
    )


def select_location(
    agps: list,
    archive: ParetoArchive,
    config: EhviConfig,
    seed: int,
) -> np.ndarray:
    """Maximize EHVI: seeded random candidates, then coordinate pattern search.

    ``agps`` is one fitted surrogate per objective (objects with a ``model``
    attribute, or bare models). Deterministic given ``seed``; candidate order
    breaks ties.
    """
    models = [getattr(a, "model", a) for a in agps]
    d = models[0].d
    front = archive.front()
    reference = archive.reference
    rng = np.random.default_rng(seed)

    candidates = rng.random((config.n_candidates, d))
    scores = _score_locations(candidates, models, front, reference, config, seed)

    best_idx = int(np.argmax(scores))
    best_x, best_score = candidates[best_idx].copy(), float(scores[best_idx])

    n_refine = min(config.n_local_refine, config.n_candidates)
    order = np.argsort(-scores, kind="stable")[:n_refine]
    xs = candidates[order].copy()
    fs = scores[order].copy()
    steps = np.full(n_refine, 0.25)

    for _ in range(config.local_steps):
        # 2d axis probes per refinement start, evaluated in one batch.
        probes = np.repeat(xs[:, None, :], 2 * d, axis=1)
        for j in range(d):
            probes[:, 2 * j, j] += steps
            probes[:, 2 * j + 1, j] -= steps
        probes = np.clip(probes, 0.0, 1.0)
        flat = probes.reshape(-1, d)
        vals = _score_locations(flat, models, front, reference, config, seed).reshape(
            n_refine, 2 * d
        )
        best_probe = np.argmax(vals, axis=1)
        improved = vals[np.arange(n_refine), best_probe] > fs
        xs[improved] = probes[np.arange(n_refine), best_probe][improved]
        fs[improved] = vals[np.arange(n_refine), best_probe][improved]
        steps[~improved] *= 0.5

    for x, f in zip(xs, fs):
        if f > best_score:
            best_x, best_score = x.copy(), float(f)
    return best_x
