"""Fusing per-source surrogates into one augmented model per objective.

Each (source, objective) pair gets its own GP. For every objective, cheap
observations that are not too discrepant with the ground-truth posterior at
their own locations (|mu_1m - mu_sm| <= alpha * sigma_1m) are added to the
ground-truth training set and the model is refit on the augmented set; the
cheap observations keep their observed values. Ground-truth points are never
filtered out.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import gp
from .space import SearchSpace

GROUND_TRUTH_ID = 1


@dataclass
class SourceObjectiveModels:
    """The S x M grid of per-source, per-objective GP models."""

    space: SearchSpace
    source_ids: tuple[int, ...]
    X: dict[int, np.ndarray]
    Y: dict[int, np.ndarray]
    models: dict[tuple[int, int], gp.GpModel]

    @property
    def n_objectives(self) -> int:
        return self.Y[GROUND_TRUTH_ID].shape[1]

    @property
    def cheap_ids(self) -> tuple[int, ...]:
        return tuple(s for s in self.source_ids if s != GROUND_TRUTH_ID)

    def n_queries(self, source: int) -> int:
        return self.X[source].shape[0]


def fit_source_models(
    space: SearchSpace,
    data: dict[int, tuple[np.ndarray, np.ndarray]],
    seed: int,
    *,
    n_restarts: int = 8,
    noise_variance: float | None = None,
    maxfev: int | None = None,
) -> SourceObjectiveModels:
    """Fit one GP per (source, objective) on that source's own queries."""
    if GROUND_TRUTH_ID not in data:
        raise ValueError(f"ground-truth source {GROUND_TRUTH_ID} missing from data")
    source_ids = tuple(sorted(data))
    X = {s: np.atleast_2d(np.asarray(xs, dtype=float)) for s, (xs, _) in data.items()}
    Y = {s: np.atleast_2d(np.asarray(ys, dtype=float)) for s, (_, ys) in data.items()}
    models: dict[tuple[int, int], gp.GpModel] = {}
    n_objectives = Y[GROUND_TRUTH_ID].shape[1]
    for s in source_ids:
        for m in range(n_objectives):
            models[(s, m)] = gp.fit(
                X[s],
                Y[s][:, m],
                seed=derive_seed(seed, s, m),
                n_restarts=n_restarts,
                noise_variance=noise_variance,
                maxfev=maxfev,
            )
    return SourceObjectiveModels(
        space=space, source_ids=source_ids, X=X, Y=Y, models=models
    )


def derive_seed(*parts) -> int:
    """Stable integer seed from a mixed tuple (no process-salted hashing)."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


def reliability_index(
    models: SourceObjectiveModels, s: int, m: int, alpha: float = 1.0
) -> np.ndarray:
    """Indices of source-s observations within alpha ground-truth deviations.

    Both posterior means and the ground-truth deviation are evaluated at the
    cheap source's own queried locations.
    """
    if s == GROUND_TRUTH_ID:
        raise ValueError("reliability filtering applies to cheap sources only")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    X_s = models.X[s]
    if X_s.shape[0] == 0:
        return np.empty(0, dtype=int)
    mu_ground, var_ground = gp.predict_batch(models.models[(GROUND_TRUTH_ID, m)], X_s)
    mu_cheap, _ = gp.predict_batch(models.models[(s, m)], X_s)
    ok = np.abs(mu_ground - mu_cheap) <= alpha * np.sqrt(var_ground)
    return np.flatnonzero(ok)


@dataclass
class AgpModel:
    """Ground-truth model for one objective, augmented with reliable cheap points."""

    objective: int
    train_X: np.ndarray
    train_y: np.ndarray
    model: gp.GpModel
    provenance: np.ndarray
    augment_counts: dict[int, int] = field(default_factory=dict)


def augment_and_fit(
    models: SourceObjectiveModels,
    m: int,
    alpha: float = 1.0,
    seed: int = 0,
    *,
    n_restarts: int = 8,
    noise_variance: float | None = None,
    maxfev: int | None = None,
    warm_start: gp.KernelParams | None = None,
) -> AgpModel:
    """Build the augmented training set for objective ``m`` and refit.

    With no reliable cheap observations the ground-truth model is reused
    unchanged (the augmented set equals the ground-truth set).
    """
    X_parts = [models.X[GROUND_TRUTH_ID]]
    y_parts = [models.Y[GROUND_TRUTH_ID][:, m]]
    provenance = [np.full(X_parts[0].shape[0], GROUND_TRUTH_ID, dtype=int)]
    counts: dict[int, int] = {}
    for s in models.cheap_ids:
        idx = reliability_index(models, s, m, alpha)
        counts[s] = int(idx.size)
        if idx.size:
            X_parts.append(models.X[s][idx])
            y_parts.append(models.Y[s][idx, m])
            provenance.append(np.full(idx.size, s, dtype=int))
    X_hat = np.vstack(X_parts)
    y_hat = np.concatenate(y_parts)
    if sum(counts.values()) == 0:
        model = models.models[(GROUND_TRUTH_ID, m)]
    else:
        model = gp.fit(
            X_hat,
            y_hat,
            seed=seed,
            n_restarts=n_restarts,
            noise_variance=noise_variance,
            maxfev=maxfev,
            warm_start=warm_start,
        )
    return AgpModel(
        objective=m,
        train_X=X_hat,
        train_y=y_hat,
        model=model,
        provenance=np.concatenate(provenance),
        augment_counts=counts,
    )


def augmentation_counts(
    agps: list[AgpModel], models: SourceObjectiveModels
) -> tuple[dict[tuple[int, int], int], int]:
    """Per-(source, objective) augmentation counts and the ground-truth count.

    Recounted from the provenance arrays; feeds the safeguard that forces a
    ground-truth query when any cheap source out-contributes it.
    """
    counts: dict[tuple[int, int], int] = {}
    for agp_model in agps:
        for s in models.cheap_ids:
            counts[(s, agp_model.objective)] = int(np.sum(agp_model.provenance == s))
    return counts, models.n_queries(GROUND_TRUTH_ID)


def safeguard_triggered(agps: list[AgpModel], models: SourceObjectiveModels) -> bool:
    """True when any cheap source contributes more points than the ground truth."""
    counts, n_ground = augmentation_counts(agps, models)
    return any(c > n_ground for c in counts.values())
