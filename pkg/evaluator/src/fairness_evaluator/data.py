"""Dataset loading and per-source subsampling.

The dataset is a CSV with a header row, a binary {0,1} target column and
one or more binary sensitive columns. Each information source sees a fixed,
seeded, label-stratified fraction of the rows (1.0 for the ground truth);
the subsample is computed once and reused for every query on that source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class DatasetSpec:
    path: str
    target: str
    sensitive: tuple[str, ...]
    subsample_seed: int = 0


@dataclass
class Dataset:
    """Feature matrix plus target and sensitive columns (kept in features)."""

    features: np.ndarray
    feature_names: list[str]
    target: np.ndarray
    sensitive: dict[str, np.ndarray]
    source_rows: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return self.target.size

    def view(self, source_id: int) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
        rows = self.source_rows[source_id]
        return (
            self.features[rows],
            self.target[rows],
            {name: values[rows] for name, values in self.sensitive.items()},
        )


def _check_binary(frame: pd.DataFrame, column: str) -> None:
    values = set(pd.unique(frame[column]))
    if not values <= {0, 1}:
        raise ValueError(f"column {column!r} must be binary 0/1, found {sorted(values)[:5]}")


def stratified_subsample(labels: np.ndarray, fraction: float, seed: int) -> np.ndarray:
    """Row indices of a label-stratified subsample, sorted, deterministic."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    if fraction == 1.0:
        return np.arange(labels.size)
    rng = np.random.default_rng(seed)
    chosen = []
    for value in np.unique(labels):
        rows = np.flatnonzero(labels == value)
        k = max(1, int(round(rows.size * fraction)))
        chosen.append(rng.choice(rows, size=k, replace=False))
    return np.sort(np.concatenate(chosen))


def load_dataset(spec: DatasetSpec, source_fractions: dict[int, float]) -> Dataset:
    path = Path(spec.path)
    frame = pd.read_csv(path)
    for column in (spec.target, *spec.sensitive):
        if column not in frame.columns:
            raise ValueError(f"column {column!r} not in {path.name}")
        _check_binary(frame, column)
    feature_names = [c for c in frame.columns if c != spec.target]
    dataset = Dataset(
        features=frame[feature_names].to_numpy(dtype=float),
        feature_names=feature_names,
        target=frame[spec.target].to_numpy(dtype=int),
        sensitive={name: frame[name].to_numpy(dtype=int) for name in spec.sensitive},
    )
    for source_id, fraction in source_fractions.items():
        dataset.source_rows[source_id] = stratified_subsample(
            dataset.target, fraction, seed=spec.subsample_seed + source_id
        )
    return dataset
