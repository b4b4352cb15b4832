"""Stratified cross-validated evaluation of one hyperparameter configuration."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.model_selection import StratifiedKFold

from .data import Dataset
from .metrics import dsp, dsp_aggregate, mce
from .models import build_classifier
from .spaces import validate_values

N_FOLDS = 10


class FoldTrainingError(RuntimeError):
    """A fold's model failed to train; the message names the fold."""


def evaluate(
    algorithm: str,
    values: dict,
    dataset: Dataset,
    source_id: int,
    cv_seed: int,
) -> tuple[float, float]:
    """Mean fold MCE and mean fold aggregated DSP for one configuration.

    Folds are stratified on the target and resampled per query through
    ``cv_seed``; sensitive columns stay in the feature matrix.
    """
    clean = validate_values(algorithm, values)
    X, y, sensitive = dataset.view(source_id)
    splitter = StratifiedKFold(n_splits=N_FOLDS, shuffle=True, random_state=cv_seed & 0x7FFFFFFF)
    fold_mce, fold_dsp = [], []
    for fold, (train_rows, test_rows) in enumerate(splitter.split(X, y)):
        model = build_classifier(algorithm, clean, seed=(cv_seed + fold) & 0x7FFFFFFF)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            warnings.simplefilter("ignore", UserWarning)
            try:
                model.fit(X[train_rows], y[train_rows])
            except Exception as exc:
                raise FoldTrainingError(f"training failed on fold {fold}: {exc}") from exc
            predictions = model.predict(X[test_rows])
        fold_mce.append(mce(y[test_rows], predictions))
        per_feature = [
            dsp(predictions, group_values[test_rows])
            for group_values in sensitive.values()
        ]
        fold_dsp.append(dsp_aggregate(per_feature))
    return float(np.mean(fold_mce)), float(np.mean(fold_dsp))
