"""Classification and fairness metrics.

MCE is the misclassification rate. DSP (differential statistical parity)
is the absolute gap in positive-prediction probability between the two
groups of a binary sensitive feature; with several sensitive features the
per-feature values are aggregated by maximum.
"""

from __future__ import annotations

import warnings

import numpy as np


def mce(labels, predictions) -> float:
    """Fraction of mismatched labels, in [0, 1]."""
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if labels.shape != predictions.shape:
        raise ValueError(f"length mismatch: {labels.shape} vs {predictions.shape}")
    if labels.size == 0:
        raise ValueError("mce needs at least one sample")
    return float(np.mean(labels != predictions))


def dsp(predictions, sensitive) -> float:
    """|P(pred=1 | s=0) - P(pred=1 | s=1)| with empirical probabilities.

    A degenerate stratum (one group empty) is defined as 0 with a warning.
    """
    predictions = np.asarray(predictions)
    sensitive = np.asarray(sensitive)
    if predictions.shape != sensitive.shape:
        raise ValueError(f"length mismatch: {predictions.shape} vs {sensitive.shape}")
    group0 = predictions[sensitive == 0]
    group1 = predictions[sensitive == 1]
    if group0.size == 0 or group1.size == 0:
        warnings.warn("one sensitive group is empty; DSP defined as 0", stacklevel=2)
        return 0.0
    return float(abs(np.mean(group0 == 1) - np.mean(group1 == 1)))


def dsp_aggregate(per_feature: list[float]) -> float:
    """Maximum of the per-feature DSP values."""
    if not per_feature:
        raise ValueError("need at least one sensitive feature")
    return float(max(per_feature))
