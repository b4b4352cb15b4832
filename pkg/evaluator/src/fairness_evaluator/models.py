"""Classifier construction from named hyperparameter values.

"mlp" maps onto sklearn's MLPClassifier; the hidden layout uses the first
n_layers of layer_1..layer_4 (the remaining layer sizes are accepted but
inactive). "xgb" uses the xgboost package when importable and otherwise
falls back to sklearn gradient boosting with the closest parameter mapping
(gamma -> min_impurity_decrease, reg_alpha -> ccp_alpha; reg_lambda has no
sklearn analogue and is ignored by the fallback).
"""

from __future__ import annotations

from sklearn.ensemble import GradientBoostingClassifier
from sklearn.neural_network import MLPClassifier

try:  # pragma: no cover - depends on the environment
    from xgboost import XGBClassifier

    HAS_XGBOOST = True
except ImportError:  # pragma: no cover
    XGBClassifier = None
    HAS_XGBOOST = False

MLP_MAX_ITER = 150


def build_classifier(algorithm: str, values: dict, seed: int):
    if algorithm == "mlp":
        hidden = tuple(int(values[f"layer_{i}"]) for i in range(1, int(values["n_layers"]) + 1))
        return MLPClassifier(
            hidden_layer_sizes=hidden,
            alpha=values["alpha"],
            learning_rate_init=values["learning_rate_init"],
            beta_1=values["beta_1"],
            beta_2=values["beta_2"],
            tol=values["tol"],
            solver="adam",
            max_iter=MLP_MAX_ITER,
            random_state=seed,
        )
    if algorithm == "xgb":
        if HAS_XGBOOST:
            return XGBClassifier(
                n_estimators=values["n_estimators"],
                learning_rate=values["learning_rate"],
                gamma=values["gamma"],
                reg_alpha=values["reg_alpha"],
                reg_lambda=values["reg_lambda"],
                subsample=values["subsample"],
                max_depth=values["max_depth"],
                random_state=seed,
                verbosity=0,
            )
        return GradientBoostingClassifier(
            n_estimators=values["n_estimators"],
            learning_rate=values["learning_rate"],
            min_impurity_decrease=values["gamma"],
            ccp_alpha=values["reg_alpha"],
            subsample=values["subsample"],
            max_depth=values["max_depth"],
            random_state=seed,
        )
    raise ValueError(f"unknown algorithm {algorithm!r}")
