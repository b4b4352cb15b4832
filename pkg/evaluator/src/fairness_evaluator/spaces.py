"""Hyperparameter domains accepted by each algorithm.

Requests must name every hyperparameter of the chosen algorithm with a
value inside its domain; anything else is answered with an error response.
"""

from __future__ import annotations

MLP_DOMAINS = {
    "n_layers": ("integer", 1, 4),
    "layer_1": ("integer", 2, 32),
    "layer_2": ("integer", 2, 32),
    "layer_3": ("integer", 2, 32),
    "layer_4": ("integer", 2, 32),
    "alpha": ("real", 1e-6, 1e-1),
    "learning_rate_init": ("real", 1e-6, 1e-1),
    "beta_1": ("real", 0.001, 0.99),
    "beta_2": ("real", 0.001, 0.99),
    "tol": ("real", 1e-5, 1e-2),
}

XGB_DOMAINS = {
    "n_estimators": ("integer", 1, 256),
    "learning_rate": ("real", 0.01, 1.0),
    "gamma": ("real", 0.0, 0.1),
    "reg_alpha": ("real", 1e-3, 1e3),
    "reg_lambda": ("real", 1e-3, 1e3),
    "subsample": ("real", 0.01, 1.0),
    "max_depth": ("integer", 1, 16),
}

DOMAINS = {"mlp": MLP_DOMAINS, "xgb": XGB_DOMAINS}


def validate_values(algorithm: str, values: dict) -> dict:
    """Check names and domains; returns the values with integers coerced."""
    try:
        domains = DOMAINS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}") from None
    missing = sorted(set(domains) - set(values))
    if missing:
        raise ValueError(f"missing hyperparameters: {', '.join(missing)}")
    extra = sorted(set(values) - set(domains))
    if extra:
        raise ValueError(f"unknown hyperparameters: {', '.join(extra)}")
    clean = {}
    for name, (kind, lower, upper) in domains.items():
        value = values[name]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"{name} must be numeric, got {value!r}")
        if not lower <= value <= upper:
            raise ValueError(f"{name}={value} outside [{lower}, {upper}]")
        if kind == "integer":
            if float(value) != int(value):
                raise ValueError(f"{name}={value} must be an integer")
            value = int(value)
        clean[name] = value
    return clean
