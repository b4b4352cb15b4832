"""Box-bounded hyperparameter search spaces with a unit-cube internal encoding.

Every optimizer-facing quantity lives in ``[0, 1]^d``; :meth:`SearchSpace.decode`
maps unit coordinates to native hyperparameter values using each dimension's
scaling (linear, log2 or log10), and :meth:`SearchSpace.encode` inverts it.
Integer dimensions are relaxed to continuous values internally and rounded
only when decoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

Location = np.ndarray
"""A point in the internal unit cube, shape ``(d,)`` with coordinates in [0, 1]."""


class EncodingError(ValueError):
    """A value could not be mapped between native and unit-cube form."""


_KINDS = ("real", "integer")
_SCALINGS = ("linear", "log2", "log10")


def _log(value: float, scaling: str) -> float:
    return math.log2(value) if scaling == "log2" else math.log10(value)


@dataclass(frozen=True)
class Dimension:
    """One hyperparameter: name, kind, bounds and scaling.

    Bounds are inclusive on both ends. Log scalings require a positive
    lower bound; integer dimensions decode by round-to-nearest followed
    by a clamp into ``[lower, upper]``.
    """

    name: str
    kind: str
    lower: float
    upper: float
    scaling: str = "linear"

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown dimension kind {self.kind!r}")
        if self.scaling not in _SCALINGS:
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if not self.lower < self.upper:
            raise ValueError(
                f"dimension {self.name!r}: lower ({self.lower}) must be < upper ({self.upper})"
            )
        if self.scaling != "linear" and self.lower <= 0:
            raise ValueError(f"dimension {self.name!r}: log scaling requires lower > 0")

    def to_native(self, u: float) -> float | int:
        """Map a unit-cube coordinate to this dimension's native value."""
        if not 0.0 <= u <= 1.0:
            raise EncodingError(f"coordinate {u} outside [0, 1] on dimension {self.name!r}")
        if self.scaling == "linear":
            value = self.lower + u * (self.upper - self.lower)
        else:
            lo = _log(self.lower, self.scaling)
            hi = _log(self.upper, self.scaling)
            base = 2.0 if self.scaling == "log2" else 10.0
            value = base ** (lo + u * (hi - lo))
        if self.kind == "integer":
            return int(min(max(round(value), math.ceil(self.lower)), math.floor(self.upper)))
        # log-space roundoff can land epsilon outside the bounds
        return float(min(max(value, self.lower), self.upper))

    def to_unit(self, value: float) -> float:
        """Inverse of :meth:`to_native` (up to integer rounding)."""
        # Tolerate float-roundoff excursions just past the bounds.
        slack = 1e-9 * max(1.0, abs(self.lower), abs(self.upper))
        if not (self.lower - slack <= value <= self.upper + slack):
            raise EncodingError(
                f"value {value} outside [{self.lower}, {self.upper}] on dimension {self.name!r}"
            )
        value = min(max(value, self.lower), self.upper)
        if self.scaling == "linear":
            u = (value - self.lower) / (self.upper - self.lower)
        else:
            lo = _log(self.lower, self.scaling)
            hi = _log(self.upper, self.scaling)
            u = (_log(value, self.scaling) - lo) / (hi - lo)
        return min(max(u, 0.0), 1.0)


class SearchSpace:
    """An ordered collection of dimensions spanning the search domain."""

    def __init__(self, dims: Sequence[Dimension]):
        if not dims:
            raise ValueError("a search space needs at least one dimension")
        names = [dim.name for dim in dims]
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")
        self.dims: tuple[Dimension, ...] = tuple(dims)
        self.names: tuple[str, ...] = tuple(names)

    @property
    def d(self) -> int:
        return len(self.dims)

    def _check_location(self, loc: Location) -> np.ndarray:
        u = np.asarray(loc, dtype=float).reshape(-1)
        if u.size != self.d:
            raise EncodingError(f"expected {self.d} coordinates, got {u.size}")
        return u

    def decode(self, loc: Location) -> list[float | int]:
        """Native values for a unit-cube location, in dimension order."""
        u = self._check_location(loc)
        return [dim.to_native(float(ui)) for dim, ui in zip(self.dims, u)]

    def decode_dict(self, loc: Location) -> dict[str, float | int]:
        """Native values keyed by dimension name (wire-protocol form)."""
        return dict(zip(self.names, self.decode(loc)))

    def encode(self, values: Sequence[float] | Mapping[str, float]) -> np.ndarray:
        """Unit-cube location for native values (list in dimension order, or a mapping)."""
        if isinstance(values, Mapping):
            try:
                ordered = [values[name] for name in self.names]
            except KeyError as exc:
                raise EncodingError(f"missing value for dimension {exc.args[0]!r}") from exc
        else:
            ordered = list(values)
        if len(ordered) != self.d:
            raise EncodingError(f"expected {self.d} values, got {len(ordered)}")
        return np.array(
            [dim.to_unit(float(v)) for dim, v in zip(self.dims, ordered)], dtype=float
        )

    def sample_uniform(self, n: int, seed: int) -> np.ndarray:
        """``n`` i.i.d. uniform locations on the unit cube, shape ``(n, d)``."""
        if n < 1:
            raise ValueError("n must be >= 1")
        rng = np.random.default_rng(seed)
        return rng.random((n, self.d))

    def __repr__(self) -> str:
        inner = ", ".join(f"{d.name}:{d.kind}[{d.lower},{d.upper}]{d.scaling}" for d in self.dims)
        return f"SearchSpace({inner})"


def mlp_space() -> SearchSpace:
    """The 10-dimensional multilayer-perceptron tuning space."""
    dims = [Dimension("n_layers", "integer", 1, 4, "linear")]
    dims += [Dimension(f"layer_{i}", "integer", 2, 32, "log2") for i in range(1, 5)]
    dims += [
        Dimension("alpha", "real", 1e-6, 1e-1, "log10"),
        Dimension("learning_rate_init", "real", 1e-6, 1e-1, "log10"),
        Dimension("beta_1", "real", 0.001, 0.99, "log10"),
        Dimension("beta_2", "real", 0.001, 0.99, "log10"),
        Dimension("tol", "real", 1e-5, 1e-2, "log10"),
    ]
    return SearchSpace(dims)


def xgb_space() -> SearchSpace:
    """The 7-dimensional gradient-boosting tuning space."""
    return SearchSpace(
        [
            Dimension("n_estimators", "integer", 1, 256, "log2"),
            Dimension("learning_rate", "real", 0.01, 1.0, "log10"),
            Dimension("gamma", "real", 0.0, 0.1, "linear"),
            Dimension("reg_alpha", "real", 1e-3, 1e3, "log10"),
            Dimension("reg_lambda", "real", 1e-3, 1e3, "log10"),
            Dimension("subsample", "real", 0.01, 1.0, "linear"),
            Dimension("max_depth", "integer", 1, 16, "linear"),
        ]
    )


SPACE_PRESETS = {"mlp": mlp_space, "xgb": xgb_space}


def space_from_spec(spec: str | dict | SearchSpace) -> SearchSpace:
    """Resolve a config-file space entry: a preset name or a dims dict."""
    if isinstance(spec, SearchSpace):
        return spec
    if isinstance(spec, str):
        try:
            return SPACE_PRESETS[spec]()
        except KeyError:
            raise ValueError(f"unknown space preset {spec!r}") from None
    dims = [
        Dimension(
            name=d["name"],
            kind=d.get("kind", "real"),
            lower=float(d["lower"]),
            upper=float(d["upper"]),
            scaling=d.get("scaling", "linear"),
        )
        for d in spec["dims"]
    ]
    return SearchSpace(dims)
