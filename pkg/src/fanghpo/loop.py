"""The budgeted outer loop: initial designs, two-step acquisition, trace.

Each iteration refreshes the per-source surrogates and the augmented models,
picks the location by expected hypervolume improvement, then picks the
source by cost-weighted posterior discrepancy, with a safeguard that forces
a ground-truth query whenever any cheap source contributes more augmented
points than the ground truth itself. Costs accumulate against a hard budget;
only ground-truth observations enter the Pareto archive and its hypervolume.
"""

from __future__ import annotations

import io
import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import agp as agp_mod
from . import gp
from .acquisition import EhviConfig, select_location
from .agp import GROUND_TRUTH_ID, AgpModel, SourceObjectiveModels, derive_seed
from .pareto import ParetoArchive
from .sources import ProtocolError, SourceError, SourceSpec, query
from .space import SearchSpace


class ConfigError(ValueError):
    """A run configuration violates its invariants."""


# Unit-cube L-inf radius below which a query counts as a repeat of an
# earlier one on the same source. Repeats carry (almost) no information.
DUPLICATE_TOL = 1e-2


@dataclass(frozen=True)
class QueryRecord:
    index: int
    source: int
    location: np.ndarray
    outcome: np.ndarray
    cost: float
    cumulative_cost: float


@dataclass
class RunConfig:
    """Everything needed for one reproducible optimization run."""

    space: SearchSpace
    sources: list[SourceSpec]
    c_max: float
    n_init_ground: int
    n_init_cheap: int
    alpha: float = 1.0
    reference: tuple[float, ...] = (1.0, 1.0)
    design_seed: int = 0
    run_seed: int = 0
    acquisition: EhviConfig = field(default_factory=EhviConfig)
    source_rule: str = "agp-reference"  # or "ground-truth-reference" (literal rule)
    gp_restarts: int = 8
    gp_maxfev: int | None = None
    noise_variance: float | None = None

    @property
    def cheap_sources(self) -> list[SourceSpec]:
        return [s for s in self.sources if s.id != GROUND_TRUTH_ID]

    @property
    def ground_source(self) -> SourceSpec:
        for s in self.sources:
            if s.id == GROUND_TRUTH_ID:
                return s
        raise ConfigError("no ground-truth source (id 1) configured")

    @property
    def init_cost(self) -> float:
        return self.n_init_ground * self.ground_source.cost + self.n_init_cheap * sum(
            s.cost for s in self.cheap_sources
        )

    def validate(self) -> None:
        ids = [s.id for s in self.sources]
        if sorted(ids) != sorted(set(ids)) or ids.count(GROUND_TRUTH_ID) != 1:
            raise ConfigError("sources must have unique ids with exactly one id 1")
        if self.c_max <= 0:
            raise ConfigError("c_max must be positive")
        if self.n_init_ground < 1:
            raise ConfigError("need at least one initial ground-truth query")
        if self.cheap_sources and self.n_init_cheap < 1:
            raise ConfigError("need at least one initial query per cheap source")
        if self.init_cost >= self.c_max:
            raise ConfigError(
                f"initial design cost {self.init_cost} must be below C_max {self.c_max}"
            )
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        if len(self.reference) < 2:
            raise ConfigError("need at least two objectives")
        if self.source_rule not in ("agp-reference", "ground-truth-reference"):
            raise ConfigError(f"unknown source rule {self.source_rule!r}")
        c1 = self.ground_source.cost
        for s in self.cheap_sources:
            if s.cost > c1:
                warnings.warn(
                    f"cheap source {s.id} costs more than the ground truth ({s.cost} > {c1})",
                    stacklevel=2,
                )

    def to_dict(self) -> dict:
        """JSON-friendly echo of the configuration."""
        def binding_dict(source: SourceSpec) -> dict:
            b = source.binding
            if source.kind == "synthetic":
                return {
                    "benchmark": b.benchmark,
                    "bias": b.bias,
                    "noise_sd": b.noise_sd,
                    "seed": b.seed,
                }
            return {"descriptor": b.descriptor, "command": list(b.client.command)}

        return {
            "space": [
                {
                    "name": d.name,
                    "kind": d.kind,
                    "lower": d.lower,
                    "upper": d.upper,
                    "scaling": d.scaling,
                }
                for d in self.space.dims
            ],
            "sources": [
                {"id": s.id, "cost": s.cost, "kind": s.kind, "binding": binding_dict(s)}
                for s in self.sources
            ],
            "c_max": self.c_max,
            "n_init_ground": self.n_init_ground,
            "n_init_cheap": self.n_init_cheap,
            "alpha": self.alpha,
            "reference": list(self.reference),
            "seeds": {"design": self.design_seed, "run": self.run_seed},
            "acquisition": {
                "n_candidates": self.acquisition.n_candidates,
                "n_local_refine": self.acquisition.n_local_refine,
                "local_steps": self.acquisition.local_steps,
                "mc_samples": self.acquisition.mc_samples,
            },
            "source_rule": self.source_rule,
            "gp_restarts": self.gp_restarts,
            "gp_maxfev": self.gp_maxfev,
            "noise_variance": self.noise_variance,
        }


def default_init_split(d: int, costs: tuple[float, ...]) -> tuple[int, int]:
    """Split the 2*d*c_1 initialization budget between ground truth and cheap sources.

    With a single source everything goes to the ground truth (2d points).
    """
    c1 = costs[0]
    total = 2 * d * c1
    cheap_total = sum(costs[1:])
    if cheap_total == 0:
        return 2 * d, 0
    n_ground = int(total // (c1 + cheap_total))
    n_cheap = int((total - n_ground * c1) // cheap_total)
    return n_ground, n_cheap


@dataclass
class RunTrace:
    records: list[QueryRecord]
    hv_curve: list[tuple[float, float]]
    archive: ParetoArchive
    config: RunConfig
    error: str | None = None

    @property
    def cumulative_cost(self) -> float:
        return self.records[-1].cumulative_cost if self.records else 0.0

    @property
    def final_hypervolume(self) -> float:
        return self.hv_curve[-1][1] if self.hv_curve else 0.0


class LoopState:
    """Mutable optimizer state threaded through initialize/step."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.data: dict[int, tuple[list[np.ndarray], list[np.ndarray]]] = {
            s.id: ([], []) for s in config.sources
        }
        self.archive = ParetoArchive(np.asarray(config.reference, dtype=float))
        self.records: list[QueryRecord] = []
        self.hv_curve: list[tuple[float, float]] = []
        self.cumulative_cost = 0.0
        self.iteration = 0
        self.error: str | None = None
        self._model_cache: dict[tuple[int, int], tuple[int, gp.GpModel]] = {}
        self._agp_params: dict[int, gp.KernelParams] = {}

    @property
    def remaining(self) -> float:
        return self.config.c_max - self.cumulative_cost

    def already_queried(self, source_id: int, x: np.ndarray, tol: float = DUPLICATE_TOL) -> bool:
        xs, _ = self.data[source_id]
        return any(float(np.max(np.abs(prev - x))) <= tol for prev in xs)

    def record_query(self, source: SourceSpec, loc: np.ndarray, outcome: np.ndarray) -> None:
        self.cumulative_cost += source.cost
        self.records.append(
            QueryRecord(
                index=len(self.records) + 1,
                source=source.id,
                location=np.asarray(loc, dtype=float).copy(),
                outcome=np.asarray(outcome, dtype=float).copy(),
                cost=source.cost,
                cumulative_cost=self.cumulative_cost,
            )
        )
        xs, ys = self.data[source.id]
        xs.append(np.asarray(loc, dtype=float).copy())
        ys.append(np.asarray(outcome, dtype=float).copy())
        if source.id == GROUND_TRUTH_ID:
            self.archive.insert(loc, outcome, source.id)
        self.hv_curve.append((self.cumulative_cost, self.archive.hypervolume()))

    def source_models(self) -> SourceObjectiveModels:
        """Fit (or reuse, when a source's data is unchanged) the S x M GP grid.

        Fit seeds derive from (run_seed, s, m, n_s), so a cached model is
        identical to what refitting on the same data would produce.
        """
        config = self.config
        X = {s: np.array(xs) for s, (xs, _) in self.data.items()}
        Y = {s: np.array(ys) for s, (_, ys) in self.data.items()}
        models: dict[tuple[int, int], gp.GpModel] = {}
        n_objectives = len(config.reference)
        for source in config.sources:
            s = source.id
            n_s = X[s].shape[0]
            for m in range(n_objectives):
                cached = self._model_cache.get((s, m))
                if cached is not None and cached[0] == n_s:
                    models[(s, m)] = cached[1]
                    continue
                model = gp.fit(
                    X[s],
                    Y[s][:, m],
                    seed=derive_seed(config.run_seed, "gp", s, m, n_s),
                    n_restarts=config.gp_restarts,
                    noise_variance=config.noise_variance,
                    maxfev=config.gp_maxfev,
                    warm_start=cached[1].params if cached is not None else None,
                )
                self._model_cache[(s, m)] = (n_s, model)
                models[(s, m)] = model
        return SourceObjectiveModels(
            space=config.space,
            source_ids=tuple(sorted(X)),
            X=X,
            Y=Y,
            models=models,
        )


def source_scores(
    x: np.ndarray,
    models: SourceObjectiveModels,
    agps: list[AgpModel],
    sources: list[SourceSpec],
    rule: str = "agp-reference",
) -> list[tuple[float, int]]:
    """Cost-weighted discrepancy score per source at ``x``, best first.

    Each source s is scored c_s * sum_m |ref_m(x) - mu_sm(x)|; the reference
    mean is the augmented model's (default) or the ground-truth GP's
    (literal variant, whose s=1 term is identically zero). Ties go to the
    smaller source id.
    """
    x = np.atleast_2d(x)
    n_objectives = models.n_objectives
    if rule == "agp-reference":
        ref = np.array([gp.predict_batch(a.model, x)[0][0] for a in agps])
    elif rule == "ground-truth-reference":
        ref = np.array(
            [gp.predict_batch(models.models[(GROUND_TRUTH_ID, m)], x)[0][0] for m in range(n_objectives)]
        )
    else:
        raise ValueError(f"unknown source rule {rule!r}")
    ranked = []
    for source in sorted(sources, key=lambda s: s.id):
        mu_s = np.array(
            [gp.predict_batch(models.models[(source.id, m)], x)[0][0] for m in range(n_objectives)]
        )
        ranked.append((source.cost * float(np.sum(np.abs(ref - mu_s))), source.id))
    ranked.sort(key=lambda pair: (pair[0], pair[1]))
    return ranked


def select_source(
    x: np.ndarray,
    models: SourceObjectiveModels,
    agps: list[AgpModel],
    sources: list[SourceSpec],
    rule: str = "agp-reference",
) -> int:
    """The best-scoring source at ``x`` (see :func:`source_scores`)."""
    return source_scores(x, models, agps, sources, rule)[0][1]


def initialize(config: RunConfig) -> LoopState:
    """Sample and evaluate the initial designs, then record everything."""
    config.validate()
    state = LoopState(config)
    ground = config.ground_source
    locations = config.space.sample_uniform(config.n_init_ground, seed=config.design_seed)
    for j, loc in enumerate(locations):
        result = query(
            ground, loc, seed=derive_seed(config.design_seed, "init", ground.id, j), space=config.space
        )
        state.record_query(ground, loc, result.objectives)
    for source in config.cheap_sources:
        locations = config.space.sample_uniform(
            config.n_init_cheap, seed=derive_seed(config.design_seed, "design", source.id)
        )
        for j, loc in enumerate(locations):
            result = query(
                source, loc, seed=derive_seed(config.design_seed, "init", source.id, j), space=config.space
            )
            state.record_query(source, loc, result.objectives)
    state.source_models()  # prime the surrogate cache
    return state


def step(state: LoopState) -> bool:
    """One acquisition round; returns False when the run should stop."""
    config = state.config
    affordable = [s for s in config.sources if s.cost <= state.remaining]
    if not affordable:
        return False

    models = state.source_models()
    agps = []
    for m in range(models.n_objectives):
        agp_model = agp_mod.augment_and_fit(
            models,
            m,
            alpha=config.alpha,
            seed=derive_seed(config.run_seed, "agp", m, len(state.records)),
            n_restarts=config.gp_restarts,
            noise_variance=config.noise_variance,
            maxfev=config.gp_maxfev,
            warm_start=state._agp_params.get(m),
        )
        state._agp_params[m] = agp_model.model.params
        agps.append(agp_model)

    state.iteration += 1
    x_next = select_location(
        agps,
        state.archive,
        config.acquisition,
        seed=derive_seed(config.run_seed, "acq", state.iteration),
    )

    if config.cheap_sources and agp_mod.safeguard_triggered(agps, models):
        source_id = GROUND_TRUTH_ID
    else:
        # Re-querying a source near a location it was already queried at
        # adds (almost) no information and can deadlock the loop on a stale
        # posterior, so fall through the score order to a source that is
        # new at x'; the ground truth is the conservative last resort.
        ranked = source_scores(x_next, models, agps, config.sources, rule=config.source_rule)
        source_id = GROUND_TRUTH_ID
        for _, sid in ranked:
            if not state.already_queried(sid, x_next):
                source_id = sid
                break

    by_id = {s.id: s for s in config.sources}
    chosen = by_id[source_id]
    if chosen.cost > state.remaining:
        chosen = min(affordable, key=lambda s: (s.cost, s.id))

    try:
        result = query(
            chosen,
            x_next,
            seed=derive_seed(config.run_seed, "query", state.iteration),
            space=config.space,
        )
    except (SourceError, ProtocolError) as exc:
        state.error = str(exc)
        return False
    state.record_query(chosen, x_next, result.objectives)
    return True


def run(config: RunConfig) -> RunTrace:
    """Initialize, then step until no source is affordable (or a source fails)."""
    state = initialize(config)
    min_cost = min(s.cost for s in config.sources)
    while state.remaining >= min_cost:
        if not step(state):
            break
    return RunTrace(
        records=state.records,
        hv_curve=state.hv_curve,
        archive=state.archive,
        config=config,
        error=state.error,
    )


def trace_to_csv(trace: RunTrace) -> str:
    """Render the query log as CSV with one row per record."""
    space = trace.config.space
    n_objectives = len(trace.config.reference)
    header = (
        ["iter", "source", "cost", "cum_cost"]
        + [f"x{i + 1}" for i in range(space.d)]
        + [f"y{j + 1}" for j in range(n_objectives)]
        + ["hv_ground_truth"]
    )
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for record, (_, hv) in zip(trace.records, trace.hv_curve):
        row = [str(record.index), str(record.source), repr(float(record.cost)), repr(float(record.cumulative_cost))]
        row += [repr(float(v)) for v in record.location]
        row += [repr(float(v)) for v in record.outcome]
        row.append(repr(float(hv)))
        buf.write(",".join(row) + "\n")
    return buf.getvalue()


def trace_summary(trace: RunTrace) -> str:
    """JSON summary: final hypervolume, archive, config echo and seeds."""
    payload = {
        "final_hypervolume": trace.final_hypervolume,
        "cumulative_cost": trace.cumulative_cost,
        "n_records": len(trace.records),
        "archive": trace.archive.snapshot(),
        "config": trace.config.to_dict(),
        "seeds": {"design": trace.config.design_seed, "run": trace.config.run_seed},
        "error": trace.error,
    }
    return json.dumps(payload, sort_keys=True, indent=2)


__all__ = [
    "ConfigError",
    "QueryRecord",
    "RunConfig",
    "RunTrace",
    "LoopState",
    "default_init_split",
    "initialize",
    "step",
    "run",
    "select_source",
    "trace_to_csv",
    "trace_summary",
]
