"""Multi-objective, multiple-information-source Bayesian optimization.

Per-source, per-objective Gaussian process surrogates are fused into one
augmented model per objective; locations come from expected hypervolume
improvement, sources from a cost-weighted discrepancy rule, all under a
hard cumulative query-cost budget.
"""

from .acquisition import EhviConfig, ehvi, ehvi_batch, select_location
from .agp import (
    AgpModel,
    SourceObjectiveModels,
    augment_and_fit,
    augmentation_counts,
    fit_source_models,
    reliability_index,
    safeguard_triggered,
)
from .gp import GpFitError, GpModel, KernelParams, Posterior, fit, kernel, make_model, predict
from .loop import (
    ConfigError,
    QueryRecord,
    RunConfig,
    RunTrace,
    default_init_split,
    initialize,
    run,
    select_source,
    step,
    trace_summary,
    trace_to_csv,
)
from .pareto import ParetoArchive, dominates, hvi, hypervolume
from .sources import (
    EvalResult,
    EvaluatorClient,
    ProtocolError,
    SourceError,
    SourceSpec,
    make_external_suite,
    make_synthetic_suite,
    query,
)
from .space import (
    Dimension,
    EncodingError,
    SearchSpace,
    mlp_space,
    space_from_spec,
    xgb_space,
)

__version__ = "0.1.0"
