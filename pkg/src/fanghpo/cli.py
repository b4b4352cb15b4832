"""Command-line front end: validate configs, run experiments, write artifacts.

The config file is JSON. Minimal synthetic example:

    {
      "space": "mlp",
      "sources": {"kind": "synthetic", "benchmark": "zdt1-miso",
                  "cheap_bias": 0.05, "cheap_noise_sd": 0.02,
                  "costs": [2, 1], "seed": 0},
      "c_max": 200,
      "seeds": {"design": 1, "run": 1},
      "repetitions": 1,
      "baseline": "none"
    }

``space`` is a preset name ("mlp", "xgb") or {"dims": [...]}, and ``sources``
may instead be {"kind": "external", "command": [...], "costs": [...]} to
drive an evaluator subprocess. FANG_EVALUATOR_CMD overrides the command.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shlex
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .acquisition import EhviConfig
from .agp import derive_seed
from .loop import (
    ConfigError,
    RunConfig,
    RunTrace,
    default_init_split,
    run,
    trace_to_csv,
    trace_summary,
)
from .pareto import ParetoArchive
from .sources import (
    EvaluatorClient,
    SourceError,
    make_external_suite,
    make_synthetic_suite,
    query,
)
from .space import space_from_spec

DEFAULT_COSTS = (2.0, 1.0)


@dataclass
class ExperimentConfig:
    """One config file: a RunConfig template plus experiment-level settings."""

    raw: dict
    repetitions: int = 1
    baseline: str = "none"
    out_dir: Path = Path("fanghpo-out")

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.baseline not in ("none", "random-search"):
            raise ConfigError(f"unknown baseline {self.baseline!r}")


def load_experiment(path: str | Path, overrides: argparse.Namespace | None = None) -> ExperimentConfig:
    with open(path) as fh:
        raw = json.load(fh)
    exp = ExperimentConfig(
        raw=raw,
        repetitions=int(raw.get("repetitions", 1)),
        baseline=raw.get("baseline", "none"),
        out_dir=Path(raw.get("out", "fanghpo-out")),
    )
    if overrides is not None:
        if overrides.repetitions is not None:
            exp.repetitions = overrides.repetitions
        if overrides.baseline is not None:
            exp.baseline = overrides.baseline
        if overrides.out is not None:
            exp.out_dir = Path(overrides.out)
        if overrides.seed is not None:
            raw.setdefault("seeds", {})
            raw["seeds"] = {"design": overrides.seed, "run": overrides.seed}
    return exp


def _build_sources(raw: dict, space):
    """Resolve the sources section; returns (specs, client or None)."""
    section = raw.get("sources", {"kind": "synthetic", "benchmark": "zdt1-miso"})
    kind = section.get("kind", "synthetic")
    costs = tuple(float(c) for c in section.get("costs", DEFAULT_COSTS))
    if kind == "synthetic":
        specs = make_synthetic_suite(
            section.get("benchmark", "zdt1-miso"),
            d=space.d,
            cheap_bias=float(section.get("cheap_bias", 0.05)),
            cheap_noise_sd=float(section.get("cheap_noise_sd", 0.0)),
            seed=int(section.get("seed", 0)),
            costs=costs,
        )
        if section.get("single_source"):
            specs = specs[:1]
        return specs, None
    if kind == "external":
        command = os.environ.get("FANG_EVALUATOR_CMD")
        command = shlex.split(command) if command else section["command"]
        client, specs = make_external_suite(
            command, costs=costs, timeout=float(section.get("timeout", 600.0))
        )
        return specs, client
    raise ConfigError(f"unknown sources kind {kind!r}")


def build_run_config(raw: dict, *, design_seed: int, run_seed: int) -> tuple[RunConfig, EvaluatorClient | None]:
    space = space_from_spec(raw.get("space", "mlp"))
    sources, client = _build_sources(raw, space)
    costs = tuple(s.cost for s in sources)
    n_ground_default, n_cheap_default = default_init_split(space.d, costs)
    acq = raw.get("acquisition", {})
    config = RunConfig(
        space=space,
        sources=sources,
        c_max=float(raw.get("c_max", 20 * space.d * 1.0)),
        n_init_ground=int(raw.get("n_init_ground", n_ground_default)),
        n_init_cheap=int(raw.get("n_init_cheap", n_cheap_default)),
        alpha=float(raw.get("alpha", 1.0)),
        reference=tuple(raw.get("reference", (1.0, 1.0))),
        design_seed=design_seed,
        run_seed=run_seed,
        acquisition=EhviConfig(
            n_candidates=int(acq.get("n_candidates", 1000)),
            n_local_refine=int(acq.get("n_local_refine", 10)),
            local_steps=int(acq.get("local_steps", 50)),
            mc_samples=int(acq.get("mc_samples", 4096)),
        ),
        source_rule=raw.get("source_rule", "agp-reference"),
        gp_restarts=int(raw.get("gp_restarts", 8)),
        gp_maxfev=raw.get("gp_maxfev"),
        noise_variance=raw.get("noise_variance"),
    )
    return config, client


def seed_grid(repetitions: int, design_base: int, run_base: int) -> list[tuple[int, int]]:
    """Factor repetitions into a design-seed x run-seed grid.

    Uses the largest divisor of ``repetitions`` not exceeding its square
    root for the design axis (so 4 -> 2x2, 25 -> 5x5, primes -> 1xN).
    """
    n_design = 1
    for k in range(1, int(math.isqrt(repetitions)) + 1):
        if repetitions % k == 0:
            n_design = k
    n_run = repetitions // n_design
    return [
        (design_base + i, run_base + j) for i in range(n_design) for j in range(n_run)
    ]


def random_search(config: RunConfig) -> RunTrace:
    """Uniform-random baseline on the ground truth, same budget accounting."""
    ground = config.ground_source
    n_total = int(config.c_max // ground.cost)
    locations = config.space.sample_uniform(max(n_total, 1), seed=config.design_seed)
    archive = ParetoArchive(np.asarray(config.reference, dtype=float))
    records = []
    hv_curve = []
    cumulative = 0.0
    from .loop import QueryRecord  # local import to avoid cycle in module docs

    for j in range(n_total):
        loc = locations[j]
        result = query(
            ground, loc, seed=derive_seed(config.run_seed, "rs", j), space=config.space
        )
        cumulative += ground.cost
        records.append(
            QueryRecord(
                index=j + 1,
                source=ground.id,
                location=loc.copy(),
                outcome=result.objectives.copy(),
                cost=ground.cost,
                cumulative_cost=cumulative,
            )
        )
        archive.insert(loc, result.objectives, ground.id)
        hv_curve.append((cumulative, archive.hypervolume()))
    return RunTrace(records=records, hv_curve=hv_curve, archive=archive, config=config)


def hv_at_integer_costs(trace: RunTrace, c_max: float) -> np.ndarray:
    """Step-function hypervolume at integer costs 0..floor(c_max), carry-forward."""
    checkpoints = np.arange(0, int(math.floor(c_max)) + 1)
    values = np.zeros(checkpoints.size)
    hv = 0.0
    k = 0
    curve = trace.hv_curve
    for i, t in enumerate(checkpoints):
        while k < len(curve) and curve[k][0] <= t:
            hv = curve[k][1]
            k += 1
        values[i] = hv
    return values


def aggregate_csv(curves_by_method: dict[str, list[np.ndarray]], c_max: float) -> str:
    """Median and sd of hypervolume per method at matched integer costs."""
    lines = ["method,cost,hv_median,hv_sd,n_runs"]
    checkpoints = np.arange(0, int(math.floor(c_max)) + 1)
    for method, curves in curves_by_method.items():
        stacked = np.vstack(curves)
        medians = np.median(stacked, axis=0)
        sds = np.std(stacked, axis=0, ddof=1) if stacked.shape[0] > 1 else np.zeros(
            stacked.shape[1]
        )
        for t, med, sd in zip(checkpoints, medians, sds):
            lines.append(
                f"{method},{int(t)},{repr(float(med))},{repr(float(sd))},{stacked.shape[0]}"
            )
    return "\n".join(lines) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    try:
        exp = load_experiment(args.config, overrides=args)
    except (OSError, json.JSONDecodeError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    exp.out_dir.mkdir(parents=True, exist_ok=True)
    seeds = exp.raw.get("seeds", {})
    grid = seed_grid(exp.repetitions, int(seeds.get("design", 0)), int(seeds.get("run", 0)))

    curves: dict[str, list[np.ndarray]] = {"fang-hpo": []}
    client = None
    status = 0
    c_max_used = None
    try:
        for i, (design_seed, run_seed) in enumerate(grid):
            try:
                config, client = build_run_config(
                    exp.raw, design_seed=design_seed, run_seed=run_seed
                )
                c_max_used = config.c_max
                trace = run(config)
            except (ConfigError, SourceError, ValueError) as exc:
                print(f"run {i}: error: {exc}", file=sys.stderr)
                return 2
            stem = exp.out_dir / f"run_{i:03d}"
            stem.with_suffix(".csv").write_text(trace_to_csv(trace))
            stem.with_suffix(".json").write_text(trace_summary(trace))
            curves["fang-hpo"].append(hv_at_integer_costs(trace, config.c_max))
            if trace.error is not None:
                print(f"run {i}: evaluator failure: {trace.error}", file=sys.stderr)
                status = 1
            else:
                print(
                    f"run {i}: cost {trace.cumulative_cost:g}, "
                    f"final hypervolume {trace.final_hypervolume:.6f}"
                )
            if exp.baseline == "random-search":
                baseline_trace = random_search(config)
                bstem = exp.out_dir / f"baseline_{i:03d}"
                bstem.with_suffix(".csv").write_text(trace_to_csv(baseline_trace))
                curves.setdefault("random-search", []).append(
                    hv_at_integer_costs(baseline_trace, config.c_max)
                )
            if client is not None:  # one evaluator process per repetition
                client.close()
                client = None
        (exp.out_dir / "aggregate.csv").write_text(aggregate_csv(curves, c_max_used))
    finally:
        if client is not None:
            client.close()
    return status


def cmd_validate(args: argparse.Namespace) -> int:
    problems: list[str] = []

    def check(label: str, fn) -> None:
        try:
            fn()
            print(f"ok: {label}")
        except Exception as exc:  # report every failure, keep going
            problems.append(f"{label}: {exc}")
            print(f"FAIL: {label}: {exc}")

    try:
        exp = load_experiment(args.config, overrides=args)
    except (OSError, json.JSONDecodeError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    raw = exp.raw
    space_holder = {}

    def check_space():
        space_holder["space"] = space_from_spec(raw.get("space", "mlp"))

    check("search space", check_space)
    if "space" not in space_holder:
        return 1
    space = space_holder["space"]

    section = raw.get("sources", {"kind": "synthetic", "benchmark": "zdt1-miso"})
    if section.get("kind", "synthetic") == "synthetic":
        check(
            "benchmark name",
            lambda: make_synthetic_suite(
                section.get("benchmark", "zdt1-miso"), d=space.d
            ),
        )
        def check_budget():
            config, _ = build_run_config(raw, design_seed=0, run_seed=0)
            config.validate()

        check("budget vs initial design", check_budget)
    else:
        def check_handshake():
            command = os.environ.get("FANG_EVALUATOR_CMD")
            command = shlex.split(command) if command else section["command"]
            client = EvaluatorClient(command, timeout=float(section.get("timeout", 60.0)))
            try:
                if not client.handshake.get("sources"):
                    raise SourceError("handshake declared no sources")
            finally:
                client.close()

        check("evaluator handshake", check_handshake)
        def check_budget_external():
            costs = tuple(float(c) for c in section.get("costs", DEFAULT_COSTS))
            n_ground, n_cheap = default_init_split(space.d, costs)
            n_ground = int(raw.get("n_init_ground", n_ground))
            n_cheap = int(raw.get("n_init_cheap", n_cheap))
            init = n_ground * costs[0] + n_cheap * sum(costs[1:])
            c_max = float(raw.get("c_max", 20 * space.d))
            if init >= c_max:
                raise ConfigError(
                    f"initial design cost {init} must be below C_max {c_max}"
                )

        check("budget vs initial design", check_budget_external)

    if problems:
        print(f"{len(problems)} problem(s) found")
        return 1
    print("config valid")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fanghpo",
        description="Multi-objective, multi-source Bayesian optimization runner",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("validate", cmd_validate)):
        p = sub.add_parser(name)
        p.add_argument("config", help="path to the JSON run configuration")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="base seed override")
        p.add_argument("--repetitions", type=int, default=None)
        p.add_argument("--baseline", choices=["none", "random-search"], default=None)
        p.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
