import json
from pathlib import Path

import numpy as np
import pytest

from fanghpo.cli import (
    aggregate_csv,
    hv_at_integer_costs,
    main,
    random_search,
    seed_grid,
)
from fanghpo.loop import RunConfig, RunTrace, run
from fanghpo.pareto import ParetoArchive


def synthetic_config(tmp_path, **overrides):
    raw = {
        "space": {"dims": [{"name": f"u{i}", "lower": 0.0, "upper": 1.0} for i in range(2)]},
        "sources": {
            "kind": "synthetic",
            "benchmark": "zdt1-miso",
            "cheap_bias": 0.02,
            "cheap_noise_sd": 0.01,
            "costs": [2, 1],
            "seed": 0,
        },
        "c_max": 14,
        "n_init_ground": 3,
        "n_init_cheap": 3,
        "seeds": {"design": 1, "run": 1},
        "repetitions": 1,
        "acquisition": {"n_candidates": 64, "n_local_refine": 3, "local_steps": 8},
        "gp_restarts": 2,
    }
    raw.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(raw))
    return path


class TestSeedGrid:
    def test_square(self):
        assert seed_grid(4, 0, 0) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_single(self):
        assert seed_grid(1, 5, 9) == [(5, 9)]

    def test_prime(self):
        assert len(seed_grid(5, 0, 0)) == 5
        assert len({d for d, _ in seed_grid(5, 0, 0)}) == 1

    def test_twenty_five(self):
        grid = seed_grid(25, 0, 0)
        assert len(grid) == 25
        assert len({d for d, _ in grid}) == 5


class TestCheckpointing:
    def test_carry_forward(self):
        trace = RunTrace(
            records=[],
            hv_curve=[(2.0, 0.1), (3.0, 0.1), (5.0, 0.4)],
            archive=ParetoArchive([1, 1]),
            config=None,
        )
        values = hv_at_integer_costs(trace, 6.0)
        np.testing.assert_allclose(values, [0.0, 0.0, 0.1, 0.1, 0.1, 0.4, 0.4])

    def test_aggregate_medians_recomputable(self):
        curves = {"fang-hpo": [np.array([0.0, 0.1, 0.3]), np.array([0.0, 0.2, 0.2])]}
        text = aggregate_csv(curves, 2.0)
        lines = text.strip().splitlines()
        assert lines[0] == "method,cost,hv_median,hv_sd,n_runs"
        rows = [line.split(",") for line in lines[1:]]
        medians = [float(r[2]) for r in rows]
        assert medians == [0.0, pytest.approx(0.15), pytest.approx(0.25)]


class TestRunCommand:
    def test_single_repetition_artifacts(self, tmp_path):
        config = synthetic_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", str(config), "--out", str(out)]) == 0
        assert (out / "run_000.csv").exists()
        assert (out / "run_000.json").exists()
        assert (out / "aggregate.csv").exists()
        summary = json.loads((out / "run_000.json").read_text())
        assert summary["error"] is None
        assert summary["cumulative_cost"] <= 14

    def test_four_repetitions_grid(self, tmp_path):
        config = synthetic_config(tmp_path, repetitions=4)
        out = tmp_path / "out"
        assert main(["run", str(config), "--out", str(out)]) == 0
        traces = sorted(out.glob("run_*.csv"))
        assert len(traces) == 4
        seeds = set()
        for summary_path in sorted(out.glob("run_*.json")):
            payload = json.loads(summary_path.read_text())
            seeds.add((payload["seeds"]["design"], payload["seeds"]["run"]))
        assert len(seeds) == 4
        assert len({d for d, _ in seeds}) == 2  # 2 design seeds x 2 run seeds

    def test_baseline_rows_at_matched_checkpoints(self, tmp_path):
        config = synthetic_config(tmp_path)
        out = tmp_path / "out"
        assert main(["run", str(config), "--out", str(out), "--baseline", "random-search"]) == 0
        text = (out / "aggregate.csv").read_text()
        lines = text.strip().splitlines()[1:]
        methods = {line.split(",")[0] for line in lines}
        assert methods == {"fang-hpo", "random-search"}
        fang_costs = [line.split(",")[1] for line in lines if line.startswith("fang-hpo,")]
        rs_costs = [line.split(",")[1] for line in lines if line.startswith("random-search,")]
        assert fang_costs == rs_costs

    def test_aggregate_medians_match_traces(self, tmp_path):
        config = synthetic_config(tmp_path, repetitions=2)
        out = tmp_path / "out"
        assert main(["run", str(config), "--out", str(out)]) == 0
        # Recompute the aggregate from the per-run trace files.
        curves = []
        for trace_path in sorted(out.glob("run_*.csv")):
            rows = [line.split(",") for line in trace_path.read_text().strip().splitlines()[1:]]
            curve = np.zeros(15)
            hv = 0.0
            k = 0
            entries = [(float(r[3]), float(r[-1])) for r in rows]
            for t in range(15):
                while k < len(entries) and entries[k][0] <= t:
                    hv = entries[k][1]
                    k += 1
                curve[t] = hv
            curves.append(curve)
        expected_medians = np.median(np.vstack(curves), axis=0)
        agg_rows = [
            line.split(",")
            for line in (out / "aggregate.csv").read_text().strip().splitlines()[1:]
            if line.startswith("fang-hpo,")
        ]
        got = np.array([float(r[2]) for r in agg_rows])
        np.testing.assert_allclose(got, expected_medians, atol=1e-15)

    def test_bad_config_exit_code(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["run", str(path)]) == 2


class TestValidateCommand:
    def test_valid_config(self, tmp_path, capsys):
        config = synthetic_config(tmp_path)
        assert main(["validate", str(config)]) == 0
        assert "config valid" in capsys.readouterr().out

    def test_init_cost_violation_named(self, tmp_path, capsys):
        config = synthetic_config(tmp_path, c_max=9)  # init cost 3*2+3*1 = 9
        assert main(["validate", str(config)]) == 1
        assert "C_max" in capsys.readouterr().out

    def test_unknown_benchmark(self, tmp_path):
        config = synthetic_config(
            tmp_path, sources={"kind": "synthetic", "benchmark": "bogus"}
        )
        assert main(["validate", str(config)]) == 1

    def test_mlp_preset_with_default_budget(self, tmp_path, capsys):
        raw = {"space": "mlp", "c_max": 200, "gp_restarts": 2}
        path = tmp_path / "mlp.json"
        path.write_text(json.dumps(raw))
        assert main(["validate", str(path)]) == 0


class TestEvaluatorCommandOverride:
    def test_env_var_overrides_config_command(self, tmp_path, monkeypatch):
        import sys

        stub_path = tmp_path / "stub.py"
        stub_path.write_text(
            "import json\n"
            "print(json.dumps({'protocol': 1, 'objectives': ['mce', 'dsp'],"
            " 'sources': [{'id': 1}, {'id': 2}]}), flush=True)\n"
        )
        raw = {
            "space": {"dims": [{"name": "u0", "lower": 0.0, "upper": 1.0}]},
            "sources": {"kind": "external", "command": ["/nonexistent"], "costs": [2, 1]},
            "c_max": 10,
        }
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps(raw))
        monkeypatch.setenv("FANG_EVALUATOR_CMD", f"{sys.executable} {stub_path}")
        assert main(["validate", str(config)]) == 0


class TestRandomSearch:
    def test_budget_and_archive(self):
        from fanghpo.sources import make_synthetic_suite
        from fanghpo.space import Dimension, SearchSpace

        space = SearchSpace([Dimension(f"u{i}", "real", 0, 1) for i in range(2)])
        suite = make_synthetic_suite("zdt1-miso", d=2)
        config = RunConfig(
            space=space,
            sources=suite[:1],
            c_max=20.0,
            n_init_ground=1,
            n_init_cheap=0,
            design_seed=3,
            run_seed=4,
        )
        trace = random_search(config)
        assert trace.cumulative_cost == 20.0
        assert len(trace.records) == 10
        assert all(r.source == 1 for r in trace.records)
        values = [hv for _, hv in trace.hv_curve]
        assert all(b >= a for a, b in zip(values, values[1:]))
