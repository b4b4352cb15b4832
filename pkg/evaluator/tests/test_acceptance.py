"""Secondary acceptance: metric oracles and the end-to-end pipeline smoke.

The smoke test drives the optimizer CLI against this evaluator over the
wire protocol (CLI -> subprocess -> stratified-CV training) on the bundled
500-row dataset and checks the budget/archive invariants on the trace.
"""

import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from fairness_evaluator.data import DatasetSpec, load_dataset
from fairness_evaluator.metrics import dsp, dsp_aggregate, mce

BUNDLED = Path(__file__).resolve().parents[1] / "src" / "fairness_evaluator" / "data" / "synthetic500.csv"


def report(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    print(f"[acceptance] {status}: {name}" + (f" ({detail})" if detail else ""))
    assert passed, f"{name}: {detail}"


class TestMetricOracle:
    def test_hand_computed_examples(self):
        checks = [
            mce([1, 0, 1, 0], [1, 0, 1, 0]) == 0.0,
            mce([1, 0], [0, 1]) == 1.0,
            mce([1, 0, 1, 0], [1, 1, 1, 0]) == 0.25,
            dsp([1, 0, 1, 1], [0, 0, 1, 1]) == 0.5,
            dsp([1, 1, 1, 1], [0, 1, 0, 1]) == 0.0,
            dsp([1, 0, 1, 0], [0, 0, 1, 1]) == 0.0,
            dsp_aggregate([0.1]) == 0.1,
            dsp_aggregate([0.1, 0.3]) == 0.3,
            dsp_aggregate([0.0, 0.0]) == 0.0,
        ]
        report("DSP/MCE unit oracle: hand-computed examples exact", all(checks))

    def test_constant_predictor_dsp_zero_on_any_dataset(self):
        rng = np.random.default_rng(123)
        ok = True
        for _ in range(20):
            n = int(rng.integers(2, 60))
            sensitive = rng.integers(0, 2, n)
            for constant in (0, 1):
                predictions = np.full(n, constant)
                import warnings

                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    ok = ok and dsp(predictions, sensitive) == 0.0
        report("DSP/MCE unit oracle: constant predictor DSP = 0", ok)


@pytest.mark.slow
class TestEndToEndSmoke:
    def test_full_pipeline(self, tmp_path):
        started = time.perf_counter()
        assert BUNDLED.exists(), "bundled dataset missing"
        frame_rows = BUNDLED.read_text().strip().splitlines()
        report("Smoke: bundled dataset has 500 rows", len(frame_rows) == 501)

        service_config = {
            "dataset": {
                "path": str(BUNDLED),
                "target": "label",
                "sensitive": ["group"],
                "subsample_seed": 0,
            },
            "algorithm": "mlp",
            "sources": [{"id": 1, "fraction": 1.0}, {"id": 2, "fraction": 0.5}],
        }
        service_path = tmp_path / "service.json"
        service_path.write_text(json.dumps(service_config))

        run_config = {
            "space": "mlp",
            "sources": {
                "kind": "external",
                "command": [sys.executable, "-m", "fairness_evaluator", str(service_path)],
                "costs": [2, 1],
                "timeout": 300,
            },
            "c_max": 60,
            "seeds": {"design": 3, "run": 3},
            "repetitions": 1,
            "acquisition": {"n_candidates": 256, "n_local_refine": 5, "local_steps": 15},
            "gp_restarts": 4,
        }
        config_path = tmp_path / "run.json"
        config_path.write_text(json.dumps(run_config))

        out_dir = tmp_path / "out"
        proc = subprocess.run(
            [sys.executable, "-m", "fanghpo.cli", "run", str(config_path), "--out", str(out_dir)],
            capture_output=True,
            text=True,
            timeout=590,
        )
        report(
            "Smoke: pipeline completes with exit status 0",
            proc.returncode == 0,
            proc.stderr[-500:] if proc.returncode else "",
        )

        trace_path = out_dir / "run_000.csv"
        rows = [line.split(",") for line in trace_path.read_text().strip().splitlines()[1:]]
        sources = [int(r[1]) for r in rows]
        report(
            "Smoke: both sources queried at least once",
            {1, 2} <= set(sources),
            f"sources seen: {sorted(set(sources))}",
        )

        cum = [float(r[3]) for r in rows]
        budget_ok = all(c <= 60.0 + 1e-9 for c in cum) and all(
            b > a for a, b in zip(cum, cum[1:])
        )
        spent_ok = cum[-1] > 60.0 - 2.0
        report(
            "Smoke: budget law holds at every record",
            budget_ok and spent_ok,
            f"final cost {cum[-1]}",
        )

        hv = [float(r[-1]) for r in rows]
        report("Smoke: hv curve nondecreasing", all(b >= a for a, b in zip(hv, hv[1:])))

        summary = json.loads((out_dir / "run_000.json").read_text())
        archive_ok = all(entry["source"] == 1 for entry in summary["archive"])
        metrics_ok = all(
            0.0 <= v <= 1.0 for entry in summary["archive"] for v in entry["outcome"]
        )
        report(
            "Smoke: archive built from ground-truth observations in [0,1]^2",
            archive_ok and metrics_ok,
            f"archive size {len(summary['archive'])}",
        )

        elapsed = time.perf_counter() - started
        report("Smoke: runtime under 10 minutes", elapsed < 600.0, f"{elapsed:.0f}s")
