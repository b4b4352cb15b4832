"""The stdin/stdout protocol loop.

Startup prints one handshake line; afterwards every request line gets
exactly one response line with the same id, in order. Malformed requests
produce an error response and the loop continues. Only protocol messages
go to stdout; diagnostics belong on stderr.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

from .data import DatasetSpec, load_dataset
from .cv import FoldTrainingError, evaluate

PROTOCOL_VERSION = 1
OBJECTIVES = ["mce", "dsp"]


@dataclass(frozen=True)
class ServiceConfig:
    dataset: DatasetSpec
    algorithm: str
    sources: dict[int, float]  # id -> dataset fraction

    @staticmethod
    def from_dict(raw: dict) -> "ServiceConfig":
        ds = raw["dataset"]
        sources = {int(s["id"]): float(s.get("fraction", 1.0)) for s in raw.get(
            "sources", [{"id": 1, "fraction": 1.0}, {"id": 2, "fraction": 0.5}]
        )}
        if 1 not in sources:
            raise ValueError("a source with id 1 (ground truth) is required")
        return ServiceConfig(
            dataset=DatasetSpec(
                path=ds["path"],
                target=ds["target"],
                sensitive=tuple(ds["sensitive"]),
                subsample_seed=int(ds.get("subsample_seed", 0)),
            ),
            algorithm=raw.get("algorithm", "mlp"),
            sources=sources,
        )


def handshake_message(config: ServiceConfig) -> dict:
    return {
        "protocol": PROTOCOL_VERSION,
        "objectives": OBJECTIVES,
        "sources": [
            {"id": source_id, "fraction": fraction}
            for source_id, fraction in sorted(config.sources.items())
        ],
    }


def handle_request(request: dict, config: ServiceConfig, dataset) -> dict:
    request_id = request.get("id")
    try:
        source_id = int(request["source"])
        if source_id not in config.sources:
            raise ValueError(f"unknown source {source_id}")
        values = request["values"]
        cv_seed = int(request.get("cv_seed", 0))
        started = time.perf_counter()
        mce_value, dsp_value = evaluate(
            config.algorithm, values, dataset, source_id, cv_seed
        )
        return {
            "id": request_id,
            "objectives": [mce_value, dsp_value],
            "wall_seconds": time.perf_counter() - started,
        }
    except (KeyError, TypeError, ValueError, FoldTrainingError) as exc:
        return {"id": request_id, "error": str(exc)}


def serve(config: ServiceConfig, stdin, stdout) -> None:
    """Run the loop until stdin closes."""
    dataset = load_dataset(config.dataset, config.sources)
    stdout.write(json.dumps(handshake_message(config)) + "\n")
    stdout.flush()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = json.loads(line)
            if not isinstance(request, dict):
                raise ValueError("request must be a JSON object")
        except (json.JSONDecodeError, ValueError) as exc:
            stdout.write(json.dumps({"id": None, "error": f"malformed request: {exc}"}) + "\n")
            stdout.flush()
            continue
        response = handle_request(request, config, dataset)
        stdout.write(json.dumps(response) + "\n")
        stdout.flush()
