"""Information sources: query costs, synthetic benchmarks, external evaluators.

Source 1 is the ground truth. Cheap synthetic sources perturb the ground
truth with a smooth location-dependent bias plus seeded Gaussian noise.
External sources talk to a separate evaluator process over newline-delimited
JSON on its stdin/stdout: the evaluator sends a handshake line at startup,
then answers one request at a time, in order.
"""

from __future__ import annotations

import json
import math
import queue
import shlex
import subprocess
import threading
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .space import Location, SearchSpace


class SourceError(RuntimeError):
    """An information source could not be queried."""


class ProtocolError(RuntimeError):
    """The external evaluator violated the wire protocol."""


@dataclass(frozen=True)
class SyntheticBinding:
    benchmark: str
    bias: float = 0.0
    noise_sd: float = 0.0
    seed: int = 0


@dataclass
class ExternalBinding:
    client: "EvaluatorClient"
    descriptor: dict = field(default_factory=dict)


@dataclass(frozen=True)
class EvalResult:
    objectives: np.ndarray
    wall_cost: float
    seed_used: int


@dataclass
class SourceSpec:
    """Identity, query cost and binding of one information source."""

    id: int
    cost: float
    kind: str  # "synthetic" | "external"
    binding: SyntheticBinding | ExternalBinding

    def __post_init__(self) -> None:
        if self.cost <= 0:
            raise ValueError("query cost must be positive")
        if self.kind not in ("synthetic", "external"):
            raise ValueError(f"unknown source kind {self.kind!r}")


def zdt1_miso(u: np.ndarray) -> np.ndarray:
    """Bi-objective benchmark with both objectives in [0, 1].

    f1 = u_1 and f2 = 1 - sqrt(f1 / g) with g = 1 + 9 * mean(u_2..d); the
    optimal trade-offs sit at u_2..d = 0, where f2 = 1 - sqrt(f1).
    """
    u = np.asarray(u, dtype=float).reshape(-1)
    if u.size < 2:
        raise ValueError("benchmark needs d >= 2")
    f1 = float(u[0])
    g = 1.0 + 9.0 * float(np.mean(u[1:]))
    f2 = 1.0 - math.sqrt(f1 / g)
    return np.array([f1, f2])


BENCHMARKS = {"zdt1-miso": zdt1_miso}


def _cheap_bias(u: np.ndarray, amplitude: float, n_objectives: int) -> np.ndarray:
    # Smooth nonnegative field in [0, amplitude], equal to +amplitude at the
    # origin. One-sided (pessimistic) like a smaller-sample estimate: the
    # cheap source never reports a better value than the truth.
    mean_u = float(np.mean(u))
    return np.array(
        [
            amplitude * 0.5 * (1.0 + math.cos(2.0 * math.pi * (m + 1) * mean_u))
            for m in range(n_objectives)
        ]
    )


def _noise_rng(binding: SyntheticBinding, source_id: int, seed: int, u: np.ndarray) -> np.random.Generator:
    coords = np.frombuffer(np.ascontiguousarray(u, dtype=np.float64).tobytes(), dtype=np.uint32)
    entropy = [binding.seed & 0xFFFFFFFF, source_id, seed & 0xFFFFFFFF, *coords.tolist()]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def _query_synthetic(source: SourceSpec, loc: np.ndarray, seed: int) -> EvalResult:
    binding = source.binding
    try:
        truth_fn = BENCHMARKS[binding.benchmark]
    except KeyError:
        raise SourceError(f"unknown benchmark {binding.benchmark!r}") from None
    started = time.perf_counter()
    y = truth_fn(loc)
    if source.id != 1:
        y = y + _cheap_bias(loc, binding.bias, y.size)
        if binding.noise_sd > 0:
            rng = _noise_rng(binding, source.id, seed, loc)
            y = y + binding.noise_sd * rng.standard_normal(y.size)
        y = np.clip(y, 0.0, 1.0)
    return EvalResult(
        objectives=y, wall_cost=time.perf_counter() - started, seed_used=seed
    )


def query(
    source: SourceSpec, loc: Location, seed: int, space: SearchSpace | None = None
) -> EvalResult:
    """Evaluate one source at a unit-cube location.

    Synthetic sources are pure functions of (location, seed). External
    sources decode the location into native values and send one request to
    the evaluator process; the configured cost, not wall time, is what the
    budget is charged.
    """
    u = np.asarray(loc, dtype=float).reshape(-1)
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("location outside the unit cube")
    if source.kind == "synthetic":
        return _query_synthetic(source, u, seed)
    if space is None:
        raise ValueError("external sources need the search space to decode locations")
    binding = source.binding
    started = time.perf_counter()
    response = binding.client.query(source.id, space.decode_dict(u), cv_seed=seed)
    objectives = np.asarray(response["objectives"], dtype=float)
    if not np.all(np.isfinite(objectives)):
        raise ProtocolError(f"non-finite objectives from evaluator: {objectives}")
    return EvalResult(
        objectives=objectives,
        wall_cost=float(response.get("wall_seconds", time.perf_counter() - started)),
        seed_used=seed,
    )


def make_synthetic_suite(
    name: str,
    d: int,
    cheap_bias: float = 0.05,
    cheap_noise_sd: float = 0.0,
    seed: int = 0,
    costs: Sequence[float] = (2.0, 1.0),
) -> list[SourceSpec]:
    """Ground truth plus one biased/noisy cheap source per extra cost entry."""
    if d < 2:
        raise ValueError("synthetic suite needs d >= 2")
    if name not in BENCHMARKS:
        raise SourceError(f"unknown benchmark {name!r}")
    specs = [
        SourceSpec(
            id=1,
            cost=float(costs[0]),
            kind="synthetic",
            binding=SyntheticBinding(benchmark=name, seed=seed),
        )
    ]
    for i, cost in enumerate(costs[1:], start=2):
        specs.append(
            SourceSpec(
                id=i,
                cost=float(cost),
                kind="synthetic",
                binding=SyntheticBinding(
                    benchmark=name, bias=cheap_bias, noise_sd=cheap_noise_sd, seed=seed
                ),
            )
        )
    return specs


class EvaluatorClient:
    """One evaluator subprocess, queried strictly sequentially.

    The evaluator must print a handshake line at startup, then answer each
    request line with exactly one response line carrying the same id.
    """

    def __init__(self, command: Sequence[str] | str, timeout: float = 600.0, max_retries: int = 1):
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self.timeout = timeout
        self.max_retries = max_retries
        self.handshake: dict = {}
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue = queue.Queue()
        self._next_id = 0
        self._start()

    def _start(self) -> None:
        try:
            self._proc = subprocess.Popen(
                self.command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise SourceError(f"cannot start evaluator {self.command!r}: {exc}") from exc
        self._lines = queue.Queue()
        reader = threading.Thread(
            target=self._pump, args=(self._proc.stdout, self._lines), daemon=True
        )
        reader.start()
        self.handshake = self._read_message()
        if self.handshake.get("protocol") != 1:
            raise ProtocolError(f"unsupported handshake: {self.handshake}")

    @staticmethod
    def _pump(stream, sink: queue.Queue) -> None:
        for line in stream:
            sink.put(line)
        sink.put(None)

    def _read_message(self) -> dict:
        try:
            line = self._lines.get(timeout=self.timeout)
        except queue.Empty:
            raise SourceError(f"evaluator timed out after {self.timeout}s") from None
        if line is None:
            raise SourceError("evaluator closed its output stream")
        try:
            message = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"malformed evaluator message: {line!r}") from exc
        if not isinstance(message, dict):
            raise ProtocolError(f"evaluator message is not an object: {message!r}")
        return message

    def _send(self, message: dict) -> None:
        assert self._proc is not None and self._proc.stdin is not None
        self._proc.stdin.write(json.dumps(message) + "\n")
        self._proc.stdin.flush()

    def query(self, source_id: int, values: dict, cv_seed: int) -> dict:
        """One request/response round trip; restarts the process on timeout."""
        attempts = 0
        last_error: Exception | None = None
        while attempts <= self.max_retries:
            attempts += 1
            self._next_id += 1
            request = {
                "id": self._next_id,
                "source": int(source_id),
                "values": values,
                "cv_seed": int(cv_seed),
            }
            try:
                self._send(request)
                response = self._read_message()
            except (SourceError, BrokenPipeError, OSError) as exc:
                last_error = exc
                try:
                    self._restart()
                except (SourceError, ProtocolError, OSError) as restart_exc:
                    last_error = restart_exc
                    break
                continue
            if response.get("id") != request["id"]:
                raise ProtocolError(
                    f"response id {response.get('id')} does not match request {request['id']}"
                )
            if "error" in response:
                raise ProtocolError(f"evaluator error: {response['error']}")
            if "objectives" not in response:
                raise ProtocolError(f"response missing objectives: {response}")
            return response
        raise SourceError(
            f"evaluator unreachable after {attempts} attempts: {last_error}"
        )

    def _restart(self) -> None:
        self.close()
        self._start()

    def close(self) -> None:
        if self._proc is None:
            return
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.close()
            self._proc.wait(timeout=5.0)
        except (OSError, subprocess.TimeoutExpired):
            self._proc.kill()
        self._proc = None

    def __enter__(self) -> "EvaluatorClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def make_external_suite(
    command: Sequence[str] | str,
    costs: Sequence[float] = (2.0, 1.0),
    timeout: float = 600.0,
) -> tuple[EvaluatorClient, list[SourceSpec]]:
    """Spawn an evaluator and build one SourceSpec per handshake descriptor."""
    client = EvaluatorClient(command, timeout=timeout)
    descriptors = client.handshake.get("sources", [])
    if not descriptors:
        client.close()
        raise ProtocolError("evaluator handshake declared no sources")
    if len(costs) < len(descriptors):
        client.close()
        raise ValueError(f"need a cost for each of the {len(descriptors)} sources")
    specs = []
    for descriptor, cost in zip(sorted(descriptors, key=lambda s: s["id"]), costs):
        specs.append(
            SourceSpec(
                id=int(descriptor["id"]),
                cost=float(cost),
                kind="external",
                binding=ExternalBinding(client=client, descriptor=dict(descriptor)),
            )
        )
    return client, specs
