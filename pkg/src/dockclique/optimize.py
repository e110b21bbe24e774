"""Gradient-free outer loop that maximizes the circuit expectation, with tracing."""
from __future__ import annotations

import csv
import enum
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import ansatz
from .encoding import CostDiagonal, bitstring_to_index, decode
from .phc4graph import DockingGraph
from .simulator import SampleHistogram, sample


class Method(str, enum.Enum):
    NELDER_MEAD = "nelder-mead"
    SPSA = "spsa"


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    method: Method = Method.NELDER_MEAD
    max_evaluations: int = 10000
    seed: int = 0
    tolerance: float = 1e-6
    initial_step: float = 0.25

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")


@dataclass(frozen=True)
class EvalRecord:
    index: int
    params: np.ndarray
    value: float
    wall_time: float


@dataclass
class RunTrace:
    records: list[EvalRecord] = field(default_factory=list)
    best_params: np.ndarray | None = None
    best_value: float = -np.inf
    converged: bool = False

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    def best_so_far(self) -> np.ndarray:
        return np.maximum.accumulate(self.values)

    @property
    def wall_time(self) -> float:
        return float(sum(r.wall_time for r in self.records))

    def write_csv(self, path) -> None:
        k = len(self.records[0].params) if self.records else 0
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eval", "expectation"] + [f"param_{i}" for i in range(k)])
            for r in self.records:
                w.writerow([r.index, repr(r.value)] + [repr(float(p)) for p in r.params])


class _Budget(Exception):
    pass


class _Objective:
    """Objective wrapper (internally minimized) that records every call and enforces the budget."""

    def __init__(self, fn, budget: int, trace: RunTrace, sign: float):
        self.fn, self.budget, self.trace, self.sign = fn, budget, trace, sign
        self.best_internal, self.best_x = np.inf, None

    @property
    def remaining(self) -> int:
        return self.budget - len(self.trace.records)

    def __call__(self, x) -> float:
        if self.remaining <= 0:
            raise _Budget
        x = np.array(x, dtype=float)
        t0 = time.perf_counter()
        value = float(self.fn(x))
        dt = time.perf_counter() - t0
        if not np.isfinite(value):
            raise OptimizationError(f"non-finite expectation {value} at evaluation {len(self.trace.records)}, params={x}")
        self.trace.records.append(EvalRecord(len(self.trace.records), x, value, dt))
        internal = -self.sign * value
        if internal < self.best_internal:
            self.best_internal, self.best_x = internal, x
        return internal


def _simplex(x0: np.ndarray, step: float) -> np.ndarray:
    return np.vstack([x0, x0 + step * np.eye(x0.shape[0])])


def _nelder_mead(obj: _Objective, x0: np.ndarray, config: OptimizerConfig) -> bool:
    converged = False
    start = x0
    for _attempt in range(2):
        if obj.remaining <= 0:
            break
        options = {
            "maxfev": obj.remaining,
            "maxiter": 10**9,
            "xatol": config.tolerance,
            "fatol": config.tolerance,
            "initial_simplex": _simplex(start, config.initial_step),
        }
        try:
            res = minimize(obj, start, method="Nelder-Mead", options=options)
        except _Budget:
            return False
        converged = bool(res.success)
        if not converged:
            break
        # restart once from the best point with a re-inflated simplex
        start = obj.best_x
    return converged


def _spsa(obj: _Objective, x0: np.ndarray, config: OptimizerConfig) -> bool:
    """Standard SPSA gains (a_k = a/(k+1+A)^0.602, c_k = c/(k+1)^0.101)."""
    rng = np.random.default_rng([config.seed, 1])
    a, c = 1.0, 0.2
    stability = 0.1 * config.max_evaluations / 2
    x = x0.copy()
    k = 0
    try:
        obj(x)
        while obj.remaining >= 2:
            ak = a / (k + 1 + stability) ** 0.602
            ck = c / (k + 1) ** 0.101
            delta = rng.choice([-1.0, 1.0], size=x.shape[0])
            g = (obj(x + ck * delta) - obj(x - ck * delta)) / (2 * ck) * delta
            step = ak * g
            x = x - step
            k += 1
            if np.linalg.norm(step) < config.tolerance:
                return True
    except _Budget:
        pass
    return False


def minimize_traced(fn, x0, config: OptimizerConfig, maximize: bool = True) -> RunTrace:
    """Optimize a scalar function of a parameter vector, recording every call.

    The trace holds raw function values; ``best_value`` is their maximum, or
    their minimum when ``maximize`` is false.
    """
    trace = RunTrace()
    obj = _Objective(fn, config.max_evaluations, trace, 1.0 if maximize else -1.0)
    x0 = np.asarray(x0, dtype=float)
    if config.method is Method.NELDER_MEAD:
        trace.converged = _nelder_mead(obj, x0, config)
    else:
        trace.converged = _spsa(obj, x0, config)
    vals = trace.values
    i = int(np.argmax(vals) if maximize else np.argmin(vals))
    trace.best_value, trace.best_params = float(vals[i]), trace.records[i].params
    return trace


def run(
    config: OptimizerConfig,
    ansatz_config: ansatz.AnsatzConfig,
    diag: CostDiagonal,
    initial_params=None,
) -> RunTrace:
    """Maximize the circuit expectation; deterministic for a fixed seed."""
    if initial_params is None:
        initial_params = ansatz.initial_parameters(ansatz_config, config.seed)
    return minimize_traced(lambda p: ansatz.evaluate(ansatz_config, diag, p), initial_params, config)


@dataclass(frozen=True)
class TopEntry:
    bitstring: str
    count: int
    objective: float
    vertices: tuple[int, ...]
    is_clique: bool
    weight: float


@dataclass
class FinalReport:
    histogram: SampleHistogram
    top: list[TopEntry]
    solution: TopEntry | None

    def to_dict(self) -> dict:
        return {
            "shots": self.histogram.shots,
            "top": [
                {
                    "bitstring": e.bitstring,
                    "count": e.count,
                    "objective": e.objective,
                    "vertices": list(e.vertices),
                    "valid": e.is_clique,
                    "weight": e.weight,
                }
                for e in self.top
            ],
            "counts": dict(sorted(self.histogram.counts.items())),
        }


def sample_final(
    trace: RunTrace,
    ansatz_config: ansatz.AnsatzConfig,
    diag: CostDiagonal,
    graph: DockingGraph,
    shots: int = 8192,
    seed: int = 0,
    k: int = 10,
) -> FinalReport:
    """Sample the best circuit and pick the highest-objective valid clique among the top ``k``."""
    sv = ansatz.final_state(ansatz_config, diag, trace.best_params)
    hist = sample(sv, shots, seed)
    entries = []
    for bits, count in hist.counts.items():
        rep = decode(bits, graph)
        entries.append(
            TopEntry(bits, count, float(diag.energies[bitstring_to_index(bits)]), rep.vertices, rep.is_clique, rep.weight)
        )
    entries.sort(key=lambda e: (-e.count, -e.objective, e.bitstring))
    top = entries[:k]
    valid = [e for e in top if e.is_clique]
    solution = min(valid, key=lambda e: (-e.objective, -e.count, e.bitstring)) if valid else None
    return FinalReport(hist, top, solution)
