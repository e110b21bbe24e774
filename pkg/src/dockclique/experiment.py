"""End-to-end experiment runs: relaxation, circuit optimization, sampling, reporting."""
from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import ansatz, optimize
from .ansatz import AnsatzConfig, Family
from .encoding import CostDiagonal, build_cost_diagonal, build_qubo
from .oracle import OracleResult, max_weight_clique
from .phc4graph import DockingGraph, generate_synthetic, load_graph, to_dot
from .relax import (
    DEFAULT_EPSILON,
    RelaxedSolution,
    solve_linear_relaxation,
    solve_quadratic_relaxation,
    to_warm_start_angles,
)

WARM_STARTS = ("none", "linear", "quadratic")

# Synthetic stand-ins for the unpublished chemical instances. Weights stay below 1
# so penalty magnitudes 1 and 2 both exceed every vertex weight.
PRESETS = {
    "demo14": {
        "graph": {"n": 14, "edge_density": 0.3, "weight_range": [0.2, 0.9], "planted_clique": 4, "seed": 0},
        "solve": {"family": "dc", "warm_start": "quadratic", "penalty": 1.0, "layers": 1, "iters": 10000},
    },
    "demo17": {
        "graph": {
            "n": 17,
            "edge_density": 0.3,
            "weight_range": [0.2, 0.9],
            "planted_vertices": [0, 2, 7, 11, 14],
            "seed": 17,
        },
        "solve": {"family": "dc", "warm_start": "quadratic", "penalty": 1.0, "layers": 1, "iters": 40000},
    },
}


class SpecError(ValueError):
    """An experiment description that cannot be run as given."""


def preset_graph(name: str) -> DockingGraph:
    if name not in PRESETS:
        raise SpecError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    g = dict(PRESETS[name]["graph"])
    g["weight_range"] = tuple(g["weight_range"])
    return generate_synthetic(**g)


@dataclass(frozen=True)
class ExperimentSpec:
    graph: str | None = None
    preset: str | None = None
    synthetic: dict | None = None
    penalty: float = 1.0
    family: str = "dc"
    layers: int = 1
    warm_start: str = "none"
    epsilon: float = DEFAULT_EPSILON
    method: str = "nelder-mead"
    iters: int = 10000
    shots: int = 8192
    top_k: int = 10
    seed: int = 0
    label: str | None = None

    def __post_init__(self):
        sources = sum(x is not None for x in (self.graph, self.preset, self.synthetic))
        if sources != 1:
            raise SpecError("give exactly one graph source: a graph file, a preset, or synthetic parameters")
        if self.preset is not None and self.preset not in PRESETS:
            raise SpecError(f"unknown preset {self.preset!r}")
        if self.graph is not None and not Path(self.graph).is_file():
            raise SpecError(f"graph file not found: {self.graph}")
        if self.warm_start not in WARM_STARTS:
            raise SpecError(f"warm_start must be one of {WARM_STARTS}")
        try:
            fam = Family(self.family)
        except ValueError:
            raise SpecError(f"unknown family {self.family!r}") from None
        if fam.warm and self.warm_start == "none":
            raise SpecError(f"family {fam.value} needs a warm-start method (linear or quadratic)")
        if not self.penalty > 0:
            raise SpecError("penalty must be > 0")
        if self.layers < 1:
            raise SpecError("layers must be >= 1")
        if not 0 < self.epsilon < 0.5:
            raise SpecError("eps must lie in (0, 0.5)")
        if self.iters < 1:
            raise SpecError("iters must be >= 1")
        if self.shots < 1:
            raise SpecError("shots must be >= 1")
        if self.method not in {m.value for m in optimize.Method}:
            raise SpecError(f"unknown optimizer {self.method!r}")

    @classmethod
    def from_preset(cls, name: str, **overrides) -> "ExperimentSpec":
        if name not in PRESETS:
            raise SpecError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        fields = dict(PRESETS[name]["solve"], preset=name)
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**fields)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise SpecError(f"unknown spec fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if v is not None}

    @property
    def resolved_family(self) -> Family:
        """A warm-start method upgrades the plain families to their warm-start forms."""
        fam = Family(self.family)
        if self.warm_start != "none" and not fam.warm:
            return Family.WARM_START_DC if fam.includes_cd else Family.WARM_START
        return fam

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        return f"{self.warm_start}_P{self.penalty:g}_p{self.layers}"

    def load_graph(self) -> DockingGraph:
        if self.preset is not None:
            return preset_graph(self.preset)
        if self.synthetic is not None:
            params = dict(self.synthetic)
            if "weight_range" in params:
                params["weight_range"] = tuple(params["weight_range"])
            return generate_synthetic(**params)
        return load_graph(self.graph)


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    graph: DockingGraph
    trace: optimize.RunTrace
    report: optimize.FinalReport
    oracle: OracleResult
    relaxation: RelaxedSolution | None
    wall_time_s: float

    @property
    def matches_oracle(self) -> bool:
        sol = self.report.solution
        return sol is not None and sol.vertices == self.oracle.best_vertices

    def summary(self) -> dict:
        sol = self.report.solution
        return {
            "best_value": self.trace.best_value,
            "best_params": [float(p) for p in self.trace.best_params],
            "solution_bitstring": sol.bitstring if sol else None,
            "solution_vertices": list(sol.vertices) if sol else [],
            "valid": bool(sol is not None and sol.is_clique),
            "weight": sol.weight if sol else 0.0,
            "initial_value": float(self.trace.records[0].value),
            "evaluations": len(self.trace.records),
            "converged": self.trace.converged,
            "family": self.spec.resolved_family.value,
            "oracle_vertices": list(self.oracle.best_vertices),
            "oracle_weight": self.oracle.best_weight,
            "matches_oracle": self.matches_oracle,
            "spec": self.spec.to_dict(),
            "wall_time_s": self.wall_time_s,
        }

    def write(self, out: str | Path) -> None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2) + "\n")
        self.trace.write_csv(out / "trace.csv")
        (out / "histogram.json").write_text(json.dumps(self.report.to_dict(), indent=2) + "\n")
        sol = self.report.solution
        (out / "solution.dot").write_text(to_dot(self.graph, sol.vertices if sol else ()))
        if self.relaxation is not None:
            data = self.relaxation.to_dict()
            data["epsilon"] = self.spec.epsilon
            (out / "relaxation.json").write_text(json.dumps(data, indent=2) + "\n")


def _seeds(seed: int) -> dict:
    # independent streams for each random choice in a run
    ss = np.random.SeedSequence(seed).spawn(3)
    return {k: int(s.generate_state(1)[0]) for k, s in zip(("relax", "params", "shots"), ss)}


def relax_graph(graph: DockingGraph, method: str, penalty: float, seed: int = 0) -> RelaxedSolution:
    if method == "linear":
        return solve_linear_relaxation(graph)
    if method == "quadratic":
        return solve_quadratic_relaxation(build_qubo(graph, penalty), seed=seed)
    raise SpecError(f"unknown relaxation method {method!r}")


def build_ansatz(spec: ExperimentSpec, graph: DockingGraph, seed: int):
    relaxation = None
    angles = None
    if spec.warm_start != "none":
        relaxation = relax_graph(graph, spec.warm_start, spec.penalty, seed)
        angles = to_warm_start_angles(relaxation, spec.epsilon)
    return AnsatzConfig(spec.resolved_family, spec.layers, angles), relaxation


def run_experiment(spec: ExperimentSpec, graph: DockingGraph | None = None) -> ExperimentResult:
    t0 = time.perf_counter()
    graph = spec.load_graph() if graph is None else graph
    seeds = _seeds(spec.seed)
    diag: CostDiagonal = build_cost_diagonal(build_qubo(graph, spec.penalty))
    cfg, relaxation = build_ansatz(spec, graph, seeds["relax"])
    opt = optimize.OptimizerConfig(spec.method, spec.iters, seeds["params"])
    trace = optimize.run(opt, cfg, diag, ansatz.initial_parameters(cfg, seeds["params"]))
    report = optimize.sample_final(trace, cfg, diag, graph, spec.shots, seeds["shots"], spec.top_k)
    oracle = max_weight_clique(graph)
    return ExperimentResult(spec, graph, trace, report, oracle, relaxation, time.perf_counter() - t0)


def grid_specs(preset: str, penalties=(1.0, 2.0), layers=(1, 2), warm_starts=None, **overrides) -> list[ExperimentSpec]:
    """Penalty x layer grid on a preset, optionally crossed with warm-start methods."""
    base = ExperimentSpec.from_preset(preset, **overrides)
    warm_starts = warm_starts or (base.warm_start,)
    out = []
    for ws in warm_starts:
        for P in penalties:
            for p in layers:
                out.append(dataclasses.replace(base, warm_start=ws, penalty=float(P), layers=int(p), label=None))
    return out


def compare(specs: list[ExperimentSpec], workers: int = 1) -> list[ExperimentResult]:
    if len(specs) < 2:
        raise SpecError("need >= 2 specs to compare")
    graphs = [s.load_graph() for s in specs]
    if any(g != graphs[0] for g in graphs[1:]):
        raise SpecError("compared specs must share one graph")
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise SpecError(f"spec labels must be distinct, got {names}")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_experiment, specs))
    return [run_experiment(s, g) for s, g in zip(specs, graphs)]


def write_comparison(results: list[ExperimentResult], out: str | Path) -> None:
    """``comparison.csv`` holds aligned per-evaluation costs; ``comparison_runs.csv`` one row per run."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    names = [r.spec.name for r in results]
    columns = [r.trace.values for r in results]
    length = max(len(c) for c in columns)
    with open(out / "comparison.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["eval"] + names)
        for i in range(length):
            w.writerow([i] + [repr(float(c[i])) if i < len(c) else "" for c in columns])
    with open(out / "comparison_runs.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label", "warm_start", "penalty", "layers", "evaluations", "best_value",
                    "solution_vertices", "valid", "matches_oracle"])
        for r in results:
            sol = r.report.solution
            w.writerow([
                r.spec.name, r.spec.warm_start, r.spec.penalty, r.spec.layers, len(r.trace.records),
                repr(r.trace.best_value), " ".join(map(str, sol.vertices)) if sol else "",
                bool(sol is not None), r.matches_oracle,
            ])
