"""Penalized binary objective for max-weight clique, its energy table, and decoding.

Bit convention: bit ``i`` of an integer index is vertex ``i`` (vertex 0 is the
least significant bit). Display strings are written vertex 0 first, so the
string ``"100"`` is index 1.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .phc4graph import DockingGraph

DEFAULT_QUBIT_CAP = 26


class QubitCapError(MemoryError):
    """Raised when a 2**n table would exceed the configured qubit cap."""


def qubit_cap() -> int:
    return int(os.environ.get("DOCKCLIQUE_QUBIT_CAP", DEFAULT_QUBIT_CAP))


def check_cap(n: int, cap: int | None = None) -> None:
    cap = qubit_cap() if cap is None else cap
    if n > cap:
        raise QubitCapError(f"{n} qubits exceeds the cap of {cap} (set DOCKCLIQUE_QUBIT_CAP to raise it)")


def index_to_bitstring(z: int, n: int) -> str:
    return "".join("1" if z >> i & 1 else "0" for i in range(n))


def bitstring_to_index(s: str) -> int:
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bitstring: {s!r}")
    return sum(1 << i for i, c in enumerate(s) if c == "1")


@dataclass(frozen=True, eq=False)
class QuboProblem:
    """Maximize ``sum_i w_i x_i - penalty * #{violated non-edge pairs}``."""

    n: int
    linear: np.ndarray
    penalty_pairs: tuple[tuple[int, int], ...]
    penalty_magnitude: float

    def __post_init__(self):
        if not self.penalty_magnitude > 0:
            raise ValueError("penalty_magnitude must be > 0")

    def objective(self, x) -> float:
        """Objective at a 0/1 vector, or the continuous extension at a point of [0, 1]^n."""
        x = np.asarray(x, dtype=float)
        value = float(self.linear @ x)
        for i, j in self.penalty_pairs:
            value -= self.penalty_magnitude * x[i] * x[j]
        return value

    def gradient(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        g = self.linear.astype(float).copy()
        for i, j in self.penalty_pairs:
            g[i] -= self.penalty_magnitude * x[j]
            g[j] -= self.penalty_magnitude * x[i]
        return g

    def value(self, z: int) -> float:
        return self.objective([z >> i & 1 for i in range(self.n)])


def build_qubo(graph: DockingGraph, penalty_magnitude: float) -> QuboProblem:
    if graph.n == 0:
        raise ValueError("empty graph")
    return QuboProblem(graph.n, graph.weights.copy(), tuple(graph.non_edges()), float(penalty_magnitude))


@dataclass(frozen=True, eq=False)
class CostDiagonal:
    """Objective value of every basis state; ``energies[z]`` is F(z)."""

    n: int
    energies: np.ndarray
    penalty_magnitude: float = 0.0

    def save(self, path) -> None:
        """Little-endian float64 table next to a JSON header (``<path>.json``)."""
        path = Path(path)
        self.energies.astype("<f8").tofile(path)
        Path(str(path) + ".json").write_text(
            json.dumps({"n": self.n, "penalty_magnitude": self.penalty_magnitude}) + "\n"
        )

    @classmethod
    def load(cls, path) -> "CostDiagonal":
        path = Path(path)
        header = json.loads(Path(str(path) + ".json").read_text())
        energies = np.fromfile(path, dtype="<f8")
        if energies.shape[0] != 1 << header["n"]:
            raise ValueError("energy table length does not match header")
        return cls(header["n"], energies, header["penalty_magnitude"])


def build_cost_diagonal(qubo: QuboProblem, cap: int | None = None) -> CostDiagonal:
    n = qubo.n
    check_cap(n, cap)
    lower_partners: list[list[int]] = [[] for _ in range(n)]
    for i, j in qubo.penalty_pairs:
        lower_partners[max(i, j)].append(min(i, j))
    energies = np.zeros(1 << n)
    for k in range(n):
        half = 1 << k
        rest = np.arange(half, dtype=np.int64)
        # violated pairs (j, k) with j < k, counted from the lower half
        count = np.zeros(half)
        for j in lower_partners[k]:
            count += (rest >> j) & 1
        energies[half : 2 * half] = energies[:half] + qubo.linear[k] - qubo.penalty_magnitude * count
    return CostDiagonal(n, energies, qubo.penalty_magnitude)


@dataclass(frozen=True)
class CliqueReport:
    vertices: tuple[int, ...]
    is_clique: bool
    weight: float


def _as_bits(z, n: int) -> list[int]:
    if isinstance(z, str):
        if len(z) != n:
            raise ValueError(f"bitstring has length {len(z)}, graph has {n} vertices")
        bitstring_to_index(z)
        return [int(c) for c in z]
    if isinstance(z, (int, np.integer)):
        if not 0 <= z < 1 << n:
            raise ValueError(f"index {z} out of range for {n} vertices")
        return [int(z) >> i & 1 for i in range(n)]
    bits = [int(b) for b in z]
    if len(bits) != n:
        raise ValueError(f"bitstring has length {len(bits)}, graph has {n} vertices")
    return bits


def decode(z: str | int | Sequence[int], graph: DockingGraph) -> CliqueReport:
    """Selected vertices, whether they form a clique, and their total weight.

    ``z`` is a display string (vertex 0 first), an integer index, or a 0/1 sequence.
    """
    bits = _as_bits(z, graph.n)
    vertices = tuple(i for i, b in enumerate(bits) if b)
    ok = all(graph.has_edge(a, b) for k, a in enumerate(vertices) for b in vertices[k + 1 :])
    weight = float(sum(graph.weights[i] for i in vertices))
    return CliqueReport(vertices, ok, weight)
