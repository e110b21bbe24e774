"""Continuous relaxations of max-weight clique and the warm-start angle map."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .encoding import QuboProblem
from .phc4graph import DockingGraph

DEFAULT_EPSILON = 0.25
LP_MAX_ITERATIONS = 200
_TOL = 1e-9


class RelaxMethod(str, enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"


@dataclass(frozen=True, eq=False)
class RelaxedSolution:
    values: np.ndarray
    objective: float
    method: RelaxMethod
    iterations_used: int
    converged: bool = True
    history: tuple[float, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "values": [float(v) for v in self.values],
            "objective": float(self.objective),
            "method": self.method.value,
            "iterations_used": int(self.iterations_used),
        }


def bounded_simplex(c, A, b, upper, max_iterations: int):
    """Maximize ``c @ x`` s.t. ``A @ x <= b``, ``0 <= x <= upper`` with ``b >= 0``.

    Primal simplex over the tableau of ``[A | I]`` with slack starting basis.
    Nonbasic variables sit at either bound; Bland's rule picks both the
    entering and the leaving variable. Returns ``(x, iterations, converged)``;
    every iterate is feasible, so a truncated run still returns a feasible point.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    total = n + m
    T = np.hstack([A, np.eye(m)])
    cost = np.concatenate([np.asarray(c, dtype=float), np.zeros(m)])
    ub = np.concatenate([np.asarray(upper, dtype=float), np.full(m, np.inf)])
    basis = list(range(n, total))
    at_upper = np.zeros(total, dtype=bool)
    xb = np.asarray(b, dtype=float).copy()

    iterations = 0
    while True:
        reduced = cost - cost[basis] @ T if m else cost.copy()
        entering, direction = -1, 0
        in_basis = np.zeros(total, dtype=bool)
        in_basis[basis] = True
        for j in range(total):
            if in_basis[j]:
                continue
            if not at_upper[j] and reduced[j] > _TOL and ub[j] > 0:
                entering, direction = j, 1
                break
            if at_upper[j] and reduced[j] < -_TOL:
                entering, direction = j, -1
                break
        if entering < 0:
            converged = True
            break
        if iterations >= max_iterations:
            converged = False
            break
        iterations += 1

        # basic values move by -direction * t * column
        delta = -direction * T[:, entering]
        step, leave_row, leave_to_upper = ub[entering], -1, False
        for r in range(m):
            k = basis[r]
            if delta[r] < -_TOL:
                ratio, to_upper = xb[r] / -delta[r], False
            elif delta[r] > _TOL and np.isfinite(ub[k]):
                ratio, to_upper = (ub[k] - xb[r]) / delta[r], True
            else:
                continue
            ratio = max(ratio, 0.0)
            if ratio < step - _TOL or (abs(ratio - step) <= _TOL and leave_row >= 0 and k < basis[leave_row]):
                step, leave_row, leave_to_upper = ratio, r, to_upper

        xb += step * delta
        if leave_row < 0:
            # bound flip: the entering variable crosses to its other bound
            at_upper[entering] = not at_upper[entering]
            continue

        start = ub[entering] if at_upper[entering] else 0.0
        leaving = basis[leave_row]
        pivot = T[leave_row, entering]
        T[leave_row] /= pivot
        for r in range(m):
            if r != leave_row and T[r, entering] != 0.0:
                T[r] -= T[r, entering] * T[leave_row]
        xb[leave_row] = start + direction * step
        basis[leave_row] = entering
        at_upper[entering] = False
        at_upper[leaving] = leave_to_upper

    x = np.where(at_upper, ub, 0.0)
    x[basis] = xb
    return np.clip(x[:n], 0.0, np.asarray(upper, dtype=float)), iterations, converged


def solve_linear_relaxation(graph: DockingGraph, max_iterations: int = LP_MAX_ITERATIONS) -> RelaxedSolution:
    """LP relaxation: maximize ``sum w_i x_i`` with ``x_i + x_j <= 1`` on every non-edge."""
    if graph.n < 1:
        raise ValueError("empty graph")
    non_edges = graph.non_edges()
    A = np.zeros((len(non_edges), graph.n))
    for r, (i, j) in enumerate(non_edges):
        A[r, i] = A[r, j] = 1.0
    x, iterations, converged = bounded_simplex(
        graph.weights, A, np.ones(len(non_edges)), np.ones(graph.n), max_iterations
    )
    return RelaxedSolution(x, float(graph.weights @ x), RelaxMethod.LINEAR, iterations, converged)


def solve_quadratic_relaxation(
    qubo: QuboProblem,
    steps: int = 500,
    step_size: float = 0.05,
    seed: int = 0,
    jitter: float = 0.01,
) -> RelaxedSolution:
    """Projected gradient ascent of the continuous penalized objective over the unit box."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    rng = np.random.default_rng(seed)
    x = np.clip(0.5 + rng.uniform(-jitter, jitter, qubo.n), 0.0, 1.0)
    history = [qubo.objective(x)]
    used = 0
    for used in range(1, steps + 1):
        nxt = np.clip(x + step_size * qubo.gradient(x), 0.0, 1.0)
        moved = float(np.max(np.abs(nxt - x)))
        x = nxt
        history.append(qubo.objective(x))
        if moved < 1e-12:
            break
    return RelaxedSolution(
        x, history[-1], RelaxMethod.QUADRATIC, used, converged=used < steps, history=tuple(history)
    )


@dataclass(frozen=True, eq=False)
class WarmStartAngles:
    thetas: np.ndarray
    epsilon: float

    @property
    def n(self) -> int:
        return int(self.thetas.shape[0])

    @property
    def probabilities(self) -> np.ndarray:
        """Probability of reading 1 on each qubit of the prepared product state."""
        return np.sin(self.thetas / 2) ** 2

    @classmethod
    def uniform(cls, n: int) -> "WarmStartAngles":
        return cls(np.full(n, math.pi / 2), 0.5 - 1e-12)


def to_warm_start_angles(sol: RelaxedSolution | np.ndarray, epsilon: float = DEFAULT_EPSILON) -> WarmStartAngles:
    """Clip relaxed values into ``[eps, 1 - eps]`` and map ``c -> 2 arcsin(sqrt(c))``."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5), got {epsilon}")
    values = sol.values if isinstance(sol, RelaxedSolution) else np.asarray(sol, dtype=float)
    c = np.clip(values, epsilon, 1.0 - epsilon)
    return WarmStartAngles(2.0 * np.arcsin(np.sqrt(c)), float(epsilon))
