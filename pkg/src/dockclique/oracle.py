"""Exact references for the max-weight clique problem and its energy table."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .phc4graph import DockingGraph

EXHAUSTIVE_CAP = 24
TIE_RTOL = 1e-9


class OracleMethod(str, enum.Enum):
    EXHAUSTIVE = "exhaustive"
    BRANCH_AND_BOUND = "branch_and_bound"


@dataclass(frozen=True)
class OracleResult:
    best_vertices: tuple[int, ...]
    best_weight: float
    count_optimal: int
    method: OracleMethod

    def to_dict(self) -> dict:
        return {
            "best_vertices": list(self.best_vertices),
            "best_weight": self.best_weight,
            "count_optimal": self.count_optimal,
            "method": self.method.value,
        }


def _ties(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_RTOL * max(1.0, abs(a), abs(b))


def _vertices(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def max_weight_clique_exhaustive(graph: DockingGraph) -> OracleResult:
    """Scan every subset; ties go to the lexicographically smallest vertex tuple."""
    n = graph.n
    if n > EXHAUSTIVE_CAP:
        raise ValueError(f"exhaustive oracle refuses n={n} > {EXHAUSTIVE_CAP}; use max_weight_clique_bb")
    if n == 0:
        return OracleResult((), 0.0, 1, OracleMethod.EXHAUSTIVE)
    adj = graph.adjacency_masks()
    size = 1 << n
    is_clique = np.zeros(size, dtype=bool)
    weight = np.zeros(size)
    is_clique[0] = True
    for k in range(n):
        half = 1 << k
        rest = np.arange(half, dtype=np.int64)
        # z = rest | bit k is a clique iff rest is and rest only uses neighbours of k
        is_clique[half : 2 * half] = is_clique[:half] & ((rest & ~adj[k]) == 0)
        weight[half : 2 * half] = weight[:half] + graph.weights[k]
    w = np.where(is_clique, weight, -np.inf)
    best = float(w.max())
    tied = np.nonzero(np.abs(w - best) <= TIE_RTOL * max(1.0, abs(best)))[0]
    sets = sorted(_vertices(int(z)) for z in tied)
    chosen = sets[0]
    return OracleResult(chosen, float(graph.weights[list(chosen)].sum()), len(sets), OracleMethod.EXHAUSTIVE)


def max_weight_clique_bb(graph: DockingGraph) -> OracleResult:
    """Branch and bound with the candidate weight sum as upper bound.

    Ties are kept (pruning is strict) so the result and the optimum count agree
    with the exhaustive scan.
    """
    n = graph.n
    if n == 0:
        return OracleResult((), 0.0, 1, OracleMethod.BRANCH_AND_BOUND)
    adj = graph.adjacency_masks()
    w = [float(x) for x in graph.weights]
    # heavier vertices first tightens the bound early
    order = sorted(range(n), key=lambda v: (-w[v], v))
    best_weight = 0.0
    best_sets: list[int] = []

    def bound(cand: int) -> float:
        total = 0.0
        while cand:
            low = cand & -cand
            total += w[low.bit_length() - 1]
            cand ^= low
        return total

    def expand(current: int, cur_w: float, cand: int):
        nonlocal best_weight, best_sets
        if cand == 0:
            if cur_w > best_weight and not _ties(cur_w, best_weight):
                best_weight, best_sets = cur_w, [current]
            elif _ties(cur_w, best_weight):
                best_sets.append(current)
            return
        for v in order:
            if not cand >> v & 1:
                continue
            ub = cur_w + bound(cand)
            if ub < best_weight and not _ties(ub, best_weight):
                return
            expand(current | 1 << v, cur_w + w[v], cand & adj[v])
            cand &= ~(1 << v)

    expand(0, 0.0, (1 << n) - 1)
    sets = sorted({_vertices(m) for m in best_sets})
    chosen = sets[0]
    return OracleResult(chosen, float(graph.weights[list(chosen)].sum()), len(sets), OracleMethod.BRANCH_AND_BOUND)


def max_weight_clique(graph: DockingGraph) -> OracleResult:
    if graph.n <= 20:
        return max_weight_clique_exhaustive(graph)
    return max_weight_clique_bb(graph)


def diag_argmax(diag) -> tuple[str, float]:
    """Best entry of an energy table as (display bitstring, energy); ties pick the smallest index."""
    from .encoding import index_to_bitstring

    z = int(np.argmax(diag.energies))
    return index_to_bitstring(z, diag.n), float(diag.energies[z])
