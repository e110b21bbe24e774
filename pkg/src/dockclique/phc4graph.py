"""Pharmacophore instances and the binding interaction graph built from them.

A vertex of the graph is a compatible (ligand point, pocket point) pair. Two
vertices are joined when both contacts can co-exist in one binding pose, so a
maximum-weight clique is the best set of simultaneous contacts.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class InstanceFormatError(ValueError):
    """Raised when an instance or graph file cannot be parsed."""


class GraphValidationError(ValueError):
    """Raised when parsed data violates a structural invariant."""


class Kind(str, enum.Enum):
    HYDROPHOBIC = "hydrophobic"
    DONOR = "donor"
    ACCEPTOR = "acceptor"
    AROMATIC = "aromatic"
    OTHER = "other"


@dataclass(frozen=True)
class Pharmacophore:
    id: int
    kind: Kind
    position: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        pos = tuple(float(c) for c in self.position)
        if len(pos) != 3:
            raise GraphValidationError(f"pharmacophore {self.id}: position must have 3 coordinates")
        if not all(np.isfinite(pos)):
            raise GraphValidationError(f"pharmacophore {self.id}: non-finite position {pos}")
        object.__setattr__(self, "position", pos)


def compatibility_by_kind(ligand: Sequence[Pharmacophore], pocket: Sequence[Pharmacophore]) -> np.ndarray:
    """Type-matching rule: a ligand point may only contact a pocket point of the same kind."""
    return np.array([[l.kind == p.kind for p in pocket] for l in ligand], dtype=bool).reshape(
        len(ligand), len(pocket)
    )


@dataclass(frozen=True, eq=False)
class PharmacophoreInstance:
    pocket: tuple[Pharmacophore, ...]
    ligand: tuple[Pharmacophore, ...]
    compatibility: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pocket", tuple(self.pocket))
        object.__setattr__(self, "ligand", tuple(self.ligand))
        compat = np.asarray(self.compatibility, dtype=bool)
        if compat.size == 0:
            compat = compat.reshape(len(self.ligand), len(self.pocket))
        object.__setattr__(self, "compatibility", compat)
        for name, points in (("pocket", self.pocket), ("ligand", self.ligand)):
            ids = [p.id for p in points]
            if len(set(ids)) != len(ids):
                raise GraphValidationError(f"duplicate {name} pharmacophore id")
        if compat.shape != (len(self.ligand), len(self.pocket)):
            raise GraphValidationError(
                f"compat matrix has shape {compat.shape}, expected "
                f"({len(self.ligand)}, {len(self.pocket)}) for |ligand| x |pocket|"
            )
        for i, j in zip(*np.nonzero(compat)):
            if self.ligand[i].kind != self.pocket[j].kind:
                raise GraphValidationError(
                    f"compat[{i}][{j}] pairs {self.ligand[i].kind.value} with {self.pocket[j].kind.value}"
                )

    @classmethod
    def from_kinds(cls, pocket, ligand) -> "PharmacophoreInstance":
        pocket, ligand = tuple(pocket), tuple(ligand)
        return cls(pocket, ligand, compatibility_by_kind(ligand, pocket))

    def __eq__(self, other):
        if not isinstance(other, PharmacophoreInstance):
            return NotImplemented
        return (
            self.pocket == other.pocket
            and self.ligand == other.ligand
            and np.array_equal(self.compatibility, other.compatibility)
        )


@dataclass(frozen=True, eq=False)
class DockingGraph:
    """Vertex-weighted simple undirected graph.

    ``edges`` holds each undirected edge once as ``(i, j)`` with ``i < j``.
    """

    n: int
    weights: np.ndarray
    edges: frozenset
    vertex_labels: tuple | None = None

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        object.__setattr__(self, "weights", weights)
        if self.n < 0:
            raise GraphValidationError("vertex count must be non-negative")
        if weights.shape[0] != self.n:
            raise GraphValidationError(f"expected {self.n} weights, got {weights.shape[0]}")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise GraphValidationError("weights must be finite and > 0")
        norm = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise GraphValidationError(f"self-loop on vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise GraphValidationError(f"edge ({i}, {j}) references a vertex outside 0..{self.n - 1}")
            norm.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.vertex_labels is not None:
            labels = tuple(tuple(l) if isinstance(l, list) else l for l in self.vertex_labels)
            if len(labels) != self.n:
                raise GraphValidationError(f"expected {self.n} labels, got {len(labels)}")
            object.__setattr__(self, "vertex_labels", labels)

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def adjacency_masks(self) -> list[int]:
        """Neighbour set of each vertex as an int bitmask (bit j = vertex j)."""
        masks = [0] * self.n
        for i, j in self.edges:
            masks[i] |= 1 << j
            masks[j] |= 1 << i
        return masks

    def adjacency_matrix(self) -> np.ndarray:
        adj = np.zeros((self.n, self.n), dtype=bool)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = True
        return adj

    def non_edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, j in itertools.combinations(range(self.n), 2) if (i, j) not in self.edges]

    def with_edge(self, i: int, j: int) -> "DockingGraph":
        return DockingGraph(self.n, self.weights, self.edges | {(min(i, j), max(i, j))}, self.vertex_labels)

    def __eq__(self, other):
        if not isinstance(other, DockingGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.weights, other.weights)
            and self.edges == other.edges
            and self.vertex_labels == other.vertex_labels
        )


@dataclass(frozen=True)
class TauBuffer:
    """Edge when ligand and pocket distances differ by at most ``2 * tau``."""

    tau: float

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be > 0")

    def admits(self, d_ligand: float, d_pocket: float) -> bool:
        return abs(d_ligand - d_pocket) <= 2.0 * self.tau


@dataclass(frozen=True)
class DeltaSum:
    """Edge when the pocket distance plus the ligand distance is at most ``delta``."""

    delta: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be > 0")

    def admits(self, d_ligand: float, d_pocket: float) -> bool:
        return d_ligand + d_pocket <= self.delta


EdgeRule = TauBuffer | DeltaSum


def build_nodes(instance: PharmacophoreInstance) -> list[tuple[int, int]]:
    """One vertex per compatible pair, as ``(ligand_index, pocket_index)`` in row-major order."""
    rows, cols = np.nonzero(instance.compatibility)
    return [(int(i), int(j)) for i, j in zip(rows, cols)]


def build_edges(nodes: Sequence[tuple[int, int]], instance: PharmacophoreInstance, rule: EdgeRule) -> frozenset:
    lig = np.array([p.position for p in instance.ligand], dtype=float).reshape(-1, 3)
    poc = np.array([p.position for p in instance.pocket], dtype=float).reshape(-1, 3)
    edges = set()
    for a, b in itertools.combinations(range(len(nodes)), 2):
        (li, pi), (lj, pj) = nodes[a], nodes[b]
        # a point may appear at most once in a pose
        if li == lj or pi == pj:
            continue
        d_l = float(np.linalg.norm(lig[li] - lig[lj]))
        d_p = float(np.linalg.norm(poc[pi] - poc[pj]))
        if rule.admits(d_l, d_p):
            edges.add((a, b))
    return frozenset(edges)


def build_graph(
    instance: PharmacophoreInstance,
    rule: EdgeRule = TauBuffer(1.0),
    kind_weights: dict | None = None,
) -> DockingGraph:
    """Binding interaction graph of ``instance``.

    Vertex weights default to 1.0; ``kind_weights`` maps a :class:`Kind` (or its
    value) to the weight of contacts of that kind.
    """
    nodes = build_nodes(instance)
    if kind_weights:
        table = {Kind(k): float(v) for k, v in kind_weights.items()}
        weights = [table.get(instance.ligand[li].kind, 1.0) for li, _ in nodes]
    else:
        weights = [1.0] * len(nodes)
    labels = tuple((instance.ligand[li].id, instance.pocket[pj].id) for li, pj in nodes)
    return DockingGraph(len(nodes), np.array(weights), build_edges(nodes, instance, rule), labels)


def generate_synthetic(
    n: int,
    edge_density: float,
    weight_range: tuple[float, float] = (1.0, 1.0),
    planted_clique: int | None = None,
    seed: int = 0,
    planted_vertices: Sequence[int] | None = None,
    max_attempts: int = 1000,
) -> DockingGraph:
    """Random graph, optionally with a planted unique maximum-weight clique.

    Planted vertices draw weights from the top tenth of ``weight_range`` and the
    rest from the bottom half. Each candidate is checked against the exact
    oracle and redrawn with a new salt until the planted set is the unique
    optimum. ``planted_vertices`` fixes the planted set instead of sampling it.
    """
    from .oracle import max_weight_clique

    if not 0.0 <= edge_density <= 1.0:
        raise ValueError("edge_density must lie in [0, 1]")
    lo, hi = weight_range
    if not (lo > 0 and hi >= lo):
        raise ValueError("weight_range must satisfy 0 < lo <= hi")
    if planted_vertices is not None:
        planted_vertices = sorted(set(int(v) for v in planted_vertices))
        if planted_clique is not None and planted_clique != len(planted_vertices):
            raise ValueError("planted_clique disagrees with planted_vertices")
        if planted_vertices and not 0 <= planted_vertices[0] <= planted_vertices[-1] < n:
            raise ValueError("planted vertex out of range")
        planted_clique = len(planted_vertices)
    if planted_clique is not None and not 0 <= planted_clique <= n:
        raise ValueError(f"planted clique size {planted_clique} exceeds n={n}")

    for salt in range(max_attempts):
        rng = np.random.default_rng([seed, salt])
        upper = np.triu(rng.random((n, n)) < edge_density, k=1)
        if planted_clique is None:
            weights = rng.uniform(lo, hi, n) if hi > lo else np.full(n, float(lo))
            return _graph_from_upper(n, weights, upper)
        if planted_vertices is not None:
            chosen = np.array(planted_vertices, dtype=int)
        else:
            chosen = np.sort(rng.choice(n, size=planted_clique, replace=False))
        for i, j in itertools.combinations(chosen, 2):
            upper[i, j] = True
        span = hi - lo
        weights = rng.uniform(lo, lo + 0.5 * span, n)
        weights[chosen] = rng.uniform(hi - 0.1 * span, hi, planted_clique)
        graph = _graph_from_upper(n, weights, upper)
        result = max_weight_clique(graph)
        if result.count_optimal == 1 and result.best_vertices == tuple(int(c) for c in chosen):
            return graph
    raise RuntimeError(f"no instance with a unique planted optimum after {max_attempts} attempts")


def _graph_from_upper(n, weights, upper) -> DockingGraph:
    rows, cols = np.nonzero(upper)
    return DockingGraph(n, weights, frozenset(zip(rows.tolist(), cols.tolist())))


# -- files ---------------------------------------------------------------------

def instance_to_dict(instance: PharmacophoreInstance) -> dict:
    def enc(points):
        return [{"id": p.id, "kind": p.kind.value, "xyz": list(p.position)} for p in points]

    return {
        "pocket": enc(instance.pocket),
        "ligand": enc(instance.ligand),
        "compat": instance.compatibility.tolist(),
    }


def graph_to_dict(graph: DockingGraph) -> dict:
    data = {
        "n": graph.n,
        "weights": graph.weights.tolist(),
        "edges": [list(e) for e in sorted(graph.edges)],
    }
    if graph.vertex_labels is not None:
        data["labels"] = [list(l) if isinstance(l, tuple) else l for l in graph.vertex_labels]
    return data


def _require(data: dict, key: str, where: str):
    if not isinstance(data, dict) or key not in data:
        raise InstanceFormatError(f"{where}: missing field '{key}'")
    return data[key]


def _points_from(raw, where: str) -> list[Pharmacophore]:
    if not isinstance(raw, list):
        raise InstanceFormatError(f"field '{where}' must be a list")
    points = []
    for k, item in enumerate(raw):
        loc = f"{where}[{k}]"
        try:
            kind = Kind(_require(item, "kind", loc))
        except ValueError as exc:
            if isinstance(exc, InstanceFormatError):
                raise
            raise InstanceFormatError(f"{loc}: unknown kind {item.get('kind')!r}") from None
        xyz = _require(item, "xyz", loc)
        if not (isinstance(xyz, list) and len(xyz) == 3):
            raise InstanceFormatError(f"{loc}.xyz: expected 3 numbers")
        points.append(Pharmacophore(int(_require(item, "id", loc)), kind, tuple(xyz)))
    return points


def instance_from_dict(data: dict) -> PharmacophoreInstance:
    pocket = _points_from(_require(data, "pocket", "instance"), "pocket")
    ligand = _points_from(_require(data, "ligand", "instance"), "ligand")
    compat = _require(data, "compat", "instance")
    if not isinstance(compat, list) or not all(isinstance(r, list) for r in compat):
        raise InstanceFormatError("field 'compat' must be a list of boolean rows")
    if len({len(r) for r in compat}) > 1:
        raise GraphValidationError("compat rows have unequal lengths")
    return PharmacophoreInstance(pocket, ligand, np.array(compat, dtype=bool).reshape(len(compat), -1))


def graph_from_dict(data: dict) -> DockingGraph:
    n = _require(data, "n", "graph")
    weights = _require(data, "weights", "graph")
    edges = _require(data, "edges", "graph")
    if not isinstance(n, int):
        raise InstanceFormatError("field 'n' must be an integer")
    if not isinstance(weights, list):
        raise InstanceFormatError("field 'weights' must be a list")
    if not isinstance(edges, list) or not all(isinstance(e, list) and len(e) == 2 for e in edges):
        raise InstanceFormatError("field 'edges' must be a list of [i, j] pairs")
    return DockingGraph(n, np.array(weights, dtype=float), frozenset(tuple(e) for e in edges), data.get("labels"))


def _read_json(path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_instance(path) -> PharmacophoreInstance | DockingGraph:
    """Read either file kind; graph files are recognised by their ``n`` field."""
    data = _read_json(path)
    if isinstance(data, dict) and "n" in data:
        return graph_from_dict(data)
    return instance_from_dict(data)


def load_graph(path) -> DockingGraph:
    return graph_from_dict(_read_json(path))


def save(obj: PharmacophoreInstance | DockingGraph, path) -> None:
    data = graph_to_dict(obj) if isinstance(obj, DockingGraph) else instance_to_dict(obj)
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def to_dot(graph: DockingGraph, solution: Iterable[int] = ()) -> str:
    """Graphviz source; solution vertices and the edges among them are drawn red."""
    chosen = set(int(v) for v in solution)
    lines = ["graph docking {"]
    for i in range(graph.n):
        attr = f'label="{i}:{graph.weights[i]:g}"'
        if i in chosen:
            attr += ", color=red, fontcolor=red"
        lines.append(f"  {i} [{attr}];")
    for i, j in sorted(graph.edges):
        attr = " [color=red, penwidth=2]" if i in chosen and j in chosen else ""
        lines.append(f"  {i} -- {j}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
