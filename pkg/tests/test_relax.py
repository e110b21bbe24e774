import itertools
import math

import numpy as np
import pytest

from dockclique.encoding import build_qubo
from dockclique.oracle import max_weight_clique_exhaustive
from dockclique.phc4graph import DockingGraph, generate_synthetic
from dockclique.relax import (
    RelaxMethod,
    bounded_simplex,
    solve_linear_relaxation,
    solve_quadratic_relaxation,
    to_warm_start_angles,
)

from conftest import random_graph


def half_integral_lp_optimum(graph):
    """Brute force over {0, 1/2, 1}^n; exact for the edge-constraint packing polytope."""
    grid = np.array(list(itertools.product((0.0, 0.5, 1.0), repeat=graph.n)))
    feasible = np.ones(len(grid), dtype=bool)
    for i, j in graph.non_edges():
        feasible &= grid[:, i] + grid[:, j] <= 1.0
    return float((grid[feasible] @ graph.weights).max())


def test_complete_graph_all_ones():
    g = generate_synthetic(5, 1.0, (1.0, 1.0))
    sol = solve_linear_relaxation(g)
    assert np.allclose(sol.values, 1.0)
    assert sol.objective == pytest.approx(5.0)
    assert sol.method is RelaxMethod.LINEAR and sol.converged


def test_path_graph(path3):
    sol = solve_linear_relaxation(path3)
    assert sol.objective == pytest.approx(2.0)
    assert sol.values[0] + sol.values[2] <= 1 + 1e-12
    assert half_integral_lp_optimum(path3) == 2.0


@pytest.mark.parametrize("seed", range(30))
def test_lp_matches_half_integral_brute_force(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(int(rng.integers(1, 9)), float(rng.uniform(0.2, 0.8)), seed)
    sol = solve_linear_relaxation(g)
    assert sol.converged
    assert sol.objective == pytest.approx(half_integral_lp_optimum(g), abs=1e-8)
    assert sol.objective >= max_weight_clique_exhaustive(g).best_weight - 1e-9
    assert np.all(sol.values >= 0) and np.all(sol.values <= 1)


def test_lp_iteration_limit_returns_feasible():
    g = random_graph(10, 0.3, 5)
    sol = solve_linear_relaxation(g, max_iterations=2)
    assert not sol.converged and sol.iterations_used == 2
    for i, j in g.non_edges():
        assert sol.values[i] + sol.values[j] <= 1 + 1e-9


def test_bounded_simplex_matches_scipy():
    from scipy.optimize import linprog

    rng = np.random.default_rng(1)
    for _ in range(10):
        A = rng.uniform(0, 1, (6, 5))
        b = rng.uniform(1, 3, 6)
        c = rng.uniform(-1, 2, 5)
        x, _, ok = bounded_simplex(c, A, b, np.full(5, 1.5), 500)
        ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, 1.5)] * 5)
        assert ok
        assert c @ x == pytest.approx(-ref.fun, abs=1e-9)


def test_quadratic_complete_graph_all_ones():
    g = generate_synthetic(4, 1.0, (0.5, 1.0), seed=2)
    sol = solve_quadratic_relaxation(build_qubo(g, 1.0))
    assert np.allclose(sol.values, 1.0)


def test_quadratic_two_vertex(two_vertex):
    q = build_qubo(two_vertex, 3.0)
    # grid oracle: best of F over a 101 x 101 grid is at (0, 1)
    grid = np.linspace(0, 1, 101)
    xs, ys = np.meshgrid(grid, grid, indexing="ij")
    f = 1.0 * xs + 2.0 * ys - 3.0 * xs * ys
    i, j = np.unravel_index(np.argmax(f), f.shape)
    assert (grid[i], grid[j]) == (0.0, 1.0)
    sol = solve_quadratic_relaxation(q, seed=0)
    assert np.allclose(sol.values, [0.0, 1.0], atol=1e-6)
    assert sol.objective == pytest.approx(2.0)


@pytest.mark.parametrize("seed", range(5))
def test_quadratic_monotone_small_step(seed):
    g = random_graph(8, 0.5, seed)
    q = build_qubo(g, 1.5)
    lipschitz = 1.5 * np.abs(np.linalg.eigvalsh((~g.adjacency_matrix() & ~np.eye(8, dtype=bool)).astype(float))).max()
    sol = solve_quadratic_relaxation(q, steps=300, step_size=0.9 / max(lipschitz, 1e-9), seed=seed)
    assert np.all(np.diff(sol.history) >= -1e-12)


def test_quadratic_deterministic():
    q = build_qubo(random_graph(9, 0.4, 3), 1.0)
    a, b = solve_quadratic_relaxation(q, seed=4), solve_quadratic_relaxation(q, seed=4)
    assert np.array_equal(a.values, b.values)


def test_quadratic_rejects_zero_steps(two_vertex):
    with pytest.raises(ValueError):
        solve_quadratic_relaxation(build_qubo(two_vertex, 1.0), steps=0)


def test_angles_exact_values():
    a = to_warm_start_angles(np.array([0.5, 0.0, 1.0]), 0.25)
    assert a.thetas[0] == pytest.approx(math.pi / 2, abs=1e-15)
    assert a.thetas[1] == pytest.approx(math.pi / 3, abs=1e-15)
    assert a.thetas[2] == pytest.approx(2 * math.pi / 3, abs=1e-15)


@pytest.mark.parametrize("eps", [0.0, 0.5, -0.1, 0.7])
def test_angles_reject_bad_eps(eps):
    with pytest.raises(ValueError):
        to_warm_start_angles(np.array([0.5]), eps)


def test_angles_inverse_and_bounds():
    values = np.random.default_rng(0).uniform(-0.2, 1.2, 200)
    for eps in (0.01, 0.1, 0.25, 0.4):
        a = to_warm_start_angles(values, eps)
        c = np.clip(values, eps, 1 - eps)
        np.testing.assert_allclose(np.sin(a.thetas / 2) ** 2, c, rtol=0, atol=1e-12)
        assert np.all(a.thetas >= 2 * np.arcsin(np.sqrt(eps)) - 1e-12)
        assert np.all(a.thetas <= 2 * np.arcsin(np.sqrt(1 - eps)) + 1e-12)
        assert np.all((a.probabilities >= eps - 1e-12) & (a.probabilities <= 1 - eps + 1e-12))
