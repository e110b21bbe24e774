"""The QAOA circuit families over the statevector simulator.

A layer is: cost phase ``exp(-i alpha H_C)``, then the mixer with ``beta``,
then (counterdiabatic families only) ``RY(gamma)`` on every qubit. Parameters
are flat, per layer ``[alpha, beta]`` or ``[alpha, beta, gamma]``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import simulator as sim
from .encoding import CostDiagonal
from .relax import WarmStartAngles


class Family(str, enum.Enum):
    CONVENTIONAL = "conventional"
    DC = "dc"
    WARM_START = "ws"
    WARM_START_DC = "wsdc"

    @property
    def includes_cd(self) -> bool:
        return self in (Family.DC, Family.WARM_START_DC)

    @property
    def warm(self) -> bool:
        return self in (Family.WARM_START, Family.WARM_START_DC)


@dataclass(frozen=True)
class AnsatzConfig:
    family: Family
    layers: int = 1
    warm_start: WarmStartAngles | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if self.layers < 1:
            raise ValueError("layers must be >= 1")
        if self.family.warm and self.warm_start is None:
            raise ValueError(f"family {self.family.value} needs warm-start angles")

    @property
    def includes_cd(self) -> bool:
        return self.family.includes_cd

    @property
    def params_per_layer(self) -> int:
        return 3 if self.includes_cd else 2

    @property
    def num_params(self) -> int:
        return self.layers * self.params_per_layer


def initial_parameters(config: AnsatzConfig, seed: int = 0, scale: float = 0.1) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-scale, scale, config.num_params)


def prepare_initial(config: AnsatzConfig, n: int) -> sim.Statevector:
    if config.family.warm:
        if config.warm_start is None:
            raise ValueError("warm-start family without angles")
        if config.warm_start.n != n:
            raise ValueError(f"{config.warm_start.n} warm-start angles for {n} qubits")
        return sim.init_warm_start(config.warm_start)
    return sim.init_uniform(n)


def _mixer_matrices(config: AnsatzConfig, n: int, beta: float, gamma: float | None) -> np.ndarray:
    if config.family.warm:
        mats = np.stack([sim.warm_start_mixer_matrix(t, beta) for t in config.warm_start.thetas])
    else:
        mats = np.broadcast_to(sim.rx_matrix(beta), (n, 2, 2))
    if gamma is not None:
        mats = sim.ry_matrix(gamma) @ mats
    return mats


def _split(layer_params, config: AnsatzConfig):
    lp = np.asarray(layer_params, dtype=float)
    if lp.shape != (config.params_per_layer,):
        raise ValueError(f"layer expects {config.params_per_layer} parameters, got {lp.shape[0]}")
    gamma = float(lp[2]) if config.includes_cd else None
    return float(lp[0]), float(lp[1]), gamma


def apply_layer(sv: sim.Statevector, config: AnsatzConfig, diag: CostDiagonal, layer_params) -> sim.Statevector:
    alpha, beta, gamma = _split(layer_params, config)
    sim.apply_cost_phase(sv, diag, alpha)
    return sim.apply_product(sv, _mixer_matrices(config, sv.n, beta, gamma))


def apply_layer_gates(sv: sim.Statevector, config: AnsatzConfig, diag: CostDiagonal, layer_params) -> sim.Statevector:
    """Gate-by-gate form of :func:`apply_layer` (no fused per-qubit matrices)."""
    alpha, beta, gamma = _split(layer_params, config)
    sim.apply_cost_phase(sv, diag, alpha)
    if config.family.warm:
        sim.apply_warm_start_mixer(sv, config.warm_start, beta)
    else:
        for q in range(sv.n):
            sim.apply_rx(sv, q, beta)
    if gamma is not None:
        for q in range(sv.n):
            sim.apply_ry(sv, q, gamma)
    return sv


def _check_params(config: AnsatzConfig, params) -> np.ndarray:
    params = np.asarray(params, dtype=float).reshape(-1)
    if params.shape[0] != config.num_params:
        raise ValueError(
            f"expected {config.num_params} parameters ({config.layers} layers x {config.params_per_layer}), "
            f"got {params.shape[0]}"
        )
    return params


def final_state(config: AnsatzConfig, diag: CostDiagonal, params) -> sim.Statevector:
    params = _check_params(config, params)
    sv = prepare_initial(config, diag.n)
    for layer in params.reshape(config.layers, config.params_per_layer):
        apply_layer(sv, config, diag, layer)
    return sv


def evaluate(config: AnsatzConfig, diag: CostDiagonal, params) -> float:
    """Expectation of the cost table in the prepared circuit state."""
    return sim.expectation(final_state(config, diag, params), diag)


def _evaluate_qubit_betas(config: AnsatzConfig, diag: CostDiagonal, params, betas_by_layer) -> float:
    params = _check_params(config, params)
    sv = prepare_initial(config, diag.n)
    for layer, betas in zip(params.reshape(config.layers, config.params_per_layer), betas_by_layer):
        sim.apply_cost_phase(sv, diag, layer[0])
        sim.apply_product(sv, np.stack([sim.rx_matrix(b) for b in betas]))
        if config.includes_cd:
            sim.apply_product(sv, np.broadcast_to(sim.ry_matrix(layer[2]), (sv.n, 2, 2)))
    return sim.expectation(sv, diag)


def beta_shift_gradient(config: AnsatzConfig, diag: CostDiagonal, params, layer: int = 0) -> float:
    """d<H_C>/d(beta of ``layer``) via the two-term shift rule on each RX gate.

    ``beta`` drives one ``RX`` per qubit; each gate has generator ``X/2`` so its
    contribution is ``(E(+pi/2) - E(-pi/2)) / 2`` with only that gate shifted.
    Only the RX-mixer families are supported.
    """
    if config.family.warm:
        raise ValueError("shift rule here covers the RX mixer only")
    params = _check_params(config, params)
    n = diag.n
    base = np.repeat(params.reshape(config.layers, -1)[:, 1:2], n, axis=1)
    grad = 0.0
    for q in range(n):
        plus, minus = base.copy(), base.copy()
        plus[layer, q] += math.pi / 2
        minus[layer, q] -= math.pi / 2
        grad += 0.5 * (
            _evaluate_qubit_betas(config, diag, params, plus) - _evaluate_qubit_betas(config, diag, params, minus)
        )
    return grad
