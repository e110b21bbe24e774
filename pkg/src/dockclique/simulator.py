"""Dense statevector simulation for the QAOA circuits.

Amplitude index ``z`` has qubit ``i`` in bit ``i`` (little-endian). Rotations
follow ``R_P(phi) = exp(-i phi P / 2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .encoding import CostDiagonal, check_cap, index_to_bitstring

NORM_TOL = 1e-10


@numba.njit(cache=True, nogil=True)
def _apply_1q(amps, qubit, m00, m01, m10, m11):
    stride = 1 << qubit
    size = amps.shape[0]
    for base in range(0, size, 2 * stride):
        for off in range(stride):
            i0 = base + off
            i1 = i0 + stride
            a0 = amps[i0]
            a1 = amps[i1]
            amps[i0] = m00 * a0 + m01 * a1
            amps[i1] = m10 * a0 + m11 * a1


@numba.njit(cache=True, nogil=True)
def _apply_product(amps, mats):
    for q in range(mats.shape[0]):
        _apply_1q(amps, q, mats[q, 0, 0], mats[q, 0, 1], mats[q, 1, 0], mats[q, 1, 1])


@numba.njit(cache=True, nogil=True)
def _apply_phase(amps, energies, alpha):
    for z in range(amps.shape[0]):
        t = -alpha * energies[z]
        amps[z] *= complex(math.cos(t), math.sin(t))


@numba.njit(cache=True, nogil=True)
def _expectation(amps, energies):
    # Kahan-compensated sum
    total = 0.0
    comp = 0.0
    for z in range(amps.shape[0]):
        a = amps[z]
        term = (a.real * a.real + a.imag * a.imag) * energies[z]
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def rx_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def ry_matrix(phi: float) -> np.ndarray:
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(phi: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * phi), 0], [0, np.exp(0.5j * phi)]])


@dataclass(eq=False)
class Statevector:
    n: int
    amplitudes: np.ndarray

    def probabilities(self) -> np.ndarray:
        a = self.amplitudes
        return a.real**2 + a.imag**2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities().sum()))

    def copy(self) -> "Statevector":
        return Statevector(self.n, self.amplitudes.copy())

    def dump(self, path) -> None:
        """Raw complex128 amplitudes preceded by a little-endian int64 qubit count."""
        with open(path, "wb") as fh:
            np.array([self.n], dtype="<i8").tofile(fh)
            self.amplitudes.astype("<c16").tofile(fh)


def init_uniform(n: int, cap: int | None = None) -> Statevector:
    if n < 1:
        raise ValueError("need at least one qubit")
    check_cap(n, cap)
    return Statevector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


def init_warm_start(angles, cap: int | None = None) -> Statevector:
    """Product state ``RY(theta_i)|0>`` on each qubit."""
    thetas = np.asarray(angles.thetas if hasattr(angles, "thetas") else angles, dtype=float)
    n = thetas.shape[0]
    if n < 1:
        raise ValueError("need at least one qubit")
    check_cap(n, cap)
    amps = np.ones(1, dtype=complex)
    for theta in thetas:
        # new qubit becomes the most significant bit so far
        local = np.array([math.cos(theta / 2), math.sin(theta / 2)], dtype=complex)
        amps = np.kron(local, amps)
    return Statevector(n, amps)


def _check_qubit(sv: Statevector, qubit: int) -> None:
    if not 0 <= qubit < sv.n:
        raise IndexError(f"qubit {qubit} out of range for {sv.n} qubits")


def apply_matrix(sv: Statevector, qubit: int, matrix: np.ndarray) -> Statevector:
    _check_qubit(sv, qubit)
    m = np.asarray(matrix, dtype=complex)
    _apply_1q(sv.amplitudes, qubit, m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    return sv


def apply_rx(sv: Statevector, qubit: int, beta: float) -> Statevector:
    return apply_matrix(sv, qubit, rx_matrix(beta))


def apply_ry(sv: Statevector, qubit: int, gamma: float) -> Statevector:
    return apply_matrix(sv, qubit, ry_matrix(gamma))


def apply_rz(sv: Statevector, qubit: int, phi: float) -> Statevector:
    return apply_matrix(sv, qubit, rz_matrix(phi))


def apply_product(sv: Statevector, matrices: np.ndarray) -> Statevector:
    """Apply ``matrices[q]`` to qubit ``q`` for every qubit, in qubit order."""
    mats = np.ascontiguousarray(matrices, dtype=complex)
    if mats.shape != (sv.n, 2, 2):
        raise ValueError(f"expected {sv.n} 2x2 matrices, got shape {mats.shape}")
    _apply_product(sv.amplitudes, mats)
    return sv


def _check_dims(sv: Statevector, diag: CostDiagonal) -> None:
    if diag.n != sv.n:
        raise ValueError(f"cost table is for {diag.n} qubits, state has {sv.n}")


def apply_cost_phase(sv: Statevector, diag: CostDiagonal, alpha: float) -> Statevector:
    _check_dims(sv, diag)
    _apply_phase(sv.amplitudes, diag.energies, float(alpha))
    return sv


def warm_start_mixer_matrix(theta: float, beta: float) -> np.ndarray:
    """``RY(theta) RZ(-2 beta) RY(-theta)``: rotation about the warm-start Bloch axis."""
    return ry_matrix(theta) @ rz_matrix(-2.0 * beta) @ ry_matrix(-theta)


def apply_warm_start_mixer(sv: Statevector, angles, beta: float) -> Statevector:
    thetas = np.asarray(angles.thetas if hasattr(angles, "thetas") else angles, dtype=float)
    if thetas.shape[0] != sv.n:
        raise ValueError("angle count does not match qubit count")
    for q, theta in enumerate(thetas):
        apply_ry(sv, q, -theta)
        apply_rz(sv, q, -2.0 * beta)
        apply_ry(sv, q, theta)
    return sv


def expectation(sv: Statevector, diag: CostDiagonal) -> float:
    _check_dims(sv, diag)
    return float(_expectation(sv.amplitudes, diag.energies))


@dataclass
class SampleHistogram:
    counts: dict[str, int]
    shots: int

    def most_common(self, k: int | None = None) -> list[tuple[str, int]]:
        items = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return items if k is None else items[:k]


def sample(sv: Statevector, shots: int, seed: int = 0) -> SampleHistogram:
    """Inverse-CDF sampling of basis states; keys are display bitstrings (qubit 0 first)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    cdf = np.cumsum(sv.probabilities())
    cdf /= cdf[-1]
    u = np.random.default_rng(seed).random(shots)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), cdf.shape[0] - 1)
    values, counts = np.unique(idx, return_counts=True)
    return SampleHistogram({index_to_bitstring(int(v), sv.n): int(c) for v, c in zip(values, counts)}, shots)
