"""Diagnostics of a walk state: densities, spins, entropies, concurrence.

Reduced density matrices are formed as Gram matrices of the amplitude array
reshaped into ``(subsystem, complement)``; for a pure global state the smaller
of the two sides carries the same nonzero spectrum, which is what keeps the
spin entropy affordable on large lattices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numba
import numpy as np

from .hilbert import DEFAULT_MEMORY_CAP, BYTES_PER_AMPLITUDE, ResourceCapError, StateVector

EIGEN_FLOOR = 1e-12

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = (PAULI_X, PAULI_Y, PAULI_Z)

PARTITIONS = ("positions", "colors", "spins")


def entropy_from_density(rho: np.ndarray) -> float:
    """Von Neumann entropy in bits of a Hermitian, unit-trace matrix."""
    w = np.linalg.eigvalsh(rho)
    w = w[w > EIGEN_FLOOR]
    return float(-np.sum(w * np.log2(w)) + 0.0)


def _gram_small_side(m: np.ndarray) -> np.ndarray:
    if m.shape[0] <= m.shape[1]:
        return m @ m.conj().T
    return m.T @ m.conj()


def particle_density(state: StateVector) -> np.ndarray:
    t = state.tensor()
    return np.einsum("xcs,xcs->x", t, t.conj()).real


def _spin_tensor(state: StateVector) -> np.ndarray:
    """Amplitudes as ``(2V, 2, ..., 2)`` with one axis per edge; axis ``1 + E - 1 - e`` is edge ``e``."""
    b = state.basis
    return state.amplitudes.reshape((2 * b.num_nodes,) + (2,) * b.num_edges)


def _spin_axis(num_edges: int, e: int) -> int:
    return 1 + (num_edges - 1 - e)


def _check_edges(state: StateVector, edges: Sequence[int]) -> list[int]:
    edges = [int(e) for e in edges]
    num_edges = state.basis.num_edges
    if not edges:
        raise ValueError("edge set must not be empty")
    if len(set(edges)) != len(edges):
        raise ValueError(f"edges must be distinct, got {edges}")
    for e in edges:
        if not 0 <= e < num_edges:
            raise ValueError(f"edge {e} out of range [0, {num_edges})")
    return edges


def _spin_matrix(state: StateVector, edges: Sequence[int]) -> np.ndarray:
    """Amplitudes reshaped to ``(2**|A|, rest)``; the first listed edge is the most significant bit."""
    edges = _check_edges(state, edges)
    num_edges = state.basis.num_edges
    t = _spin_tensor(state)
    axes = [_spin_axis(num_edges, e) for e in edges]
    moved = np.moveaxis(t, axes, list(range(len(edges))))
    return moved.reshape(1 << len(edges), -1)


def reduced_spin_density(state: StateVector, edges: Sequence[int],
                         memory_cap: int = DEFAULT_MEMORY_CAP) -> np.ndarray:
    """Full ``2**|A|`` reduced density matrix of the spins on ``edges``."""
    size = 1 << len(edges)
    if size * size * BYTES_PER_AMPLITUDE > memory_cap:
        raise ResourceCapError(f"reduced matrix over {len(edges)} spins exceeds the memory cap")
    m = _spin_matrix(state, edges)
    return m @ m.conj().T


@numba.njit(cache=True)
def _spin_moments(amps, num_edges):
    rows, m = amps.shape
    out = np.zeros((num_edges, 3))
    for e in range(num_edges):
        bit = 1 << e
        zz = 0.0
        off = 0j
        for r in range(rows):
            for k in range(m):
                if k & bit:
                    continue
                up = amps[r, k]
                down = amps[r, k | bit]
                zz += up.real * up.real + up.imag * up.imag
                zz -= down.real * down.real + down.imag * down.imag
                off += up * np.conj(down)
        out[e, 0] = 2.0 * off.real
        out[e, 1] = -2.0 * off.imag
        out[e, 2] = zz
    return out


def spin_expectations(state: StateVector) -> np.ndarray:
    """``(|E|, 3)`` array of ``(s_x, s_y, s_z)`` for every edge spin."""
    b = state.basis
    return _spin_moments(state.amplitudes.reshape(2 * b.num_nodes, -1), b.num_edges)


def spin_expectation(state: StateVector, e: int) -> np.ndarray:
    """``(s_x, s_y, s_z)`` of the spin on edge ``e``, read off its one-spin reduced matrix."""
    rho = reduced_spin_density(state, [e])
    return np.array([np.trace(p @ rho).real for p in PAULIS])


def mean_spin(state: StateVector) -> np.ndarray:
    return spin_expectations(state).mean(axis=0)


def partition_density(state: StateVector, label: str) -> np.ndarray:
    """Reduced matrix of positions or colors; for ``'spins'`` the (x, c) complement is returned."""
    b = state.basis
    t = state.tensor()
    if label == "positions":
        m = t.reshape(b.num_nodes, -1)
    elif label == "colors":
        m = t.transpose(1, 0, 2).reshape(2, -1)
    elif label == "spins":
        m = t.reshape(2 * b.num_nodes, -1)
    else:
        raise ValueError(f"unknown partition {label!r}; expected one of {PARTITIONS}")
    return m @ m.conj().T


def partition_entropy(state: StateVector, label: str) -> float:
    return entropy_from_density(partition_density(state, label))


def partition_entropies(state: StateVector) -> tuple[float, float, float]:
    return tuple(partition_entropy(state, label) for label in PARTITIONS)


def spin_set_entropy(state: StateVector, edges: Sequence[int],
                     memory_cap: int = DEFAULT_MEMORY_CAP) -> float:
    m = _spin_matrix(state, edges)
    side = min(m.shape)
    if side * side * BYTES_PER_AMPLITUDE > memory_cap:
        raise ResourceCapError(f"spin set of size {len(edges)} exceeds the memory cap")
    return entropy_from_density(_gram_small_side(m))


def wootters_concurrence(rho: np.ndarray) -> float:
    yy = np.kron(PAULI_Y, PAULI_Y)
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sort(np.abs(np.linalg.eigvals(r)))[::-1]
    sq = np.sqrt(lam)
    return float(max(0.0, sq[0] - sq[1] - sq[2] - sq[3]))


def concurrence(state: StateVector, e1: int, e2: int) -> float:
    if e1 == e2:
        raise ValueError("concurrence needs two distinct edges")
    return wootters_concurrence(reduced_spin_density(state, [e1, e2]))


def correlation_from_density(rho: np.ndarray) -> float:
    """``<sigma_1 . sigma_2> - <sigma_1> . <sigma_2>`` of a two-spin density matrix."""
    eye = np.eye(2)
    joint = sum(np.trace(np.kron(p, p) @ rho).real for p in PAULIS)
    s1 = np.array([np.trace(np.kron(p, eye) @ rho).real for p in PAULIS])
    s2 = np.array([np.trace(np.kron(eye, p) @ rho).real for p in PAULIS])
    return float(joint - s1 @ s2)


def spin_correlation(state: StateVector, e1: int, e2: int) -> float:
    if e1 == e2:
        raise ValueError("correlation needs two distinct edges")
    return correlation_from_density(reduced_spin_density(state, [e1, e2]))


def ks_distance(p_avg: np.ndarray) -> float:
    """Largest gap between the cumulative distribution of ``p_avg`` and the uniform one."""
    p = np.asarray(p_avg, dtype=float)
    if abs(p.sum() - 1.0) > 1e-6:
        raise ValueError(f"distribution sums to {p.sum()}, expected 1")
    n = len(p)
    uniform = np.arange(1, n + 1) / n
    return float(np.max(np.abs(np.cumsum(p) - uniform)))


def page_entropy(subsystem_size: int, num_nodes: int) -> float:
    """Mean entropy (bits) of ``subsystem_size`` spins in a random pure state of the full walk."""
    if subsystem_size < 1:
        raise ValueError("subsystem size must be >= 1")
    d_a = 2.0 ** subsystem_size
    d_v = 2.0 * num_nodes * 2.0 ** num_nodes
    return float(np.log2(d_a) - d_a ** 2 / (2 * d_v * np.log(2)))


@dataclass
class ObservableSeries:
    """Time-indexed records; optional fields stay empty unless requested."""

    num_nodes: int
    times: list = field(default_factory=list)
    p: list = field(default_factory=list)
    spin: list = field(default_factory=list)
    mean_spin: list = field(default_factory=list)
    entropies: list = field(default_factory=list)
    spin_set_entropy: list = field(default_factory=list)
    concurrence: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def arrays(self) -> dict[str, np.ndarray]:
        out = {"times": np.asarray(self.times, dtype=int)}
        for name in ("p", "spin", "mean_spin", "entropies", "spin_set_entropy", "concurrence"):
            values = getattr(self, name)
            if values:
                out[name] = np.asarray(values)
        return out


OBSERVABLES = ("p", "spin", "mean_spin", "entropies", "spin_set", "concurrence")


class Recorder:
    """Samples a chosen set of observables into an :class:`ObservableSeries`."""

    def __init__(self, num_nodes: int, observables: Sequence[str] = ("p", "mean_spin", "entropies"),
                 spin_set: Sequence[int] | None = None, concurrence_pairs=None):
        unknown = set(observables) - set(OBSERVABLES)
        if unknown:
            raise ValueError(f"unknown observables {sorted(unknown)}")
        if "spin_set" in observables and not spin_set:
            raise ValueError("the 'spin_set' observable needs a list of edges")
        self.observables = tuple(observables)
        self.spin_set = list(spin_set) if spin_set else None
        self.concurrence_pairs = list(concurrence_pairs) if concurrence_pairs else None
        self.series = ObservableSeries(num_nodes)

    def __call__(self, t: int, state: StateVector):
        s = self.series
        s.times.append(t)
        obs = self.observables
        if "p" in obs:
            s.p.append(particle_density(state))
        if "spin" in obs or "mean_spin" in obs:
            spins = spin_expectations(state)
            if "spin" in obs:
                s.spin.append(spins)
            if "mean_spin" in obs:
                s.mean_spin.append(spins.mean(axis=0))
        if "entropies" in obs:
            s.entropies.append(partition_entropies(state))
        if "spin_set" in obs:
            s.spin_set_entropy.append(spin_set_entropy(state, self.spin_set))
        if "concurrence" in obs:
            pairs = self.concurrence_pairs
            if pairs is None:
                n = state.basis.num_edges
                pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
            s.concurrence.append([concurrence(state, i, j) for i, j in pairs])


def time_average(values, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Arithmetic mean over the records ``values[start:stop]``."""
    window = np.asarray(values)[start:stop]
    if len(window) == 0:
        raise ValueError("empty averaging window")
    return window.mean(axis=0)
