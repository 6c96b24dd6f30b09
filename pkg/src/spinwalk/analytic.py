"""Closed-form reference results: the free walk and the two-node ring."""

from __future__ import annotations

import numpy as np
from scipy.special import eval_chebyu

from .evolution import edge_recurrence_matrices
from .hilbert import BasisIndex, Boundary, InitialStateSpec, Lattice, build_initial_state


def walk_symbol(k, theta: float) -> np.ndarray:
    """Free one-step operator in momentum space, shape ``(..., 2, 2)``."""
    k = np.asarray(k, dtype=float)
    c, s = np.cos(theta), np.sin(theta)
    em, ep = np.exp(-1j * k), np.exp(1j * k)
    out = np.empty(k.shape + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = em * s
    out[..., 0, 1] = em * c
    out[..., 1, 0] = ep * c
    out[..., 1, 1] = -ep * s
    return out


def walk_symbol_power(k, theta: float, t: int) -> np.ndarray:
    """``W(k)**t`` from ``W = i cos E + d . tau`` and Chebyshev polynomials of ``cos E``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    k = np.asarray(k, dtype=float)
    W = walk_symbol(k, theta)
    cos_e = np.clip(-np.sin(k) * np.sin(theta), -1.0, 1.0)
    E = np.arccos(cos_e)
    eye = np.eye(2)
    d_tau = W - 1j * cos_e[..., None, None] * eye
    u = eval_chebyu(t - 1, cos_e) if t > 0 else np.zeros_like(cos_e)
    return (1j ** t) * (np.cos(t * E)[..., None, None] * eye - 1j * u[..., None, None] * d_tau)


def free_walk_density(theta: float, num_nodes: int, initial: InitialStateSpec, t: int) -> np.ndarray:
    """Particle density after ``t`` steps at ``J = 0`` on a periodic ring.

    Uses ``psi_k = sum_x exp(ikx) psi(x)`` at the ``|V|`` lattice momenta.
    """
    lattice = Lattice(num_nodes, Boundary.PERIODIC)
    initial.validate(lattice)
    phi = np.zeros((num_nodes, 2), dtype=np.complex128)
    if initial.uniform_position:
        phi[:, 0] = 1.0 / np.sqrt(num_nodes)
    else:
        phi[initial.x0, 0] = 1.0
    x = np.arange(num_nodes)
    k = 2 * np.pi * np.arange(num_nodes) / num_nodes
    phase = np.exp(1j * np.outer(k, x))
    phi_k = phase @ phi
    phi_k = np.einsum("kab,kb->ka", walk_symbol_power(k, theta, t), phi_k)
    psi = phase.conj().T @ phi_k / num_nodes
    return np.sum(np.abs(psi) ** 2, axis=1)


def free_walk_density_lattice(theta, lattice: Lattice, initial: InitialStateSpec, t: int):
    if lattice.boundary is not Boundary.PERIODIC:
        raise NotImplementedError("the Fourier propagator needs a periodic lattice")
    return free_walk_density(theta, lattice.num_nodes, initial, t)


def two_node_spectrum(theta: float, J: float) -> np.ndarray:
    """The 16 eigenvalues of the two-node step operator, with multiplicity."""
    lam = np.exp(0.25j * J)
    a = np.sin(J / 2) * np.sin(theta)
    root = np.sqrt(4 - a * a + 0j)
    out = [lam] * 4 + [-lam] * 4
    pre = np.exp(-0.25j * J) / np.sqrt(2)
    for sign in (1, -1):
        inner = np.sqrt(2 - a * a + sign * 1j * abs(a) * root)
        out += [pre * inner] * 2 + [-pre * inner] * 2
    return np.array(out, dtype=np.complex128)


def two_node_correlation_t1(theta: float, J: float) -> float:
    """Spin correlation of the two edges after one step from the 'x' state."""
    return float(np.sin(2 * theta) ** 2 * np.sin(J) ** 2 / 16)


def _mixing_matrices() -> dict[tuple[int, int], np.ndarray]:
    """``M[s, r]`` maps the neighbour edge vector with other-spin ``r`` onto slot ``s``."""
    M = {}
    for s in (0, 1):
        for r in (0, 1):
            m = np.zeros((4, 4))
            m[s, r] = 1.0
            m[2 + s, 2 + r] = 1.0
            M[r, s] = m
    return M


def two_node_edge_operator(theta: float, J: float) -> np.ndarray:
    """Step operator of the two-node ring in the edge basis ``(e0(0), e0(1), e1(0), e1(1))``.

    ``e_x(r)`` is the four-vector of edge ``x`` with the other spin fixed to ``r``.
    """
    A, B, C = edge_recurrence_matrices(theta, J)
    side = A + C
    M = _mixing_matrices()
    Z = np.zeros((4, 4))
    blocks = [
        [B, Z, side @ M[0, 0], side @ M[0, 1]],
        [Z, B, side @ M[1, 0], side @ M[1, 1]],
        [side @ M[0, 0], side @ M[0, 1], B, Z],
        [side @ M[1, 0], side @ M[1, 1], Z, B],
    ]
    return np.block(blocks)


def edge_to_xcs_permutation() -> np.ndarray:
    """Permutation matrix ``P`` with ``psi_xcs = P @ psi_edge`` on the two-node ring."""
    basis = BasisIndex(Lattice(2))
    P = np.zeros((16, 16))
    for x in (0, 1):
        y = (x + 1) % 2
        for r in (0, 1):
            for slot in range(4):
                node, color = (x, 0) if slot < 2 else (y, 1)
                own = slot % 2
                word = (own << x) | (r << y)
                P[basis.encode(node, color, word), 8 * x + 4 * r + slot] = 1.0
    return P


def two_node_operator(theta: float, J: float) -> np.ndarray:
    """Two-node step operator in the ``(x, c, s)`` basis."""
    P = edge_to_xcs_permutation()
    return P @ two_node_edge_operator(theta, J) @ P.T


def two_node_x_state() -> np.ndarray:
    spec = InitialStateSpec("x", False, 0)
    return build_initial_state(spec, BasisIndex(Lattice(2))).amplitudes
