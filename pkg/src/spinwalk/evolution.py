"""One-step operator ``U(J, theta) = V(J) M R(theta)`` applied in place.

The coin ``R`` rotates the two colors of every node, the shift ``M`` moves
color 0 one node to the right (arriving as color 1) and color 1 one node to
the left (arriving as color 0), and ``V(J)`` mixes, edge by edge, the two
color amplitudes that just crossed an edge with that edge's spin.

:func:`step_edge_basis` recomputes the same step through the three-term edge
recurrence and is kept as an independent check of :func:`step`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .hilbert import BasisIndex, Boundary, Lattice, StateVector

DEFAULT_MATERIALIZE_CAP = 4096


class CoinField:
    """Per-node coin angles ``theta(x)``."""

    def __init__(self, theta):
        theta = np.atleast_1d(np.asarray(theta, dtype=float)).copy()
        if theta.ndim != 1:
            raise ValueError("theta must be one-dimensional")
        theta.setflags(write=False)
        self.theta = theta
        self.is_uniform = bool(np.all(theta == theta[0]))
        self._cos = np.cos(theta)[:, None]
        self._sin = np.sin(theta)[:, None]

    @classmethod
    def uniform(cls, num_nodes: int, theta: float) -> "CoinField":
        return cls(np.full(num_nodes, float(theta)))

    @classmethod
    def interface(cls, num_nodes: int, theta_minus: float, theta_plus: float,
                  x_interface: int) -> "CoinField":
        """``theta_minus`` for ``x < x_interface`` and ``theta_plus`` from there on."""
        if not 0 <= x_interface < num_nodes:
            raise ValueError(f"interface {x_interface} outside [0, {num_nodes})")
        theta = np.where(np.arange(num_nodes) < x_interface, theta_minus, theta_plus)
        return cls(theta)

    def __len__(self):
        return len(self.theta)

    def __repr__(self):
        if self.is_uniform:
            return f"CoinField.uniform({len(self)}, {self.theta[0]!r})"
        return f"CoinField({self.theta.tolist()!r})"


def edge_matrix(J: float) -> np.ndarray:
    """4x4 color-spin exchange ``exp(i J/4 tau.sigma)`` on ``(tau, sigma)`` ordered as ``2 tau + sigma``."""
    c, s = np.cos(J / 2), np.sin(J / 2)
    e = np.exp(0.5j * J)
    return np.exp(-0.25j * J) * np.array(
        [[e, 0, 0, 0],
         [0, c, 1j * s, 0],
         [0, 1j * s, c, 0],
         [0, 0, 0, e]],
        dtype=np.complex128,
    )


@dataclass(frozen=True)
class Coupling:
    J: float
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        m = edge_matrix(self.J)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


@dataclass(frozen=True)
class StepOperator:
    lattice: Lattice
    coin: CoinField
    coupling: Coupling
    bounce_phase: complex = 1.0

    def __post_init__(self):
        if len(self.coin) != self.lattice.num_nodes:
            raise ValueError(
                f"coin field has {len(self.coin)} angles for {self.lattice.num_nodes} nodes"
            )
        if not np.isclose(abs(self.bounce_phase), 1.0):
            raise ValueError("bounce_phase must have modulus 1")

    @classmethod
    def uniform(cls, lattice: Lattice, theta: float, J: float, **kwargs) -> "StepOperator":
        return cls(lattice, CoinField.uniform(lattice.num_nodes, theta), Coupling(J), **kwargs)

    @property
    def edge_matrix(self) -> np.ndarray:
        return self.coupling.matrix


def _check_lattice(state: StateVector, lattice: Lattice):
    if state.lattice != lattice:
        raise ValueError(f"state lives on {state.lattice}, operator on {lattice}")


def apply_coin(state: StateVector, coin: CoinField) -> StateVector:
    t = state.tensor()
    if len(coin) != t.shape[0]:
        raise ValueError("coin field and state disagree on the number of nodes")
    up = t[:, 0].copy()
    t[:, 0] *= coin._cos
    t[:, 0] -= coin._sin * t[:, 1]
    t[:, 1] *= coin._cos
    t[:, 1] += coin._sin * up
    return state


def apply_shift(state: StateVector, bounce_phase: complex = 1.0) -> StateVector:
    t = state.tensor()
    right = t[:, 0].copy()
    if state.lattice.boundary is Boundary.PERIODIC:
        t[:, 0] = np.roll(t[:, 1], -1, axis=0)
        t[:, 1] = np.roll(right, 1, axis=0)
        return state
    # reflective ends: the outward-moving amplitude stays where it is
    last_right = right[-1]
    first_left = t[0, 1].copy()
    t[:-1, 0] = t[1:, 1]
    t[-1, 0] = bounce_phase * last_right
    t[1:, 1] = right[:-1]
    t[0, 1] = bounce_phase * first_left
    return state


def _edge_views(t: np.ndarray, lattice: Lattice, e: int):
    """``(hi, 2, lo)`` views, split at spin bit ``e``, of the two colors meeting on edge ``e``."""
    x, y = lattice.edge_nodes(e)
    lo = 1 << e
    hi = (1 << lattice.num_edges) // (2 * lo)
    return t[x, 0].reshape(hi, 2, lo), t[y, 1].reshape(hi, 2, lo)


def apply_interaction(state: StateVector, coupling: Coupling) -> StateVector:
    t = state.tensor()
    lattice = state.lattice
    m = coupling.matrix
    for e in range(lattice.num_edges):
        left, right = _edge_views(t, lattice, e)
        quad = (left[:, 0].copy(), left[:, 1].copy(), right[:, 0].copy(), right[:, 1].copy())
        targets = (left[:, 0], left[:, 1], right[:, 0], right[:, 1])
        for i, out in enumerate(targets):
            out[...] = m[i, 0] * quad[0]
            for j in range(1, 4):
                if m[i, j] != 0:
                    out += m[i, j] * quad[j]
    return state


@numba.njit(cache=True)
def _coin_shift_kernel(src, dst, cos, sin, periodic, phase):
    n, _, m = src.shape
    for x in range(n):
        c = cos[x]
        s = sin[x]
        if periodic:
            xr = (x + 1) % n
            xl = (x - 1) % n
        else:
            xr = x + 1
            xl = x - 1
        for k in range(m):
            a = src[x, 0, k]
            b = src[x, 1, k]
            right = c * a - s * b
            left = s * a + c * b
            if xr < n:
                dst[xr, 1, k] = right
            else:
                dst[x, 0, k] = phase * right
            if xl >= 0:
                dst[xl, 0, k] = left
            else:
                dst[x, 1, k] = phase * left


@numba.njit(cache=True)
def _interaction_kernel(t, mat, num_edges):
    n, _, m = t.shape
    for e in range(num_edges):
        x = e
        y = (e + 1) % n
        bit = 1 << e
        for k in range(m):
            if k & bit:
                continue
            k1 = k | bit
            q0 = t[x, 0, k]
            q1 = t[x, 0, k1]
            q2 = t[y, 1, k]
            q3 = t[y, 1, k1]
            t[x, 0, k] = mat[0, 0] * q0 + mat[0, 1] * q1 + mat[0, 2] * q2 + mat[0, 3] * q3
            t[x, 0, k1] = mat[1, 0] * q0 + mat[1, 1] * q1 + mat[1, 2] * q2 + mat[1, 3] * q3
            t[y, 1, k] = mat[2, 0] * q0 + mat[2, 1] * q1 + mat[2, 2] * q2 + mat[2, 3] * q3
            t[y, 1, k1] = mat[3, 0] * q0 + mat[3, 1] * q1 + mat[3, 2] * q2 + mat[3, 3] * q3


def step(state: StateVector, op: StepOperator) -> StateVector:
    """Advance ``state`` by one step in place.

    Same result as ``apply_coin``, ``apply_shift``, ``apply_interaction`` in
    sequence, fused into two compiled passes over the amplitudes.
    """
    _check_lattice(state, op.lattice)
    t = state.tensor()
    scratch = np.empty_like(t)
    _coin_shift_kernel(t, scratch, op.coin._cos[:, 0], op.coin._sin[:, 0],
                       op.lattice.boundary is Boundary.PERIODIC, complex(op.bounce_phase))
    _interaction_kernel(scratch, op.coupling.matrix, op.lattice.num_edges)
    t[...] = scratch
    return state


def evolve(state: StateVector, op: StepOperator, steps: int) -> StateVector:
    for _ in range(steps):
        step(state, op)
    return state


def edge_recurrence_matrices(theta: float, J: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Matrices ``(A, B, C)`` of the edge recurrence.

    The amplitudes of edge ``x``, ordered ``(psi[x,0,s_x=0], psi[x,0,s_x=1],
    psi[x+1,1,s_x=0], psi[x+1,1,s_x=1])``, are advanced by
    ``A @ left + B @ own + C @ right`` where ``left``/``right`` are the same
    four-component vectors of edges ``x - 1``/``x + 1`` labelled by the spin of
    edge ``x``.
    """
    ct, st = np.cos(theta), np.sin(theta)
    cj, sj = np.cos(J / 2), np.sin(J / 2)
    e = np.exp(0.5j * J)
    pre = np.exp(-0.25j * J)
    A = pre * np.array(
        [[0, 0, 0, 0],
         [0, 0, -1j * sj * st, 0],
         [0, 0, -cj * st, 0],
         [0, 0, 0, -e * st]],
        dtype=np.complex128,
    )
    C = pre * np.array(
        [[e * st, 0, 0, 0],
         [0, cj * st, 0, 0],
         [0, 1j * sj * st, 0, 0],
         [0, 0, 0, 0]],
        dtype=np.complex128,
    )
    B = pre * np.array(
        [[0, 0, e * ct, 0],
         [1j * sj * ct, 0, 0, cj * ct],
         [cj * ct, 0, 0, 1j * sj * ct],
         [0, e * ct, 0, 0]],
        dtype=np.complex128,
    )
    return A, B, C


def step_edge_basis(state: StateVector, op: StepOperator) -> StateVector:
    """One step through the edge recurrence; returns a new state.

    Only uniform coins on periodic lattices are supported.
    """
    _check_lattice(state, op.lattice)
    lattice = op.lattice
    if lattice.boundary is not Boundary.PERIODIC:
        raise NotImplementedError("the edge recurrence needs a periodic lattice")
    if not op.coin.is_uniform:
        raise NotImplementedError("the edge recurrence needs a uniform coin angle")
    A, B, C = edge_recurrence_matrices(op.coin.theta[0], op.coupling.J)
    n = lattice.num_nodes
    t = state.tensor()
    out = StateVector.zeros(state.basis)
    o = out.tensor()
    for x in range(n):
        lo = 1 << x
        hi = (1 << lattice.num_edges) // (2 * lo)

        def vec(node_left, node_right):
            # four components of the edge (node_left, node_right), labelled by spin bit x
            a = t[node_left, 0].reshape(hi, 2, lo)
            b = t[node_right, 1].reshape(hi, 2, lo)
            return np.stack([a[:, 0], a[:, 1], b[:, 0], b[:, 1]])

        left = vec((x - 1) % n, x)
        own = vec(x, (x + 1) % n)
        right = vec((x + 1) % n, (x + 2) % n)
        new = (np.tensordot(A, left, axes=1) + np.tensordot(B, own, axes=1)
               + np.tensordot(C, right, axes=1))
        a = o[x, 0].reshape(hi, 2, lo)
        b = o[(x + 1) % n, 1].reshape(hi, 2, lo)
        a[:, 0], a[:, 1], b[:, 0], b[:, 1] = new
    return out


def materialize_operator(op: StepOperator, cap: int = DEFAULT_MATERIALIZE_CAP,
                         stepper=step) -> np.ndarray:
    """Dense matrix of one step; column ``i`` is the image of basis vector ``i``."""
    basis = BasisIndex(op.lattice)
    if basis.dim > cap:
        raise ValueError(f"dimension {basis.dim} exceeds the materialization cap {cap}")
    U = np.empty((basis.dim, basis.dim), dtype=np.complex128)
    for i in range(basis.dim):
        psi = StateVector.zeros(basis)
        psi.amplitudes[i] = 1.0
        out = stepper(psi, op)
        U[:, i] = out.amplitudes
    return U
