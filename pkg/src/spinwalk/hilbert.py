"""Hilbert-space layout of a walker on a ring (or open chain) with one spin per edge.

Basis kets are ``|x c s>``: node ``x``, color bit ``c`` and a spin word ``s``
whose bit ``e`` holds the spin sitting on edge ``e = (e, e + 1)``.  The flat
amplitude index is ``(2 * x + c) * 2**num_edges + s`` so that the spin word
occupies the low bits and every edge interaction touches amplitudes at fixed
strides.

Bit value 0 is spin up (``|0>``, ``s_z = +1``), bit value 1 is spin down.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

DEFAULT_MEMORY_CAP = 1 << 30  # bytes per state vector
BYTES_PER_AMPLITUDE = np.dtype(np.complex128).itemsize


class ResourceCapError(MemoryError):
    """Raised when a requested object would exceed the configured memory cap."""


class Boundary(str, enum.Enum):
    PERIODIC = "p"
    REFLECTIVE = "b"


@dataclass(frozen=True)
class Lattice:
    num_nodes: int
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if int(self.num_nodes) != self.num_nodes or self.num_nodes < 2:
            raise ValueError(f"num_nodes must be an integer >= 2, got {self.num_nodes!r}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def num_edges(self) -> int:
        if self.boundary is Boundary.PERIODIC:
            return self.num_nodes
        return self.num_nodes - 1

    def edge_nodes(self, e: int) -> tuple[int, int]:
        """Endpoints ``(x, x + 1)`` of edge ``e``; the last periodic edge wraps to node 0."""
        if not 0 <= e < self.num_edges:
            raise IndexError(f"edge {e} out of range [0, {self.num_edges})")
        return e, (e + 1) % self.num_nodes


@dataclass(frozen=True)
class BasisIndex:
    lattice: Lattice
    memory_cap: int = DEFAULT_MEMORY_CAP
    dim: int = field(init=False)

    def __post_init__(self):
        dim = self.lattice.num_nodes * 2 * (1 << self.lattice.num_edges)
        object.__setattr__(self, "dim", dim)
        if dim * BYTES_PER_AMPLITUDE > self.memory_cap:
            raise ResourceCapError(
                f"state of dimension {dim} needs {dim * BYTES_PER_AMPLITUDE} bytes, "
                f"over the memory cap of {self.memory_cap} bytes"
            )

    @property
    def num_nodes(self) -> int:
        return self.lattice.num_nodes

    @property
    def num_edges(self) -> int:
        return self.lattice.num_edges

    @property
    def num_spin_words(self) -> int:
        return 1 << self.lattice.num_edges

    @property
    def shape(self) -> tuple[int, int, int]:
        """Shape of the ``(x, c, s)`` tensor view of the amplitudes."""
        return self.num_nodes, 2, self.num_spin_words

    def encode(self, x: int, c: int, s: int) -> int:
        if not 0 <= x < self.num_nodes:
            raise ValueError(f"node {x} out of range [0, {self.num_nodes})")
        if c not in (0, 1):
            raise ValueError(f"color must be 0 or 1, got {c}")
        if not 0 <= s < self.num_spin_words:
            raise ValueError(f"spin word {s} out of range [0, {self.num_spin_words})")
        return (2 * x + c) * self.num_spin_words + s

    def decode(self, index: int) -> tuple[int, int, int]:
        if not 0 <= index < self.dim:
            raise ValueError(f"index {index} out of range [0, {self.dim})")
        xc, s = divmod(index, self.num_spin_words)
        x, c = divmod(xc, 2)
        return x, c, s


class StateVector:
    """Dense amplitude array tied to a basis layout.

    ``amplitudes`` is mutated in place by the evolution routines; use
    :meth:`copy` to keep a snapshot.
    """

    def __init__(self, amplitudes: np.ndarray, basis: BasisIndex):
        amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (basis.dim,):
            raise ValueError(f"expected {basis.dim} amplitudes, got shape {amplitudes.shape}")
        self.amplitudes = amplitudes
        self.basis = basis

    @classmethod
    def zeros(cls, basis: BasisIndex) -> "StateVector":
        return cls(np.zeros(basis.dim, dtype=np.complex128), basis)

    @property
    def lattice(self) -> Lattice:
        return self.basis.lattice

    def tensor(self) -> np.ndarray:
        """``(x, c, s)`` view sharing memory with ``amplitudes``."""
        return self.amplitudes.reshape(self.basis.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.basis)

    def __repr__(self):
        return f"StateVector(dim={self.basis.dim}, lattice={self.lattice})"


class InitialKind(str, enum.Enum):
    Z = "z"
    X = "x"
    ZX = "zx"
    E = "e"


@dataclass(frozen=True)
class InitialStateSpec:
    kind: InitialKind
    uniform_position: bool = False
    x0: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", InitialKind(self.kind))

    @classmethod
    def from_label(cls, label: str, x0: int = 0) -> "InitialStateSpec":
        """Parse labels such as ``'z'``, ``'zx'`` or ``'ix'`` (uniform position)."""
        uniform = label.startswith("i")
        kind = label[1:] if uniform else label
        try:
            return cls(InitialKind(kind), uniform, x0)
        except ValueError:
            raise ValueError(f"unknown initial state label {label!r}") from None

    @property
    def label(self) -> str:
        return ("i" if self.uniform_position else "") + self.kind.value

    def validate(self, lattice: Lattice) -> None:
        if not 0 <= self.x0 < lattice.num_nodes:
            raise ValueError(f"x0={self.x0} outside the lattice of {lattice.num_nodes} nodes")
        if self.kind is InitialKind.ZX and self.x0 >= lattice.num_edges:
            raise ValueError(f"'zx' needs the edge ({self.x0}, {self.x0 + 1}), which does not exist")


def spin_profile(spec: InitialStateSpec, num_edges: int) -> np.ndarray:
    """Normalized amplitudes over the spin words for the given initial kind."""
    n = 1 << num_edges
    amp = np.zeros(n, dtype=np.complex128)
    if spec.kind is InitialKind.Z:
        amp[0] = 1.0
    elif spec.kind is InitialKind.X:
        amp[:] = 1.0 / np.sqrt(n)
    elif spec.kind is InitialKind.ZX:
        words = np.arange(n)
        mask = ((words >> spec.x0) & 1) == 0
        amp[mask] = 1.0 / np.sqrt(n // 2)
    else:
        amp[0] = amp[1 << (num_edges - 1)] = 1.0 / np.sqrt(2.0)
    return amp


def build_initial_state(spec: InitialStateSpec, basis: BasisIndex) -> StateVector:
    """Prepare one of the labelled product states with the walker in color 0."""
    spec.validate(basis.lattice)
    state = StateVector.zeros(basis)
    spins = spin_profile(spec, basis.num_edges)
    t = state.tensor()
    if spec.uniform_position:
        t[:, 0, :] = spins / np.sqrt(basis.num_nodes)
    else:
        t[spec.x0, 0, :] = spins
    return state


def grover_coin(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError(f"coin degree must be >= 1, got {d}")
    return 2.0 / d * np.ones((d, d)) - np.eye(d)


def fourier_coin(d: int) -> np.ndarray:
    if d < 1:
        raise ValueError(f"coin degree must be >= 1, got {d}")
    c = np.arange(d)
    return np.exp(2j * np.pi * np.outer(c, c) / d) / np.sqrt(d)
