"""Band structure of the free walk and mean-field spin (Landau-Lifshitz) integrators.

All integrators are classical RK4 in time.  ``dt`` is the integrator substep;
``walk_dt`` is the walk's own time step (1 in walk units), which enters the
damping and gradient coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

GAP_TOL = 1e-12


class Band(NamedTuple):
    E_plus: np.ndarray
    E_minus: np.ndarray
    d_hat: np.ndarray  # NaN where the gap closes


def quasienergy(k, theta) -> Band:
    """Quasienergies ``+-E`` with ``cos E = -sin k sin theta`` and the unit vector ``d_hat(k)``."""
    k = np.asarray(k, dtype=float)
    theta = np.asarray(theta, dtype=float)
    cos_e = np.clip(-np.sin(k) * np.sin(theta), -1.0, 1.0)
    E = np.arccos(cos_e)
    sin_e = np.sin(E)
    d = np.stack(np.broadcast_arrays(np.cos(k) * np.cos(theta),
                                     np.sin(k) * np.cos(theta),
                                     np.cos(k) * np.sin(theta)), axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        d_hat = np.where(np.abs(sin_e)[..., None] > GAP_TOL, d / sin_e[..., None], np.nan)
    return Band(E, -E, d_hat)


def group_velocity(p, theta):
    """``sin p sin theta / sqrt(1 - cos^2 p sin^2 theta)`` at ``p = k - pi/2``."""
    p = np.asarray(p, dtype=float)
    theta = np.asarray(theta, dtype=float)
    denom = 1.0 - np.cos(p) ** 2 * np.sin(theta) ** 2
    if np.any(denom <= GAP_TOL):
        raise ValueError("group velocity is singular at the cone tip (p = 0, theta = pi/2)")
    v = np.sin(p) * np.sin(theta) / np.sqrt(denom)
    return float(v) if v.ndim == 0 else v


@dataclass(frozen=True)
class DiracCoefficients:
    """Mass (``d0``) and kinetic (``d1``) vectors of the walk expanded around momentum ``p``."""

    p: float
    theta: float
    d0: np.ndarray
    d1: np.ndarray
    E: float

    @property
    def v_g(self) -> float:
        return group_velocity(self.p, self.theta)


def dirac_coefficients(p: float, theta: float) -> DiracCoefficients:
    cos_e = np.cos(p) * np.sin(theta)
    E = float(np.arccos(np.clip(cos_e, -1.0, 1.0)))
    sin_e = np.sin(E)
    if abs(sin_e) <= GAP_TOL:
        raise ValueError(f"sin E vanishes at p={p}, theta={theta}")
    sp, cp = np.sin(p), np.cos(p)
    st, ct = np.sin(theta), np.cos(theta)
    d0 = np.array([-sp * ct, cp * ct, -sp * st]) / sin_e
    d1 = -E / sin_e * np.array([cp * ct, sp * ct, cp * st])
    return DiracCoefficients(float(p), float(theta), d0, d1, E)


def _rk4(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def precession_rate(J: float, num_nodes: int) -> float:
    """Angular frequency ``J / 2|V|`` of the mean-field precession."""
    return J / (2.0 * num_nodes)


def damping_rate(J: float, num_nodes: int, v_g: float, walk_dt: float = 1.0) -> float:
    """Coefficient ``J^3 dt / 16 |V| |v_g|`` of the homogeneous damping term."""
    if v_g == 0:
        raise ValueError("damping is undefined for a walker at rest (v_g = 0)")
    return J ** 3 * walk_dt / (16.0 * num_nodes * abs(v_g))


def precession_rhs(s, d_hat, J, num_nodes):
    return -precession_rate(J, num_nodes) * np.cross(s, d_hat)


def dissipative_rhs(s, d_hat, J, num_nodes, v_g, walk_dt=1.0):
    s = np.asarray(s, dtype=float)
    norm2 = np.sum(s * s, axis=-1, keepdims=True)
    damp = damping_rate(J, num_nodes, v_g, walk_dt) * norm2 * np.cross(d_hat, np.cross(d_hat, s))
    return precession_rhs(s, d_hat, J, num_nodes) + damp


def ll_precession_step(s, d_hat, J: float, num_nodes: int, dt: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return _rk4(lambda y: precession_rhs(y, d_hat, J, num_nodes), s, dt)


def ll_dissipative_step(s, d_hat, J: float, num_nodes: int, v_g: float, dt: float,
                        walk_dt: float = 1.0) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return _rk4(lambda y: dissipative_rhs(y, d_hat, J, num_nodes, v_g, walk_dt), s, dt)


def ll_trajectory(s0, d_hat, J: float, num_nodes: int, steps: int, v_g: float | None = None,
                  dt: float = 0.1, walk_dt: float = 1.0) -> np.ndarray:
    """``(steps + 1, 3)`` trajectory sampled once per walk step; no damping when ``v_g`` is None."""
    substeps = int(round(walk_dt / dt))
    if substeps < 1 or not np.isclose(substeps * dt, walk_dt):
        raise ValueError(f"dt={dt} must divide the walk step {walk_dt}")
    s = np.asarray(s0, dtype=float).copy()
    out = np.empty((steps + 1, 3))
    out[0] = s
    for t in range(1, steps + 1):
        for _ in range(substeps):
            if v_g is None:
                s = ll_precession_step(s, d_hat, J, num_nodes, dt)
            else:
                s = ll_dissipative_step(s, d_hat, J, num_nodes, v_g, dt, walk_dt)
        out[t] = s
    return out


@dataclass
class SpinField:
    """Spin density ``s(x)`` on a periodic node grid, shape ``(|V|, 3)``."""

    s: np.ndarray
    walk_dt: float = 1.0

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        if self.s.ndim != 2 or self.s.shape[1] != 3:
            raise ValueError(f"spin field must have shape (|V|, 3), got {self.s.shape}")

    @property
    def num_nodes(self) -> int:
        return self.s.shape[0]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.s, axis=1)


def spatial_derivative(s: np.ndarray) -> np.ndarray:
    """Second-order central difference along the node axis with periodic wrap."""
    return 0.5 * (np.roll(s, -1, axis=0) - np.roll(s, 1, axis=0))


def gradient_response(s, ds, coeffs: DiracCoefficients) -> np.ndarray:
    """Scalar ``d1 . ds + d0 . (d1 x ds)`` per node; zero for a uniform field."""
    return ds @ coeffs.d1 + np.cross(coeffs.d1, ds) @ coeffs.d0


def gradient_torque(s, coeffs: DiracCoefficients, J: float, num_nodes: int,
                    walk_dt: float = 1.0) -> np.ndarray:
    """All terms of the gradient-corrected equation that vanish when ``s`` is uniform.

    The first-order gradient force and the damping driven by the walker spin
    response to the gradient; both scale as ``J**2``.
    """
    s = np.asarray(s, dtype=float)
    ds = spatial_derivative(s)
    d0, d1 = coeffs.d0, coeffs.d1
    field = np.cross(d0, d1) + np.cross(d0, np.cross(d0, d1))
    force = J ** 2 * walk_dt / (8.0 * num_nodes) * np.cross(field, np.cross(s, ds))
    # damping (J/2) <tau>^(1) x (<tau> x s) with <tau> = d0/|V|
    tau1 = J * walk_dt / (8.0 * num_nodes) * gradient_response(s, ds, coeffs)[:, None] * d0
    damping = 0.5 * J * np.cross(tau1, np.cross(d0 / num_nodes, s))
    return force + damping


def gradient_rhs(s, coeffs: DiracCoefficients, J: float, walk_dt: float = 1.0) -> np.ndarray:
    num_nodes = s.shape[0]
    homogeneous = dissipative_rhs(s, coeffs.d0, J, num_nodes, coeffs.v_g, walk_dt)
    return homogeneous + gradient_torque(s, coeffs, J, num_nodes, walk_dt)


def ll_gradient_step(field: SpinField, coeffs: DiracCoefficients, J: float, dt: float) -> SpinField:
    if field.num_nodes < 4:
        raise ValueError("the gradient equation needs at least 4 nodes")
    new = _rk4(lambda y: gradient_rhs(y, coeffs, J, field.walk_dt), field.s, dt)
    return SpinField(new, field.walk_dt)


def frequency_correction(s, coeffs: DiracCoefficients, J: float, num_nodes: int,
                         walk_dt: float = 1.0) -> np.ndarray:
    """Per-node precession rate including the first-order gradient shift."""
    ds = spatial_derivative(np.asarray(s, dtype=float))
    return (precession_rate(J, num_nodes)
            + J ** 2 * walk_dt / (4.0 * num_nodes) * (ds @ coeffs.d1)
            + 0.5 * J * (np.cross(coeffs.d1, ds) @ coeffs.d0))


def effective_field(s, coeffs: DiracCoefficients, J: float, num_nodes: int,
                    walk_dt: float = 1.0) -> np.ndarray:
    """Per-node applied field ``d0`` shifted by the gradient term proportional to ``d0 . ds``."""
    ds = spatial_derivative(np.asarray(s, dtype=float))
    shift = np.asarray(coeffs.d1 + np.cross(coeffs.d0, coeffs.d1))
    return coeffs.d0 - J ** 2 * walk_dt / (4.0 * num_nodes) * (ds @ coeffs.d0)[:, None] * shift
