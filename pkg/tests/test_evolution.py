import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from spinwalk.evolution import (
    CoinField,
    Coupling,
    StepOperator,
    apply_coin,
    apply_interaction,
    apply_shift,
    edge_matrix,
    edge_recurrence_matrices,
    evolve,
    materialize_operator,
    step,
    step_edge_basis,
)
from spinwalk.hilbert import BasisIndex, Boundary, InitialStateSpec, Lattice, StateVector, build_initial_state
from spinwalk.observables import partition_entropies, particle_density


def _materialize(fn, lattice):
    basis = BasisIndex(lattice)
    cols = []
    for i in range(basis.dim):
        psi = StateVector.zeros(basis)
        psi.amplitudes[i] = 1
        cols.append(fn(psi).amplitudes.copy())
    return np.array(cols).T


@settings(max_examples=30, deadline=None)
@given(J=st.floats(-10, 10))
def test_edge_matrix_unitary(J):
    m = edge_matrix(J)
    assert np.abs(m @ m.conj().T - np.eye(4)).max() < 1e-12


def test_edge_matrix_at_pi():
    m = edge_matrix(np.pi)
    out = m @ np.array([0, 1, 0, 0])
    assert np.allclose(out, [0, 0, 1j * np.exp(-0.25j * np.pi), 0])


def test_coin_identity_and_quarter_turn(rng):
    lat = Lattice(3)
    st_ = random_state(lat, rng)
    before = st_.amplitudes.copy()
    apply_coin(st_, CoinField.uniform(3, 0.0))
    assert np.allclose(st_.amplitudes, before)

    basis = BasisIndex(lat)
    psi = StateVector.zeros(basis)
    psi.amplitudes[basis.encode(1, 0, 5)] = 1
    apply_coin(psi, CoinField.uniform(3, np.pi / 2))
    assert abs(psi.amplitudes[basis.encode(1, 1, 5)] - 1) < 1e-15


def test_shift_two_node_ring():
    basis = BasisIndex(Lattice(2))
    for s in range(4):
        psi = StateVector.zeros(basis)
        psi.amplitudes[basis.encode(0, 0, s)] = 1
        apply_shift(psi)
        assert psi.amplitudes[basis.encode(1, 1, s)] == 1


def test_shift_twice_translates_with_color_flip():
    basis = BasisIndex(Lattice(3))
    psi = StateVector.zeros(basis)
    psi.amplitudes[basis.encode(0, 0, 0)] = 1
    apply_shift(psi)
    apply_shift(psi)
    # right mover arrives as color 1 and then moves back left as color 0
    assert psi.amplitudes[basis.encode(0, 0, 0)] == 1


@pytest.mark.parametrize("n", range(2, 7))
def test_shift_is_permutation(n, boundary):
    lat = Lattice(n, boundary)
    M = _materialize(apply_shift, lat)
    assert np.all((M == 0) | (M == 1))
    assert np.array_equal(M.sum(axis=0), np.ones(M.shape[0]))
    assert np.array_equal(M @ M.T, np.eye(M.shape[0]))


def test_component_structure_three_nodes():
    lat = Lattice(3)
    basis = BasisIndex(lat)
    coin = CoinField([0.3, 1.2, 2.0])
    R = _materialize(lambda s: apply_coin(s, coin), lat)
    V = _materialize(lambda s: apply_interaction(s, Coupling(0.9)), lat)
    assert np.allclose(R.imag, 0) and np.allclose(R @ R.T, np.eye(basis.dim))
    assert np.abs(V @ V.conj().T - np.eye(basis.dim)).max() < 1e-12
    # the coin never changes position or spin word
    for i, j in zip(*np.nonzero(np.abs(R) > 0)):
        xi, _, si = basis.decode(i)
        xj, _, sj = basis.decode(j)
        assert xi == xj and si == sj


def test_interaction_identity_at_zero(rng):
    st_ = random_state(Lattice(4), rng)
    before = st_.amplitudes.copy()
    apply_interaction(st_, Coupling(0.0))
    assert np.allclose(st_.amplitudes, before)


def test_step_is_composition(rng, boundary):
    lat = Lattice(3, boundary)
    coin = CoinField(rng.uniform(0, np.pi, 3))
    op = StepOperator(lat, coin, Coupling(1.3))
    U = materialize_operator(op)
    composed = _materialize(
        lambda s: apply_interaction(apply_shift(apply_coin(s, coin)), op.coupling), lat)
    assert np.abs(U - composed).max() < 1e-14


@pytest.mark.parametrize("n", [2, 3])
def test_materialized_unitary(n, rng, boundary):
    op = StepOperator.uniform(Lattice(n, boundary), rng.uniform(0, np.pi), rng.uniform(0, np.pi))
    U = materialize_operator(op)
    assert np.abs(U.conj().T @ U - np.eye(U.shape[0])).max() < 1e-12


def test_materialize_cap():
    with pytest.raises(ValueError):
        materialize_operator(StepOperator.uniform(Lattice(9), 1.0, 1.0))


def test_two_node_free_spectrum():
    U = materialize_operator(StepOperator.uniform(Lattice(2), 1.0, 0.0))
    ev = np.linalg.eigvals(U)
    # the fourfold lambda_+- and the collapsed lambda_n all sit at +-1
    assert np.sum(np.abs(ev - 1) < 1e-10) == 8
    assert np.sum(np.abs(ev + 1) < 1e-10) == 8


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 6), periodic=st.booleans(), theta=st.floats(0, np.pi),
       J=st.floats(-np.pi, np.pi), seed=st.integers(0, 2**32 - 1))
def test_step_preserves_norm(n, periodic, theta, J, seed):
    lat = Lattice(n, Boundary.PERIODIC if periodic else Boundary.REFLECTIVE)
    st_ = random_state(lat, np.random.default_rng(seed))
    step(st_, StepOperator.uniform(lat, theta, J))
    assert abs(st_.norm() - 1) < 1e-12


def test_edge_basis_examples(rng):
    lat = Lattice(4)
    for theta in (0.7, 0.0):
        op = StepOperator.uniform(lat, theta, 1.1)
        st_ = random_state(lat, rng)
        ref = step_edge_basis(st_, op)
        step(st_, op)
        assert np.abs(ref.amplitudes - st_.amplitudes).max() < 1e-12


def test_edge_matrices_without_coupling():
    theta = 0.8
    A, B, C = edge_recurrence_matrices(theta, 0.0)
    assert np.allclose(A + C, np.sin(theta) * np.diag([1, 1, -1, -1]))
    assert np.allclose(np.abs(B[B != 0]), np.cos(theta))


def test_edge_basis_unsupported():
    lat = Lattice(4, Boundary.REFLECTIVE)
    st_ = build_initial_state(InitialStateSpec("z", False, 1), BasisIndex(lat))
    with pytest.raises(NotImplementedError):
        step_edge_basis(st_, StepOperator.uniform(lat, 1.0, 1.0))
    lat = Lattice(4)
    op = StepOperator(lat, CoinField([1, 1, 2, 2]), Coupling(1.0))
    st_ = build_initial_state(InitialStateSpec("z", False, 1), BasisIndex(lat))
    with pytest.raises(NotImplementedError):
        step_edge_basis(st_, op)


def test_step_rejects_foreign_lattice():
    st_ = build_initial_state(InitialStateSpec("z", False, 0), BasisIndex(Lattice(3)))
    with pytest.raises(ValueError):
        step(st_, StepOperator.uniform(Lattice(4), 1.0, 1.0))


@pytest.mark.parametrize("J", [0.0, 0.7, 2.5])
def test_z_eigenstate_translation(J):
    lat = Lattice(9)
    st_ = build_initial_state(InitialStateSpec("z", False, 4), BasisIndex(lat))
    op = StepOperator.uniform(lat, np.pi / 2, J)
    for t in range(1, 20):
        step(st_, op)
        p = particle_density(st_)
        assert abs(p[(4 - t) % 9] - 1) < 1e-12
        assert max(partition_entropies(st_)) < 1e-10


def test_interface_peaks_on_both_sides_periodic():
    n = 9
    coin = CoinField.interface(n, 1.1, 2.1, 4)
    lat = Lattice(n)
    op = StepOperator(lat, coin, Coupling(0.0))
    st_ = build_initial_state(InitialStateSpec("z", False, 4), BasisIndex(lat))
    acc = np.zeros(n)
    steps = 400
    for _ in range(steps):
        step(st_, op)
        acc += particle_density(st_)
    acc /= steps
    # interfaces sit at x = 4 and, through the wrap, at x = 0
    assert acc[[3, 4]].max() > 1 / n
    assert acc[[0, 8]].max() > 1 / n


def test_evolve_matches_repeated_step(rng):
    lat = Lattice(4)
    op = StepOperator.uniform(lat, 0.4, 0.9)
    a = random_state(lat, rng)
    b = a.copy()
    evolve(a, op, 7)
    for _ in range(7):
        step(b, op)
    assert np.array_equal(a.amplitudes, b.amplitudes)
