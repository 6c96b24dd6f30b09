import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_state
from spinwalk.evolution import StepOperator, evolve
from spinwalk.hilbert import BasisIndex, Boundary, InitialStateSpec, Lattice, StateVector, build_initial_state
from spinwalk.observables import (
    Recorder,
    concurrence,
    entropy_from_density,
    ks_distance,
    mean_spin,
    page_entropy,
    partition_density,
    partition_entropies,
    partition_entropy,
    particle_density,
    reduced_spin_density,
    spin_correlation,
    spin_expectation,
    spin_expectations,
    spin_set_entropy,
    time_average,
    wootters_concurrence,
)


def state(label, n=4, x0=1, boundary=Boundary.PERIODIC):
    return build_initial_state(InitialStateSpec.from_label(label, x0), BasisIndex(Lattice(n, boundary)))


def test_density_of_product_states():
    assert np.allclose(particle_density(state("z")), [0, 1, 0, 0])
    assert np.allclose(particle_density(state("iz")), 0.25)


def test_x_state_free_walk_is_a_single_mover():
    n, x0 = 13, 6
    st_ = state("x", n, x0)
    evolve(st_, StepOperator.uniform(st_.lattice, np.pi / 2, 0.0), 5)
    p = particle_density(st_)
    assert abs(p[x0 - 5] - 1) < 1e-12


def test_spin_expectations_products():
    assert np.allclose(spin_expectations(state("z")), [[0, 0, 1]] * 4)
    assert np.allclose(spin_expectations(state("x")), [[1, 0, 0]] * 4)


def test_e_state_spins():
    # the superposition only touches the last edge and the walker is shared,
    # so the state is a product with that spin along +x
    st_ = state("e", 2, 0)
    assert np.allclose(spin_expectation(st_, 1), [1, 0, 0])
    assert np.allclose(spin_expectation(st_, 0), [0, 0, 1])
    assert np.allclose(mean_spin(st_), [0.5, 0, 0.5])
    assert abs(partition_entropy(st_, "spins")) < 1e-12


def test_fast_spins_match_reduced_matrices(rng):
    st_ = random_state(Lattice(5, Boundary.REFLECTIVE), rng)
    fast = spin_expectations(st_)
    for e in range(4):
        assert np.allclose(fast[e], spin_expectation(st_, e), atol=1e-13)


def test_product_states_have_zero_entropy():
    for label in ("z", "x", "zx", "e", "iz", "ix"):
        S_x, S_c, S_s = partition_entropies(state(label))
        assert S_c < 1e-12
        if label in ("iz", "ix"):
            assert abs(S_x) < 1e-12  # position is not entangled with anything
        assert S_s < 1e-12


def test_spin_set_edge_cases(rng):
    st_ = random_state(Lattice(4), rng)
    assert abs(spin_set_entropy(st_, range(4)) - partition_entropy(st_, "spins")) < 1e-10
    assert spin_set_entropy(state("z", 6, 2), [0, 3, 5]) < 1e-12
    with pytest.raises(ValueError):
        spin_set_entropy(st_, [1, 1])
    with pytest.raises(ValueError):
        spin_set_entropy(st_, [])
    with pytest.raises(ValueError):
        spin_set_entropy(st_, [4])


def test_entropy_of_mixed_matrix():
    assert abs(entropy_from_density(np.eye(4) / 4) - 2) < 1e-12


def _bell_register():
    basis = BasisIndex(Lattice(4))
    psi = StateVector.zeros(basis)
    # (|00> + |11>)/sqrt(2) on edges 1 and 2, the rest up
    psi.amplitudes[basis.encode(0, 0, 0)] = 2 ** -0.5
    psi.amplitudes[basis.encode(0, 0, 0b0110)] = 2 ** -0.5
    return psi


def test_concurrence_examples():
    assert concurrence(state("x"), 0, 2) < 1e-12
    assert abs(concurrence(_bell_register(), 1, 2) - 1) < 1e-12
    assert concurrence(_bell_register(), 0, 1) < 1e-12
    with pytest.raises(ValueError):
        concurrence(state("x"), 1, 1)


def test_correlation_examples():
    assert abs(spin_correlation(state("x"), 0, 1)) < 1e-12
    # singlet-like triplet: <s1.s2> = 1 for |00>+|11>, single spins vanish
    assert abs(spin_correlation(_bell_register(), 1, 2) - 1) < 1e-12


def test_ks_examples():
    assert ks_distance(np.full(13, 1 / 13)) < 1e-15
    delta = np.zeros(13)
    delta[0] = 1
    assert abs(ks_distance(delta) - 12 / 13) < 1e-15
    with pytest.raises(ValueError):
        ks_distance(np.ones(3))


def test_page_entropy_examples():
    expected = 1 - 4 / (2 * 2 * 15 * 2**15 * np.log(2))
    assert abs(page_entropy(1, 15) - expected) < 1e-12
    assert abs(page_entropy(3, 15) - 3) < 1e-3
    values = [page_entropy(a, 13) for a in range(1, 8)]
    assert np.all(np.diff(values) > 0)
    with pytest.raises(ValueError):
        page_entropy(0, 13)


def test_time_average():
    series = np.tile([0.2, 0.8], (5, 1))
    assert np.allclose(time_average(series), [0.2, 0.8])
    with pytest.raises(ValueError):
        time_average(series, 3, 3)


def test_translating_delta_averages_to_uniform():
    n = 7
    st_ = state("z", n, 3)
    op = StepOperator.uniform(st_.lattice, np.pi / 2, 0.9)
    rec = Recorder(n, ("p",))
    for t in range(n):
        rec(t, st_)
        evolve(st_, op, 1)
    assert np.allclose(time_average(rec.series.p), 1 / n)


def test_recorder_requires_spin_set():
    with pytest.raises(ValueError):
        Recorder(4, ("spin_set",))
    with pytest.raises(ValueError):
        Recorder(4, ("bogus",))


def _evolved(n, boundary, seed, steps=6):
    rng = np.random.default_rng(seed)
    lat = Lattice(n, boundary)
    label = rng.choice(["z", "x", "e", "ix"])
    st_ = build_initial_state(InitialStateSpec.from_label(label, int(rng.integers(n - 1))), BasisIndex(lat))
    evolve(st_, StepOperator.uniform(lat, rng.uniform(0, np.pi), rng.uniform(0, np.pi)), steps)
    return st_


def _check_density(rho):
    assert np.abs(rho - rho.conj().T).max() < 1e-12
    assert abs(np.trace(rho) - 1) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-10


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), periodic=st.booleans(), seed=st.integers(0, 10**6), data=st.data())
def test_reduced_density_invariants(n, periodic, seed, data):
    boundary = Boundary.PERIODIC if periodic else Boundary.REFLECTIVE
    st_ = _evolved(n, boundary, seed)
    E = st_.basis.num_edges
    for label in ("positions", "colors", "spins"):
        _check_density(partition_density(st_, label))
    edges = data.draw(st.lists(st.integers(0, E - 1), min_size=1, max_size=E, unique=True))
    _check_density(reduced_spin_density(st_, edges))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 10**6), data=st.data())
def test_purity_duality(n, seed, data):
    st_ = _evolved(n, Boundary.PERIODIC, seed)
    edges = data.draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
    direct = entropy_from_density(reduced_spin_density(st_, edges))
    assert abs(direct - spin_set_entropy(st_, edges)) < 1e-9
    # the complement of A in the whole register: walker plus the other spins
    assert abs(direct - _complement_entropy(st_, edges)) < 1e-9


def _complement_entropy(st_, edges):
    from spinwalk.observables import _spin_matrix

    m = _spin_matrix(st_, edges)
    return entropy_from_density(m.T @ m.conj())


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), periodic=st.booleans(), seed=st.integers(0, 10**6))
def test_range_bounds(n, periodic, seed):
    boundary = Boundary.PERIODIC if periodic else Boundary.REFLECTIVE
    st_ = _evolved(n, boundary, seed)
    E = st_.basis.num_edges
    S_x, S_c, S_s = partition_entropies(st_)
    assert -1e-12 <= S_x <= np.log2(n) + 1e-9
    assert -1e-12 <= S_c <= 1 + 1e-9
    assert -1e-12 <= S_s <= min(E, np.log2(2 * n)) + 1e-9
    assert np.all(np.linalg.norm(spin_expectations(st_), axis=1) <= 1 + 1e-9)
    if E >= 2:
        c = concurrence(st_, 0, E - 1)
        assert -1e-12 <= c <= 1 + 1e-9
    ks = ks_distance(particle_density(st_))
    assert 0 <= ks <= 1 - 1 / n + 1e-12


def test_wootters_on_werner_state():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    for w in (0.2, 0.5, 0.9):
        rho = w * np.outer(bell, bell) + (1 - w) * np.eye(4) / 4
        assert abs(wootters_concurrence(rho) - max(0, (3 * w - 1) / 2)) < 1e-12
