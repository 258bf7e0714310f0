import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qrptomo import fock
from qrptomo.exceptions import PhysicalityError, TruncationWarning


def coherent_oracle(alpha, n_max):
    """Amplitudes e^{-|a|^2/2} a^n / sqrt(n!) from exact factorials."""
    return np.array([math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n))
                     for n in range(n_max)], dtype=complex)


def test_annihilation_small():
    assert np.array_equal(fock.annihilation(1), np.zeros((1, 1)))
    a = fock.annihilation(3)
    expected = np.zeros((3, 3))
    expected[0, 1] = 1
    expected[1, 2] = math.sqrt(2)
    assert np.allclose(a, expected, atol=0)


@pytest.mark.parametrize("dim", [1, 2, 5, 9])
def test_truncated_commutator(dim):
    a = fock.annihilation(dim)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.ones(dim)
    expected[-1] = 1 - dim
    assert np.allclose(comm, np.diag(expected), atol=1e-14)


def test_displacement_zero_is_identity():
    assert np.allclose(fock.displacement(0, 7), np.eye(7), atol=1e-15)


def test_displacement_column_zero_is_coherent():
    d = fock.displacement(1.0, 10, pad=20)
    assert np.allclose(d[:, 0], coherent_oracle(1.0, 10), atol=1e-12)


@pytest.mark.parametrize("alpha", [0.3, -1.1j, 1.0 + 1.0j, 1.5])
def test_displacement_inverse(alpha):
    d = fock.displacement(alpha, 30, pad=24)
    dm = fock.displacement(-alpha, 30, pad=24)
    assert np.max(np.abs((d @ dm)[:6, :6] - np.eye(6))) < 1e-8


@pytest.mark.parametrize("alpha", [0.5, 1.2j, -1.4 + 0.6j, 2.0, 2j, -1.3 - 1.5j])
@pytest.mark.parametrize("dim", [1, 3, 8])
def test_truncation_defect_with_default_rule(alpha, dim):
    pad = 4 * math.ceil(abs(alpha) ** 2) + 10
    assert fock.truncation_defect(alpha, dim, pad) < 1e-8


def test_displacement_warns_on_tiny_pad():
    with pytest.warns(TruncationWarning):
        fock.displacement(2.0, 6, pad=1)


def test_closed_form_matches_padded_exponential():
    for alpha in [0.2 - 0.7j, 1.9, -1.2j]:
        assert np.allclose(fock.displacement_elements(alpha, 8), fock.displacement(alpha, 8, 40), atol=1e-12)


def test_parity():
    assert np.allclose(fock.parity(2), np.diag([1, -1]))
    p = fock.parity(9)
    assert np.allclose(p @ p, np.eye(9))


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0, 1.5])
def test_parity_of_coherent_state(alpha):
    amps = coherent_oracle(alpha, 30)
    oracle = sum((-1) ** n * abs(c) ** 2 for n, c in enumerate(amps))
    rho = fock.ket2dm(fock.coherent_state(alpha, 30))
    val = np.trace(fock.parity(30) @ rho).real
    assert abs(val - oracle) < 1e-12
    assert abs(val - math.exp(-2 * alpha**2)) < 1e-8


def test_coherent_state_examples():
    assert np.allclose(fock.coherent_state(0, 5), [1, 0, 0, 0, 0])
    psi = fock.coherent_state(1.0, 15)
    nbar = np.sum(np.arange(15) * np.abs(psi) ** 2)
    assert abs(nbar - 1.0) < 1e-9
    overlap = np.vdot(fock.coherent_state(1.0, 30), fock.coherent_state(-1.0, 30))
    assert abs(overlap - math.exp(-2)) < 1e-9


def test_coherent_state_warns_when_truncated():
    with pytest.warns(TruncationWarning):
        fock.coherent_state(2.0, 4)


def test_kitten_parities():
    plus = fock.kitten_state(1.0, "plus", 12)
    minus = fock.kitten_state(1.0, "minus", 12)
    assert np.all(np.abs(np.diag(plus)[1::2]) < 1e-12)
    assert np.all(np.abs(np.diag(minus)[0::2]) < 1e-12)
    yp = fock.kitten_state(1.0, "y_plus", 20)
    # (|a> + i|-a>)/sqrt2 has parity <a|-a> = e^{-2|a|^2}
    assert abs(np.trace(fock.parity(20) @ yp) - math.exp(-2)) < 1e-9
    for rho in (plus, minus, yp):
        fock.check_density_matrix(rho)
        assert abs(np.trace(rho @ rho) - 1) < 1e-12


def test_kitten_rejects_unknown_variant():
    with pytest.raises(ValueError):
        fock.kitten_state(1.0, "x_plus", 6)


def test_parametrization_examples():
    p = fock.build_parametrization(2)
    assert np.allclose(p.state_of(np.zeros(3)), fock.fock_dm(1, 2))
    assert np.allclose(p.state_of([1, 0, 0]), fock.fock_dm(0, 2))
    assert p.K.shape == (4, 3)
    assert np.linalg.matrix_rank(p.K) == 3


def test_parameter_ordering():
    rho = np.array([[0.5, 0.1 + 0.2j, 0.3 - 0.1j],
                    [0.1 - 0.2j, 0.3, 0.05j],
                    [0.3 + 0.1j, -0.05j, 0.2]])
    assert np.allclose(fock.param_of(rho), [0.5, 0.3, 0.1, 0.2, 0.3, -0.1, 0.0, 0.05])


@pytest.mark.parametrize("D", [2, 3, 4, 5, 6])
def test_parametrization_round_trip(D):
    rng = np.random.default_rng(D)
    p = fock.build_parametrization(D)
    for _ in range(100):
        rho = fock.random_density_matrix(D, rng)
        Y = p.param_of(rho)
        assert np.max(np.abs(p.state_of(Y) - rho)) < 1e-12
        assert np.max(np.abs(rho.ravel() - (p.K @ Y + p.C))) < 1e-14
        assert np.max(np.abs(p.param_of(p.state_of(Y)) - Y)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_round_trip_property(D, seed, rank):
    rho = fock.random_density_matrix(D, np.random.default_rng(seed), rank=min(rank, D))
    assert np.max(np.abs(fock.state_of(fock.param_of(rho), D) - rho)) < 1e-12


def test_fidelity_examples():
    rng = np.random.default_rng(3)
    rho = fock.random_density_matrix(4, rng)
    assert abs(fock.fidelity(rho, rho) - 1) < 1e-10
    assert fock.fidelity(fock.fock_dm(0, 2), fock.fock_dm(1, 2)) < 1e-12
    assert abs(fock.fidelity(fock.fock_dm(0, 2), np.eye(2) / 2) - 0.5) < 1e-12


def test_fidelity_pure_closed_form():
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    psi /= np.linalg.norm(psi)
    sigma = fock.random_density_matrix(5, rng)
    oracle = np.vdot(psi, sigma @ psi).real  # <psi|sigma|psi>
    assert abs(fock.fidelity(fock.ket2dm(psi), sigma) - oracle) < 1e-10


def test_fidelity_symmetric():
    rng = np.random.default_rng(11)
    for _ in range(20):
        a = fock.random_density_matrix(5, rng)
        b = fock.random_density_matrix(5, rng, rank=2)
        assert abs(fock.fidelity(a, b) - fock.fidelity(b, a)) < 1e-10


def test_fidelity_rejects_bad_input():
    with pytest.raises(PhysicalityError):
        fock.fidelity(np.array([[1, 1], [0, 0]]), np.eye(2) / 2)
    with pytest.raises(PhysicalityError):
        fock.fidelity(np.eye(2), np.eye(2) / 2)


def test_displaced_parity_two_ways():
    rng = np.random.default_rng(7)
    for _ in range(10):
        rho = fock.random_density_matrix(5, rng)
        alpha = complex(*rng.uniform(-1.5, 1.5, 2))
        big = 40
        rho_big = np.zeros((big, big), dtype=complex)
        rho_big[:5, :5] = rho
        d = fock.displacement(alpha, big)
        displaced = d @ rho_big @ d.conj().T
        via_state = np.trace(fock.parity(big) @ displaced).real
        via_operator = np.trace(fock.displaced_parity(alpha, 5) @ rho).real
        assert abs(via_state - via_operator) < 1e-10


def test_check_density_matrix():
    fock.check_density_matrix(np.eye(3) / 3)
    with pytest.raises(PhysicalityError):
        fock.check_density_matrix(np.diag([1.2, -0.2]))
    with pytest.raises(PhysicalityError):
        fock.check_density_matrix(np.eye(2))
    assert not fock.is_density_matrix(np.ones((2, 3)))


def test_matrix_json_round_trip():
    rng = np.random.default_rng(0)
    rho = fock.random_density_matrix(4, rng)
    obj = fock.matrix_to_json(rho)
    assert set(obj) == {"dim", "re", "im"} and len(obj["re"]) == 16
    assert np.array_equal(fock.matrix_from_json(obj), rho)
