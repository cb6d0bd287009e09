import numpy as np
import pytest

from spinsync.model import ModelParams, bell_state, build_model, coupling_operator, product_state
from spinsync.operators import pauli


def test_energies_and_order():
    m = build_model(ModelParams(omega2=1.15, g=-1.0))
    # |uu>: 2.15, |ud>: -0.15, |du>: 0.15, |dd>: -2.15 sorted descending
    assert np.allclose(m.eigen_energies, [2.15, 0.15, -0.15, -2.15])
    assert np.allclose(m.to_eigen(m.h_s), np.diag(m.eigen_energies))


def test_degenerate_levels_keep_computational_order():
    m = build_model(ModelParams(omega2=1.0, g=0.0))
    assert np.allclose(m.eigenbasis, np.eye(4))


@pytest.mark.parametrize("g", [-1.0, -0.3, 0.0, 0.6, 1.0])
def test_coupling_limits(g):
    v = coupling_operator(g)
    assert np.allclose(v, v.conj().T)
    if g == 1.0:
        assert np.allclose(v, 2 * (pauli("z", 1) + pauli("z", 2)))
        assert np.allclose(np.diag(v), [4, 0, 0, -4])
    if g == -1.0:
        assert np.allclose(v, 2 * (pauli("x", 1) + pauli("x", 2)))


def test_singlet_is_annihilated_by_coupling():
    psi = bell_state("psi-").amplitudes
    for g in (-1.0, -0.2, 0.5, 1.0):
        assert np.allclose(coupling_operator(g) @ psi, 0)


def test_s_matrix_and_bohr_frequencies():
    m = build_model(ModelParams(omega2=1.3, g=0.25))
    assert np.allclose(m.s_matrix, m.eigenbasis.conj().T @ m.v_s @ m.eigenbasis)
    assert np.allclose(m.bohr_frequencies, -m.bohr_frequencies.T)
    with pytest.raises(ValueError):
        m.s_matrix[0, 0] = 1.0


@pytest.mark.parametrize("kwargs", [{"g": 1.5}, {"omega1": 2.0}, {"omega2": float("nan")}])
def test_params_validation(kwargs):
    with pytest.raises(ValueError):
        ModelParams(**kwargs)


def test_product_state_bloch_vectors():
    rho = product_state(np.pi / 4, 0.0, np.pi / 8, np.pi / 2).density()
    assert rho.expect(pauli("x", 1)) == pytest.approx(1.0)
    assert rho.expect(pauli("y", 2)) == pytest.approx(np.sin(np.pi / 4))
    assert rho.expect(pauli("z", 2)) == pytest.approx(np.cos(np.pi / 4))


def test_bell_state_names():
    with pytest.raises(ValueError, match="unknown Bell state"):
        bell_state("omega")
    assert abs(bell_state("phi+").overlap(bell_state("phi-"))) < 1e-15
