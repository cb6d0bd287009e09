import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from spinsync.correlations import (DiscordGrid, binary_entropy, bloch_decomposition, check_xstate, concurrence,
                                   correlation_trace, discord_and_classical, eof_from_concurrence,
                                   entanglement_of_formation, mutual_information, xstate_discord)
from spinsync.model import bell_state, product_state
from spinsync.operators import SIGMA


def werner(p):
    return p * bell_state("psi-").density().mat + (1 - p) * np.eye(4) / 4


def local_unitary(rng):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    q, _ = np.linalg.qr(a)
    return q


def xstate(rng):
    p = rng.dirichlet(np.ones(4))
    c = rng.uniform(0, 1) * math.sqrt(p[1] * p[2]) * np.exp(1j * rng.uniform(0, 2 * np.pi))
    rho = np.diag(p).astype(complex)
    rho[1, 2], rho[2, 1] = c, np.conj(c)
    return rho


def test_singlet_is_maximally_correlated():
    v = discord_and_classical(bell_state("psi-").density())
    assert v.concurrence == pytest.approx(1.0, abs=1e-12)
    assert v.entanglement_of_formation == pytest.approx(1.0, abs=1e-12)
    assert v.mutual_information == pytest.approx(2.0, abs=1e-9)
    assert v.discord == pytest.approx(1.0, abs=1e-9)
    assert v.classical == pytest.approx(1.0, abs=1e-9)


def test_product_state_has_no_correlations():
    v = discord_and_classical(product_state(0.3, 1.1, 1.2, -0.4).density())
    for x in (v.concurrence, v.mutual_information, v.classical, v.discord):
        assert abs(x) < 1e-9


@pytest.mark.parametrize("p", np.linspace(0, 1, 21))
def test_werner_concurrence_closed_form(p):
    assert concurrence(werner(p)) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-10)


def test_binary_entropy_and_eof():
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == pytest.approx(1.0)
    # E_F(C = 1/4) = h((1 + sqrt(15/16)) / 2)
    assert eof_from_concurrence(0.25) == pytest.approx(0.117619, abs=1e-6)
    assert entanglement_of_formation(werner(0.5)) == pytest.approx(eof_from_concurrence(0.25), abs=1e-12)


def test_bloch_decomposition_reconstructs():
    rho = random_density(np.random.default_rng(2))
    r, s, t = bloch_decomposition(rho)
    p = [SIGMA[k] for k in "xyz"]
    back = np.eye(4, dtype=complex)
    for i in range(3):
        back += r[i] * np.kron(p[i], np.eye(2)) + s[i] * np.kron(np.eye(2), p[i])
        for j in range(3):
            back += t[i, j] * np.kron(p[i], p[j])
    assert np.allclose(back / 4, rho)


@pytest.mark.parametrize("seed", range(8))
def test_mutual_information_splits(seed):
    rho = random_density(np.random.default_rng(seed), rank=2 + seed % 3)
    v = discord_and_classical(rho)
    assert v.mutual_information == pytest.approx(mutual_information(rho), abs=1e-12)
    assert v.classical + v.discord == pytest.approx(v.mutual_information, abs=1e-12)
    assert v.discord >= -1e-9 and v.classical >= -1e-9


def test_xstate_shortcut_matches_minimizer():
    rng = np.random.default_rng(5)
    for _ in range(50):
        rho = xstate(rng)
        assert xstate_discord(rho).discord == pytest.approx(discord_and_classical(rho).discord, abs=1e-8)


def test_xstate_check_rejects_generic_state():
    with pytest.raises(ValueError, match="not of the"):
        check_xstate(random_density(np.random.default_rng(0)))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_invariant_under_local_unitary_on_unmeasured_party(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng, rank=2)
    u = np.kron(local_unitary(rng), np.eye(2))
    a = discord_and_classical(rho)
    b = discord_and_classical(u @ rho @ u.conj().T)
    assert b.discord == pytest.approx(a.discord, abs=1e-8)
    assert b.concurrence == pytest.approx(a.concurrence, abs=1e-10)


def test_grid_refinement_is_stable():
    rho = random_density(np.random.default_rng(9), rank=3)
    coarse = discord_and_classical(rho, grid=DiscordGrid(n_theta=32, n_phi=64))
    fine = discord_and_classical(rho, grid=DiscordGrid(n_theta=128, n_phi=256))
    assert fine.discord == pytest.approx(coarse.discord, abs=1e-9)


def test_measured_party_swaps_roles():
    rho = random_density(np.random.default_rng(4), rank=2)
    swap = np.eye(4)[[0, 2, 1, 3]]
    a = discord_and_classical(rho, measured_party="a")
    b = discord_and_classical(swap @ rho @ swap, measured_party="b")
    assert a.discord == pytest.approx(b.discord, abs=1e-10)


def test_asymmetric_discord_for_classical_quantum_state():
    # classical on a, quantum on b: measuring a costs nothing, measuring b does
    plus = np.array([[0.5, 0.5], [0.5, 0.5]])
    rho = 0.5 * np.kron(np.diag([1.0, 0.0]), np.diag([1.0, 0.0])) + 0.5 * np.kron(np.diag([0.0, 1.0]), plus)
    assert discord_and_classical(rho, measured_party="a").discord == pytest.approx(0.0, abs=1e-9)
    assert discord_and_classical(rho, measured_party="b").discord > 0.1


def test_correlation_trace_matches_independent_calls():
    rng = np.random.default_rng(12)
    states = [random_density(rng, rank=2) for _ in range(5)]
    trace = correlation_trace(states, grid=DiscordGrid(rescan_every=2))
    for rho, v in zip(states, trace):
        assert v.discord == pytest.approx(discord_and_classical(rho).discord, abs=1e-8)


def test_rejects_non_physical_state():
    with pytest.raises(ValueError):
        discord_and_classical(np.diag([0.7, 0.5, 0.0, -0.2]))
