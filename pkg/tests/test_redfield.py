import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinsync.bath import BathParams, RateTable
from spinsync.model import ModelParams, bell_state, build_model
from spinsync.operators import DensityMatrix, pauli
from spinsync.redfield import (PositivityWarning, build_generator, gap_map, propagate, rank_modes, redfield_tensor,
                               select_slow_pair, signal_from_modes, spectrum)


def loop_tensor(s, gp, gm):
    """Index-by-index evaluation of the Redfield tensor formula."""
    n = s.shape[0]
    r = np.zeros((n, n, n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            for m in range(n):
                for k in range(n):
                    v = 0j
                    if b == k:
                        v += sum(s[a, q] * s[q, m] * gp[q, m] for q in range(n))
                    v -= s[a, m] * s[k, b] * gp[a, m]
                    if a == m:
                        v += sum(s[k, q] * s[q, b] * gm[k, q] for q in range(n))
                    v -= s[a, m] * s[k, b] * gm[k, b]
                    r[a, b, m, k] = v
    return r


def generator(omega2, g, bath=None):
    bath = bath or BathParams()
    return build_generator(build_model(ModelParams(omega2=omega2, g=g)), bath)


def test_tensor_matches_loop_oracle():
    rng = np.random.default_rng(11)
    s = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    s = s + s.conj().T
    gp = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    gm = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    assert np.allclose(redfield_tensor(s, gp, gm), loop_tensor(s, gp, gm), atol=1e-12)


def test_generator_uses_model_rates(bath):
    model = build_model(ModelParams(omega2=1.3, g=-0.4))
    gen = build_generator(model, bath)
    table = RateTable(bath)
    ref = loop_tensor(model.s_matrix, table.matrix(model.bohr_frequencies, "+"),
                      table.matrix(model.bohr_frequencies, "-"))
    assert np.allclose(gen.tensor, ref, atol=1e-15)


params = st.tuples(st.floats(0.5, 2.0), st.floats(-1.0, 1.0))


@settings(max_examples=20, deadline=None)
@given(params)
def test_trace_and_hermiticity_preserved(p):
    gen = generator(*p)
    eye = np.eye(4).reshape(16)
    assert np.abs(eye @ gen.g_matrix).max() < 1e-12
    rng = np.random.default_rng(0)
    h = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    h = h + h.conj().T
    d = gen.apply(h)
    assert np.abs(d - d.conj().T).max() < 1e-12


def test_spectrum_structure_generic():
    spec = spectrum(generator(1.15, -1.0))
    assert not spec.defective
    assert spec.residual < 1e-12
    assert spec.counts() == (4, 6)
    assert np.max(spec.eigenvalues.real) < 1e-9
    assert np.sum(np.abs(spec.eigenvalues) < 1e-9) == 1


def _gibbs_offsets(gamma):
    b = BathParams(gamma=gamma)
    rho = spectrum(generator(1.15, -1.0, b)).steady_state()
    e = np.diag(build_model(ModelParams(omega2=1.15)).h_s).real
    gibbs = np.exp(-b.beta * e) / np.exp(-b.beta * e).sum()
    assert abs(np.trace(rho) - 1) < 1e-12
    return np.abs(np.diag(rho).real - gibbs).max(), np.abs(rho - np.diag(np.diag(rho))).max()


def test_steady_state_close_to_gibbs():
    # non-secular terms shift populations and leave a |uu><dd| coherence, both O(gamma)
    pop3, coh3 = _gibbs_offsets(1e-3)
    pop4, coh4 = _gibbs_offsets(1e-4)
    assert pop3 < 1e-2 and coh3 < 2e-2
    assert pop3 / pop4 == pytest.approx(10.0, rel=0.05)
    assert coh3 / coh4 == pytest.approx(10.0, rel=0.05)


def test_slow_pair_frequency_and_gap(fig4_state):
    spec = spectrum(generator(1.15, -1.0))
    pair = select_slow_pair(spec, fig4_state)
    assert pair.frequency1 == pytest.approx(2.30596, abs=1e-4)
    assert pair.gap < 0
    ranking = rank_modes(spec, pauli("x", 1), fig4_state)
    assert ranking[0].oscillatory


def test_singlet_is_stationary_at_zero_detuning():
    gen = generator(1.0, -0.5)
    singlet = bell_state("psi-").density()
    rho = gen.model.to_eigen(singlet.mat)
    assert np.abs(gen.apply(rho)).max() < 1e-14


def test_spectral_and_ode_propagation_agree(fig4_state):
    gen = generator(1.02, -1.0)
    times = np.linspace(0, 40, 401)
    with pytest.warns(PositivityWarning):
        a = propagate(gen, fig4_state, times, method="spectral")
    with pytest.warns(PositivityWarning):
        b = propagate(gen, fig4_state, times, method="ode")
    assert np.abs(a.states - b.states).max() < 1e-8
    assert a.trace_err.max() < 1e-12
    assert a.method == "spectral" and b.method == "ode"


def test_mode_reconstruction_matches_propagation(fig4_state):
    gen = generator(1.02, -1.0)
    spec = spectrum(gen)
    times = np.linspace(0, 100, 501)
    with pytest.warns(PositivityWarning):
        traj = propagate(gen, fig4_state, times, spec=spec)
    sig = signal_from_modes(spec, pauli("x", 1), fig4_state, times)
    assert np.abs(sig - traj.sigma1x).max() < 1e-10


def test_positivity_monitor_records_violation(fig4_state):
    with pytest.warns(PositivityWarning, match="lost positivity"):
        traj = propagate(generator(1.02, -1.0), fig4_state, np.linspace(0, 2, 201))
    assert traj.positivity is not None
    assert -1e-3 < traj.positivity.worst_eigenvalue < -1e-7


def test_mixed_state_stays_positive():
    rho = DensityMatrix(np.eye(4) / 4)
    traj = propagate(generator(1.1, 0.3), rho, np.linspace(0, 50, 51))
    assert traj.positivity is None


@pytest.mark.parametrize("times", [[], [1.0, 0.5], [-1.0, 0.0]])
def test_propagate_rejects_bad_times(times):
    with pytest.raises(ValueError):
        propagate(generator(1.1, 0.0), DensityMatrix(np.eye(4) / 4), times)


def test_gap_map_independent_of_workers(fig4_state, bath):
    d, g = [0.01, 0.3], [-1.0, 0.0]
    one = gap_map(d, g, bath, fig4_state, workers=1)
    two = gap_map(d, g, bath, fig4_state, workers=2)
    assert np.array_equal(one.values, two.values)
    assert not one.failures
    assert np.all(one.values <= 0)
