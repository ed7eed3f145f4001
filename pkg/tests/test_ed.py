import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import PAULI, dense_hamiltonian, expm_taylor, site_op

from mblsim import ed
from mblsim.errors import CapacityError
from mblsim.lattice import (
    CouplingMatrix,
    DisorderRealization,
    ModelSpec,
    clean_model,
    power_law_couplings,
    sample_disorder,
)


def random_spec(n, seed, w=3.0, b=1.3, alpha=1.13):
    rng = np.random.default_rng(seed)
    j = rng.uniform(-1, 1, (n, n))
    j = np.triu(j, 1)
    j = j + j.T
    return ModelSpec(CouplingMatrix(j), b, sample_disorder(w, int(rng.integers(2**32)), n))


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return ed.StateVector(n, a / np.linalg.norm(a))


# -- states --------------------------------------------------------------------

def test_all_down_is_index_zero():
    s = ed.product_state(["d"] * 3)
    assert s.amplitudes[0] == 1


def test_neel_two_sites_bit_pattern():
    s = ed.neel_state(2)
    assert np.argmax(np.abs(s.amplitudes)) == 0b01


def test_neel_alternates():
    s = ed.neel_state(5)
    z = [ed.expectation_pauli(s, k, "z") for k in range(5)]
    assert z == [1, -1, 1, -1, 1]


def test_x_pattern():
    s = ed.product_state(["-x", "-x", "+x"])
    assert [round(ed.expectation_pauli(s, k, "x"), 12) for k in range(3)] == [-1, -1, 1]


def test_state_norm_checked():
    with pytest.raises(ValueError):
        ed.StateVector(1, np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        ed.product_state(["+q"])


# -- Hamiltonian ---------------------------------------------------------------

def test_single_spin_field():
    spec = ModelSpec(CouplingMatrix(np.zeros((1, 1))), 2.0, DisorderRealization(0.0, 0, [0.0]))
    h = ed.build_hamiltonian(spec)
    np.testing.assert_allclose(h.dense(), np.diag([-1.0, 1.0]))
    np.testing.assert_allclose(h.spectrum.eigenvalues, [-1, 1])


def test_xx_pair_spectrum():
    h = ed.build_hamiltonian(clean_model(power_law_couplings(2, 1.0, 1.0), 0.0))
    np.testing.assert_allclose(h.spectrum.eigenvalues, [-1, -1, 1, 1], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_dense_matches_kron_oracle(n):
    spec = random_spec(n, n)
    h = ed.build_hamiltonian(spec)
    ref = dense_hamiltonian(spec.couplings.values, spec.field_b, spec.disorder.values)
    np.testing.assert_allclose(h.dense(), ref.real, atol=1e-13)
    assert np.abs(ref.imag).max() == 0


def test_hermitian_traceless_and_apply():
    h = ed.build_hamiltonian(random_spec(7, 1))
    m = h.dense()
    assert np.array_equal(m, m.T)
    assert abs(np.trace(m)) < 1e-10
    psi = random_state(7, 2).amplitudes
    np.testing.assert_allclose(h.apply(psi), m @ psi, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 5), st.floats(-5, 5), st.floats(0.3, 2.0))
def test_neel_energy_is_zero_without_disorder(half, b, alpha):
    n = 2 * half
    h = ed.build_hamiltonian(clean_model(power_law_couplings(n, 1.0, alpha), b))
    assert abs(h.energy(ed.neel_state(n))) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(2, 9), st.floats(-5, 5), st.floats(0, 10), st.integers(0, 2**31))
def test_neel_energy_is_signed_field_sum(n, b, w, seed):
    # XX terms have no diagonal part, so only the signed fields survive
    spec = ModelSpec(power_law_couplings(n, 1.0, 1.13), b, sample_disorder(w, seed, n))
    h = ed.build_hamiltonian(spec)
    ref = np.dot(ed.neel_pattern(n), spec.site_fields)
    assert h.energy(ed.neel_state(n)) == pytest.approx(ref, abs=1e-12)


def test_capacity_error():
    spec = clean_model(power_law_couplings(15, 1, 1), 1.0)
    with pytest.raises(CapacityError, match="free-fermion"):
        ed.build_hamiltonian(spec)
    assert ed.build_hamiltonian(clean_model(power_law_couplings(5, 1, 1), 1.0), max_sites=5).n == 5
    with pytest.raises(CapacityError):
        ed.build_hamiltonian(clean_model(power_law_couplings(5, 1, 1), 1.0), max_sites=4)


def test_spectrum_reconstruction_and_trace():
    h = ed.build_hamiltonian(random_spec(8, 3))
    sp = h.spectrum
    assert np.all(np.diff(sp.eigenvalues) >= 0)
    assert abs(sp.eigenvalues.sum()) < 1e-8
    u = sp.eigenvectors
    rec = (u * sp.eigenvalues) @ u.T
    assert np.max(np.abs(rec - h.dense())) < 1e-9
    np.testing.assert_allclose(u.T @ u, np.eye(256), atol=1e-10)
    np.testing.assert_allclose(ed.eigenvalues(h), sp.eigenvalues, atol=1e-10)


def test_parity_blocks_are_exact():
    # H commutes with the product of all Z, so the two blocks carry the full spectrum
    h = ed.build_hamiltonian(random_spec(6, 4))
    full = np.linalg.eigvalsh(h.dense())
    np.testing.assert_allclose(np.sort(np.concatenate(ed.eigenvalues(h, by_sector=True))), full, atol=1e-12)


# -- evolution -------------------------------------------------------------------

def test_t0_identity():
    h = ed.build_hamiltonian(random_spec(5, 5))
    s = random_state(5, 6)
    np.testing.assert_allclose(ed.evolve(s, h, 0.0).amplitudes, s.amplitudes, atol=1e-13)


def test_xx_rabi():
    h = ed.build_hamiltonian(clean_model(power_law_couplings(2, 1.0, 1.0), 0.0))
    s = ed.product_state(["u", "u"])
    times = np.linspace(0, 3, 31)
    amps = ed.evolve_series(s, h, times)
    mz, _ = ed.z_moments(amps, 2)
    np.testing.assert_allclose(mz[:, 0], np.cos(2 * times), atol=1e-12)
    assert abs(ed.expectation_pauli(ed.evolve(s, h, np.pi / 4), 0, "z")) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
@pytest.mark.parametrize("method", ["spectral", "krylov"])
def test_dense_exponential_oracle(n, method):
    spec = random_spec(n, 10 + n)
    h = ed.build_hamiltonian(spec)
    hd = dense_hamiltonian(spec.couplings.values, spec.field_b, spec.disorder.values)
    s = random_state(n, 20 + n)
    times = [0.0, 0.3, 1.7, 6.0, 10.0]
    amps = ed.evolve_series(s, h, times, method=method)
    for t, a in zip(times, amps):
        ref = expm_taylor(-1j * t * hd) @ s.amplitudes
        assert np.linalg.norm(a - ref) < 1e-9


def test_spectral_and_krylov_agree_n10():
    spec = ModelSpec(power_law_couplings(10, 1.0, 1.13), 4.0, sample_disorder(8.0, 17, 10))
    h = ed.build_hamiltonian(spec)
    s = ed.neel_state(10)
    times = np.geomspace(0.01, 10, 12)
    a = ed.evolve_series(s, h, times, method="spectral")
    b = ed.evolve_series(s, h, times, method="krylov")
    assert np.max(np.linalg.norm(a - b, axis=1)) < 1e-8
    np.testing.assert_allclose(np.linalg.norm(b, axis=1), 1, atol=1e-9)
    energies = [h.energy(x) for x in b]
    np.testing.assert_allclose(energies, energies[0], atol=1e-9)


def test_krylov_path_large_chain():
    spec = ModelSpec(power_law_couplings(13, 1.0, 1.13), 4.0, sample_disorder(8.0, 3, 13))
    h = ed.build_hamiltonian(spec)
    amps = ed.evolve_series(ed.neel_state(13), h, [0.0, 0.5, 2.0])
    np.testing.assert_allclose(np.linalg.norm(amps, axis=1), 1, atol=1e-9)
    e0 = h.energy(amps[0])
    assert abs(h.energy(amps[-1]) - e0) < 1e-9


def test_large_field_conserves_total_z():
    spec = ModelSpec(power_law_couplings(6, 1.0, 1.13), 100.0, sample_disorder(0.0, 0, 6))
    h = ed.build_hamiltonian(spec)
    amps = ed.evolve_series(ed.neel_state(6), h, np.linspace(0, 10, 41))
    mz, _ = ed.z_moments(amps, 6)
    total = mz.sum(axis=1)
    assert np.max(np.abs(total - total[0])) < 1e-3


# -- local observables ----------------------------------------------------------

def test_rdm_product_state_is_pure():
    rho = ed.reduced_density_matrix(ed.product_state(["+x", "-z", "+y"]), 2)
    ev = np.linalg.eigvalsh(rho)
    np.testing.assert_allclose(ev, [0, 1], atol=1e-12)


def test_bell_pair():
    a = np.zeros(4, dtype=complex)
    a[0] = a[3] = 2**-0.5
    s = ed.StateVector(2, a)
    np.testing.assert_allclose(ed.reduced_density_matrix(s, 0), np.eye(2) / 2, atol=1e-14)
    assert ed.zz_correlator(s, 0, 1) == pytest.approx(1.0)
    assert ed.zz_correlator(s, 1, 1) == 1.0


@pytest.mark.parametrize("seed", range(4))
def test_rdm_consistent_with_pauli(seed):
    n = 5
    s = random_state(n, seed)
    for k in range(n):
        rho = ed.reduced_density_matrix(s, k)
        x, y, z = (ed.expectation_pauli(s, k, a) for a in "xyz")
        assert abs(np.trace(rho) - 1) < 1e-10
        assert np.linalg.eigvalsh(rho).min() > -1e-10
        np.testing.assert_allclose(rho, np.array([[1 + z, x - 1j * y], [x + 1j * y, 1 - z]]) / 2, atol=1e-12)
        # against explicit operators
        for a, val in zip("xyz", (x, y, z)):
            op = site_op(PAULI[a], k, n)
            assert val == pytest.approx(np.vdot(s.amplitudes, op @ s.amplitudes).real, abs=1e-12)
        np.testing.assert_allclose(ed.rdm_series(s.amplitudes, n, k)[0], rho, atol=1e-13)


def test_z_and_x_moments_batch():
    n = 4
    states = [random_state(n, s) for s in range(3)]
    amps = np.stack([s.amplitudes for s in states])
    mz, zz = ed.z_moments(amps, n)
    mx = ed.x_moments(amps, n)
    for t, s in enumerate(states):
        for i in range(n):
            assert mz[t, i] == pytest.approx(ed.expectation_pauli(s, i, "z"), abs=1e-12)
            assert mx[t, i] == pytest.approx(ed.expectation_pauli(s, i, "x"), abs=1e-12)
            for j in range(n):
                assert zz[t, i, j] == pytest.approx(ed.zz_correlator(s, i, j), abs=1e-12)


def test_z_product_correlator():
    signs = [1, -1, -1, 1]
    s = ed.z_product_state(signs)
    for i in range(4):
        for j in range(4):
            assert ed.zz_correlator(s, i, j) == signs[i] * signs[j]
