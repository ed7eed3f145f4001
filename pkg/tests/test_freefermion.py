import numpy as np
import pytest

from mblsim import ed
from mblsim.freefermion import (
    BdgHamiltonian,
    BdgPropagator,
    CovarianceState,
    build_bdg,
    density_density,
    evolve_covariance,
    ff_observables,
    frozen_string_signs,
    init_covariance,
    quadratic_energy,
)
from mblsim.lattice import CouplingMatrix, ModelSpec, kac_normalized_couplings, sample_disorder


def nearest_neighbour_spec(n, seed, b=1.0, w=2.0):
    rng = np.random.default_rng(seed)
    j = np.zeros((n, n))
    for i in range(n - 1):
        j[i, i + 1] = j[i + 1, i] = rng.uniform(0.5, 1.5)
    return ModelSpec(CouplingMatrix(j), b, sample_disorder(w, seed, n))


def kac_spec(n, seed, b=0.0, w=3.0, alpha=3.0):
    return ModelSpec(kac_normalized_couplings(n, 1.0, alpha), b, sample_disorder(w, seed, n))


def test_frozen_signs():
    s = [1, -1, -1, 1, -1]
    eta = frozen_string_signs(s)
    assert np.array_equal(eta, eta.T)
    assert set(np.unique(eta)) <= {-1, 1}
    assert all(eta[i, i + 1] == 1 for i in range(4))
    assert eta[0, 3] == s[1] * s[2]
    assert eta[1, 4] == s[2] * s[3]


def test_two_site_bdg_by_hand():
    spec = ModelSpec(CouplingMatrix(np.array([[0, 0.7], [0.7, 0]])), 2.0, sample_disorder(1.0, 3, 2))
    bdg = build_bdg(spec)
    d = spec.disorder.values
    np.testing.assert_allclose(bdg.hopping, [[-(2 + d[0]), 0.7], [0.7, -(2 + d[1])]])
    np.testing.assert_allclose(bdg.pairing, [[0, 0.7], [-0.7, 0]])
    m = bdg.matrix()
    np.testing.assert_allclose(m, m.conj().T)


def test_init_covariance_examples():
    assert np.all(init_covariance([1, 1, 1]).g == 0)
    np.testing.assert_array_equal(np.diag(init_covariance(ed.neel_pattern(4)).g).real, [0, 1, 0, 1])
    lo, hi = init_covariance([1, -1, 1]).physicality()
    assert lo == pytest.approx(0, abs=1e-14) and hi == pytest.approx(1, abs=1e-14)


def test_validation():
    with pytest.raises(ValueError):
        BdgHamiltonian(2, np.array([[0, 1], [0, 0]], complex), np.zeros((2, 2), complex), np.ones((2, 2)))
    with pytest.raises(ValueError):
        CovarianceState(np.eye(2), np.ones((2, 2)))
    with pytest.raises(ValueError):
        build_bdg(kac_spec(4, 1), [1, -1])


def test_t0_identity():
    spec = kac_spec(6, 2)
    st = init_covariance(ed.neel_pattern(6))
    out = evolve_covariance(st, build_bdg(spec), 0.0)
    np.testing.assert_allclose(out.g, st.g, atol=1e-14)
    np.testing.assert_allclose(out.f, st.f, atol=1e-14)


def test_two_site_rabi():
    hop = 0.8
    bdg = BdgHamiltonian(2, np.array([[0, hop], [hop, 0]], complex), np.zeros((2, 2), complex), np.ones((2, 2)))
    st = CovarianceState(np.diag([1.0, 0.0]), np.zeros((2, 2)))
    times = np.linspace(0, 5, 26)
    gs, _ = BdgPropagator(bdg).evolve_series(st, times)
    np.testing.assert_allclose(gs[:, 0, 0].real, np.cos(hop * times) ** 2, atol=1e-13)
    np.testing.assert_allclose(gs[:, 1, 1].real, np.sin(hop * times) ** 2, atol=1e-13)


def test_number_conserved_without_pairing():
    rng = np.random.default_rng(0)
    n = 7
    h = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    h = h + h.conj().T
    bdg = BdgHamiltonian(n, h, np.zeros((n, n), complex), np.ones((n, n)))
    st = init_covariance([1, -1, -1, 1, -1, 1, 1])
    gs, fs = BdgPropagator(bdg).evolve_series(st, np.linspace(0, 10, 21))
    np.testing.assert_allclose(np.trace(gs, axis1=1, axis2=2).real, 3, atol=1e-12)
    assert np.max(np.abs(fs)) < 1e-12


def test_physicality_and_energy_conservation():
    spec = kac_spec(12, 5, b=1.0)
    bdg = build_bdg(spec)
    prop = BdgPropagator(bdg)
    st = init_covariance(ed.neel_pattern(12))
    e0 = quadratic_energy(st, bdg)
    for t in (0.3, 4.0, 50.0):
        s = prop.evolve(st, t)
        lo, hi = s.physicality()
        assert lo > -1e-8 and hi < 1 + 1e-8
        assert quadratic_energy(s, bdg) == pytest.approx(e0, abs=1e-9)


def test_product_state_observables():
    mz, zz, fq = ff_observables(init_covariance([1, -1, -1, 1]))
    np.testing.assert_array_equal(mz, [1, -1, -1, 1])
    np.testing.assert_allclose(zz, np.outer(mz, mz))
    assert fq == pytest.approx(0, abs=1e-14)


def test_density_density_diagonal_is_occupation():
    spec = kac_spec(6, 8)
    st = BdgPropagator(build_bdg(spec)).evolve(init_covariance(ed.neel_pattern(6)), 1.3)
    nn = density_density(st.g, st.f)
    np.testing.assert_allclose(np.diag(nn), np.diag(st.g).real, atol=1e-13)


@pytest.mark.parametrize("pattern", ["neel", "random"])
@pytest.mark.parametrize("seed", [0, 1])
def test_nearest_neighbour_matches_ed(pattern, seed):
    n = 6
    spec = nearest_neighbour_spec(n, seed)
    signs = ed.neel_pattern(n) if pattern == "neel" else np.random.default_rng(seed).choice([-1, 1], n)
    times = np.geomspace(0.01, 10, 50)
    g, f = BdgPropagator(build_bdg(spec, signs)).evolve_series(init_covariance(signs), times)
    mz, zz, fq = ff_observables((g, f))
    amps = ed.evolve_series(ed.z_product_state(signs), ed.build_hamiltonian(spec), times)
    mz_ed, zz_ed = ed.z_moments(amps, n)
    assert np.max(np.abs(mz - mz_ed)) < 1e-8
    assert np.max(np.abs(zz - zz_ed)) < 1e-8


def test_long_range_is_only_approximate():
    # string operators make the long-range model interacting; the
    # frozen-phase theory must differ from the exact dynamics
    n = 6
    spec = kac_spec(n, 4, alpha=1.0)
    signs = ed.neel_pattern(n)
    times = np.array([5.0, 10.0])
    mz, _, _ = ff_observables(BdgPropagator(build_bdg(spec, signs)).evolve_series(init_covariance(signs), times))
    mz_ed, _ = ed.z_moments(ed.evolve_series(ed.neel_state(n), ed.build_hamiltonian(spec), times), n)
    assert np.max(np.abs(mz - mz_ed)) > 1e-3


def test_large_chain_runs():
    n = 100
    spec = kac_spec(n, 9)
    g, f = BdgPropagator(build_bdg(spec)).evolve_series(init_covariance(ed.neel_pattern(n)), [0.0, 1.0, 30.0])
    mz, zz, fq = ff_observables((g, f))
    assert mz.shape == (3, n) and fq.shape == (3,)
    assert np.all(np.abs(mz) <= 1 + 1e-10)
    assert fq[0] == pytest.approx(0, abs=1e-12)
