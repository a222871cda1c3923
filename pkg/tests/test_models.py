"""Tests for the exciton, phonon and coupled chain models."""

import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

import dense_ref
from ttchain.chain import ChainSpec
from ttchain.errors import UnsupportedModelError
from ttchain.models import CoupledModel, ExcitonModel, PhononModel
from ttchain.tt import tt_to_dense

NU = 1e-3
OMG = np.sqrt(2.0) * 1e-3


def exciton(n, periodic, alpha=0.1, beta=-0.01, eta=0.05):
    return ExcitonModel(ChainSpec(n, periodic=periodic), alpha, beta, eta)


def phonon(n, periodic, mass=1.0, nu=NU, omg=OMG):
    return PhononModel(ChainSpec(n, periodic=periodic), mass, nu, omg)


class TestBroadcasting:
    def test_site_values_on_heterogeneous_chain(self):
        chain = ChainSpec(3, periodic=False, homogen=False)
        model = ExcitonModel(chain, [0.1, 0.2, 0.3], [0.01, 0.02], 0.0)
        assert_allclose(model.alphas, [0.1, 0.2, 0.3])
        assert_allclose(model.betas, [0.01, 0.02])

    def test_homogeneous_chain_rejects_varying_values(self):
        chain = ChainSpec(3, periodic=False)
        with pytest.raises(ValueError, match="alpha"):
            ExcitonModel(chain, [0.1, 0.2, 0.3], 0.01)

    def test_wrong_length_names_parameter(self):
        chain = ChainSpec(3, periodic=False, homogen=False)
        with pytest.raises(ValueError, match="beta"):
            ExcitonModel(chain, 0.1, [0.01, 0.02, 0.03])


class TestExciton:
    @pytest.mark.parametrize("periodic", [False, True])
    def test_operator_matches_dense(self, periodic):
        model = exciton(4, periodic)
        got = tt_to_dense(model.to_operator(2), dense_cap=10**4)
        want = dense_ref.dense_exciton(4, periodic, model.alphas, model.betas,
                                       model.eta)
        assert_allclose(got, want, atol=1e-14)

    def test_heterogeneous_linear_matches_dense(self):
        chain = ChainSpec(4, periodic=False, homogen=False)
        rng = np.random.default_rng(1)
        alphas, betas = rng.standard_normal(4), rng.standard_normal(3)
        model = ExcitonModel(chain, alphas, betas, 0.3)
        got = tt_to_dense(model.to_operator(2), dense_cap=10**4)
        want = dense_ref.dense_exciton(4, False, alphas, betas, 0.3)
        assert_allclose(got, want, atol=1e-13)

    def test_ranks(self):
        assert exciton(5, True).to_operator(2).ranks == (1, 6, 6, 6, 6, 1)
        assert exciton(5, False).to_operator(2).ranks == (1, 4, 4, 4, 4, 1)

    def test_ground_and_single_levels_linear(self):
        model = exciton(5, False)
        levels = model.exact_levels(6)
        dense = dense_ref.dense_exciton(5, False, model.alphas, model.betas,
                                        model.eta)
        spectrum = np.linalg.eigvalsh(dense)
        assert_allclose(levels, spectrum[:6], atol=1e-12)

    def test_two_quanta_levels_cyclic(self):
        # alpha large enough that <=2 quanta fill the bottom of the spectrum
        for n in (4, 5, 6):
            model = exciton(n, True)
            count = 1 + n + n * (n - 1) // 2
            levels = model.exact_levels(count)
            dense = dense_ref.dense_exciton(n, True, model.alphas, model.betas,
                                            model.eta)
            spectrum = np.linalg.eigvalsh(dense)
            assert_allclose(levels, spectrum[:count], atol=1e-12)

    def test_two_quanta_flag_off_keeps_singles_only(self):
        model = exciton(4, True)
        levels = model.exact_levels(5, two_quanta=False)
        assert len(levels) == 5

    def test_eta_uniform_shift(self):
        base = exciton(3, False, eta=0.0).exact_levels(4)
        shifted = exciton(3, False, eta=0.2).exact_levels(4)
        assert_allclose(shifted, base + 0.2, atol=1e-14)

    def test_heterogeneous_levels_unsupported(self):
        chain = ChainSpec(3, periodic=False, homogen=False)
        model = ExcitonModel(chain, [0.1, 0.2, 0.1], 0.01)
        with pytest.raises(UnsupportedModelError):
            model.exact_levels(3)

    def test_qtt_flag_unsupported(self):
        with pytest.raises(NotImplementedError):
            exciton(3, False).to_operator(2, qtt=True)


class TestPhononFrequencies:
    def test_frozen_homogeneous_values(self):
        model = phonon(4, False)
        assert_allclose(model.nu_eff[1], 1.7320508075688772e-3, rtol=1e-12)
        assert_allclose(model.nu_eff[0], 1.4142135623730951e-3, rtol=1e-12)
        assert_allclose(model.omg_eff[1], 2.886751345948129e-4, rtol=1e-12)

    def test_periodic_all_interior(self):
        model = phonon(5, True)
        assert_allclose(model.nu_eff, 1.7320508075688772e-3, rtol=1e-12)
        assert_allclose(model.omg_eff, 2.886751345948129e-4, rtol=1e-12)

    @pytest.mark.parametrize("periodic", [False, True])
    def test_quadratic_form_reproduces_hessian(self, periodic):
        # the oscillator basis is fixed by demanding that site terms plus
        # bilinear couplings carry the same quadratic form as the original
        # lattice: K_ii = m_i nu_eff_i^2, K_ij = -2 omg_eff sqrt(m m' nu nu')
        chain = ChainSpec(5, periodic=periodic, homogen=False)
        rng = np.random.default_rng(7)
        masses = rng.uniform(0.5, 3.0, 5)
        nus = rng.uniform(0.5e-3, 2e-3, 5)
        omgs = rng.uniform(0.5e-3, 2e-3, chain.n_bond)
        model = PhononModel(chain, masses, nus, omgs)
        n = 5
        k = np.diag(masses * model.nu_eff**2)
        for b in range(chain.n_bond):
            i, j = b, (b + 1) % n
            c = 2.0 * model.omg_eff[b] * np.sqrt(
                masses[i] * model.nu_eff[i] * masses[j] * model.nu_eff[j])
            k[i, j] -= c
            k[j, i] -= c
        assert_allclose(k, model.hess_pot(), rtol=1e-12, atol=1e-18)

    def test_free_chain_rejected(self):
        chain = ChainSpec(3, periodic=False)
        with pytest.raises(ValueError, match="positive"):
            PhononModel(chain, 1.0, 0.0, 0.0)


class TestPhononOperator:
    @pytest.mark.parametrize("periodic", [False, True])
    def test_matches_dense(self, periodic):
        model = phonon(3, periodic)
        got = tt_to_dense(model.to_operator(4), dense_cap=10**4)
        want = dense_ref.dense_phonon(3, periodic, model.masses, model.nus,
                                      model.omgs, 4)
        assert_allclose(got, want, atol=1e-16)

    def test_ranks(self):
        assert phonon(4, False).to_operator(2).ranks == (1, 3, 3, 3, 1)
        assert phonon(4, True).to_operator(2).ranks == (1, 4, 4, 4, 1)

    def test_spectrum_converges_to_normal_modes(self):
        model = phonon(3, False)
        levels = model.exact_levels(4)
        dense = tt_to_dense(model.to_operator(9), dense_cap=10**3)
        spectrum = np.linalg.eigvalsh(dense)
        assert_allclose(spectrum[:4], levels, atol=1e-10)


class TestPhononClassical:
    def test_force_is_minus_gradient(self):
        model = phonon(4, True)
        rng = np.random.default_rng(3)
        q = rng.standard_normal(4)
        f = model.force(q)
        h = 1e-6
        for i in range(4):
            dq = np.zeros(4)
            dq[i] = h
            fd = -(model.potential(q + dq) - model.potential(q - dq)) / (2 * h)
            assert_allclose(f[i], fd, atol=1e-10)

    def test_hessian_consistent_with_potential(self):
        model = phonon(3, False)
        k = model.hess_pot()
        rng = np.random.default_rng(4)
        q = rng.standard_normal(3)
        assert_allclose(model.potential(q), 0.5 * q @ k @ q, rtol=1e-12)

    def test_kinetic_quadratic(self):
        chain = ChainSpec(3, periodic=False, homogen=False)
        model = PhononModel(chain, [1.0, 2.0, 4.0], 1e-3, 1e-3)
        p = np.array([1.0, 2.0, 2.0])
        assert_allclose(model.kinetic(p), 0.5 * (1.0 + 2.0 + 1.0), rtol=1e-14)
        assert_allclose(model.hess_kin(), np.diag([1.0, 0.5, 0.25]), atol=0)

    def test_dispersion_cyclic(self):
        n = 6
        model = phonon(n, True)
        omega, modes = model.normal_modes()
        k = np.arange(n)
        mu_over_m = 0.5
        want = np.sqrt(NU**2 + 4.0 * mu_over_m * OMG**2
                       * np.sin(np.pi * k / n) ** 2)
        assert_allclose(np.sort(omega), np.sort(want), atol=1e-15)
        # mass-weighted modes stay orthonormal
        assert_allclose(modes.T @ modes, np.eye(n), atol=1e-12)

    def test_zero_point_energy_frozen(self):
        omega, _ = phonon(6, True).normal_modes()
        assert_allclose(0.5 * omega.sum(), 5.032247551122991e-3, rtol=1e-14)

    def test_exact_levels_match_enumeration(self):
        model = phonon(3, True)
        omega, _ = model.normal_modes()
        combos = [0.5 * omega.sum() + np.dot(occ, omega)
                  for occ in itertools.product(range(6), repeat=3)]
        want = np.sort(combos)[:12]
        assert_allclose(model.exact_levels(12), want, atol=1e-18)


class TestPhononLocalOperators:
    def test_ground_state_spread(self):
        model = phonon(3, False)
        q = model.position_matrix(1, 6)
        var = q[0] @ q[:, 0]
        assert_allclose(var, 1.0 / (2.0 * model.nu_eff[1]), rtol=1e-14)

    def test_commutator(self):
        model = phonon(3, False)
        q = model.position_matrix(0, 7)
        p = model.momentum_matrix(0, 7)
        comm = q @ p - p @ q
        assert_allclose(comm[:6, :6], 1j * np.eye(6), atol=1e-15)

    def test_coherent_zeta_frozen(self):
        model = phonon(9, True)
        zeta = model.coherent_zeta(20.0)
        assert_allclose(zeta, 0.5885661912765424, rtol=1e-14)

    def test_site_observable_keys(self):
        obs = phonon(3, False).site_observables(4)
        assert set(obs) == {"qnum", "position", "momentum"}
        assert all(len(v) == 3 for v in obs.values())


def coupled(n, periodic, **kw):
    params = dict(chi=2e-4, rho=1.5e-4, sig=1.6e-4, tau=0.7e-4)
    params.update(kw)
    return CoupledModel(ChainSpec(n, periodic=periodic), 0.1, -0.01, 0.05,
                        1.0, NU, OMG, **params)


class TestCoupled:
    @pytest.mark.parametrize("periodic", [False, True])
    def test_operator_matches_dense(self, periodic):
        n, dx, dp = 3, 2, 3
        model = coupled(n, periodic)
        got = tt_to_dense(model.to_operator((dx, dp)), dense_cap=10**6)
        want = dense_ref.dense_coupled(
            n, periodic, model.exciton.alphas, model.exciton.betas, 0.05,
            model.phonon.masses, model.phonon.nus, model.phonon.omgs,
            model.chis, model.rhos, model.sigs, model.taus, dx, dp)
        assert_allclose(got, want, atol=1e-15)

    def test_heterogeneous_matches_dense(self):
        n, dx, dp = 3, 2, 2
        chain = ChainSpec(n, periodic=True, homogen=False)
        rng = np.random.default_rng(11)
        model = CoupledModel(
            chain, rng.standard_normal(n) * 0.1, rng.standard_normal(n) * 0.01,
            0.1, rng.uniform(0.5, 2.0, n), 1e-3, rng.uniform(0.5, 2.0, n) * 1e-3,
            chi=rng.standard_normal(n) * 1e-4, rho=rng.standard_normal(n) * 1e-4,
            sig=rng.standard_normal(n) * 1e-4, tau=rng.standard_normal(n) * 1e-4)
        got = tt_to_dense(model.to_operator((dx, dp)), dense_cap=10**5)
        want = dense_ref.dense_coupled(
            n, True, model.exciton.alphas, model.exciton.betas, 0.1,
            model.phonon.masses, model.phonon.nus, model.phonon.omgs,
            model.chis, model.rhos, model.sigs, model.taus, dx, dp)
        assert_allclose(got, want, atol=1e-15)

    def test_ranks(self):
        assert coupled(4, True).to_operator((2, 2)).ranks == (1, 20, 20, 20, 1)
        assert coupled(4, False).to_operator((2, 2)).ranks == (1, 11, 11, 11, 1)

    def test_energy_components_sum_to_total(self):
        model = coupled(3, True)
        parts = model.energy_components((2, 2))
        assert set(parts) == {"exciton", "phonon", "coupling"}
        total = sum(tt_to_dense(op, dense_cap=10**4) for op in parts.values())
        want = tt_to_dense(model.to_operator((2, 2)), dense_cap=10**4)
        assert_allclose(total, want, atol=1e-15)

    def test_coupling_component_vanishes_without_couplings(self):
        model = coupled(3, False, chi=0.0, rho=0.0, sig=0.0, tau=0.0)
        parts = model.energy_components((2, 2))
        assert np.abs(tt_to_dense(parts["coupling"], dense_cap=10**4)).max() == 0.0

    def test_small_ring_with_sig_rejected(self):
        with pytest.raises(ValueError, match="n_site >= 3"):
            coupled(2, True)

    def test_sigma_only_guard(self):
        coupled(3, False, chi=0.0, rho=0.0, tau=0.0).require_sigma_only()
        with pytest.raises(UnsupportedModelError):
            coupled(3, False).require_sigma_only()

    def test_mean_field_force_is_minus_gradient(self):
        model = coupled(5, True, chi=0.0, rho=0.0, tau=0.0)
        rng = np.random.default_rng(12)
        a = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        q = rng.standard_normal(5)
        dens = np.abs(a) ** 2

        def energy(qv):
            return np.dot(dens, model.qu_coupling(qv))

        f = model.cl_coupling(a)
        h = 1e-6
        for i in range(5):
            dq = np.zeros(5)
            dq[i] = h
            fd = -(energy(q + dq) - energy(q - dq)) / (2 * h)
            assert_allclose(f[i], fd, atol=1e-9)

    def test_mean_field_edges_open_chain(self):
        model = coupled(4, False, chi=0.0, rho=0.0, tau=0.0)
        site = model.qu_coupling(np.array([1.0, 2.0, 3.0, 4.0]))
        sig = model.sigs[0]
        # first site has no left neighbor; last site carries no coupling
        assert_allclose(site, sig * np.array([2.0, 2.0, 2.0, 0.0]), rtol=1e-14)

    def test_fundamental_vectors(self):
        model = coupled(3, False)
        ground, excited = model.fundamental_vectors((2, 3))
        assert ground[0] == 1.0 and np.count_nonzero(ground) == 1
        assert excited[3] == 1.0 and np.count_nonzero(excited) == 1

    def test_site_observable_keys(self):
        obs = coupled(3, False).site_observables((2, 3))
        assert set(obs) == {"qnum_ex", "qnum_ph", "position", "momentum"}
        assert obs["position"][0].shape == (6, 6)
