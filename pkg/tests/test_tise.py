"""Stationary-state solver tests against dense eigensolutions."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

import dense_ref
from ttchain.chain import ChainSpec, ladder_ops
from ttchain.models import ExcitonModel, PhononModel
from ttchain.tise import (
    TiseConfig,
    TiseResult,
    deflation_shift,
    solve_tise,
    solve_tise_dense,
)
from ttchain.tt import TTOperator, tt_inner, tt_norm, tt_to_dense


def exciton3():
    return ExcitonModel(ChainSpec(3), alpha=0.1, beta=-0.01)


def dense_levels(model, d=2):
    mat = dense_ref.dense_exciton(model.chain.n_site, model.chain.periodic,
                                  model.alphas, model.betas, model.eta, d=d)
    return np.linalg.eigvalsh(mat)


class TestConfig:
    def test_defaults(self):
        cfg = TiseConfig()
        assert cfg.n_levels == 1
        assert cfg.solver == "als"
        assert cfg.eigen == "dense-hermitian"

    @pytest.mark.parametrize("kwargs", [
        {"n_levels": 0},
        {"solver": "cg"},
        {"eigen": "lanczos"},
        {"ranks": 0},
        {"repeats": 2},
        {"conv_eps": 0.0},
        {"conv_eps": -1e-8},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            TiseConfig(**kwargs)

    def test_repeats_message_names_stopping_rule(self):
        with pytest.raises(ValueError, match="three sweeps"):
            TiseConfig(repeats=1)


class TestDeflationShift:
    def test_bounds_spectral_range(self):
        h = exciton3().to_operator()
        mat = dense_ref.dense_exciton(3, False, [0.1] * 3, [-0.01] * 2, 0.0)
        assert deflation_shift(h) >= 2.0 * np.abs(np.linalg.eigvalsh(mat)).max()

    def test_positive_for_nonzero_operator(self):
        h = exciton3().to_operator()
        assert deflation_shift(h) > 0.0


class TestDenseSolver:
    def test_lowest_levels(self):
        model = exciton3()
        cfg = TiseConfig(n_levels=4, solver="qe")
        res = solve_tise(model.to_operator(), cfg)
        assert_allclose(res.energies, dense_levels(model)[:4], atol=1e-12)
        assert res.converged == [True] * 4

    def test_states_reproduce_energies(self):
        model = exciton3()
        h = model.to_operator()
        mat = dense_ref.dense_exciton(3, False, model.alphas, model.betas,
                                      model.eta)
        res = solve_tise_dense(h, TiseConfig(n_levels=3))
        for energy, state in zip(res.energies, res.states):
            assert_allclose(tt_norm(state), 1.0, atol=1e-10)
            vec = tt_to_dense(state)
            assert np.linalg.norm(mat @ vec - energy * vec) < 1e-12
        # the reported residual is contracted in tensor form and carries a
        # cancellation floor well above machine precision
        assert res.residuals.max() < 1e-6

    def test_dense_all_selects_nearest_to_estimate(self):
        # singles sit at alpha + sqrt(2)*beta, alpha, alpha - sqrt(2)*beta
        model = exciton3()
        cfg = TiseConfig(n_levels=2, eigen="dense-all", e_est=0.095)
        res = solve_tise_dense(model.to_operator(), cfg)
        root2 = np.sqrt(2.0)
        assert_allclose(res.energies, [0.1 - root2 * 0.01, 0.1], atol=1e-12)

    def test_sparse_shift_invert_matches_dense(self):
        model = ExcitonModel(ChainSpec(4), alpha=0.1, beta=-0.01)
        cfg = TiseConfig(n_levels=3, eigen="sparse-shift-invert")
        res = solve_tise_dense(model.to_operator(), cfg)
        assert_allclose(res.energies, dense_levels(model)[:3], atol=1e-10)

    def test_sparse_shift_invert_targets_estimate(self):
        model = exciton3()
        cfg = TiseConfig(n_levels=1, eigen="sparse-shift-invert", e_est=0.099)
        res = solve_tise_dense(model.to_operator(), cfg)
        assert_allclose(res.energies, [0.1], atol=1e-10)

    def test_rejects_non_hermitian(self):
        ops = ladder_ops(2)
        eye = np.eye(2, dtype=complex).reshape(1, 2, 2, 1)
        h = TTOperator([ops["raise"].astype(complex).reshape(1, 2, 2, 1), eye])
        with pytest.raises(ValueError, match="[Hh]ermitian"):
            solve_tise_dense(h, TiseConfig())


class TestAlsExciton:
    def test_four_lowest_levels(self):
        model = exciton3()
        cfg = TiseConfig(n_levels=4, ranks=4, repeats=12, conv_eps=1e-12)
        res = solve_tise(model.to_operator(), cfg)
        assert_allclose(res.energies, dense_levels(model)[:4], atol=1e-10)
        assert all(res.converged)

    def test_deflated_states_are_orthonormal(self):
        cfg = TiseConfig(n_levels=4, ranks=4, repeats=12, conv_eps=1e-12)
        res = solve_tise(exciton3().to_operator(), cfg)
        for j, state in enumerate(res.states):
            assert_allclose(tt_norm(state), 1.0, atol=1e-10)
            for k in range(j):
                assert abs(tt_inner(res.states[k], state)) < 1e-8

    def test_deflation_leaves_lower_levels_unchanged(self):
        h = exciton3().to_operator()
        deep = solve_tise(h, TiseConfig(n_levels=4, ranks=4, repeats=12,
                                        conv_eps=1e-12))
        solo = solve_tise(h, TiseConfig(n_levels=1, ranks=4, repeats=12,
                                        conv_eps=1e-12))
        assert abs(deep.energies[0] - solo.energies[0]) < 1e-12

    def test_ground_history_non_increasing(self):
        cfg = TiseConfig(n_levels=1, ranks=4, repeats=10, conv_eps=1e-14)
        res = solve_tise(exciton3().to_operator(), cfg)
        diffs = np.diff(res.history[0])
        assert np.all(diffs <= 1e-12)

    def test_energy_estimate_targets_interior_level(self):
        cfg = TiseConfig(n_levels=1, ranks=4, repeats=12, conv_eps=1e-12,
                         e_est=0.099)
        res = solve_tise(exciton3().to_operator(), cfg)
        assert_allclose(res.energies, [0.1], atol=1e-10)

    def test_degenerate_levels_resolved_by_deflation(self):
        model = ExcitonModel(ChainSpec(3), alpha=0.1, beta=0.0)
        cfg = TiseConfig(n_levels=3, ranks=4, repeats=12, conv_eps=1e-12)
        res = solve_tise(model.to_operator(), cfg)
        assert_allclose(res.energies, [0.0, 0.1, 0.1], atol=1e-10)
        assert abs(tt_inner(res.states[1], res.states[2])) < 1e-8

    def test_residual_bound_for_converged_levels(self):
        cfg = TiseConfig(n_levels=4, ranks=4, repeats=12, conv_eps=1e-12)
        res = solve_tise(exciton3().to_operator(), cfg)
        for energy, resid, done in zip(res.energies, res.residuals,
                                       res.converged):
            if done:
                assert resid <= 1e-6 * max(1.0, abs(energy))

    def test_seeded_runs_reproduce(self):
        h = exciton3().to_operator()
        cfg = TiseConfig(n_levels=2, ranks=4, repeats=8, seed=7)
        a = solve_tise(h, cfg)
        b = solve_tise(h, cfg)
        assert np.array_equal(a.energies, b.energies)

    def test_periodic_chain(self):
        model = ExcitonModel(ChainSpec(4, periodic=True), alpha=0.1,
                             beta=-0.01)
        cfg = TiseConfig(n_levels=3, ranks=6, repeats=15, conv_eps=1e-12)
        res = solve_tise(model.to_operator(), cfg)
        assert_allclose(res.energies, dense_levels(model)[:3], atol=1e-9)


class TestAlsPhonon:
    def test_ground_state_energy(self):
        model = PhononModel(ChainSpec(3), 1.0, 1e-3, np.sqrt(2) * 1e-3)
        mat = dense_ref.dense_phonon(3, False, np.full(3, 1.0),
                                     np.full(3, 1e-3),
                                     np.full(2, np.sqrt(2) * 1e-3), 6)
        cfg = TiseConfig(n_levels=1, ranks=6, repeats=15, conv_eps=1e-12)
        res = solve_tise(model.to_operator(6), cfg)
        assert abs(res.energies[0] - np.linalg.eigvalsh(mat)[0]) < 1e-10


class TestConvergenceFlag:
    def test_too_few_repeats_flags_unconverged(self):
        # three sweeps can never satisfy the last-three-deltas rule
        cfg = TiseConfig(n_levels=1, ranks=4, repeats=3)
        res = solve_tise(exciton3().to_operator(), cfg)
        assert res.converged == [False]
        assert res.sweeps == [3]
        assert len(res.history[0]) == 3
        assert np.isfinite(res.residuals[0])

    def test_result_shape(self):
        cfg = TiseConfig(n_levels=2, ranks=4, repeats=8)
        res = solve_tise(exciton3().to_operator(), cfg)
        assert isinstance(res, TiseResult)
        assert res.n_levels == 2
        assert res.energies.shape == (2,)
        assert len(res.states) == len(res.sweeps) == len(res.history) == 2
