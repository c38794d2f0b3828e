import numpy as np
import pytest

from ptdimer.errors import DomainError, InputValidationError, JumpLogicError
from ptdimer.exact import BlockDensityMatrix, evolve_exact
from ptdimer.fock import SectorState, SystemParams, build_product_state
from ptdimer.observables import MomentSeries
from ptdimer.trajectories import (
    WORKERS_ENV,
    Channel,
    TrajectoryConfig,
    apply_jump,
    average_ensemble,
    default_workers,
    run_ensemble,
    run_trajectory,
    select_jump_channel,
    splitmix64,
)

OSC = (0.5 + 0.5j, 0.5 - 0.5j)


def small_config(**kw):
    base = dict(params=SystemParams(J=1, g=0.5, N0=6, gamma_loss=0.5),
                initial=build_product_state(*OSC, 6), t_final=1.0,
                sample_interval=0.05, master_seed=7, n_trajectories=20)
    base.update(kw)
    return TrajectoryConfig(**base)


class TestSeeding:
    def test_reference_values(self):
        # first outputs of the reference SplitMix64 stream seeded with 0
        assert splitmix64(0, 0) == 0xE220A8397B1DCDAF
        assert splitmix64(0, 1) == 0x6E789E6AA1B965F4

    def test_streams_differ(self):
        seeds = {splitmix64(42, i) for i in range(1000)}
        assert len(seeds) == 1000


class TestJumpSelection:
    def test_loss_only(self):
        p = SystemParams(J=1, g=0, N0=4, gamma_loss=1.0)
        state = SectorState.fock(0, 2)
        # w_loss = 0, so any u selects gain
        assert select_jump_channel(state, p, 0.0) == Channel.GAIN_SITE2

    def test_threshold(self):
        p = SystemParams(J=1, g=0, N0=2, gamma_loss=1.0)
        state = SectorState.fock(1, 0)
        w_l, w_g = 1.0, p.gamma_gain
        u_edge = w_l / (w_l + w_g)
        assert select_jump_channel(state, p, u_edge - 1e-9) == Channel.LOSS_SITE1
        assert select_jump_channel(state, p, u_edge + 1e-9) == Channel.GAIN_SITE2

    def test_no_channels(self):
        p = SystemParams(J=1, g=0, N0=2, gamma_loss=0)
        with pytest.raises(JumpLogicError):
            select_jump_channel(SectorState.fock(1, 1), p, 0.5)


class TestApplyJump:
    def test_gain_on_superposition(self):
        state = SectorState(1, np.array([1, 1]) / np.sqrt(2))
        out = apply_jump(state, Channel.GAIN_SITE2)
        assert out.n_total == 2
        np.testing.assert_allclose(out.amplitudes, np.array([0, 1, np.sqrt(2)]) / np.sqrt(3))

    def test_loss_on_fock(self):
        out = apply_jump(SectorState.fock(3, 1), Channel.LOSS_SITE1)
        assert out.n_total == 3
        np.testing.assert_allclose(out.amplitudes, [0, 1, 0, 0])

    def test_loss_on_empty_site(self):
        with pytest.raises(JumpLogicError):
            apply_jump(SectorState.fock(0, 3), Channel.LOSS_SITE1)


class TestSingleTrajectory:
    def test_reproducible(self):
        cfg = small_config()
        a, b = run_trajectory(cfg, 3, 64), run_trajectory(cfg, 3, 64)
        assert np.array_equal(a.moments.m12, b.moments.m12)
        assert np.array_equal(a.jump_times, b.jump_times)

    def test_indices_differ(self):
        cfg = small_config()
        assert not np.array_equal(run_trajectory(cfg, 0).moments.m11,
                                  run_trajectory(cfg, 1).moments.m11)

    def test_sector_bookkeeping(self):
        cfg = small_config(t_final=5.0)
        for i in range(10):
            r = run_trajectory(cfg, i, 4096)
            assert r.n_jumps == r.jump_times.size
            steps = np.where(r.jump_channels == Channel.GAIN_SITE2, 1, -1)
            assert r.final_sector == 6 + steps.sum()
            assert np.all(np.diff(r.jump_times) >= 0)
            # sampled moments see the sector of the most recent jump
            for t, n in zip(r.moments.t, r.moments.n_total):
                sector = 6 + steps[r.jump_times <= t].sum()
                assert n == pytest.approx(sector, abs=1e-9)

    def test_closed_system_never_jumps(self):
        cfg = small_config(params=SystemParams(J=1, g=0.5, N0=6, gamma_loss=0), t_final=3.0)
        r = run_trajectory(cfg, 0, 16)
        assert r.n_jumps == 0
        np.testing.assert_allclose(r.moments.n_total, 6, atol=1e-12)

    def test_mean_waiting_time(self):
        """With J = g = 0 on |1, 0> the total jump rate is gamma_loss + gamma_gain."""
        p = SystemParams(J=0, g=0, N0=1, gamma_loss=1.0)
        cfg = TrajectoryConfig(params=p, initial=SectorState.fock(1, 0), t_final=12.0,
                               sample_interval=0.5, rk_step=0.01, master_seed=5,
                               n_trajectories=1)
        first = []
        for i in range(10000):
            r = run_trajectory(cfg, i, 1)
            if r.n_jumps:
                first.append(r.jump_times[0])
        first = np.array(first)
        rate = p.gamma_loss + p.gamma_gain
        # censoring at t = 12 removes a fraction exp(-12 rate) ~ 1e-7; later gain-only
        # stretches grow the sector exponentially, so the horizon stays short
        assert first.size == 10000
        mean, se = first.mean(), first.std(ddof=1) / np.sqrt(first.size)
        assert abs(mean - 1 / rate) < 3 * se


class TestEnsemble:
    def test_workers_do_not_change_result(self):
        cfg = small_config()
        one = run_ensemble(cfg, workers=1)
        many = run_ensemble(cfg, workers=4)
        for name in ("m11", "m22", "m12", "stderr_n_total"):
            assert np.array_equal(getattr(one, name), getattr(many, name))

    def test_env_workers(self, monkeypatch):
        monkeypatch.setenv(WORKERS_ENV, "3")
        assert default_workers() == 3
        monkeypatch.setenv(WORKERS_ENV, "zero")
        with pytest.raises(InputValidationError):
            default_workers()

    def test_average_example(self):
        t = np.array([0.0, 1.0])
        a = MomentSeries(t, np.array([1.0, 2.0]), np.array([0.0, 0.0]), np.array([0j, 1j]))
        b = MomentSeries(t, np.array([3.0, 2.0]), np.array([0.0, 2.0]), np.array([0j, 1 + 0j]))
        avg = average_ensemble([a, b])
        np.testing.assert_allclose(avg.m11, [2, 2])
        np.testing.assert_allclose(avg.m12, [0, 0.5 + 0.5j])
        np.testing.assert_allclose(avg.stderr_n_total, [1, 1])

    def test_grid_mismatch(self):
        a = MomentSeries(np.array([0.0, 1.0]), np.ones(2), np.ones(2), np.zeros(2, complex))
        b = MomentSeries(np.array([0.0, 2.0]), np.ones(2), np.ones(2), np.zeros(2, complex))
        with pytest.raises(InputValidationError):
            average_ensemble([a, b])

    def test_bad_config(self):
        with pytest.raises(DomainError):
            small_config(t_final=0)
        with pytest.raises(DomainError):
            small_config(sample_interval=1e-4)

    def test_initial_balance(self):
        """The ensemble slope of <n> at t = 0 is consistent with zero."""
        cfg = small_config(t_final=0.05, sample_interval=0.01, n_trajectories=4000)
        avg = run_ensemble(cfg, workers=1)
        slope = (avg.n_total[1] - avg.n_total[0]) / 0.01
        # one sample step after t = 0 the spread is sqrt(rate * dt); allow 4 sigma
        assert abs(slope) < 4 * avg.stderr_n_total[1] / 0.01


def test_ensemble_agrees_with_exact_within_noise():
    """Pointwise deviation from the master equation stays inside the sampling noise."""
    p = SystemParams(J=1, g=0.5, N0=6, gamma_loss=0.5)
    psi = build_product_state(*OSC, 6)
    exact = evolve_exact(BlockDensityMatrix.from_state(psi), 3.0, p, sample_interval=0.05).moments
    ens = run_ensemble(TrajectoryConfig(params=p, initial=psi, t_final=3.0, sample_interval=0.05,
                                        master_seed=3, n_trajectories=2000))
    z = (ens.n_total[1:] - exact.n_total[1:]) / ens.stderr_n_total[1:]
    # 60 correlated samples; 4 sigma leaves ample room for the maximum
    assert np.max(np.abs(z)) < 4
    assert abs(np.mean(z)) < 2
