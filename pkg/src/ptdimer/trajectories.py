"""Quantum-jump unraveling of the gain/loss master equation.

Each trajectory evolves under the non-Hermitian effective Hamiltonian until
its norm falls to a uniformly drawn threshold, then jumps through either the
loss channel ``a1`` or the gain channel ``a2^+``. Trajectory ``i`` draws from
its own PCG64 stream seeded with ``splitmix64(master_seed, i)``, so ensemble
results do not depend on how trajectories are distributed over workers.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .dynamics import DEFAULT_RK_STEP
from .errors import DomainError, InputValidationError, JumpLogicError
from .fock import SectorState, SystemParams, apply_annihilation, apply_creation, norm_squared
from .observables import MomentSeries

WORKERS_ENV = "PTDIMER_WORKERS"
DEFAULT_SAMPLE_INTERVAL = 0.01

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class Channel(IntEnum):
    LOSS_SITE1 = _kernels.LOSS
    GAIN_SITE2 = _kernels.GAIN


def splitmix64(master_seed: int, index: int) -> int:
    """Output ``index + 1`` of a SplitMix64 generator started at ``master_seed``."""
    z = (master_seed + (index + 1) * _GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def trajectory_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(splitmix64(master_seed, index)))


def sample_grid(t_final: float, sample_interval: float) -> np.ndarray:
    n = int(round(t_final / sample_interval))
    return np.round(np.arange(n + 1) * sample_interval, 12)


@dataclass(frozen=True)
class TrajectoryConfig:
    params: SystemParams
    initial: SectorState
    t_final: float
    sample_interval: float = DEFAULT_SAMPLE_INTERVAL
    rk_step: float = DEFAULT_RK_STEP
    master_seed: int = 1
    n_trajectories: int = 500

    def __post_init__(self):
        if not self.t_final > 0:
            raise DomainError("t_final must be positive")
        if not self.rk_step > 0:
            raise DomainError("rk_step must be positive")
        if self.sample_interval < self.rk_step:
            raise DomainError("sample_interval must not be smaller than rk_step")
        if self.n_trajectories < 1:
            raise DomainError("n_trajectories must be positive")
        if not self.initial.is_normalized:
            raise InputValidationError("initial state must be normalized")

    @property
    def times(self) -> np.ndarray:
        return sample_grid(self.t_final, self.sample_interval)


@dataclass
class TrajectoryResult:
    moments: MomentSeries
    n_jumps: int
    final_sector: int
    jump_times: np.ndarray = field(repr=False)
    jump_channels: np.ndarray = field(repr=False)


def select_jump_channel(state: SectorState, params: SystemParams, u: float) -> Channel:
    """Pick loss with probability ``w_l / (w_l + w_g)``.

    ``w_l = gamma_loss <n1>`` and ``w_g = gamma_gain (<n2> + 1)``.
    """
    psi = state.amplitudes
    w_loss, w_gain = _kernels.jump_weights(np.ascontiguousarray(psi), state.n_total,
                                           params.gamma_loss, params.gamma_gain)
    if w_loss + w_gain <= 0:
        raise JumpLogicError("no jump channel is active (gamma_loss = gamma_gain = 0)")
    return Channel.LOSS_SITE1 if u * (w_loss + w_gain) < w_loss else Channel.GAIN_SITE2


def apply_jump(state: SectorState, channel: Channel) -> SectorState:
    if channel == Channel.LOSS_SITE1:
        out = apply_annihilation(1, state)
    else:
        out = apply_creation(2, state)
    if norm_squared(out) == 0:
        raise JumpLogicError(f"{Channel(channel).name} jump annihilates the state")
    return out.normalized()


def run_trajectory(config: TrajectoryConfig, trajectory_index: int,
                   jump_log_size: int = 0) -> TrajectoryResult:
    """One quantum-jump trajectory; moments are taken on the normalized state.

    ``jump_log_size`` bounds how many ``(time, channel)`` jump events are kept.
    """
    p = config.params
    times = config.times
    n = times.size
    m11 = np.empty(n)
    m22 = np.empty(n)
    m12 = np.empty(n, dtype=np.complex128)
    log_t = np.empty(jump_log_size)
    log_c = np.empty(jump_log_size, dtype=np.int64)
    rng = trajectory_rng(config.master_seed, trajectory_index)
    n_jumps, final_sector = _kernels.run_trajectory(
        np.array(config.initial.amplitudes), config.initial.n_total,
        float(p.J), float(p.U), float(p.gamma_loss), float(p.gamma_gain),
        float(config.rk_step), times, rng, m11, m22, m12, log_t, log_c,
    )
    kept = min(n_jumps, jump_log_size)
    return TrajectoryResult(MomentSeries(times, m11, m22, m12), int(n_jumps), int(final_sector),
                            log_t[:kept], log_c[:kept])


def average_ensemble(series: Sequence[MomentSeries]) -> MomentSeries:
    """Equal-weight mean of per-trajectory moments, reduced in sequence order.

    The result carries the standard error of the total particle number.
    """
    series = list(series)
    if not series:
        raise InputValidationError("cannot average an empty ensemble")
    t = series[0].t
    for s in series[1:]:
        if s.t.shape != t.shape or not np.array_equal(s.t, t):
            raise InputValidationError("trajectories do not share a time grid")
    n = len(series)
    m11 = np.zeros_like(t)
    m22 = np.zeros_like(t)
    m12 = np.zeros(t.shape, dtype=np.complex128)
    ntot_sq = np.zeros_like(t)
    for s in series:
        m11 += s.m11
        m22 += s.m22
        m12 += s.m12
        ntot_sq += s.n_total ** 2
    m11 /= n
    m22 /= n
    m12 /= n
    mean_n = m11 + m22
    if n > 1:
        var = np.maximum(ntot_sq / n - mean_n ** 2, 0.0) * n / (n - 1)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.zeros_like(t)
    return MomentSeries(t, m11, m22, m12, stderr_n_total=stderr)


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise InputValidationError(f"{WORKERS_ENV} must be an integer, got {env!r}")
        if value < 1:
            raise InputValidationError(f"{WORKERS_ENV} must be >= 1")
        return value
    return os.cpu_count() or 1


def run_ensemble(config: TrajectoryConfig, workers: Optional[int] = None) -> MomentSeries:
    """Average ``config.n_trajectories`` trajectories.

    Trajectories run on a thread pool (the compiled kernel releases the GIL);
    averaging happens afterwards in index order, so ``workers`` never changes
    the result.
    """
    workers = default_workers() if workers is None else int(workers)
    indices = range(config.n_trajectories)
    if workers <= 1:
        results = [run_trajectory(config, i).moments for i in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = [r.moments for r in pool.map(lambda i: run_trajectory(config, i), indices)]
    return average_ensemble(results)
