"""Bose-Hubbard Hamiltonian, its non-Hermitian quantum-jump counterpart, and
norm-decaying evolution between jumps.

Both operators conserve the particle number, so they act within one sector as
tridiagonal matrices and are applied matrix-free.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .fock import SectorState, SystemParams

DEFAULT_RK_STEP = 1e-3


@dataclass(frozen=True)
class EffectiveHamiltonianSpec:
    params: SystemParams
    includes_decay: bool = True

    def apply(self, state: SectorState) -> SectorState:
        if self.includes_decay:
            return apply_effective_hamiltonian(state, self.params)
        return apply_hamiltonian(state, self.params)


def hopping_elements(N: int, J: float) -> np.ndarray:
    """``off[m]`` couples ``m - 1`` and ``m``; ``off[0] = 0``."""
    m = np.arange(N + 1)
    return -J * np.sqrt((N - m + 1.0) * m)


def interaction_diagonal(N: int, U: float) -> np.ndarray:
    m = np.arange(N + 1)
    n1, n2 = N - m, m
    return 0.5 * U * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0))


def decay_diagonal(N: int, params: SystemParams) -> np.ndarray:
    """``gamma_loss n1 + gamma_gain (n2 + 1)``; the +1 comes from ``a2 a2^+ = n2 + 1``."""
    m = np.arange(N + 1)
    return params.gamma_loss * (N - m) + params.gamma_gain * (m + 1.0)


def _tridiagonal_apply(diag, off, psi):
    out = diag * psi
    out[1:] += off[1:] * psi[:-1]
    out[:-1] += off[1:] * psi[1:]
    return out


def apply_hamiltonian(state: SectorState, params: SystemParams) -> SectorState:
    N = state.n_total
    out = _tridiagonal_apply(interaction_diagonal(N, params.U).astype(np.complex128),
                             hopping_elements(N, params.J), state.amplitudes)
    return SectorState(N, out)


def apply_effective_hamiltonian(state: SectorState, params: SystemParams) -> SectorState:
    """``H_eff = H - (i/2) [gamma_loss n1 + gamma_gain (n2 + 1)]``."""
    N = state.n_total
    diag = interaction_diagonal(N, params.U) - 0.5j * decay_diagonal(N, params)
    out = _tridiagonal_apply(diag, hopping_elements(N, params.J), state.amplitudes)
    return SectorState(N, out)


def _rk4(psi, dt, f):
    k1 = f(psi)
    k2 = f(psi + 0.5 * dt * k1)
    k3 = f(psi + 0.5 * dt * k2)
    k4 = f(psi + dt * k3)
    return psi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def evolve_between_jumps(state: SectorState, t_span, params: SystemParams,
                         step: float = DEFAULT_RK_STEP) -> list[tuple[float, SectorState]]:
    """Integrate ``d psi/dt = -i H_eff psi`` with fixed-step RK4 without renormalizing.

    Returns ``(t, state)`` after every step, starting with the input at
    ``t_span[0]``; the last step is shortened to end exactly on ``t_span[1]``.
    """
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    t0, t1 = map(float, t_span)
    if t1 < t0:
        raise DomainError("t_span must be ordered")
    N = state.n_total
    diag = interaction_diagonal(N, params.U) - 0.5j * decay_diagonal(N, params)
    off = hopping_elements(N, params.J)

    def rhs(psi):
        return -1j * _tridiagonal_apply(diag, off, psi)

    psi = np.array(state.amplitudes)
    out = [(t0, state)]
    n_full = int(np.floor((t1 - t0) / step * (1 + 1e-12)))
    t = t0
    for i in range(1, n_full + 1):
        psi = _rk4(psi, step, rhs)
        t = t0 + i * step
        out.append((t, SectorState(N, psi)))
    if t1 - t > 1e-12 * max(1.0, abs(t1)):
        psi = _rk4(psi, t1 - t, rhs)
        out.append((t1, SectorState(N, psi)))
    return out
