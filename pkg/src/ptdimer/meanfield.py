"""PT-symmetric Gross-Pitaevskii dynamics of the two-mode condensate.

Amplitudes are normalized to one particle; the many-body counterpart holds
``N0 |c_j|^2`` particles at site ``j``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import DEFAULT_RK_STEP
from .errors import DomainError, ExistenceError
from .fock import SystemParams


@dataclass(frozen=True)
class MeanFieldState:
    c1: complex
    c2: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2], dtype=np.complex128)

    @classmethod
    def from_array(cls, c) -> "MeanFieldState":
        return cls(complex(c[0]), complex(c[1]))

    @property
    def norm_squared(self) -> float:
        return abs(self.c1) ** 2 + abs(self.c2) ** 2


def _rhs(c: np.ndarray, J: float, g: float, gamma: float) -> np.ndarray:
    c1, c2 = c
    return np.array([
        1j * (J * c2 - g * abs(c1) ** 2 * c1) - 0.5 * gamma * c1,
        1j * (J * c1 - g * abs(c2) ** 2 * c2) + 0.5 * gamma * c2,
    ])


def gpe_rhs(c: MeanFieldState, params: SystemParams) -> MeanFieldState:
    """Loss (rate ``gamma``) acts on site 1, gain on site 2."""
    return MeanFieldState.from_array(_rhs(c.as_array(), params.J, params.g, params.gamma_loss))


def gpe_evolve(c0: MeanFieldState, t_final: float, params: SystemParams,
               step: float = DEFAULT_RK_STEP, times=None) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-step RK4 integration.

    Returns ``(t, c)`` with ``c[k] = (c1, c2)`` at ``t[k]``. Without ``times``
    every step is returned; with ``times`` (ascending, starting at 0) the
    integration lands exactly on each requested time instead.
    """
    if not step > 0:
        raise DomainError(f"step must be positive, got {step}")
    J, g, gamma = params.J, params.g, params.gamma_loss

    def rk4(c, dt):
        k1 = _rhs(c, J, g, gamma)
        k2 = _rhs(c + 0.5 * dt * k1, J, g, gamma)
        k3 = _rhs(c + 0.5 * dt * k2, J, g, gamma)
        k4 = _rhs(c + dt * k3, J, g, gamma)
        return c + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    c = c0.as_array()
    if times is None:
        n = int(np.floor(t_final / step * (1 + 1e-12)))
        times = np.arange(n + 1) * step
        if t_final - times[-1] > 1e-12 * max(1.0, t_final):
            times = np.append(times, t_final)
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, 2), dtype=np.complex128)
    out[0] = c
    t = times[0]
    for k in range(1, times.size):
        while True:
            remaining = times[k] - t
            landing = remaining <= step * (1 + 1e-9)
            dt = remaining if landing else step
            c = rk4(c, dt)
            if landing:
                t = times[k]
                break
            t += dt
        out[k] = c
    return times, out


def stationary_states(params: SystemParams) -> dict[str, MeanFieldState]:
    """Ground and excited PT-symmetric stationary states, with ``c2`` real positive.

    ground:  ``c1 = exp(+i asin(gamma / 2J)) / sqrt(2)``
    excited: ``c1 = -exp(-i asin(gamma / 2J)) / sqrt(2)``
    """
    J, gamma = params.J, params.gamma_loss
    if J == 0 or abs(gamma) > 2 * abs(J):
        raise ExistenceError(
            f"PT-symmetric stationary states exist only for |gamma| <= 2J "
            f"(gamma = {gamma}, J = {J})"
        )
    phi = np.arcsin(min(1.0, gamma / (2 * J)))
    s = 1 / np.sqrt(2)
    return {
        "ground": MeanFieldState(s * np.exp(1j * phi), s),
        "excited": MeanFieldState(-s * np.exp(-1j * phi), s),
    }


def pt_broken_threshold(params: SystemParams) -> float:
    return float(np.sqrt(max(0.0, 4 * params.J ** 2 - params.g ** 2)))


def pt_broken_exists(params: SystemParams) -> bool:
    """Whether the growing/decaying PT-broken solutions exist, ``|gamma| >= sqrt(4J^2 - g^2)``."""
    return abs(params.gamma_loss) >= pt_broken_threshold(params)
