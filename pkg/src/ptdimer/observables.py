"""Single-particle moments and the scalar observables derived from them.

All functions accept either a single :class:`MomentRecord` or a
:class:`MomentSeries`; arithmetic is vectorized over the time axis.
Purity, contrast and imbalance are always formed from (ensemble averaged)
moments, never averaged themselves.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .fock import SectorState, norm_squared


@dataclass(frozen=True)
class MomentRecord:
    """``m11 = <a1^+ a1>``, ``m22 = <a2^+ a2>``, ``m12 = <a1^+ a2>`` at time ``t``."""

    t: float
    m11: float
    m22: float
    m12: complex

    @property
    def n_total(self) -> float:
        return self.m11 + self.m22


@dataclass
class MomentSeries:
    """Moments on a time grid, stored column-wise."""

    t: np.ndarray
    m11: np.ndarray
    m22: np.ndarray
    m12: np.ndarray
    stderr_n_total: Optional[np.ndarray] = None

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.m11 = np.asarray(self.m11, dtype=float)
        self.m22 = np.asarray(self.m22, dtype=float)
        self.m12 = np.asarray(self.m12, dtype=np.complex128)
        n = self.t.shape
        if not (self.m11.shape == self.m22.shape == self.m12.shape == n):
            raise DomainError("moment columns must share the time grid")

    def __len__(self):
        return self.t.size

    def __getitem__(self, k) -> MomentRecord:
        return MomentRecord(float(self.t[k]), float(self.m11[k]), float(self.m22[k]),
                            complex(self.m12[k]))

    @classmethod
    def from_records(cls, records) -> "MomentSeries":
        records = list(records)
        return cls(
            np.array([r.t for r in records]),
            np.array([r.m11 for r in records]),
            np.array([r.m22 for r in records]),
            np.array([r.m12 for r in records]),
        )

    @property
    def n_total(self) -> np.ndarray:
        return self.m11 + self.m22

    def purity(self) -> np.ndarray:
        return purity(reduced_density(self))

    def contrast(self) -> np.ndarray:
        return contrast(self)

    def imbalance(self) -> np.ndarray:
        return imbalance(self)


def _total(m):
    total = np.asarray(m.m11 + m.m22, dtype=float)
    if np.any(total <= 0):
        raise DomainError("observable undefined for zero total particle number")
    return total


def moments_of_state(state: SectorState, t: float = 0.0) -> MomentRecord:
    """Moments of ``state / ||state||``; ``m11 + m22`` equals ``n_total``."""
    nrm2 = norm_squared(state)
    if nrm2 == 0:
        raise DomainError("moments of the zero state are undefined")
    psi = state.amplitudes
    N = state.n_total
    m = np.arange(N + 1)
    w = np.abs(psi) ** 2 / nrm2
    m11 = float(np.dot(N - m, w))
    m22 = float(np.dot(m, w))
    # a1^+ a2 |N-m, m> = sqrt((N-m+1) m) |N-m+1, m-1>
    coupling = np.sqrt((N - m[1:] + 1) * m[1:])
    m12 = complex(np.sum(coupling * np.conj(psi[:-1]) * psi[1:]) / nrm2)
    return MomentRecord(t, m11, m22, m12)


def reduced_density(m) -> np.ndarray:
    """Normalized single-particle density matrix, shape ``(..., 2, 2)``."""
    total = _total(m)
    m12 = np.asarray(m.m12, dtype=np.complex128)
    sigma = np.empty(total.shape + (2, 2), dtype=np.complex128)
    sigma[..., 0, 0] = m.m11 / total
    sigma[..., 1, 1] = m.m22 / total
    sigma[..., 0, 1] = m12 / total
    sigma[..., 1, 0] = np.conj(m12) / total
    return sigma


def purity(sigma: np.ndarray) -> np.ndarray:
    """``2 tr(sigma^2) - 1``: 1 for a pure condensate, 0 for an equal two-mode mixture."""
    sigma = np.asarray(sigma)
    s11 = sigma[..., 0, 0].real
    s22 = sigma[..., 1, 1].real
    s12 = sigma[..., 0, 1]
    return 2.0 * (s11**2 + s22**2 + 2.0 * np.abs(s12) ** 2) - 1.0


def contrast(m) -> np.ndarray:
    return 2.0 * np.abs(m.m12) / _total(m)


def imbalance(m) -> np.ndarray:
    total = _total(m)
    return ((m.m11 - m.m22) / total) ** 2


def meanfield_moments(c, t: float = 0.0) -> MomentRecord:
    """Rank-one moments ``|c1|^2, |c2|^2, conj(c1) c2`` of a mean-field amplitude pair."""
    c1, c2 = complex(c.c1), complex(c.c2)
    if abs(c1) ** 2 + abs(c2) ** 2 == 0:
        raise DomainError("mean-field state has zero norm")
    return MomentRecord(t, abs(c1) ** 2, abs(c2) ** 2, np.conj(c1) * c2)


def local_extrema(y: np.ndarray, window: int = 5) -> tuple[np.ndarray, np.ndarray]:
    """Indices of local minima and maxima of a noisy sampled series.

    The series is smoothed with a centered moving average of ``window``
    samples, then each interior point is compared with its two neighbours.
    Points within ``window // 2`` of either end are not classified.
    """
    y = np.asarray(y, dtype=float)
    half = window // 2
    smooth = np.convolve(y, np.ones(window) / window, mode="valid")
    mid = smooth[1:-1]
    minima = np.flatnonzero((mid < smooth[:-2]) & (mid < smooth[2:])) + 1 + half
    maxima = np.flatnonzero((mid > smooth[:-2]) & (mid > smooth[2:])) + 1 + half
    return minima, maxima
