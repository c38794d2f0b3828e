"""Fixed-particle-number sectors of the two-site Bose-Hubbard model.

A sector with ``N`` particles is spanned by the kets ``|N-m, m>`` for
``m = 0..N``; index ``m`` is the occupation of site 2. Every module in the
package uses this ordering.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, InputValidationError

NORMALIZED_TOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters in units where hbar = 1.

    ``g`` is the macroscopic interaction ``(N0 - 1) U`` and ``gamma_loss`` the
    loss rate at site 1. The gain rate at site 2 is fixed by balance,
    ``gamma_gain = gamma_loss * N0 / (N0 + 2)``.
    """

    J: float = 1.0
    g: float = 0.5
    N0: int = 100
    gamma_loss: float = 0.0

    def __post_init__(self):
        if int(self.N0) != self.N0 or self.N0 < 1:
            raise DomainError(f"N0 must be an integer >= 1, got {self.N0!r}")
        object.__setattr__(self, "N0", int(self.N0))
        if self.gamma_loss < 0:
            raise DomainError(f"gamma_loss must be >= 0, got {self.gamma_loss}")
        if self.N0 == 1 and self.g != 0:
            raise DomainError("N0 = 1 leaves U = g/(N0-1) undefined unless g = 0")

    @property
    def U(self) -> float:
        if self.N0 == 1:
            return 0.0
        return self.g / (self.N0 - 1)

    @property
    def gamma_gain(self) -> float:
        return self.gamma_loss * self.N0 / (self.N0 + 2)

    @property
    def gamma(self) -> float:
        return self.gamma_loss


@dataclass(frozen=True)
class SectorState:
    """Pure state with ``n_total`` particles; ``amplitudes[m]`` multiplies ``|N-m, m>``."""

    n_total: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if self.n_total < 0:
            raise DomainError("n_total must be non-negative")
        if amps.size != self.n_total + 1:
            raise InputValidationError(
                f"sector {self.n_total} needs {self.n_total + 1} amplitudes, got {amps.size}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, n1: int, n2: int) -> "SectorState":
        amps = np.zeros(n1 + n2 + 1, dtype=np.complex128)
        amps[n2] = 1.0
        return cls(n1 + n2, amps)

    @classmethod
    def zero(cls, n_total: int) -> "SectorState":
        return cls(n_total, np.zeros(n_total + 1, dtype=np.complex128))

    @property
    def is_normalized(self) -> bool:
        return abs(norm_squared(self) - 1.0) < NORMALIZED_TOL

    def occupations(self) -> tuple[np.ndarray, np.ndarray]:
        """Site occupations ``(n1, n2)`` of each basis ket."""
        m = np.arange(self.n_total + 1)
        return self.n_total - m, m

    def normalized(self) -> "SectorState":
        nrm = np.sqrt(norm_squared(self))
        if nrm == 0:
            raise DomainError("cannot normalize the zero state")
        return SectorState(self.n_total, self.amplitudes / nrm)

    def scaled(self, factor: complex) -> "SectorState":
        return SectorState(self.n_total, self.amplitudes * factor)


def norm_squared(state: SectorState) -> float:
    a = state.amplitudes
    return float(np.vdot(a, a).real)


def log_binomial(n: int, k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def build_product_state(c1: complex, c2: complex, N0: int) -> SectorState:
    """Many-body state with all ``N0`` particles in the single-particle mode ``(c1, c2)``.

    Coefficients ``sqrt(binom(N0, m)) c1^(N0-m) c2^m`` are assembled in log
    space so large ``N0`` neither overflows nor underflows prematurely.
    """
    if int(N0) != N0 or N0 < 1:
        raise DomainError(f"N0 must be an integer >= 1, got {N0!r}")
    N0 = int(N0)
    c1, c2 = complex(c1), complex(c2)
    if abs(abs(c1) ** 2 + abs(c2) ** 2 - 1.0) > 1e-8:
        raise InputValidationError(
            f"mode (c1, c2) = ({c1}, {c2}) is not normalized: |c1|^2+|c2|^2 = "
            f"{abs(c1) ** 2 + abs(c2) ** 2}"
        )
    m = np.arange(N0 + 1)
    half_logbin = 0.5 * log_binomial(N0, m)
    amps = np.zeros(N0 + 1, dtype=np.complex128)
    # zero moduli contribute only through the 0**0 = 1 entry
    with np.errstate(divide="ignore", invalid="ignore"):
        log_r1, log_r2 = np.log(abs(c1)), np.log(abs(c2))
        e1, e2 = N0 - m, m
        log_mod = (half_logbin + np.where(e1 > 0, e1 * log_r1, 0.0)
                   + np.where(e2 > 0, e2 * log_r2, 0.0))
    phase = e1 * np.angle(c1) + e2 * np.angle(c2)
    finite = np.isfinite(log_mod)
    amps[finite] = np.exp(log_mod[finite] + 1j * phase[finite])
    return SectorState(N0, amps)


def _check_site(site):
    if site not in (1, 2):
        raise DomainError(f"site must be 1 or 2, got {site!r}")


def apply_annihilation(site: int, state: SectorState) -> SectorState:
    """``a_site |psi>`` in sector ``N - 1``; the empty sector maps to the zero state of sector 0."""
    _check_site(site)
    N = state.n_total
    if N == 0:
        return SectorState.zero(0)
    a = state.amplitudes
    m = np.arange(N)
    if site == 1:
        # |N-m, m> -> sqrt(N-m) |N-1-m, m>, index unchanged
        out = np.sqrt(N - m) * a[:N]
    else:
        # |N-m, m> -> sqrt(m) |N-m, m-1>, index shifts down
        out = np.sqrt(m + 1) * a[1:]
    return SectorState(N - 1, out)


def apply_creation(site: int, state: SectorState) -> SectorState:
    """``a_site^dagger |psi>`` in sector ``N + 1``."""
    _check_site(site)
    N = state.n_total
    a = state.amplitudes
    m = np.arange(N + 1)
    out = np.zeros(N + 2, dtype=np.complex128)
    if site == 1:
        out[:N + 1] = np.sqrt(N - m + 1) * a
    else:
        out[1:] = np.sqrt(m + 1) * a
    return SectorState(N + 1, out)


def number_expectation(site: int, state: SectorState) -> float:
    """``<psi| n_site |psi>`` without normalizing."""
    n1, n2 = state.occupations()
    weights = np.abs(state.amplitudes) ** 2
    return float(np.dot(n1 if site == 1 else n2, weights))
