"""Compiled inner loops for the trajectory engine.

Arrays follow the sector convention of :mod:`ptdimer.fock`. ``diag`` holds the
complex diagonal of the effective Hamiltonian and ``off[m]`` the real hopping
element between indices ``m - 1`` and ``m`` (``off[0]`` is unused).
"""
import numba as nb
import numpy as np

LOSS = 0
GAIN = 1

BISECTION_RTOL = 1e-6
MAX_BISECTIONS = 200


@nb.njit(cache=True, nogil=True)
def sector_coefficients(N, J, U, gamma_loss, gamma_gain):
    diag = np.empty(N + 1, dtype=np.complex128)
    off = np.zeros(N + 1, dtype=np.float64)
    for m in range(N + 1):
        n1 = N - m
        n2 = m
        interaction = 0.5 * U * (n1 * (n1 - 1) + n2 * (n2 - 1))
        decay = 0.5 * (gamma_loss * n1 + gamma_gain * (n2 + 1))
        diag[m] = interaction - 1j * decay
        if m > 0:
            off[m] = -J * np.sqrt((N - m + 1) * m)
    return diag, off


@nb.njit(cache=True, nogil=True)
def derivative(psi, diag, off, out):
    """``out = -i H_eff psi``."""
    n = psi.size
    for m in range(n):
        h = diag[m] * psi[m]
        if m > 0:
            h += off[m] * psi[m - 1]
        if m + 1 < n:
            h += off[m + 1] * psi[m + 1]
        out[m] = -1j * h


@nb.njit(cache=True, nogil=True)
def rk4_step(psi, dt, diag, off, out, k1, k2, k3, k4, tmp):
    n = psi.size
    derivative(psi, diag, off, k1)
    for i in range(n):
        tmp[i] = psi[i] + 0.5 * dt * k1[i]
    derivative(tmp, diag, off, k2)
    for i in range(n):
        tmp[i] = psi[i] + 0.5 * dt * k2[i]
    derivative(tmp, diag, off, k3)
    for i in range(n):
        tmp[i] = psi[i] + dt * k3[i]
    derivative(tmp, diag, off, k4)
    for i in range(n):
        out[i] = psi[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])


@nb.njit(cache=True, nogil=True)
def norm2(psi):
    s = 0.0
    for i in range(psi.size):
        s += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return s


@nb.njit(cache=True, nogil=True)
def record_moments(psi, N, k, m11, m22, m12):
    nrm = norm2(psi)
    a = 0.0
    b = 0.0
    c = 0.0j
    for m in range(N + 1):
        w = psi[m].real * psi[m].real + psi[m].imag * psi[m].imag
        a += (N - m) * w
        b += m * w
        if m > 0:
            c += np.sqrt((N - m + 1) * m) * np.conj(psi[m - 1]) * psi[m]
    m11[k] = a / nrm
    m22[k] = b / nrm
    m12[k] = c / nrm


@nb.njit(cache=True, nogil=True)
def jump_weights(psi, N, gamma_loss, gamma_gain):
    """Rates of the loss and gain channels for the normalized version of ``psi``."""
    nrm = norm2(psi)
    n1 = 0.0
    n2 = 0.0
    for m in range(N + 1):
        w = psi[m].real * psi[m].real + psi[m].imag * psi[m].imag
        n1 += (N - m) * w
        n2 += m * w
    return gamma_loss * n1 / nrm, gamma_gain * (n2 / nrm + 1.0)


@nb.njit(cache=True, nogil=True)
def jump(psi, N, channel):
    """Normalized ``a1 psi`` (loss) or ``a2^+ psi`` (gain)."""
    if channel == LOSS:
        out = np.empty(N, dtype=np.complex128)
        for m in range(N):
            out[m] = np.sqrt(N - m) * psi[m]
    else:
        out = np.zeros(N + 2, dtype=np.complex128)
        for m in range(N + 1):
            out[m + 1] = np.sqrt(m + 1) * psi[m]
    nrm = np.sqrt(norm2(out))
    for i in range(out.size):
        out[i] = out[i] / nrm
    return out


@nb.njit(cache=True, nogil=True)
def run_trajectory(psi0, N0, J, U, gamma_loss, gamma_gain, h, times, rng,
                   m11, m22, m12, log_t, log_channel):
    """Waiting-time quantum-jump trajectory sampled on ``times``.

    Fills the moment arrays in place and the first ``log_t.size`` jumps into the
    log. Returns the total number of jumps and the final sector.
    """
    N = N0
    psi = psi0.copy()
    diag, off = sector_coefficients(N, J, U, gamma_loss, gamma_gain)
    n = N + 1
    new = np.empty(n, dtype=np.complex128)
    trial = np.empty(n, dtype=np.complex128)
    k1 = np.empty(n, dtype=np.complex128)
    k2 = np.empty(n, dtype=np.complex128)
    k3 = np.empty(n, dtype=np.complex128)
    k4 = np.empty(n, dtype=np.complex128)
    tmp = np.empty(n, dtype=np.complex128)

    jumps_enabled = gamma_loss > 0.0 or gamma_gain > 0.0
    r = rng.random() if jumps_enabled else 0.0
    n_jumps = 0
    t = times[0]
    k = 0
    record_moments(psi, N, 0, m11, m22, m12)
    n_samples = times.size
    while k + 1 < n_samples:
        target = times[k + 1]
        remaining = target - t
        landing = remaining <= h * (1.0 + 1e-9)
        tau = remaining if landing else h
        if tau <= 0.0:
            k += 1
            record_moments(psi, N, k, m11, m22, m12)
            continue
        rk4_step(psi, tau, diag, off, new, k1, k2, k3, k4, tmp)
        p = norm2(new)
        if not (jumps_enabled and p <= r):
            psi, new = new, psi
            if landing:
                t = target
                k += 1
                record_moments(psi, N, k, m11, m22, m12)
            else:
                t += tau
            continue

        # jump inside (t, t + tau]: bisect on the step length
        lo = 0.0
        hi = tau
        p_hi = p
        for _ in range(MAX_BISECTIONS):
            if abs(p_hi - r) <= BISECTION_RTOL * r:
                break
            mid = 0.5 * (lo + hi)
            rk4_step(psi, mid, diag, off, trial, k1, k2, k3, k4, tmp)
            pm = norm2(trial)
            if pm > r:
                lo = mid
            else:
                hi = mid
                p_hi = pm
                new[:] = trial
        t = target if (landing and hi == tau) else t + hi
        w_loss, w_gain = jump_weights(new, N, gamma_loss, gamma_gain)
        u = rng.random()
        channel = LOSS if u * (w_loss + w_gain) < w_loss else GAIN
        psi = jump(new, N, channel)
        if n_jumps < log_t.size:
            log_t[n_jumps] = t
            log_channel[n_jumps] = channel
        n_jumps += 1
        N = N - 1 if channel == LOSS else N + 1
        diag, off = sector_coefficients(N, J, U, gamma_loss, gamma_gain)
        n = N + 1
        new = np.empty(n, dtype=np.complex128)
        trial = np.empty(n, dtype=np.complex128)
        k1 = np.empty(n, dtype=np.complex128)
        k2 = np.empty(n, dtype=np.complex128)
        k3 = np.empty(n, dtype=np.complex128)
        k4 = np.empty(n, dtype=np.complex128)
        tmp = np.empty(n, dtype=np.complex128)
        r = rng.random()
    return n_jumps, N
