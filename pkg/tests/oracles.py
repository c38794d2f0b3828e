"""Independent reference implementations used only by the test suite."""
import numpy as np
from scipy.linalg import expm


def truncated_fock_lindblad(params, n_max, psi0_sector, psi0):
    """Dense Lindblad evolution on all two-mode kets with ``n1 + n2 <= n_max``.

    Operators are built as Kronecker products of single-mode ladder matrices
    (cutoff ``n_max + 1`` per mode, so ``a2 a2^+`` is exact on the retained
    kets) and then projected. Returns a function ``t -> (m11, m22, m12, rho)``.
    """
    c = n_max + 2
    a = np.diag(np.sqrt(np.arange(1, c)), 1)
    eye = np.eye(c)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    n1_of = np.repeat(np.arange(c), c)
    n2_of = np.tile(np.arange(c), c)
    keep = np.flatnonzero(n1_of + n2_of <= n_max)

    def proj(op):
        return op[np.ix_(keep, keep)]

    H = (-params.J * (a1.T @ a2 + a2.T @ a1)
         + 0.5 * params.U * (a1.T @ a1.T @ a1 @ a1 + a2.T @ a2.T @ a2 @ a2))
    jumps = [(params.gamma_loss, a1), (params.gamma_gain, a2.T)]
    Hp = proj(H)
    d = keep.size
    ident = np.eye(d)
    # column-stacking vec: vec(A X B) = (B^T kron A) vec(X)
    L = -1j * (np.kron(ident, Hp) - np.kron(Hp.T, ident))
    for rate, op in jumps:
        Lp = proj(op)
        LdL = proj(op.conj().T @ op)
        L += rate * (np.kron(Lp.conj(), Lp)
                     - 0.5 * np.kron(ident, LdL) - 0.5 * np.kron(LdL.T, ident))

    psi = np.zeros(d, dtype=np.complex128)
    for m, amp in enumerate(psi0):
        idx = np.flatnonzero((n1_of[keep] == psi0_sector - m) & (n2_of[keep] == m))[0]
        psi[idx] = amp
    rho0 = np.outer(psi, psi.conj())
    N1 = proj(a1.T @ a1)
    N2 = proj(a2.T @ a2)
    C12 = proj(a1.T @ a2)

    def at(t):
        rho = (expm(L * t) @ rho0.reshape(-1, order="F")).reshape(d, d, order="F")
        return (np.trace(rho @ N1).real, np.trace(rho @ N2).real, np.trace(rho @ C12), rho)

    return at
