"""Pure numpy versions of the kernels in ``_kernels.pyx``."""
import numpy as np


def _zsigns(basis, n):
    return ((np.asarray(basis)[:, None] >> np.arange(n)) & 1) * 2.0 - 1.0


def diagonal_energies(h, basis):
    h = np.asarray(h, dtype=float)
    return _zsigns(basis, len(h)) @ h


def build_block(J, h, basis, inv):
    n = len(h)
    basis = np.asarray(basis)
    dim = len(basis)
    out = np.zeros((dim, dim))
    cols = np.arange(dim)
    out[cols, cols] = diagonal_energies(h, basis)
    for i in range(n):
        for j in range(i + 1, n):
            c = J[i, j]
            if c != 0.0:
                rows = inv[basis ^ ((1 << i) | (1 << j))]
                out[rows, cols] += c
    return out


def apply_offdiag(masks, coefs, diag, psi, out):
    idx = np.arange(len(psi))
    acc = diag * psi
    for m, c in zip(masks, coefs):
        acc += c * psi[idx ^ m]
    out[:] = acc
    return out


def z_moments(prob, n):
    prob = np.asarray(prob, dtype=float)
    z = _zsigns(np.arange(prob.shape[1]), n)
    mz = prob @ z
    zz = np.einsum("tx,xi,xj->tij", prob, z, z, optimize=True)
    return mz, zz


def x_expectations(psi, n):
    psi = np.asarray(psi)
    idx = np.arange(psi.shape[1])
    out = np.empty((psi.shape[0], n))
    for i in range(n):
        out[:, i] = np.real(np.sum(np.conj(psi) * psi[:, idx ^ (1 << i)], axis=1))
    return out
