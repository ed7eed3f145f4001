# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the spin-basis engine.

Every function here has a numpy twin in ``_fallback.py`` with identical
signature and semantics.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def diagonal_energies(const double[::1] h, const long[::1] basis):
    """sum_i h_i z_i(x) for every basis index x."""
    cdef Py_ssize_t n = h.shape[0], dim = basis.shape[0], k, i
    cdef long x
    cdef double acc
    out = np.empty(dim, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for k in range(dim):
            x = basis[k]
            acc = 0.0
            for i in range(n):
                if (x >> i) & 1:
                    acc = acc + h[i]
                else:
                    acc = acc - h[i]
            o[k] = acc
    return out


def build_block(const double[:, ::1] J, const double[::1] h,
                const long[::1] basis, const long[::1] inv):
    """Dense block of sum J_ij X_i X_j + sum h_i Z_i on the given basis.

    ``inv`` maps a full-space index to its position in ``basis`` (or -1).
    """
    cdef Py_ssize_t n = h.shape[0], dim = basis.shape[0], k, i, j, col
    cdef long x, y
    cdef double c
    out = np.zeros((dim, dim), dtype=np.float64)
    cdef double[:, ::1] H = out
    cdef double[::1] diag = diagonal_energies(h, basis)
    with nogil:
        for k in range(dim):
            H[k, k] = diag[k]
            x = basis[k]
            for i in range(n):
                for j in range(i + 1, n):
                    c = J[i, j]
                    if c != 0.0:
                        y = x ^ ((1 << i) | (1 << j))
                        col = inv[y]
                        H[col, k] += c
    return out


def apply_offdiag(const long[::1] masks, const double[::1] coefs,
                  const double[::1] diag, const double complex[::1] psi,
                  double complex[::1] out):
    """out = diag * psi + sum_p coefs[p] * psi[x ^ masks[p]] (full space)."""
    cdef Py_ssize_t dim = psi.shape[0], npairs = masks.shape[0], x, p
    cdef double complex acc
    with nogil:
        for x in range(dim):
            acc = diag[x] * psi[x]
            for p in range(npairs):
                acc = acc + coefs[p] * psi[x ^ masks[p]]
            out[x] = acc


def z_moments(const double[:, ::1] prob, int n):
    """Single-site and two-site z moments for each row of ``prob``.

    Returns (mz, zz) with shapes (T, n) and (T, n, n).
    """
    cdef Py_ssize_t T = prob.shape[0], dim = prob.shape[1], t, x, i, j
    cdef double p, zi
    cdef double z[64]
    mz_arr = np.zeros((T, n), dtype=np.float64)
    zz_arr = np.zeros((T, n, n), dtype=np.float64)
    cdef double[:, ::1] mz = mz_arr
    cdef double[:, :, ::1] zz = zz_arr
    with nogil:
        for t in range(T):
            for x in range(dim):
                p = prob[t, x]
                if p == 0.0:
                    continue
                for i in range(n):
                    z[i] = p if (x >> i) & 1 else -p
                    mz[t, i] += z[i]
                for i in range(n):
                    zi = 1.0 if (x >> i) & 1 else -1.0
                    for j in range(i + 1, n):
                        zz[t, i, j] += zi * z[j]
            for i in range(n):
                zz[t, i, i] = 1.0
                for j in range(i + 1, n):
                    zz[t, j, i] = zz[t, i, j]
    return mz_arr, zz_arr


def x_expectations(const double complex[:, ::1] psi, int n):
    """<sigma^x_i> for each row of ``psi`` (shape (T, dim))."""
    cdef Py_ssize_t T = psi.shape[0], dim = psi.shape[1], t, x, i
    cdef long m
    cdef double acc
    out_arr = np.zeros((T, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for t in range(T):
            for i in range(n):
                m = 1 << i
                acc = 0.0
                for x in range(dim):
                    acc = acc + (psi[t, x].real * psi[t, x ^ m].real
                                 + psi[t, x].imag * psi[t, x ^ m].imag)
                out[t, i] = acc
    return out_arr
