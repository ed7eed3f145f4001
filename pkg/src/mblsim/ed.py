"""Exact Hilbert-space engine for the disordered long-range Ising chain.

Basis convention: site ``k`` (0-based; site ``k+1`` in 1-based chain
notation) is bit ``k`` of the basis index, and a set bit means spin up
(``sigma^z = +1``). Single-site density matrices are written in the
ordered basis (up, down), so ``rho = (I + x X + y Y + z Z) / 2``.

The Hamiltonian

    H = sum_{i<j} J_ij X_i X_j + sum_i (B + D_i)/2 Z_i

commutes with the global parity ``prod_i Z_i`` because every ``X_i X_j``
flips two spins. Spectra are therefore computed block by block, which is
exact and four times cheaper than one dense diagonalisation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from . import kernels
from .errors import CapacityError, ConvergenceError
from .lattice import ModelSpec

MAX_SITES = 14
SPECTRAL_CAP = 12

_AXES = ("x", "y", "z")


# ---------------------------------------------------------------------------
# States
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (1 << self.n,):
            raise ValueError(f"expected {1 << self.n} amplitudes for {self.n} spins, got {a.shape}")
        nrm = np.vdot(a, a).real
        if abs(nrm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalised: |psi|^2 = {nrm!r}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self) -> int:
        return 1 << self.n


def _parse_site(entry) -> tuple[str, int]:
    if isinstance(entry, str):
        s = entry.strip().lower()
        sign = {"+": 1, "-": -1, "u": 1, "d": -1}.get(s[0])
        axis = s[1:] or "z"
        if sign is None or axis not in _AXES:
            raise ValueError(f"cannot parse site pattern {entry!r}")
        return axis, sign
    axis, sign = entry
    if axis not in _AXES or sign not in (1, -1):
        raise ValueError(f"bad site pattern {entry!r}")
    return axis, int(sign)


_SINGLE = {
    ("z", 1): np.array([0.0, 1.0], dtype=complex),  # index = bit value
    ("z", -1): np.array([1.0, 0.0], dtype=complex),
    ("x", 1): np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
    ("x", -1): np.array([-1.0, 1.0], dtype=complex) / np.sqrt(2),
    ("y", 1): np.array([1j, 1.0], dtype=complex) / np.sqrt(2),
    ("y", -1): np.array([-1j, 1.0], dtype=complex) / np.sqrt(2),
}


def product_state(pattern: Sequence) -> StateVector:
    """Tensor product of single-spin eigenstates.

    Each entry is ``(axis, sign)`` or a short string such as ``"+z"``,
    ``"-x"``, ``"u"`` or ``"d"`` (z-basis up/down). Entry ``k`` is site ``k``.
    """
    sites = [_parse_site(p) for p in pattern]
    psi = np.ones(1, dtype=complex)
    # site 0 is the least significant bit, so it must be the last kron factor
    for axis, sign in sites:
        psi = np.kron(_SINGLE[(axis, sign)], psi)
    return StateVector(len(sites), psi)


def neel_pattern(n: int) -> np.ndarray:
    """z-signature of the Neel state, first site up."""
    return np.array([1 if k % 2 == 0 else -1 for k in range(n)])


def neel_state(n: int) -> StateVector:
    return z_product_state(neel_pattern(n))


def z_product_state(signs) -> StateVector:
    signs = np.asarray(signs)
    n = len(signs)
    index = int(sum(1 << k for k, s in enumerate(signs) if s > 0))
    a = np.zeros(1 << n, dtype=complex)
    a[index] = 1.0
    return StateVector(n, a)


# ---------------------------------------------------------------------------
# Hamiltonian
# ---------------------------------------------------------------------------

def _parity_basis(n: int, parity: int) -> np.ndarray:
    idx = np.arange(1 << n)
    pop = np.zeros_like(idx)
    for k in range(n):
        pop += (idx >> k) & 1
    return idx[(pop & 1) == parity]


@dataclass(frozen=True)
class SectorEigensystem:
    """Eigenpairs of one parity block; ``basis`` lists full-space indices."""

    parity: int
    basis: np.ndarray
    energies: np.ndarray
    vectors: np.ndarray


class SpectralDecomposition:
    """Full eigendecomposition assembled from the parity blocks."""

    def __init__(self, n: int, blocks: Sequence[SectorEigensystem]):
        self.n = n
        self.blocks = tuple(blocks)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return np.sort(np.concatenate([b.energies for b in self.blocks]))

    @cached_property
    def eigenvectors(self) -> np.ndarray:
        dim = 1 << self.n
        energies = np.concatenate([b.energies for b in self.blocks])
        order = np.argsort(energies, kind="stable")
        u = np.zeros((dim, dim))
        col = 0
        for b in self.blocks:
            k = len(b.energies)
            u[np.ix_(b.basis, np.arange(col, col + k))] = b.vectors
            col += k
        return u[:, order]

    def sector_eigenvalues(self) -> list[np.ndarray]:
        return [b.energies for b in self.blocks]


class Hamiltonian:
    """Disordered long-range transverse-field Ising Hamiltonian.

    The object is immutable; the dense matrix, parity blocks and the
    spectral decomposition are computed lazily and cached.
    """

    def __init__(self, spec: ModelSpec, max_sites: int = MAX_SITES):
        if spec.n > max_sites:
            raise CapacityError(
                f"{spec.n} spins exceed the exact-diagonalisation cap of {max_sites}; "
                "use the free-fermion engine (mblsim.freefermion) for larger chains"
            )
        self.spec = spec
        self.n = spec.n
        self.dim = 1 << spec.n
        self.couplings = np.ascontiguousarray(spec.couplings.values, dtype=float)
        self.fields = np.ascontiguousarray(spec.site_fields, dtype=float)
        iu, ju = np.triu_indices(self.n, 1)
        keep = self.couplings[iu, ju] != 0
        self._masks = ((1 << iu[keep]) | (1 << ju[keep])).astype(np.int64)
        self._coefs = np.ascontiguousarray(self.couplings[iu[keep], ju[keep]])

    @cached_property
    def diagonal(self) -> np.ndarray:
        return kernels.diagonal_energies(self.fields, np.arange(self.dim, dtype=np.int64))

    def _block_matrix(self, basis):
        inv = np.full(self.dim, -1, dtype=np.int64)
        inv[basis] = np.arange(len(basis))
        return kernels.build_block(self.couplings, self.fields, np.ascontiguousarray(basis, np.int64), inv)

    def dense(self) -> np.ndarray:
        """Materialised real symmetric matrix in the full basis."""
        return self._block_matrix(np.arange(self.dim, dtype=np.int64))

    def block(self, parity: int) -> tuple[np.ndarray, np.ndarray]:
        """(basis, matrix) of the block whose basis indices have popcount parity ``parity``."""
        basis = _parity_basis(self.n, parity)
        return basis, self._block_matrix(basis)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Matrix-free ``H @ psi``."""
        psi = np.ascontiguousarray(psi, dtype=complex)
        out = np.empty_like(psi)
        kernels.apply_offdiag(self._masks, self._coefs, self.diagonal, psi, out)
        return out

    def energy(self, state: StateVector | np.ndarray) -> float:
        psi = state.amplitudes if isinstance(state, StateVector) else state
        return float(np.vdot(psi, self.apply(psi)).real)

    @cached_property
    def spectrum(self) -> SpectralDecomposition:
        return full_spectrum(self)


def build_hamiltonian(spec: ModelSpec, max_sites: int = MAX_SITES) -> Hamiltonian:
    return Hamiltonian(spec, max_sites=max_sites)


def full_spectrum(ham: Hamiltonian) -> SpectralDecomposition:
    """Eigendecomposition of both parity blocks."""
    if ham.n == 0:
        raise ValueError("empty chain")
    blocks = []
    for parity in (0, 1):
        basis, mat = ham.block(parity)
        e, v = np.linalg.eigh(mat)
        blocks.append(SectorEigensystem(parity, basis, e, v))
    return SpectralDecomposition(ham.n, blocks)


def eigenvalues(ham: Hamiltonian, by_sector: bool = False):
    """Eigenvalues only (cheaper than :func:`full_spectrum`)."""
    sectors = [np.linalg.eigvalsh(ham.block(p)[1]) for p in (0, 1)]
    if by_sector:
        return sectors
    return np.sort(np.concatenate(sectors))


# ---------------------------------------------------------------------------
# Time evolution
# ---------------------------------------------------------------------------

def _spectral_series(spec: SpectralDecomposition, psi, times):
    out = np.zeros((len(times), len(psi)), dtype=complex)
    for b in spec.blocks:
        local = psi[b.basis]
        if not np.any(local):
            continue
        c = b.vectors.T @ local
        phases = np.exp(-1j * np.outer(times, b.energies))
        out[:, b.basis] = (phases * c) @ b.vectors.T
    return out


def _lanczos(apply, v, m):
    dim = len(v)
    m = min(m, dim)
    beta0 = np.linalg.norm(v)
    basis = np.zeros((m + 1, dim), dtype=complex)
    alpha = np.zeros(m)
    beta = np.zeros(m)
    basis[0] = v / beta0
    k = m
    for j in range(m):
        w = apply(basis[j])
        alpha[j] = np.vdot(basis[j], w).real
        w -= alpha[j] * basis[j]
        if j > 0:
            w -= beta[j - 1] * basis[j - 1]
        # full reorthogonalisation, cheap at these Krylov dimensions
        w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if beta[j] < 1e-12 * max(1.0, abs(alpha[j])):
            k = j + 1
            beta[j] = 0.0
            break
        basis[j + 1] = w / beta[j]
    t = np.diag(alpha[:k]) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    theta, s = np.linalg.eigh(t)
    return beta0, basis[:k], theta, s, beta[k - 1]


def krylov_series(apply, psi0, times, tol: float = 1e-9, krylov_dim: int = 30,
                  min_step: float = 1e-10) -> np.ndarray:
    """``exp(-iHt) psi0`` on a non-decreasing grid of times >= 0.

    Lanczos steps with an a-posteriori error estimate; each step is halved
    until the estimate drops below ``tol``.

    Raises
    ------
    ConvergenceError
        If the required step falls below ``min_step``.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("Krylov evolution needs non-negative, non-decreasing times")
    psi = np.array(psi0, dtype=complex)
    out = np.empty((len(times), len(psi)), dtype=complex)
    now = 0.0
    for k, target in enumerate(times):
        while target - now > 0:
            beta0, vbasis, theta, s, resid = _lanczos(apply, psi, krylov_dim)
            dt = target - now
            while True:
                coef = s @ (np.exp(-1j * theta * dt) * s[0])
                err = beta0 * resid * abs(coef[-1])
                if err <= tol:
                    break
                dt *= 0.5
                if dt < min_step:
                    raise ConvergenceError(
                        f"Krylov step shrank below {min_step:g} at t={now:.6g} "
                        f"(error estimate {err:.3e}); increase krylov_dim"
                    )
            psi = beta0 * (vbasis.T @ coef)
            now = now + dt if dt < target - now else target
        out[k] = psi
    return out


def evolve_series(state: StateVector, ham: Hamiltonian, times, method: str = "auto",
                  tol: float = 1e-9) -> np.ndarray:
    """Amplitudes at each time, shape ``(len(times), 2**n)``.

    ``method`` is ``"spectral"`` (cached eigendecomposition), ``"krylov"`` or
    ``"auto"``, which picks spectral up to 12 spins.
    """
    if state.n != ham.n:
        raise ValueError(f"state has {state.n} spins, Hamiltonian {ham.n}")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if method == "auto":
        method = "spectral" if ham.n <= SPECTRAL_CAP else "krylov"
    if method == "spectral":
        return _spectral_series(ham.spectrum, state.amplitudes, times)
    if method == "krylov":
        return krylov_series(ham.apply, state.amplitudes, times, tol=tol)
    raise ValueError(f"unknown evolution method {method!r}")


def evolve(state: StateVector, ham: Hamiltonian, t: float, method: str = "auto") -> StateVector:
    psi = evolve_series(state, ham, [t], method=method)[0]
    # absorb round-off so the StateVector norm check holds
    psi = psi / np.linalg.norm(psi)
    return StateVector(state.n, psi)


# ---------------------------------------------------------------------------
# Local observables
# ---------------------------------------------------------------------------

def _amps(state):
    return state.amplitudes if isinstance(state, StateVector) else np.asarray(state)


def _split_site(psi, n, site):
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} spins")
    v = psi.reshape(1 << (n - 1 - site), 2, 1 << site)
    return v[:, 1, :], v[:, 0, :]


def reduced_density_matrix(state: StateVector, site: int) -> np.ndarray:
    """2x2 density matrix of one spin, basis order (up, down)."""
    up, dn = _split_site(_amps(state), state.n, site)
    p_up = np.vdot(up, up).real
    p_dn = np.vdot(dn, dn).real
    off = np.vdot(dn, up)  # sum up * conj(dn)
    return np.array([[p_up, off], [np.conj(off), p_dn]])


def expectation_pauli(state: StateVector, site: int, axis: str) -> float:
    psi = _amps(state)
    n = state.n
    if axis == "z":
        up, dn = _split_site(psi, n, site)
        return float(np.vdot(up, up).real - np.vdot(dn, dn).real)
    if axis not in ("x", "y"):
        raise ValueError(f"axis must be x, y or z, not {axis!r}")
    idx = np.arange(len(psi))
    flipped = psi[idx ^ (1 << site)]
    if axis == "x":
        return float(np.vdot(psi, flipped).real)
    # Y|up> = i|down>, Y|down> = -i|up>
    bit = ((idx >> site) & 1) * 2 - 1
    return float(np.vdot(psi, -1j * bit * flipped).real)


def zz_correlator(state: StateVector, i: int, j: int) -> float:
    if i == j:
        return 1.0
    n = state.n
    for s in (i, j):
        if not 0 <= s < n:
            raise IndexError(f"site {s} out of range for {n} spins")
    p = np.abs(_amps(state)) ** 2
    idx = np.arange(len(p))
    sign = (((idx >> i) ^ (idx >> j)) & 1) * -2 + 1
    return float(np.dot(p, sign))


def z_moments(amplitudes: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """``<Z_i>`` and ``<Z_i Z_j>`` for a batch of amplitude rows.

    Parameters
    ----------
    amplitudes : ndarray, shape (T, 2**n) or (2**n,)

    Returns
    -------
    mz : ndarray, shape (T, n)
    zz : ndarray, shape (T, n, n)
    """
    a = np.atleast_2d(amplitudes)
    prob = np.ascontiguousarray(np.abs(a) ** 2)
    return kernels.z_moments(prob, n)


def x_moments(amplitudes: np.ndarray, n: int) -> np.ndarray:
    a = np.ascontiguousarray(np.atleast_2d(amplitudes), dtype=complex)
    return kernels.x_expectations(a, n)


def rdm_series(amplitudes: np.ndarray, n: int, site: int) -> np.ndarray:
    """Single-site density matrices for a batch of states, shape (T, 2, 2)."""
    a = np.atleast_2d(amplitudes)
    v = a.reshape(a.shape[0], 1 << (n - 1 - site), 2, 1 << site)
    up, dn = v[:, :, 1, :], v[:, :, 0, :]
    out = np.empty((a.shape[0], 2, 2), dtype=complex)
    out[:, 0, 0] = np.sum(np.abs(up) ** 2, axis=(1, 2))
    out[:, 1, 1] = np.sum(np.abs(dn) ** 2, axis=(1, 2))
    out[:, 0, 1] = np.sum(up * np.conj(dn), axis=(1, 2))
    out[:, 1, 0] = np.conj(out[:, 0, 1])
    return out
