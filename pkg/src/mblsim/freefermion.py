"""Non-interacting control: Jordan-Wigner fermions with frozen string signs.

Convention: spin up is an empty mode, ``n_j = (1 - Z_j)/2``, and
``c_j = (prod_{k<j} Z_k) sigma^+_j``. With this choice

    X_i X_j = (c_i^dag - c_i) P_ij (c_j + c_j^dag),   i < j,

where ``P_ij = prod_{i<k<j} Z_k`` is the fermion parity strictly between
the two sites. Freezing ``P_ij`` at its value in the initial z-product
state leaves a quadratic Hamiltonian with long-range hopping and pairing,

    H = sum_ij h_ij c_i^dag c_j + 1/2 sum_ij (D_ij c_i^dag c_j^dag + h.c.),

``h_ij = D_ij = J_ij eta_ij`` (i < j), ``h_ii = -(B + D_i)``. For purely
nearest-neighbour couplings the interior string is empty and the mapping
is exact.

Dynamics are propagated on the Nambu correlation matrix
``Gamma = <Psi Psi^dag>``, ``Psi = (c_1..c_N, c_1^dag..c_N^dag)``, which
evolves as ``U Gamma U^dag`` with ``U = exp(-i H_BdG t)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import ModelSpec
from .observables import qfi_from_moments

__all__ = [
    "BdgHamiltonian",
    "CovarianceState",
    "BdgPropagator",
    "frozen_string_signs",
    "build_bdg",
    "init_covariance",
    "evolve_covariance",
    "two_point",
    "density_density",
    "ff_observables",
    "quadratic_energy",
]


def frozen_string_signs(signs) -> np.ndarray:
    """``eta_ij = prod_{i<k<j} s_k`` for a z-product signature ``s``.

    Symmetric with unit diagonal; entries are +-1.
    """
    s = np.asarray(signs, dtype=int)
    n = len(s)
    # prefix[k] = prod_{m<k} s_m
    prefix = np.concatenate([[1], np.cumprod(s)])
    eta = np.ones((n, n), dtype=int)
    for i in range(n):
        for j in range(i + 1, n):
            eta[i, j] = eta[j, i] = prefix[j] * prefix[i + 1]
    return eta


@dataclass(frozen=True, eq=False)
class BdgHamiltonian:
    n: int
    hopping: np.ndarray
    pairing: np.ndarray
    phase_signs: np.ndarray

    def __post_init__(self):
        if not np.allclose(self.hopping, self.hopping.conj().T, atol=1e-12, rtol=0):
            raise ValueError("hopping block must be Hermitian")
        if not np.allclose(self.pairing, -self.pairing.T, atol=1e-12, rtol=0):
            raise ValueError("pairing block must be antisymmetric")

    def matrix(self) -> np.ndarray:
        """2N x 2N Bogoliubov-de Gennes matrix ``[[h, D], [-D*, -h*]]``."""
        h, d = self.hopping, self.pairing
        return np.block([[h, d], [-d.conj(), -h.conj()]])


def build_bdg(spec: ModelSpec, pattern=None) -> BdgHamiltonian:
    """Quadratic approximation of the spin model around a z-product state.

    ``pattern`` is the initial z-signature; the Neel pattern (first site up)
    is used when omitted.
    """
    n = spec.n
    if pattern is None:
        pattern = [1 if k % 2 == 0 else -1 for k in range(n)]
    signs = np.asarray(getattr(pattern, "signs", pattern))
    if len(signs) != n:
        raise ValueError(f"pattern has {len(signs)} sites, model {n}")
    eta = frozen_string_signs(signs)
    j = spec.couplings.values * eta
    hopping = j.astype(complex)
    np.fill_diagonal(hopping, -(spec.field_b + spec.disorder.values))
    pairing = np.triu(j, 1) - np.triu(j, 1).T
    return BdgHamiltonian(n, hopping, pairing.astype(complex), eta)


@dataclass(frozen=True, eq=False)
class CovarianceState:
    """Two-point functions ``g_ij = <c_i^dag c_j>`` and ``f_ij = <c_i c_j>``."""

    g: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=complex)
        f = np.asarray(self.f, dtype=complex)
        if not np.allclose(g, g.conj().T, atol=1e-9, rtol=0):
            raise ValueError("g must be Hermitian")
        if not np.allclose(f, -f.T, atol=1e-9, rtol=0):
            raise ValueError("f must be antisymmetric")
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "f", f)

    @property
    def n(self) -> int:
        return self.g.shape[0]

    def correlation_matrix(self) -> np.ndarray:
        """Nambu matrix ``[[1 - g^T, f], [-f*, g]]``."""
        g, f = self.g, self.f
        return np.block([[np.eye(self.n) - g.T, f], [-f.conj(), g]])

    def physicality(self) -> tuple[float, float]:
        """Smallest and largest eigenvalue of the Nambu correlation matrix."""
        ev = np.linalg.eigvalsh(self.correlation_matrix())
        return float(ev[0]), float(ev[-1])

    @classmethod
    def from_correlation(cls, gamma: np.ndarray) -> "CovarianceState":
        n = gamma.shape[0] // 2
        return cls(gamma[n:, n:], gamma[:n, n:])


def init_covariance(pattern) -> CovarianceState:
    """z-product state: ``g = diag((1 - s_i)/2)``, ``f = 0``."""
    s = np.asarray(getattr(pattern, "signs", pattern), dtype=float)
    n = len(s)
    return CovarianceState(np.diag((1 - s) / 2).astype(complex), np.zeros((n, n), dtype=complex))


class BdgPropagator:
    """Eigendecomposition of ``H_BdG`` reused for any number of times."""

    def __init__(self, bdg: BdgHamiltonian):
        self.bdg = bdg
        self.energies, self.modes = np.linalg.eigh(bdg.matrix())

    def unitary(self, t: float) -> np.ndarray:
        return (self.modes * np.exp(-1j * self.energies * t)) @ self.modes.conj().T

    def evolve(self, state: CovarianceState, t: float) -> CovarianceState:
        u = self.unitary(t)
        return CovarianceState.from_correlation(u @ state.correlation_matrix() @ u.conj().T)

    def evolve_series(self, state: CovarianceState, times) -> tuple[np.ndarray, np.ndarray]:
        """Stacked ``g`` and ``f`` over ``times``, each of shape (T, N, N)."""
        n = state.n
        gamma0 = state.correlation_matrix()
        # pass to the eigenbasis once; each time is then a phase conjugation
        g_eig = self.modes.conj().T @ gamma0 @ self.modes
        times = np.asarray(times, dtype=float)
        gs = np.empty((len(times), n, n), dtype=complex)
        fs = np.empty_like(gs)
        for k, t in enumerate(times):
            ph = np.exp(-1j * self.energies * t)
            left = self.modes * ph
            gt = left @ g_eig @ left.conj().T
            gs[k] = gt[n:, n:]
            fs[k] = gt[:n, n:]
        return gs, fs


def evolve_covariance(state: CovarianceState, bdg: BdgHamiltonian, t: float) -> CovarianceState:
    return BdgPropagator(bdg).evolve(state, t)


def two_point(g, f, dag_a: bool, dag_b: bool) -> np.ndarray:
    """Matrix of ``<A_i B_j>`` for ``A, B`` in ``{c, c^dag}``.

    Supports a leading batch axis on ``g`` and ``f``.
    """
    g = np.asarray(g)
    f = np.asarray(f)
    gt = np.swapaxes(g, -1, -2)
    if dag_a and not dag_b:
        return g
    if not dag_a and dag_b:
        return np.eye(g.shape[-1]) - gt
    if not dag_a and not dag_b:
        return f
    return -np.conj(f)


def density_density(g, f) -> np.ndarray:
    """``<n_i n_j>`` from Wick's theorem for ``<c_i^dag c_i c_j^dag c_j>``.

    ``<ABCD> = <AB><CD> - <AC><BD> + <AD><BC>`` with A = c_i^dag, B = c_i,
    C = c_j^dag, D = c_j; the diagonal reduces to ``<n_i>`` automatically.
    """
    ab = two_point(g, f, True, False)  # <c_i^dag c_j>
    ac = two_point(g, f, True, True)  # <c_i^dag c_j^dag>
    bd = two_point(g, f, False, False)  # <c_i c_j>
    bc = two_point(g, f, False, True)  # <c_i c_j^dag>
    occ = np.diagonal(ab, axis1=-2, axis2=-1)
    nn = occ[..., :, None] * occ[..., None, :] - ac * bd + ab * bc
    return nn.real


def ff_observables(state) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``<Z_i>``, ``<Z_i Z_j>`` and the staggered QFI ``f_Q``.

    ``state`` is a CovarianceState or a ``(g, f)`` pair of stacked arrays.
    """
    g, f = (state.g, state.f) if isinstance(state, CovarianceState) else state
    occ = np.real(np.diagonal(g, axis1=-2, axis2=-1))
    nn = density_density(g, f)
    mz = 1 - 2 * occ
    zz = 1 - 2 * occ[..., :, None] - 2 * occ[..., None, :] + 4 * nn
    n = mz.shape[-1]
    idx = np.arange(n)
    zz[..., idx, idx] = 1.0
    return mz, zz, qfi_from_moments(mz, zz)


def quadratic_energy(state: CovarianceState, bdg: BdgHamiltonian) -> float:
    """``<sum h_ij c_i^dag c_j + 1/2 sum (D_ij c_i^dag c_j^dag + h.c.)>``."""
    hop = np.sum(bdg.hopping * state.g)
    pair = np.sum(bdg.pairing * -np.conj(state.f))
    return float(np.real(hop) + np.real(pair))
