"""Level statistics and thermal (ETH) predictions."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .ed import Hamiltonian, SpectralDecomposition

__all__ = [
    "POISSON_MEAN_R",
    "RStatistic",
    "SpacingEnsemble",
    "SpacingHistogram",
    "ThermalPrediction",
    "level_spacings",
    "r_statistic",
    "unfold_spectrum",
    "spacing_ensemble",
    "spacing_histogram",
    "thermal_energy",
    "eth_beta",
    "eth_rdm",
]

POISSON_MEAN_R = 2 * np.log(2) - 1


def _levels(spectrum) -> np.ndarray:
    if isinstance(spectrum, SpectralDecomposition):
        return spectrum.eigenvalues
    if isinstance(spectrum, Hamiltonian):
        return spectrum.spectrum.eigenvalues
    return np.asarray(spectrum, dtype=float)


def level_spacings(spectrum) -> np.ndarray:
    e = _levels(spectrum)
    d = np.diff(e)
    if np.any(d < 0):
        raise ValueError("eigenvalues must be sorted ascending")
    return d


@dataclass(frozen=True)
class RStatistic:
    r_values: np.ndarray
    mean: float
    skipped: int


def r_statistic(spectrum, degeneracy_tol: float = 1e-12) -> RStatistic:
    """Adjacent-gap ratios ``min(d_n, d_n-1) / max(d_n, d_n-1)``.

    Pairs whose larger gap is below ``degeneracy_tol`` times the spectral
    width are skipped and counted.
    """
    e = _levels(spectrum)
    if len(e) < 3:
        raise ValueError("need at least three levels for gap ratios")
    d = level_spacings(e)
    lo = np.minimum(d[1:], d[:-1])
    hi = np.maximum(d[1:], d[:-1])
    ok = hi > degeneracy_tol * (e[-1] - e[0])
    r = lo[ok] / hi[ok]
    mean = float(r.mean()) if r.size else float("nan")
    return RStatistic(r, mean, int((~ok).sum()))


def unfold_spectrum(levels, degree: int = 5) -> np.ndarray:
    """Map levels onto a smooth fit of the staircase function N(E).

    The unfolded levels have unit mean spacing locally.
    """
    e = np.asarray(levels, dtype=float)
    fit = np.polynomial.Polynomial.fit(e, np.arange(len(e)), degree)
    return fit(e)


@dataclass(frozen=True, eq=False)
class SpacingEnsemble:
    """Pooled spacings (in units of the local mean spacing) and gap ratios."""

    spacings: np.ndarray
    r_values: np.ndarray
    r_means: np.ndarray
    realization_count: int
    skipped: int

    @property
    def mean_r(self) -> float:
        return float(self.r_values.mean())

    @property
    def mean_r_stderr(self) -> float:
        if self.realization_count < 2:
            return 0.0
        return float(self.r_means.std(ddof=1) / np.sqrt(self.realization_count))


def spacing_ensemble(spectra: Iterable, unfold: str = "mean", central_fraction: float = 1.0,
                     degree: int = 5) -> SpacingEnsemble:
    """Pool level statistics over disorder realizations.

    Parameters
    ----------
    spectra : iterable of sorted eigenvalue arrays (one per realization)
    unfold : ``"mean"`` rescales each realization by its mean spacing;
        ``"polynomial"`` unfolds with a degree-``degree`` staircase fit.
    central_fraction : fraction of levels, centred in the spectrum, kept for
        the spacing distribution. Gap ratios always use the whole spectrum.
    """
    sp, rs, means = [], [], []
    skipped = 0
    count = 0
    for e in spectra:
        e = _levels(e)
        count += 1
        r = r_statistic(e)
        rs.append(r.r_values)
        means.append(r.mean)
        skipped += r.skipped
        u = unfold_spectrum(e, degree) if unfold == "polynomial" else e
        if unfold not in ("mean", "polynomial"):
            raise ValueError(f"unknown unfolding {unfold!r}")
        k = len(u)
        cut = int(round(k * (1 - central_fraction) / 2))
        u = u[cut: k - cut]
        d = np.diff(u)
        sp.append(d / d.mean())
    if count == 0:
        raise ValueError("no spectra given")
    return SpacingEnsemble(np.concatenate(sp), np.concatenate(rs), np.array(means), count, skipped)


@dataclass(frozen=True, eq=False)
class SpacingHistogram:
    edges: np.ndarray
    density: np.ndarray
    reference: np.ndarray
    counts: np.ndarray
    chi2: float
    pvalue: float
    dof: int
    samples: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["s_lo", "s_hi", "count", "density", "poisson_density"])
        for k in range(len(self.density)):
            w.writerow([f"{self.edges[k]:.17g}", f"{self.edges[k + 1]:.17g}", int(self.counts[k]),
                        f"{self.density[k]:.17g}", f"{self.reference[k]:.17g}"])
        return buf.getvalue()


def spacing_histogram(ensemble: SpacingEnsemble | np.ndarray, bins=None) -> SpacingHistogram:
    """Density histogram of ``s = d / <d>`` with the Poisson law ``exp(-s)``.

    The chi-square statistic compares bin counts (plus one overflow bin
    beyond the last edge) with the Poisson expectation; bins with fewer
    than five expected counts are merged into the overflow.
    """
    s = ensemble.spacings if isinstance(ensemble, SpacingEnsemble) else np.asarray(ensemble)
    edges = np.linspace(0.0, 5.0, 26) if bins is None else np.asarray(bins, dtype=float)
    counts, _ = np.histogram(s, edges)
    total = len(s)
    width = np.diff(edges)
    density = counts / (total * width)
    prob = np.exp(-edges[:-1]) - np.exp(-edges[1:])
    reference = prob / width

    obs = np.append(counts, np.sum(s >= edges[-1])).astype(float)
    exp = np.append(prob, np.exp(-edges[-1])) * total
    # overflow below edges[0] is impossible for non-negative spacings
    while len(exp) > 2 and exp[-2] < 5:
        exp[-2] += exp[-1]
        obs[-2] += obs[-1]
        exp, obs = exp[:-1], obs[:-1]
    exp *= obs.sum() / exp.sum()
    chi2, p = stats.chisquare(obs, exp)
    return SpacingHistogram(edges, density, reference, counts, float(chi2), float(p),
                            len(obs) - 1, total)


# ---------------------------------------------------------------------------
# Thermal ensemble
# ---------------------------------------------------------------------------

def _weights(levels, beta):
    ref = levels[0] if beta >= 0 else levels[-1]
    x = -beta * (levels - ref)
    w = np.exp(x - x.max())
    return w / w.sum()


def thermal_energy(spectrum, beta: float) -> float:
    """Canonical energy ``Tr[H e^{-bH}] / Tr[e^{-bH}]``."""
    e = _levels(spectrum)
    return float(np.dot(_weights(e, beta), e))


def eth_beta(spectrum, energy: float, rtol: float = 1e-10, max_iter: int = 400) -> float:
    """Inverse temperature whose canonical energy equals ``energy``.

    Solved by bisection on the strictly decreasing map beta -> E(beta).

    Raises
    ------
    ValueError
        If ``energy`` is not strictly inside the spectrum.
    """
    e = _levels(spectrum)
    width = e[-1] - e[0]
    tol = rtol * width
    if not e[0] < energy < e[-1]:
        raise ValueError(
            f"energy {energy} is not strictly inside the spectrum [{e[0]}, {e[-1]}]; "
            "no finite beta exists"
        )
    if abs(thermal_energy(e, 0.0) - energy) <= tol:
        return 0.0
    grid = np.linspace(-50, 50, 41) / width
    vals = np.array([thermal_energy(e, b) for b in grid])
    if np.any(np.diff(vals) > tol):
        raise ArithmeticError("canonical energy is not monotone in beta")
    lo, hi = (-1.0 / width, 0.0) if energy > thermal_energy(e, 0.0) else (0.0, 1.0 / width)
    while thermal_energy(e, lo) < energy:
        lo *= 2
    while thermal_energy(e, hi) > energy:
        hi *= 2
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        em = thermal_energy(e, mid)
        if abs(em - energy) <= tol:
            return mid
        if em > energy:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True, eq=False)
class ThermalPrediction:
    beta: float
    site: int
    rdm: np.ndarray


def eth_rdm(ham: Hamiltonian, beta: float, site: int) -> ThermalPrediction:
    """Single-site reduced density matrix of the Gibbs state, basis (up, down).

    The Gibbs operator commutes with the global parity while X_i and Y_i are
    parity-odd, so the result is diagonal.
    """
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    if not 0 <= site < ham.n:
        raise IndexError(f"site {site} out of range")
    if beta == 0:
        # Tr_B of the identity
        return ThermalPrediction(0.0, site, 0.5 * np.eye(2, dtype=complex))
    spec = ham.spectrum
    ref = spec.eigenvalues[0] if beta >= 0 else spec.eigenvalues[-1]
    scale = np.exp(-beta * (spec.eigenvalues - ref)).sum()
    p_up = p_dn = 0.0
    for b in spec.blocks:
        wb = np.exp(-beta * (b.energies - ref)) / scale
        occ = (b.vectors**2) @ wb
        up = ((b.basis >> site) & 1).astype(bool)
        p_up += occ[up].sum()
        p_dn += occ[~up].sum()
    norm = p_up + p_dn
    rdm = np.diag([p_up / norm, p_dn / norm]).astype(complex)
    return ThermalPrediction(float(beta), site, rdm)
