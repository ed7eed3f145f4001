"""Coupling matrices, trapped-ion normal modes, disorder and model specs.

Energies are in units of the nearest-neighbour coupling ``J_max`` (or the
Kac scale ``J`` when Kac-normalised couplings are used). Ion positions are
in units of the characteristic length ``(e^2 / 4 pi eps0 M omega_z^2)^(1/3)``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import ConfigError, ConvergenceError, ResonanceError, ZigZagInstabilityError

__all__ = [
    "TrapSpec",
    "NormalModes",
    "CouplingMatrix",
    "DisorderRealization",
    "ModelSpec",
    "equilibrium_positions",
    "transverse_modes",
    "coupling_from_modes",
    "power_law_couplings",
    "kac_normalization",
    "kac_normalized_couplings",
    "fit_alpha",
    "sample_disorder",
    "realization_seed",
    "couplings_from_recipe",
]


# ---------------------------------------------------------------------------
# Ion crystal
# ---------------------------------------------------------------------------

def _coulomb_force(u):
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    return u - np.sum(np.sign(d) / d**2, axis=1)


def _coulomb_hessian(u):
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    k = 2.0 / d**3
    hess = -k
    np.fill_diagonal(hess, 1.0 + k.sum(axis=1))
    return hess


def _potential(u):
    d = np.abs(u[:, None] - u[None, :])
    iu = np.triu_indices(len(u), 1)
    return 0.5 * np.dot(u, u) + np.sum(1.0 / d[iu])


def equilibrium_positions(n: int, max_iter: int = 500, tol: float = 1e-13) -> np.ndarray:
    """Equilibrium axial positions of ``n`` ions in a harmonic well.

    Solves for the stationary point of ``sum u_i^2/2 + sum_{i<j} 1/|u_i - u_j|``
    with a damped Newton iteration started from uniform spacing.

    Returns
    -------
    ndarray
        Sorted dimensionless positions.

    Raises
    ------
    ConvergenceError
        If the residual force has not dropped below ``tol`` after ``max_iter``
        iterations.
    """
    if n < 1:
        raise ValueError("need at least one ion")
    if n == 1:
        return np.zeros(1)
    # minimum spacing scaling of long crystals, 2.018/n^0.559
    spacing = 2.018 / n**0.559
    u = (np.arange(n) - (n - 1) / 2) * spacing
    for _ in range(max_iter):
        force = _coulomb_force(u)
        resid = np.max(np.abs(force))
        if resid < tol:
            break
        step = np.linalg.solve(_coulomb_hessian(u), -force)
        e0 = _potential(u)
        lam = 1.0
        while lam > 1e-8:
            trial = u + lam * step
            if np.all(np.diff(trial) > 0) and _potential(trial) <= e0 + 1e-15 * abs(e0):
                break
            lam *= 0.5
        u = u + lam * step
    else:
        resid = np.max(np.abs(_coulomb_force(u)))
        if resid >= tol:
            raise ConvergenceError(
                f"equilibrium solver did not converge for n={n}: residual force {resid:.3e}"
            )
    # remove residual asymmetry left by round-off
    u = 0.5 * (u - u[::-1])
    return u


@dataclass(frozen=True)
class TrapSpec:
    """Trap and laser parameters entering the phonon-mediated coupling.

    All frequencies are angular and must share one unit system. ``anisotropy``
    is omega_x / omega_z; ``axial_frequency`` sets omega_z in those units.
    """

    ion_count: int
    anisotropy: float
    rabi_frequency: float
    recoil_frequency: float
    beatnote_detuning: float
    axial_frequency: float = 1.0
    resonance_margin: float = 1e-3

    def __post_init__(self):
        if self.ion_count < 2:
            raise ConfigError("a trap needs at least two ions")
        if self.anisotropy <= 0 or self.axial_frequency <= 0:
            raise ConfigError("trap frequencies must be positive")

    def to_dict(self) -> dict:
        return {
            "ion_count": self.ion_count,
            "anisotropy": self.anisotropy,
            "rabi_frequency": self.rabi_frequency,
            "recoil_frequency": self.recoil_frequency,
            "beatnote_detuning": self.beatnote_detuning,
            "axial_frequency": self.axial_frequency,
            "resonance_margin": self.resonance_margin,
        }


@dataclass(frozen=True)
class NormalModes:
    """Transverse modes; column ``m`` of ``mode_matrix`` is mode ``m``.

    Modes are ordered by decreasing frequency, so mode 0 is the
    centre-of-mass mode.
    """

    positions: np.ndarray
    mode_matrix: np.ndarray
    frequencies: np.ndarray
    eigenvalues: np.ndarray


def transverse_hessian(positions, anisotropy: float) -> np.ndarray:
    u = np.asarray(positions, dtype=float)
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    k = 1.0 / d**3
    a = k.copy()
    np.fill_diagonal(a, anisotropy**2 - k.sum(axis=1))
    return a


def transverse_modes(positions, anisotropy: float, axial_frequency: float = 1.0) -> NormalModes:
    if anisotropy <= 0:
        raise ValueError("anisotropy must be positive")
    u = np.asarray(positions, dtype=float)
    a = transverse_hessian(u, anisotropy)
    vals, vecs = np.linalg.eigh(a)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    bad = np.nonzero(vals <= 0)[0]
    if bad.size:
        m = int(bad[0])
        raise ZigZagInstabilityError(
            f"transverse mode {m} has eigenvalue {vals[m]:.6g} <= 0 at anisotropy "
            f"{anisotropy}; the linear chain is unstable (zig-zag)"
        )
    # deterministic eigenvector signs: largest-magnitude component positive,
    # except the COM mode which is made uniformly positive
    for m in range(vecs.shape[1]):
        col = vecs[:, m]
        ref = col.sum() if m == 0 else col[np.argmax(np.abs(col))]
        if ref < 0:
            vecs[:, m] = -col
    return NormalModes(
        positions=u,
        mode_matrix=vecs,
        frequencies=axial_frequency * np.sqrt(vals),
        eigenvalues=vals,
    )


# ---------------------------------------------------------------------------
# Couplings
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CouplingMatrix:
    """Symmetric Ising coupling matrix with zero diagonal.

    ``provenance`` is a plain mapping with a ``kind`` key (``power_law``,
    ``kac``, ``normal_mode`` or ``explicit``) and the recipe parameters, so a
    matrix can be regenerated from its serialised form.
    """

    values: np.ndarray
    provenance: Mapping[str, Any] = field(default_factory=lambda: {"kind": "explicit"})

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("coupling matrix must be square")
        if not np.array_equal(v, v.T):
            raise ValueError("coupling matrix must be exactly symmetric")
        if np.any(np.diag(v) != 0):
            raise ValueError("coupling matrix must have zero diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", dict(self.provenance))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for row in self.values:
            w.writerow([f"{x:.17g}" for x in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CouplingMatrix":
        rows = [[float(x) for x in r] for r in csv.reader(io.StringIO(text)) if r]
        return cls(np.array(rows), {"kind": "explicit"})

    def to_dict(self, inline: bool = False) -> dict:
        d = dict(self.provenance)
        d["n"] = self.n
        if inline or d["kind"] == "explicit":
            d["values"] = self.values.tolist()
        return d


def _distance_matrix(n):
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :]).astype(float)


def _power_law_values(n, scale, alpha):
    d = _distance_matrix(n)
    out = np.zeros((n, n))
    mask = d > 0
    out[mask] = scale / d[mask] ** alpha
    return out


def power_law_couplings(n: int, j_max: float, alpha: float) -> CouplingMatrix:
    """``J_ij = j_max / |i - j|**alpha``."""
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    if j_max <= 0:
        raise ValueError("j_max must be positive")
    return CouplingMatrix(
        _power_law_values(n, j_max, alpha),
        {"kind": "power_law", "j_max": float(j_max), "alpha": float(alpha)},
    )


def kac_normalization(n: int, alpha: float) -> float:
    """Mean coupling weight ``(N-1)^-1 sum_{i<j} |i-j|^-alpha``."""
    if n < 2:
        raise ValueError("Kac normalisation needs n >= 2")
    d = np.arange(1, n, dtype=float)
    return float(np.sum((n - d) * d**-alpha) / (n - 1))


def kac_normalized_couplings(n: int, j: float, alpha: float) -> CouplingMatrix:
    norm = kac_normalization(n, alpha)
    return CouplingMatrix(
        _power_law_values(n, j / norm, alpha),
        {"kind": "kac", "j": float(j), "alpha": float(alpha)},
    )


def coupling_from_modes(trap: TrapSpec, scale: float = 1.0) -> CouplingMatrix:
    """Phonon-mediated couplings ``Omega^2 w_R sum_m b_im b_jm / (mu^2 - w_m^2)``.

    ``scale`` converts the result into the desired energy unit.
    """
    modes = transverse_modes(
        equilibrium_positions(trap.ion_count), trap.anisotropy, trap.axial_frequency
    )
    mu = trap.beatnote_detuning
    close = np.abs(mu - modes.frequencies) <= trap.resonance_margin * modes.frequencies
    if np.any(close):
        m = int(np.nonzero(close)[0][0])
        raise ResonanceError(
            f"detuning {mu} within {trap.resonance_margin:g} relative margin of mode {m} "
            f"(frequency {modes.frequencies[m]:.9g})"
        )
    b = modes.mode_matrix
    weights = 1.0 / (mu**2 - modes.frequencies**2)
    j = trap.rabi_frequency**2 * trap.recoil_frequency * (b * weights) @ b.T
    j = scale * 0.5 * (j + j.T)
    np.fill_diagonal(j, 0.0)
    return CouplingMatrix(j, {"kind": "normal_mode", "trap": trap.to_dict(), "scale": float(scale)})


def fit_alpha(couplings, trim_edges: int = 0) -> tuple[float, float]:
    """Fit ``J_ij ~ j_max / |i-j|**alpha``.

    Log-couplings are first averaged over all pairs at equal distance, then
    a straight line is fitted to (log d, mean log J) with every distance
    weighted equally.

    Parameters
    ----------
    couplings : CouplingMatrix or array
    trim_edges : int
        Number of ions dropped from each end of the chain before fitting.

    Returns
    -------
    (j_max_fit, alpha_fit)
    """
    v = couplings.values if isinstance(couplings, CouplingMatrix) else np.asarray(couplings, float)
    if trim_edges:
        v = v[trim_edges:-trim_edges, trim_edges:-trim_edges]
    n = v.shape[0]
    if n < 3:
        raise ValueError("need at least two distinct distances to fit a power law")
    iu = np.triu_indices(n, 1)
    if np.any(v[iu] <= 0):
        raise ValueError("fit_alpha requires all off-diagonal couplings to be positive")
    dist = np.arange(1, n)
    mean_log = np.array([np.mean(np.log(np.diagonal(v, offset=d))) for d in dist])
    slope, intercept = np.polyfit(np.log(dist), mean_log, 1)
    return float(np.exp(intercept)), float(-slope)


# ---------------------------------------------------------------------------
# Disorder
# ---------------------------------------------------------------------------

def realization_seed(master_seed: int, index: int) -> int:
    """64-bit seed of realization ``index`` derived from ``master_seed``."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    w: float
    seed: int
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.values)


def sample_disorder(w: float, seed: int, n: int) -> DisorderRealization:
    """Uniform on-site fields ``D_i`` in ``[-w, w]``.

    Uses a counter-based Philox stream keyed by ``seed``: the value at site
    ``i`` is the ``i``-th draw, independent of ``n`` and of any other stream.
    """
    if w < 0:
        raise ValueError("disorder width must be non-negative")
    gen = np.random.Generator(np.random.Philox(key=int(seed) & (2**64 - 1)))
    u = gen.random(n)
    return DisorderRealization(float(w), int(seed), w * (2.0 * u - 1.0))


# ---------------------------------------------------------------------------
# Model specification
# ---------------------------------------------------------------------------

def couplings_from_recipe(recipe: Mapping[str, Any], n: int | None = None) -> CouplingMatrix:
    """Build a CouplingMatrix from its serialised recipe."""
    kind = recipe.get("kind")
    if "n" in recipe:
        n = int(recipe["n"])
    if n is None and kind in ("power_law", "kac"):
        raise ConfigError("coupling recipe needs a site count")
    if kind == "power_law":
        return power_law_couplings(n, recipe.get("j_max", 1.0), recipe["alpha"])
    if kind == "kac":
        return kac_normalized_couplings(n, recipe.get("j", 1.0), recipe["alpha"])
    if kind == "normal_mode":
        trap = TrapSpec(**recipe["trap"])
        return coupling_from_modes(trap, recipe.get("scale", 1.0))
    if kind == "explicit":
        return CouplingMatrix(np.array(recipe["values"], dtype=float))
    raise ConfigError(f"unknown coupling recipe kind {kind!r}")


@dataclass(frozen=True, eq=False)
class ModelSpec:
    """Couplings, uniform field B and one disorder realization."""

    couplings: CouplingMatrix
    field_b: float
    disorder: DisorderRealization

    def __post_init__(self):
        if self.couplings.n != self.disorder.n:
            raise ValueError(
                f"couplings are {self.couplings.n}x{self.couplings.n} but disorder has "
                f"{self.disorder.n} sites"
            )

    @property
    def n(self) -> int:
        return self.couplings.n

    @property
    def site_fields(self) -> np.ndarray:
        """Coefficient ``(B + D_i)/2`` of each ``sigma^z_i``."""
        return 0.5 * (self.field_b + self.disorder.values)

    def to_dict(self, inline: bool = False) -> dict:
        return {
            "n": self.n,
            "couplings": self.couplings.to_dict(inline=inline),
            "field_b": self.field_b,
            "disorder": {"w": self.disorder.w, "seed": self.disorder.seed},
        }

    def to_json(self, inline: bool = False) -> str:
        return json.dumps(self.to_dict(inline), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ModelSpec":
        n = int(d["n"])
        couplings = couplings_from_recipe(d["couplings"], n)
        dis = d.get("disorder", {"w": 0.0, "seed": 0})
        return cls(couplings, float(d["field_b"]), sample_disorder(dis["w"], dis["seed"], n))

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        return cls.from_dict(json.loads(text))


def clean_model(couplings: CouplingMatrix, field_b: float) -> ModelSpec:
    """Model without disorder."""
    return ModelSpec(couplings, field_b, DisorderRealization(0.0, 0, np.zeros(couplings.n)))
