"""Dynamical diagnostics: Hamming distance, staggered-magnetization QFI,
time averages and logarithmic growth fits."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .ed import StateVector, z_moments

__all__ = [
    "TimeSeries",
    "InitialPattern",
    "LogSlope",
    "staggered_signs",
    "hamming_distance",
    "hamming_from_magnetization",
    "qfi_staggered",
    "qfi_from_moments",
    "time_average",
    "log_time_slope",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Observable sampled on a time grid (times in units of 1/J_max).

    ``values`` has shape ``(T,)`` for scalars or ``(T, k)`` for per-site
    vectors; ``stderr`` (optional) has the same shape.
    """

    times: np.ndarray
    values: np.ndarray
    label: str
    stderr: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or len(t) != len(v):
            raise ValueError("values must have one entry per time")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            e = np.asarray(self.stderr, dtype=float)
            if e.shape != v.shape:
                raise ValueError("stderr shape must match values")
            object.__setattr__(self, "stderr", e)

    @property
    def components(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    def column_names(self) -> list[str]:
        if self.values.ndim == 1:
            names = [self.label]
        else:
            names = [f"{self.label}_{k}" for k in range(self.components)]
        cols = []
        for name in names:
            cols.append(f"{name}_mean")
            cols.append(f"{name}_stderr")
        return cols

    def columns(self) -> np.ndarray:
        """Interleaved (mean, stderr) columns, shape (T, 2 * components)."""
        v = self.values.reshape(len(self.times), -1)
        e = np.zeros_like(v) if self.stderr is None else self.stderr.reshape(v.shape)
        out = np.empty((v.shape[0], 2 * v.shape[1]))
        out[:, 0::2] = v
        out[:, 1::2] = e
        return out

    def to_csv(self) -> str:
        return series_to_csv(self.times, [self])


def series_to_csv(times, series) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["t"]
    blocks = []
    for s in series:
        header += s.column_names()
        blocks.append(s.columns())
    w.writerow(header)
    data = np.hstack([np.asarray(times)[:, None]] + blocks)
    for row in data:
        w.writerow([f"{x:.17g}" for x in row])
    return buf.getvalue()


@dataclass(frozen=True, eq=False)
class InitialPattern:
    """z-signature ``s_i = +-1`` of a z-product initial state."""

    signs: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.signs)
        if s.ndim != 1 or not np.all(np.isin(s, (-1, 1))):
            raise ValueError("pattern entries must be +1 or -1")
        object.__setattr__(self, "signs", s.astype(int))

    @property
    def n(self) -> int:
        return len(self.signs)


def staggered_signs(n: int) -> np.ndarray:
    """``(-1)^i`` for chain sites ``i = 1..n`` (array index ``i - 1``)."""
    return np.array([(-1) ** (k + 1) for k in range(n)])


def _moments(state, n=None):
    if isinstance(state, StateVector):
        mz, zz = z_moments(state.amplitudes, state.n)
        return mz[0], zz[0]
    a = np.asarray(state)
    n = n if n is not None else int(np.log2(a.shape[-1]))
    mz, zz = z_moments(a, n)
    if a.ndim == 1:
        return mz[0], zz[0]
    return mz, zz


def hamming_from_magnetization(mz, signs) -> np.ndarray:
    """``1/2 - (1/2N) sum_i s_i <Z_i>``; ``mz`` may carry a leading time axis."""
    signs = np.asarray(signs)
    mz = np.asarray(mz)
    if mz.shape[-1] != len(signs):
        raise ValueError(f"pattern has {len(signs)} sites, magnetization {mz.shape[-1]}")
    return 0.5 - (mz @ signs) / (2 * len(signs))


def hamming_distance(state, pattern) -> float | np.ndarray:
    """Normalized Hamming distance from a z-product initial state.

    For a z-product start ``Z_i(0)|psi0> = s_i |psi0>``, so the two-time
    correlator collapses to the signed single-time magnetization.
    ``state`` is a StateVector or a batch of amplitude rows.
    """
    signs = pattern.signs if isinstance(pattern, InitialPattern) else np.asarray(pattern)
    n = state.n if isinstance(state, StateVector) else int(np.log2(np.shape(state)[-1]))
    if len(signs) != n:
        raise ValueError(f"pattern has {len(signs)} sites but the state has {n}")
    mz, _ = _moments(state, n)
    out = hamming_from_magnetization(mz, signs)
    return float(out) if np.ndim(out) == 0 else out


def qfi_from_moments(mz, zz) -> np.ndarray:
    """Normalized QFI ``f_Q = F_Q / N`` of the staggered magnetization.

    ``F_Q = sum_ij (-1)^(i+j) <Z_i Z_j> - (sum_i (-1)^i <Z_i>)^2``.
    Leading axes of ``mz`` (..., N) and ``zz`` (..., N, N) are broadcast.
    """
    mz = np.asarray(mz)
    zz = np.asarray(zz)
    n = mz.shape[-1]
    s = staggered_signs(n)
    fq = np.einsum("...ij,i,j->...", zz, s, s) - (mz @ s) ** 2
    return fq / n


def qfi_staggered(state) -> float | np.ndarray:
    """Pure-state QFI of ``sum_i (-1)^i Z_i / 2``, normalized by N.

    ``f_Q > 1`` witnesses multipartite entanglement.
    """
    mz, zz = _moments(state)
    out = qfi_from_moments(mz, zz)
    return float(out) if np.ndim(out) == 0 else out


def time_average(series: TimeSeries, t_min: float, t_max: float | None = None):
    """Mean over grid points with ``t_min <= t <= t_max`` and its standard error.

    ``t_max`` defaults to the end of the grid. The standard error is the
    sample standard deviation across the window's points over sqrt(count).
    """
    t = series.times
    if t_max is None:
        t_max = t[-1]
    if t_min > t_max or t_min > t[-1] or t_max < t[0]:
        raise ValueError(f"window [{t_min}, {t_max}] lies outside the grid [{t[0]}, {t[-1]}]")
    mask = (t >= t_min) & (t <= t_max)
    if not mask.any():
        raise ValueError(f"no grid points in [{t_min}, {t_max}]")
    v = series.values[mask]
    mean = v.mean(axis=0)
    if len(v) > 1:
        err = v.std(axis=0, ddof=1) / np.sqrt(len(v))
    else:
        err = np.zeros_like(mean)
    return mean, err


@dataclass(frozen=True)
class LogSlope:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    points: int

    @property
    def excludes_zero(self) -> bool:
        return self.ci_low > 0 or self.ci_high < 0


def log_time_slope(series: TimeSeries, window, confidence: float = 0.95) -> LogSlope:
    """Least-squares fit of ``value = a + b ln t`` over ``window = (t_lo, t_hi)``.

    The confidence interval on ``b`` uses the Student t distribution with
    the residual variance of the fit.
    """
    t_lo, t_hi = window
    if t_lo <= 0:
        raise ValueError("logarithmic fits need t_lo > 0")
    mask = (series.times >= t_lo) & (series.times <= t_hi)
    k = int(mask.sum())
    if k < 5:
        raise ValueError(f"only {k} grid points in window {window}; need at least 5")
    if series.values.ndim != 1:
        raise ValueError("log_time_slope needs a scalar series")
    x = np.log(series.times[mask])
    y = series.values[mask]
    design = np.column_stack([np.ones(k), x])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    dof = k - 2
    s2 = resid @ resid / dof
    cov = s2 * np.linalg.inv(design.T @ design)
    se = float(np.sqrt(max(cov[1, 1], 0.0)))
    q = stats.t.ppf(0.5 + confidence / 2, dof)
    b = float(coef[1])
    return LogSlope(b, float(coef[0]), se, b - q * se, b + q * se, k)
