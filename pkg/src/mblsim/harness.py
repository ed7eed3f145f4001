"""Disorder ensembles, parameter sweeps, persistence and replay.

Couplings are fixed for an ensemble while the on-site disorder is redrawn
for every realization from a seed derived from ``(master_seed, index)``.
Realizations are independent work units; their outputs are collected in
index order and reduced with compensated summation, so results do not
depend on the number of workers.
"""
from __future__ import annotations

import copy
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from . import ed, freefermion
from .errors import CapacityError, ConfigError
from .lattice import ModelSpec, couplings_from_recipe, realization_seed, sample_disorder
from .observables import (
    TimeSeries,
    hamming_from_magnetization,
    log_time_slope,
    qfi_from_moments,
    series_to_csv,
)
from .spectral import SpacingHistogram, spacing_ensemble, spacing_histogram

log = logging.getLogger(__name__)

OBSERVABLES = ("magnetization", "magnetization_x", "hamming", "qfi")
ENGINES = ("ed", "free_fermion")
SWEEP_AXES = {"W": "disorder_w", "alpha": "alpha", "B": "field_b", "N": "n"}
FF_MAX_SITES = 400


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TimeGrid:
    """Sampling times in units of 1/J_max.

    The default is 50 log-spaced points in [0.01, 10] plus t = 0.
    """

    t_max: float = 10.0
    points: int = 50
    t_min: float = 0.01
    spacing: str = "log"
    include_zero: bool = True

    def __post_init__(self):
        if self.points < 2 or self.t_max <= self.t_min or self.t_min < 0:
            raise ConfigError("time grid needs 0 <= t_min < t_max and at least two points")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"unknown time spacing {self.spacing!r}")
        if self.spacing == "log" and self.t_min <= 0:
            raise ConfigError("log-spaced grids need t_min > 0")

    @property
    def times(self) -> np.ndarray:
        if self.spacing == "log":
            t = np.geomspace(self.t_min, self.t_max, self.points)
        else:
            t = np.linspace(self.t_min, self.t_max, self.points)
        if self.include_zero and self.t_min > 0:
            t = np.concatenate([[0.0], t])
        return t

    def to_dict(self) -> dict:
        return {"t_min": self.t_min, "t_max": self.t_max, "points": self.points,
                "spacing": self.spacing, "include_zero": self.include_zero}


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to regenerate an ensemble bit for bit."""

    n: int = 10
    couplings: Mapping[str, Any] = field(
        default_factory=lambda: {"kind": "power_law", "alpha": 1.13, "j_max": 1.0}
    )
    field_b: float = 4.0
    disorder_w: float = 0.0
    initial_state: Any = "neel"
    time_grid: TimeGrid = field(default_factory=TimeGrid)
    realizations: int = 30
    master_seed: int = 20160503
    engine: str = "ed"
    observables: Sequence[str] = ("magnetization", "hamming", "qfi")
    steady_window: Sequence[float | None] = (5.0, None)
    slope_window: Sequence[float] | None = (1.0, 10.0)
    workers: int = 1
    output: str | None = None
    sweep: Mapping[str, Any] | None = None
    max_sites: int = ed.MAX_SITES

    def __post_init__(self):
        if self.realizations < 1:
            raise ConfigError("realization count must be at least 1")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}, not {self.engine!r}")
        bad = [o for o in self.observables if o not in OBSERVABLES]
        if bad:
            raise ConfigError(f"unknown observables {bad}; choose from {OBSERVABLES}")
        if self.engine == "free_fermion" and "magnetization_x" in self.observables:
            raise ConfigError("the free-fermion engine only provides z-basis observables")
        if self.n < 1:
            raise ConfigError("need at least one site")
        if self.engine == "ed" and self.n > self.max_sites:
            raise CapacityError(
                f"n={self.n} exceeds the exact-diagonalisation cap of {self.max_sites}; "
                "select engine 'free_fermion' for larger chains"
            )
        if self.engine == "free_fermion" and self.n > FF_MAX_SITES:
            raise CapacityError(f"n={self.n} exceeds the free-fermion cap of {FF_MAX_SITES}")
        if self.disorder_w < 0:
            raise ConfigError("disorder width must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if "kind" not in self.couplings:
            raise ConfigError("coupling recipe needs a 'kind'")
        pattern = initial_pattern(self)
        if len(pattern) != self.n:
            raise ConfigError(f"initial state has {len(pattern)} sites, model {self.n}")
        z_only = all(a == "z" for a, _ in pattern)
        if not z_only and ("hamming" in self.observables or self.engine == "free_fermion"):
            raise ConfigError("Hamming distance and the free-fermion engine need a z-product initial state")

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "couplings": dict(self.couplings),
            "field_b": self.field_b,
            "disorder_w": self.disorder_w,
            "initial_state": self.initial_state if isinstance(self.initial_state, str)
            else list(self.initial_state),
            "time_grid": self.time_grid.to_dict(),
            "realizations": self.realizations,
            "master_seed": self.master_seed,
            "engine": self.engine,
            "observables": list(self.observables),
            "steady_window": list(self.steady_window),
            "slope_window": None if self.slope_window is None else list(self.slope_window),
            "sweep": None if self.sweep is None else dict(self.sweep),
            "max_sites": self.max_sites,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "ExperimentConfig":
        d = dict(d)
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        if "time_grid" in d and not isinstance(d["time_grid"], TimeGrid):
            d["time_grid"] = TimeGrid(**d["time_grid"])
        for key in ("observables", "steady_window", "slope_window"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc

    def replace(self, **changes) -> "ExperimentConfig":
        d = self.to_dict()
        d["workers"] = self.workers
        d["output"] = self.output
        d.update(changes)
        return ExperimentConfig.from_dict(d)

    def with_axis_value(self, axis: str, value) -> "ExperimentConfig":
        key = SWEEP_AXES.get(axis, axis)
        if key == "alpha":
            recipe = dict(self.couplings)
            recipe["alpha"] = float(value)
            return self.replace(couplings=recipe, sweep=None)
        if key == "n":
            return self.replace(n=int(value), sweep=None)
        if key in ("disorder_w", "field_b"):
            return self.replace(**{key: float(value)}, sweep=None)
        raise ConfigError(f"cannot sweep over {axis!r}; choose from {sorted(SWEEP_AXES)}")


def initial_pattern(config: ExperimentConfig) -> list[tuple[str, int]]:
    spec = config.initial_state
    if isinstance(spec, str):
        if spec == "neel":
            return [("z", int(s)) for s in ed.neel_pattern(config.n)]
        if spec in ("up", "all_up"):
            return [("z", 1)] * config.n
        if spec in ("down", "all_down"):
            return [("z", -1)] * config.n
        raise ConfigError(f"unknown initial state {spec!r}")
    try:
        return [ed._parse_site(p) for p in spec]
    except (ValueError, TypeError, IndexError) as exc:
        raise ConfigError(f"bad initial state pattern: {exc}") from exc


def config_hash(config: ExperimentConfig) -> str:
    return hashlib.sha256(_canonical(config.to_dict()).encode()).hexdigest()


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


# ---------------------------------------------------------------------------
# Single realization
# ---------------------------------------------------------------------------

def model_for(config: ExperimentConfig, couplings, seed: int) -> ModelSpec:
    return ModelSpec(couplings, float(config.field_b), sample_disorder(config.disorder_w, seed, config.n))


def _ed_realization(config, spec, pattern, times):
    ham = ed.Hamiltonian(spec, max_sites=config.max_sites)
    state = ed.product_state(pattern)
    amps = ed.evolve_series(state, ham, times)
    out = {}
    need_z = {"magnetization", "hamming", "qfi"} & set(config.observables)
    if need_z:
        mz, zz = ed.z_moments(amps, config.n)
    signs = np.array([s for _, s in pattern])
    for name in config.observables:
        if name == "magnetization":
            out[name] = mz
        elif name == "magnetization_x":
            out[name] = ed.x_moments(amps, config.n)
        elif name == "hamming":
            out[name] = hamming_from_magnetization(mz, signs)
        elif name == "qfi":
            out[name] = qfi_from_moments(mz, zz)
    return out


def _ff_realization(config, spec, pattern, times):
    signs = np.array([s for _, s in pattern])
    prop = freefermion.BdgPropagator(freefermion.build_bdg(spec, signs))
    g, f = prop.evolve_series(freefermion.init_covariance(signs), times)
    mz, zz, fq = freefermion.ff_observables((g, f))
    out = {}
    for name in config.observables:
        if name == "magnetization":
            out[name] = mz
        elif name == "hamming":
            out[name] = hamming_from_magnetization(mz, signs)
        elif name == "qfi":
            out[name] = fq
    return out


def run_realization(config: ExperimentConfig, couplings, index: int) -> tuple[int, dict]:
    """Raw observable series of realization ``index``; returns (seed, series)."""
    seed = realization_seed(config.master_seed, index)
    spec = model_for(config, couplings, seed)
    pattern = initial_pattern(config)
    times = config.time_grid.times
    with threadpool_limits(limits=1):
        if config.engine == "ed":
            series = _ed_realization(config, spec, pattern, times)
        else:
            series = _ff_realization(config, spec, pattern, times)
    return seed, series


def _worker(args):
    cfg_dict, couplings, index = args
    return run_realization(ExperimentConfig.from_dict(cfg_dict), couplings, index)


# ---------------------------------------------------------------------------
# Ensemble
# ---------------------------------------------------------------------------

def compensated_sum(stack: np.ndarray) -> np.ndarray:
    """Neumaier summation over axis 0 in index order."""
    total = np.zeros(stack.shape[1:], dtype=float)
    comp = np.zeros_like(total)
    for x in stack:
        t = total + x
        big = np.abs(total) >= np.abs(x)
        comp += np.where(big, (total - t) + x, (x - t) + total)
        total = t
    return total + comp


def mean_and_stderr(stack: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = stack.shape[0]
    mean = compensated_sum(stack) / r
    if r < 2:
        return mean, np.zeros_like(mean)
    var = compensated_sum((stack - mean) ** 2) / (r - 1)
    return mean, np.sqrt(var / r)


@dataclass(eq=False)
class EnsembleResult:
    config: dict
    seeds: list
    times: np.ndarray
    series: dict
    derived: dict
    realization_summaries: dict

    @property
    def content_hash(self) -> str:
        return hashlib.sha256(_canonical(self._body()).encode()).hexdigest()

    def _body(self) -> dict:
        return {
            "config": self.config,
            "config_hash": hashlib.sha256(_canonical(self.config).encode()).hexdigest(),
            "seeds": [int(s) for s in self.seeds],
            "times": self.times.tolist(),
            "series": {
                k: {"mean": s.values.tolist(), "stderr": s.stderr.tolist()}
                for k, s in self.series.items()
            },
            "derived": self.derived,
            "realization_summaries": {k: v.tolist() for k, v in self.realization_summaries.items()},
        }

    def to_document(self) -> dict:
        doc = self._body()
        doc["content_hash"] = self.content_hash
        return doc

    @classmethod
    def from_document(cls, doc: Mapping[str, Any]) -> "EnsembleResult":
        times = np.array(doc["times"], dtype=float)
        # keep the configured observable order; the JSON keys are sorted
        order = [k for k in doc["config"].get("observables", []) if k in doc["series"]]
        order += [k for k in doc["series"] if k not in order]
        series = {
            k: TimeSeries(times, np.array(doc["series"][k]["mean"]), k, np.array(doc["series"][k]["stderr"]))
            for k in order
        }
        res = cls(
            config=doc["config"],
            seeds=list(doc["seeds"]),
            times=times,
            series=series,
            derived=doc["derived"],
            realization_summaries={k: np.array(v) for k, v in doc["realization_summaries"].items()},
        )
        stored = doc.get("content_hash")
        if stored is not None and stored != res.content_hash:
            raise ConfigError("result document content hash does not match its contents")
        return res

    def to_json(self) -> str:
        return json.dumps(self.to_document(), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _summaries(raw: dict) -> dict:
    # time-mean of every component; a cheap per-realization fingerprint for replay
    return {k: np.asarray(v).reshape(len(v), -1).mean(axis=0) for k, v in raw.items()}


def _derived(config: ExperimentConfig, times, stacks: dict, series: dict) -> dict:
    out: dict = {"realizations": int(config.realizations)}
    lo, hi = config.steady_window
    hi = times[-1] if hi is None else hi
    window = (times >= lo) & (times <= hi)
    if window.any():
        if "hamming" in stacks:
            per = stacks["hamming"][:, window].mean(axis=1)
            m, e = mean_and_stderr(per[:, None])
            out["steady_hamming"] = float(m[0])
            out["steady_hamming_stderr"] = float(e[0])
        if "magnetization" in stacks and all(a == "z" for a, _ in initial_pattern(config)):
            signs = np.array([s for _, s in initial_pattern(config)])
            per = stacks["magnetization"][:, window, :].mean(axis=1) * signs
            m, e = mean_and_stderr(per)
            out["steady_signed_magnetization"] = m.tolist()
            out["steady_signed_magnetization_stderr"] = e.tolist()
        if "qfi" in stacks:
            per = stacks["qfi"][:, window].mean(axis=1)
            m, e = mean_and_stderr(per[:, None])
            out["steady_qfi"] = float(m[0])
            out["steady_qfi_stderr"] = float(e[0])
    if "qfi" in series and config.slope_window is not None:
        try:
            fit = log_time_slope(series["qfi"], config.slope_window)
        except ValueError as exc:
            log.warning("QFI log-slope not computed: %s", exc)
        else:
            out["qfi_log_slope"] = fit.slope
            out["qfi_log_slope_ci"] = [float(fit.ci_low), float(fit.ci_high)]
    return out


def run_ensemble(config: ExperimentConfig, workers: int | None = None) -> EnsembleResult:
    """Run ``config.realizations`` disorder realizations and average them.

    Deterministic in ``config.master_seed`` regardless of ``workers``.
    """
    workers = config.workers if workers is None else workers
    couplings = couplings_from_recipe(dict(config.couplings), config.n)
    if couplings.n != config.n:
        raise ConfigError(f"coupling recipe gives {couplings.n} sites, config says {config.n}")
    indices = range(config.realizations)
    if workers <= 1:
        outputs = [run_realization(config, couplings, i) for i in indices]
    else:
        cfg = config.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_worker, [(cfg, couplings, i) for i in indices],
                                    chunksize=max(1, config.realizations // (4 * workers))))
    times = config.time_grid.times
    seeds = [s for s, _ in outputs]
    stacks = {name: np.stack([o[name] for _, o in outputs]) for name in config.observables}
    series = {}
    for name, stack in stacks.items():
        m, e = mean_and_stderr(stack)
        series[name] = TimeSeries(times, m, name, e)
    summaries = {name: np.stack([_summaries(o)[name] for _, o in outputs]) for name in config.observables}
    return EnsembleResult(
        config=config.to_dict(),
        seeds=seeds,
        times=times,
        series=series,
        derived=_derived(config, times, stacks, series),
        realization_summaries=summaries,
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class SweepResult:
    axis: str
    values: list
    results: list

    def summary_rows(self) -> list[dict]:
        rows = []
        for v, r in zip(self.values, self.results):
            row = {self.axis: v}
            for k, x in r.derived.items():
                if isinstance(x, list):
                    if len(x) == 2 and k.endswith("_ci"):
                        row[k + "_low"], row[k + "_high"] = x
                    continue
                row[k] = x
            rows.append(row)
        return rows

    def summary_csv(self) -> str:
        rows = self.summary_rows()
        keys = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        lines = [",".join(keys)]
        for r in rows:
            lines.append(",".join(_fmt(r.get(k, "")) for k in keys))
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def sweep(config: ExperimentConfig, axis: str | None = None, values=None,
          workers: int | None = None) -> SweepResult:
    """One ensemble per axis value; axis is ``W``, ``alpha``, ``B`` or ``N``."""
    if axis is None or values is None:
        if not config.sweep:
            raise ConfigError("no sweep axis/values given and config has no 'sweep' section")
        axis = axis or config.sweep["axis"]
        values = values if values is not None else config.sweep["values"]
    if axis not in SWEEP_AXES and axis not in SWEEP_AXES.values():
        raise ConfigError(f"cannot sweep over {axis!r}; choose from {sorted(SWEEP_AXES)}")
    results = []
    for v in values:
        log.info("sweep %s = %s", axis, v)
        results.append(run_ensemble(config.with_axis_value(axis, v), workers=workers))
    return SweepResult(axis, list(values), results)


# ---------------------------------------------------------------------------
# Level statistics ensembles
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LevelStatsResult:
    config: dict
    mean_r: float
    mean_r_stderr: float
    realization_count: int
    skipped: int
    histogram: SpacingHistogram
    symmetry_warning: str | None

    def summary_csv(self) -> str:
        lines = ["mean_r,mean_r_stderr,realizations,skipped,chi2,chi2_dof,chi2_pvalue"]
        h = self.histogram
        lines.append(",".join([_fmt(self.mean_r), _fmt(self.mean_r_stderr), str(self.realization_count),
                               str(self.skipped), _fmt(h.chi2), str(h.dof), _fmt(h.pvalue)]))
        return "\n".join(lines) + "\n"


def level_statistics(config: ExperimentConfig, sectors: bool = False, unfold: str = "polynomial",
                     central_fraction: float = 0.8) -> LevelStatsResult:
    """Gap-ratio and spacing statistics over the disorder ensemble.

    With ``sectors=False`` (default) the full spectrum is used, as in the
    experiment analysis; ``sectors=True`` resolves the two parity blocks.
    """
    couplings = couplings_from_recipe(dict(config.couplings), config.n)
    spectra = []
    with threadpool_limits(limits=1):
        for i in range(config.realizations):
            seed = realization_seed(config.master_seed, i)
            ham = ed.Hamiltonian(model_for(config, couplings, seed), max_sites=config.max_sites)
            if sectors:
                spectra.extend(ed.eigenvalues(ham, by_sector=True))
            else:
                spectra.append(ed.eigenvalues(ham))
    ens = spacing_ensemble(spectra, unfold=unfold, central_fraction=central_fraction)
    warn = None
    if config.disorder_w == 0:
        warn = ("no disorder: the chain is reflection symmetric, so unresolved symmetry "
                "sectors contaminate the level statistics")
    return LevelStatsResult(config.to_dict(), ens.mean_r, ens.mean_r_stderr, ens.realization_count,
                            ens.skipped, spacing_histogram(ens), warn)


# ---------------------------------------------------------------------------
# Persistence and replay
# ---------------------------------------------------------------------------

def emit(result: EnsembleResult, outdir, formats=("csv", "json")) -> list[Path]:
    """Write ``result.json`` (structured), ``series.csv`` and ``config.json``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    (out / "config.json").write_text(json.dumps(result.config, indent=2, sort_keys=True) + "\n")
    written.append(out / "config.json")
    if "json" in formats:
        (out / "result.json").write_text(result.to_json())
        written.append(out / "result.json")
    if "csv" in formats:
        (out / "series.csv").write_text(series_to_csv(result.times, list(result.series.values())))
        written.append(out / "series.csv")
    return written


def load_result(path) -> EnsembleResult:
    p = Path(path)
    if p.is_dir():
        p = p / "result.json"
    return EnsembleResult.from_document(json.loads(p.read_text()))


@dataclass(eq=False)
class Replay:
    index: int
    seed: int
    series: dict
    max_deviation: float

    @property
    def matches(self) -> bool:
        return self.max_deviation <= 1e-12


def replay(result: EnsembleResult, index: int) -> Replay:
    """Regenerate one realization from its recorded seed."""
    cfg = ExperimentConfig.from_dict(result.config)
    if not 0 <= index < len(result.seeds):
        raise IndexError(f"realization {index} out of range (R={len(result.seeds)})")
    couplings = couplings_from_recipe(dict(cfg.couplings), cfg.n)
    seed, raw = run_realization(cfg, couplings, index)
    if seed != result.seeds[index]:
        raise ConfigError(f"seed derivation changed: {seed} != recorded {result.seeds[index]}")
    dev = 0.0
    fresh = _summaries(raw)
    for k, v in fresh.items():
        dev = max(dev, float(np.max(np.abs(v - result.realization_summaries[k][index]))))
    return Replay(index, seed, raw, dev)


def write_sweep(sw: SweepResult, outdir) -> list[Path]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for v, r in zip(sw.values, sw.results):
        paths += emit(r, out / f"{sw.axis}={v}")
    (out / "summary.csv").write_text(sw.summary_csv())
    paths.append(out / "summary.csv")
    return paths


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

_MAIN = {"n": 10, "couplings": {"kind": "power_law", "alpha": 1.13, "j_max": 1.0}, "field_b": 4.0}


def _kac(alpha):
    return {"kind": "kac", "alpha": alpha, "j": 1.0}


PRESETS: dict[str, dict] = {
    # thermalizing chain without disorder
    "thermal": {**_MAIN, "disorder_w": 0.0, "realizations": 1},
    # strongest disorder of the main text
    "localized": {**_MAIN, "disorder_w": 8.0},
    "disorder-sweep": {**_MAIN, "sweep": {"axis": "W", "values": [0.0, 1.0, 2.0, 4.0, 6.0, 8.0]}},
    "range-sweep": {**_MAIN, "disorder_w": 8.0,
                    "sweep": {"axis": "alpha", "values": [0.95, 1.13, 1.5, 1.81]}},
    "qfi-growth": {**_MAIN, "sweep": {"axis": "W", "values": [0.0, 6.0, 8.0]}},
    "kac3-interacting": {
        "n": 8, "couplings": _kac(3.0), "field_b": 0.0, "disorder_w": 3.0, "realizations": 400,
        "observables": ["qfi", "hamming"],
        "time_grid": {"t_min": 0.1, "t_max": 100.0, "points": 121, "spacing": "log"},
        "steady_window": [8.0, 27.0], "slope_window": [8.0, 27.0],
        "sweep": {"axis": "N", "values": [4, 6, 8, 10]},
    },
    "kac3-free-fermion": {
        "n": 100, "couplings": _kac(3.0), "field_b": 0.0, "disorder_w": 3.0, "realizations": 100,
        "engine": "free_fermion", "observables": ["qfi"],
        "time_grid": {"t_min": 0.1, "t_max": 100.0, "points": 61, "spacing": "log"},
        "steady_window": [10.0, None], "slope_window": [10.0, 100.0],
    },
    "kac113-crossover-reduced": {
        "n": 12, "couplings": _kac(1.13), "field_b": 0.0, "disorder_w": 3.0, "realizations": 200,
        "observables": ["qfi"],
        "time_grid": {"t_min": 0.1, "t_max": 1000.0, "points": 81, "spacing": "log"},
        "steady_window": [100.0, None], "slope_window": [2.0, 20.0],
    },
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    d = copy.deepcopy(PRESETS[name])
    d.update(overrides)
    return ExperimentConfig.from_dict(d)


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))
