"""Many-body localization in long-range transverse-field Ising chains.

Exact diagonalisation of small disordered spin chains with power-law
couplings, the diagnostics used to tell thermal from localized dynamics,
a free-fermion control model and a reproducible ensemble harness.
"""
from .errors import CapacityError, ConfigError, ConvergenceError, MBLError, ResonanceError, ZigZagInstabilityError
from .kernels import BACKEND
from .lattice import (
    CouplingMatrix,
    DisorderRealization,
    ModelSpec,
    NormalModes,
    TrapSpec,
    clean_model,
    coupling_from_modes,
    equilibrium_positions,
    fit_alpha,
    kac_normalization,
    kac_normalized_couplings,
    power_law_couplings,
    realization_seed,
    sample_disorder,
    transverse_modes,
)
from .ed import (
    Hamiltonian,
    SpectralDecomposition,
    StateVector,
    build_hamiltonian,
    evolve,
    evolve_series,
    expectation_pauli,
    full_spectrum,
    neel_state,
    product_state,
    reduced_density_matrix,
    zz_correlator,
)
from .observables import (
    InitialPattern,
    LogSlope,
    TimeSeries,
    hamming_distance,
    log_time_slope,
    qfi_staggered,
    time_average,
)
from .spectral import (
    POISSON_MEAN_R,
    eth_beta,
    eth_rdm,
    r_statistic,
    spacing_ensemble,
    spacing_histogram,
)
from .freefermion import BdgPropagator, build_bdg, ff_observables, init_covariance
from .harness import (
    EnsembleResult,
    ExperimentConfig,
    TimeGrid,
    emit,
    level_statistics,
    load_result,
    preset,
    replay,
    run_ensemble,
    sweep,
)

__version__ = "0.1.0"
