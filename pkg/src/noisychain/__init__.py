"""Noisy spin-chain quench dynamics with tensor networks and error mitigation.

What lives where:

- `linalg`: dense tensor kernels (contraction, truncated SVD, expm).
- `model`: chain Hamiltonian, vectorized Lindblad generators, Trotter
  gate sequences, depolarizing-rate calibration.
- `mpdo`: the matrix-product density operator simulator.
- `exact`: dense brute-force references for small chains.
- `circuit`: gate-level Trotter circuits with per-gate depolarizing
  noise and unitary folding.
- `zne`: Richardson zero-noise extrapolation.
- `timeseries` / `analysis`: observable series, error surfaces, the
  peak-doubling diagnostic.
- `experiments` / `config` / `cli`: sweep orchestration, TOML parsing,
  command line.
- `validation`: fast cross-checks between independent code paths.
"""

__version__ = "0.1.0"

from .analysis import (
    DqptReport,
    ErrorSurface,
    dominant_period,
    dqpt_window_report,
    error_surface,
)
from .circuit import (
    Circuit,
    Gate,
    build_trotter_circuit,
    fold_global,
    fold_layers,
    layer_fold_count,
    loschmidt_from_circuit,
    simulate_noisy,
    to_netlist,
)
from .config import load_config
from .exact import (
    DenseLindbladEvolver,
    DenseState,
    dense_hamiltonian,
    dense_liouvillian,
    evolve_lindblad_dense,
    evolve_pure,
    observables_dense,
    product_state_vector,
)
from .experiments import (
    PRESETS,
    BackendConfig,
    ExperimentConfig,
    load_manifest,
    mitigated_series,
    run_point,
    run_sweep,
)
from .linalg import SvdConvergenceError, TruncationPolicy, contract, expm, kron, svd_truncate
from .model import (
    BondGate,
    HamiltonianParams,
    NoiseParams,
    bond_liouvillian,
    lindblad_to_depolarizing_p,
    middle_bond,
    trotter_sequence,
    two_site_hamiltonian,
)
from .mpdo import (
    MPDO,
    ProductState,
    all_down_state,
    load_checkpoint,
    plus_state,
    return_rate,
    save_checkpoint,
)
from .mps import (
    MPS,
    PureBondGate,
    return_rate_from_amplitude,
    unitary_trotter_sequence,
)
from .timeseries import TimeSeries, read_csv, read_json, write_csv, write_json
from .validation import run_validation
from .zne import (
    ZneSchedule,
    extrapolate,
    extrapolate_series,
    richardson_coefficients,
    scale_noise_lindblad,
    stretch_hamiltonian,
)

__all__ = [
    "BackendConfig",
    "BondGate",
    "Circuit",
    "DenseLindbladEvolver",
    "DenseState",
    "DqptReport",
    "ErrorSurface",
    "ExperimentConfig",
    "Gate",
    "HamiltonianParams",
    "MPDO",
    "MPS",
    "NoiseParams",
    "PRESETS",
    "ProductState",
    "PureBondGate",
    "SvdConvergenceError",
    "TimeSeries",
    "TruncationPolicy",
    "ZneSchedule",
    "all_down_state",
    "bond_liouvillian",
    "build_trotter_circuit",
    "contract",
    "dense_hamiltonian",
    "dense_liouvillian",
    "dominant_period",
    "dqpt_window_report",
    "error_surface",
    "evolve_lindblad_dense",
    "evolve_pure",
    "expm",
    "extrapolate",
    "extrapolate_series",
    "fold_global",
    "fold_layers",
    "kron",
    "layer_fold_count",
    "lindblad_to_depolarizing_p",
    "load_checkpoint",
    "load_config",
    "load_manifest",
    "loschmidt_from_circuit",
    "middle_bond",
    "mitigated_series",
    "observables_dense",
    "plus_state",
    "product_state_vector",
    "read_csv",
    "read_json",
    "return_rate",
    "return_rate_from_amplitude",
    "richardson_coefficients",
    "run_point",
    "run_sweep",
    "run_validation",
    "save_checkpoint",
    "scale_noise_lindblad",
    "simulate_noisy",
    "stretch_hamiltonian",
    "svd_truncate",
    "to_netlist",
    "trotter_sequence",
    "unitary_trotter_sequence",
    "two_site_hamiltonian",
    "write_csv",
    "write_json",
]
