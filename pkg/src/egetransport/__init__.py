"""Transport simulator for disordered interacting many-body networks.

Builds random Hamiltonians of n fermions in l levels with Gaussian rank-k
couplings, optionally constrained to commute with the level-reversal
exchange matrix, and measures transport efficiency between the extremal
occupation states via Green's functions: transmission curves, integrated
currents, probe dephasing, and ensemble sweeps over mixing, coupling and
decoherence parameters.
"""

from .dephasing import (DephasingError, DephasingSpec, dephased_current,
                        effective_transmission, effective_transmission_curve)
from .ensembles import (ManyBodyMatrix, export_matrix, k_body_hamiltonian,
                        mix, sample_coupling, sample_cs_breaker, sample_csege,
                        sample_ege, sample_parity_breaker)
from .fock import (Basis, BasisSpec, apply_k_body, enumerate_basis,
                   exchange_matrix, k_configurations, level_reverse,
                   parity_rotation)
from .negf import (CurrentResult, Terminal, TransportError, contact_pair,
                   green, total_current, transmission, transmission_curve)
from .quadrature import QuadratureError, QuadratureResult, QuadratureSpec, integrate_adaptive
from .sweep import (ExperimentSpec, FailureBudgetExceeded, SweepResult,
                    run_cs_break, run_dephasing_sweep, run_eta_sweep,
                    run_experiment, run_mix_experiment, run_parity_break,
                    write_csv, write_sidecar)
from .config import ConfigError, load_config, parse_config, serialize_config
from .version import VERSION

__version__ = VERSION

__all__ = [
    "Basis", "BasisSpec", "apply_k_body", "enumerate_basis", "exchange_matrix",
    "k_configurations", "level_reverse", "parity_rotation",
    "ManyBodyMatrix", "export_matrix", "k_body_hamiltonian", "mix",
    "sample_coupling", "sample_cs_breaker", "sample_csege", "sample_ege",
    "sample_parity_breaker",
    "CurrentResult", "Terminal", "TransportError", "contact_pair", "green",
    "total_current", "transmission", "transmission_curve",
    "QuadratureError", "QuadratureResult", "QuadratureSpec", "integrate_adaptive",
    "DephasingError", "DephasingSpec", "dephased_current",
    "effective_transmission", "effective_transmission_curve",
    "ExperimentSpec", "FailureBudgetExceeded", "SweepResult",
    "run_cs_break", "run_dephasing_sweep", "run_eta_sweep", "run_experiment",
    "run_mix_experiment", "run_parity_break", "write_csv", "write_sidecar",
    "ConfigError", "load_config", "parse_config", "serialize_config",
    "__version__",
]
