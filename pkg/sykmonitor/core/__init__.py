"""
Core numerical library for sykmonitor
"""

from .analysis import (
    EnsembleSeries,
    FitResult,
    ensemble_average,
    gamma_egr,
    linear_trend,
    steady_state_value,
    tanh_fit,
)
from .decoupling import (
    DecouplingSetup,
    decoupling_error,
    haar_unitary,
    multi_round_error,
    prepare_purification,
    scaling_scan,
)
from .errors import SykMonitorError
from .observables import EntropyValue, entanglement_entropy, partial_trace, purity
from .pauli_algebra import PauliString, jw_majorana, multiply, to_matrix
from .states import Basis, QuantumState, StateKind
from .syk_model import (
    CouplingTensor,
    SpectralHamiltonian,
    build_hamiltonian,
    propagator,
    sample_couplings,
)
from .trajectory import (
    InitialState,
    MeasurementEvent,
    Observable,
    TrajectoryConfig,
    TrajectoryRecord,
    project,
    run_trajectory,
    sample_measured_sites,
    schedule_step,
)

__all__ = [
    # Pauli algebra
    'PauliString', 'jw_majorana', 'multiply', 'to_matrix',

    # SYK model
    'CouplingTensor', 'SpectralHamiltonian', 'sample_couplings',
    'build_hamiltonian', 'propagator',

    # States and trajectories
    'Basis', 'StateKind', 'QuantumState', 'InitialState', 'Observable',
    'MeasurementEvent', 'TrajectoryConfig', 'TrajectoryRecord',
    'schedule_step', 'sample_measured_sites', 'project', 'run_trajectory',

    # Observables
    'EntropyValue', 'partial_trace', 'entanglement_entropy', 'purity',

    # Analysis
    'EnsembleSeries', 'FitResult', 'ensemble_average', 'gamma_egr',
    'tanh_fit', 'steady_state_value', 'linear_trend',

    # Decoupling
    'DecouplingSetup', 'prepare_purification', 'haar_unitary',
    'decoupling_error', 'scaling_scan', 'multi_round_error',

    'SykMonitorError',
]
