"""
sykmonitor - Monitored Sachdev-Ye-Kitaev quantum trajectories
"""

__version__ = "1.0.0"
__description__ = "Entanglement and purification transitions in the monitored SYK model"

# Make key components easily accessible
from .core.syk_model import build_hamiltonian, sample_couplings
from .core.trajectory import TrajectoryConfig, run_trajectory

__all__ = ['sample_couplings', 'build_hamiltonian', 'TrajectoryConfig', 'run_trajectory']
