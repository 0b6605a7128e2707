"""
Command-line sweep layer for sykmonitor
"""

from .config import SweepConfig, SweepGrid, parse_axis
from .runner import calibrate, run_mode
from .store import CellResult, ResultStore

__all__ = [
    # Configuration
    'SweepConfig',
    'SweepGrid',
    'parse_axis',

    # Execution and results
    'run_mode',
    'calibrate',
    'ResultStore',
    'CellResult'
]
