"""Annealing-schedule search for 3-SAT problem Hamiltonians.

Subpackages by concern:

- sat_core: instances, violation-count Hamiltonians, brute-force oracle
- schedule: discrete sine-series schedules s(t)
- dynamics: split-step state-vector evolution and spectral scans
- digitizer: fixed-depth gate decomposition and pulse-sequence export
- mcts: tree search over schedule coefficients
- nets, qzero: network-guided tree search with self-play training
- sd_baseline: stochastic-descent baseline at matched query budgets
- bench, cli: experiment harness and command-line entry points
"""

__version__ = "0.1.0"

from .sat_core import SatInstance, encode_hamiltonian, generate_unique_instance
from .schedule import Schedule, ScheduleGrid, linear_schedule

__all__ = [
    "SatInstance",
    "Schedule",
    "ScheduleGrid",
    "encode_hamiltonian",
    "generate_unique_instance",
    "linear_schedule",
    "__version__",
]
