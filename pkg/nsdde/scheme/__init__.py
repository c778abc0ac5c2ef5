from nsdde.scheme.grid import TimeGrid
from nsdde.scheme.state import DelayState, PathRecord, moment_at_T
from nsdde.scheme.truncated_em import simulate, simulate_untruncated, step

__all__ = [
    "DelayState",
    "PathRecord",
    "TimeGrid",
    "moment_at_T",
    "simulate",
    "simulate_untruncated",
    "step",
]
