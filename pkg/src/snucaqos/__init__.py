"""Discrete-time simulator of an S-NUCA many-core processor running
heartbeat-instrumented applications under a reactive QoS policy."""

from .engine import SimConfig, SimResult, run
from .policy import PolicyState, TargetRange
from .power import FrequencyTable, PowerParams, default_frequency_table, make_linear_table
from .topology import CoreId, Floorplan
from .workload import AppSpec

__version__ = "0.1.0"

__all__ = [
    "AppSpec",
    "CoreId",
    "Floorplan",
    "FrequencyTable",
    "PolicyState",
    "PowerParams",
    "SimConfig",
    "SimResult",
    "TargetRange",
    "default_frequency_table",
    "make_linear_table",
    "run",
    "__version__",
]
