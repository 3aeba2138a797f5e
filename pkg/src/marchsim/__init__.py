"""Memory-BIST verification workbench.

Simulates a March-algorithm MBIST controller against a fault-injectable
SRAM model, checks temporal assertion suites over the recorded traces and
collects FSM/toggle/assertion coverage.
"""

from .bist_sim import BistConfig, Scenario, SignalTrace, TestVerdict, run
from .controller import ControllerInputs, ControllerRegs, ControllerState, reset, step
from .march_core import MarchAlgorithm, builtin, builtin_names, expand, format_march, op_count, parse_march
from .property_engine import Directive, builtin_suite, evaluate, parse_property

__version__ = "0.1.0"

from .bist_sim import _kernels as _loaded_kernels

HAS_COMPILED_KERNELS = _loaded_kernels is not None
del _loaded_kernels

__all__ = [
    "BistConfig",
    "ControllerInputs",
    "ControllerRegs",
    "ControllerState",
    "Directive",
    "HAS_COMPILED_KERNELS",
    "MarchAlgorithm",
    "Scenario",
    "SignalTrace",
    "TestVerdict",
    "builtin",
    "builtin_names",
    "builtin_suite",
    "evaluate",
    "expand",
    "format_march",
    "op_count",
    "parse_march",
    "parse_property",
    "reset",
    "run",
    "step",
]
