"""Benchmark the compiled edge-loop kernel against the pure-Python loop.

Run as `python -m marchsim.bench`.  Workloads are the fault-free full
march and a mixed-fault march at c_size 8, plus directive-suite
evaluation throughput for context.
"""

from __future__ import annotations

import time

from . import HAS_COMPILED_KERNELS
from .bist_sim import BistConfig, default_scenario, run
from .fault_memory import (
    BitAddress,
    Coupling,
    DecayMode,
    Inversion,
    Edge,
    MapsTo,
    Retention,
    StuckAt,
)
from .property_engine import builtin_suite, evaluate


def _time(fn, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    config = BistConfig(c_size=8, word_width=32)
    scenario = default_scenario()
    fault_mix = [
        StuckAt(BitAddress(3, 0), 0),
        Coupling(Inversion(Edge.RISING), BitAddress(0, 0), BitAddress(5, 3)),
        Retention(BitAddress(7, 7), 300, DecayMode.COMPLEMENT),
        MapsTo(9, 17),
    ]
    workloads = [
        ("clean march, c_size 8", []),
        ("4-fault march, c_size 8", fault_mix),
    ]

    print(f"compiled kernel available: {HAS_COMPILED_KERNELS}")
    print(f"{'workload':<26} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for name, faults in workloads:
        trace, _ = run(config, faults, scenario, use_kernel=False)
        edges = len(trace)
        t_py = _time(lambda: run(config, faults, scenario, use_kernel=False))
        if HAS_COMPILED_KERNELS:
            t_k = _time(lambda: run(config, faults, scenario, use_kernel=True))
            print(
                f"{name:<26} {edges / t_py:>9.0f}/s {edges / t_k:>9.0f}/s {t_py / t_k:>8.1f}x"
            )
        else:
            print(f"{name:<26} {edges / t_py:>9.0f}/s {'n/a':>12} {'n/a':>9}")

    trace, _ = run(config, [], scenario)
    suite = builtin_suite()
    t_eval = _time(lambda: evaluate(trace, suite), repeat=3)
    rate = len(trace) * len(suite) / t_eval
    print(f"{'106-directive evaluate':<26} {rate:>9.0f} attempt-cycles/s (vectorized)")


if __name__ == "__main__":
    main()
