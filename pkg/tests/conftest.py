from __future__ import annotations

from importlib import resources

import pytest

from marchsim.bist_sim import BistConfig, default_scenario, parse_scenario, run
from marchsim.property_engine import builtin_suite, evaluate, merge_stats


def directed_scenarios() -> list[tuple[str, str]]:
    root = resources.files("marchsim") / "scenarios" / "directed"
    return sorted((p.name, p.read_text()) for p in root.iterdir() if p.name.endswith(".scn"))


@pytest.fixture(scope="session")
def clean_trace_c8():
    trace, verdict = run(BistConfig(c_size=8, word_width=32), [], default_scenario())
    assert verdict.completed == 1
    return trace


@pytest.fixture(scope="session")
def clean_trace_c3():
    trace, verdict = run(BistConfig(c_size=3, word_width=4), [], default_scenario())
    assert verdict.completed == 1
    return trace


@pytest.fixture(scope="session")
def directed_results():
    """Traces plus merged directive stats over the bundled directed set."""
    config = BistConfig(c_size=8, word_width=32)
    suite = builtin_suite()
    traces = []
    parts = []
    for _, text in directed_scenarios():
        scenario, faults = parse_scenario(text)
        trace, _ = run(config, faults, scenario)
        stats, _ = evaluate(trace, suite)
        traces.append(trace)
        parts.append(stats)
    return traces, merge_stats(parts)
