import numpy as np
import pytest

from marchsim.bist_sim import BistConfig, SIGNAL_ORDER, SignalTrace, default_scenario, run, scenario_from_events
from marchsim.controller import ControllerState
from marchsim.coverage import (
    CoverageReport,
    ModelConformanceError,
    assertion_coverage,
    collect,
    fsm_coverage,
    parse_report_json,
    render,
    toggle_coverage,
)
from marchsim.property_engine import DirectiveStats

S = ControllerState


def clean_run_with_drop():
    scn = scenario_from_events([(2, "t_mode", 1), (2822, "t_mode", 0)])
    trace, _ = run(BistConfig(c_size=8), [], scn)
    return trace


def test_single_clean_run_fsm(clean_trace_c8):
    # t_mode held forever: forward arcs only
    sc, tc, _ = fsm_coverage([clean_trace_c8])
    assert sc == 13
    assert tc == 12


def test_clean_run_with_drop_hits_13_arcs():
    sc, tc, rep = fsm_coverage([clean_run_with_drop()])
    assert sc == 13
    assert tc == 13  # 12 forward + done->idle via the t_mode drop
    assert (S.S_DONE, S.S_IDLE) in rep.covered_transitions


def test_directed_set_full_fsm(directed_results):
    traces, _ = directed_results
    sc, tc, _ = fsm_coverage(traces)
    assert sc == 13 and tc == 24


def test_empty_trace_list():
    sc, tc, rep = fsm_coverage([])
    assert (sc, tc) == (0, 0)
    assert rep.states_total == 13 and rep.transitions_total == 24


def test_illegal_arc_raises():
    config = BistConfig(c_size=2, word_width=2)
    cols = {name: np.zeros(3, dtype=np.int64) for name in SIGNAL_ORDER}
    cols["state"] = np.array([int(S.RUP0), int(S.RDN1), int(S.RDN1)], dtype=np.int64)
    trace = SignalTrace(config, cols)
    with pytest.raises(ModelConformanceError):
        fsm_coverage([trace])


def test_toggle_alternating_bit_covered():
    config = BistConfig(c_size=2, word_width=2)
    cols = {name: np.zeros(6, dtype=np.int64) for name in SIGNAL_ORDER}
    cols["t_mode"] = np.array([0, 1, 0, 1, 0, 1], dtype=np.int64)
    trace = SignalTrace(config, cols)
    toggles = toggle_coverage([trace])
    assert toggles["t_mode"].covered
    assert toggles["rst"].is_constant and not toggles["rst"].covered


def test_toggle_constants_flagged(directed_results):
    traces, _ = directed_results
    toggles = toggle_coverage(traces)
    assert toggles["c_min"].is_constant
    assert toggles["c_max"].is_constant
    assert not toggles["c_min"].covered
    assert toggles["state"].covered
    assert toggles["count"].covered
    assert toggles["fail"].covered  # fault scenarios raise and clear it


def test_toggle_done_rose_but_never_fell(clean_trace_c8):
    # t_mode held: done rises at completion and the trace ends before any
    # reset could clear it.
    toggles = toggle_coverage([clean_trace_c8])
    done = toggles["done"].bits[0]
    assert done.rose and not done.fell


def test_assertion_coverage_fractions():
    def stat(kind, name, succ):
        s = DirectiveStats(name=name, kind=kind, severity="error", attempts=10)
        s.real_successes = succ
        return s

    stats = {f"A{i}": stat("assert", f"A{i}", 1 if i < 37 else 0) for i in range(53)}
    afrac, cfrac = assertion_coverage(stats)
    assert afrac == pytest.approx(37 / 53)
    assert cfrac is None
    assert f"{100 * afrac:.1f}" == "69.8"


def test_assertion_coverage_empty_excluded():
    report = collect([], stats=None)
    assert report.assert_percent() is None
    assert report.toggle_percent() is None
    # only the FSM category has data, so the composite is FSM alone
    assert report.score() == report.fsm_percent()


def test_score_mean_of_categories():
    report = CoverageReport()
    report.states_covered, report.transitions_covered = 13, 24
    report.assert_total, report.assert_covered = 10, 10
    # synthetic toggle block: half the bits covered
    from marchsim.coverage import ToggleBit, ToggleSignal

    report.toggle = {
        "a": ToggleSignal(name="a", width=2, bits=[ToggleBit(True, True), ToggleBit(False, False)], ever_changed=True)
    }
    assert report.fsm_percent() == 100.0
    assert report.toggle_percent() == 50.0
    assert report.assert_percent() == 100.0
    assert report.score() == pytest.approx((100 + 50 + 100) / 3)


def test_merge_monotonicity(directed_results):
    traces, _ = directed_results
    half = collect(traces[:5])
    full = collect(traces)
    assert full.states_covered >= half.states_covered
    assert full.transitions_covered >= half.transitions_covered
    assert full.toggle_percent() >= half.toggle_percent()


def test_render_text(directed_results):
    traces, merged = directed_results
    report = collect(traces, merged)
    text = render(report, fmt="text")
    assert "SCORE" in text and "TOGGLE" in text and "FSM" in text and "ASSERT" in text
    assert "[constant]" in text
    assert "13/13" in text.replace(" ", "")


def test_render_json_roundtrip(directed_results):
    traces, merged = directed_results
    report = collect(traces, merged)
    js = render(report, fmt="json")
    again = parse_report_json(js)
    assert render(again, fmt="json") == js
