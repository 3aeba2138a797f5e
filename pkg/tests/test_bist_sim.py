import io

import numpy as np
import pytest

from marchsim.bist_sim import (
    BistConfig,
    SIGNAL_ORDER,
    SignalTrace,
    default_scenario,
    parse_scenario,
    read_pass_flags,
    run,
    scenario_from_events,
)
from marchsim.controller import ControllerState, MARCH_STATES
from marchsim.fault_memory import BitAddress, StuckAt
from marchsim.vcd import export_vcd, read_vcd, trace_from_vcd

S = ControllerState


def state_spans(trace):
    """[(state, first_cycle, length)] runs over the trace."""
    states = trace.signal("state")
    spans = []
    start = 0
    for i in range(1, len(states) + 1):
        if i == len(states) or states[i] != states[start]:
            spans.append((S(int(states[start])), start, i - start))
            start = i
    return spans


def test_scenario_validation():
    with pytest.raises(ValueError):
        scenario_from_events([(0, "bogus", 1)])
    with pytest.raises(ValueError):
        scenario_from_events([(0, "t_mode", 2)])
    with pytest.raises(ValueError):
        scenario_from_events([(3, "t_mode", 1), (3, "t_mode", 0)])
    with pytest.raises(ValueError):
        run(BistConfig(c_size=2), [], scenario_from_events([]))


def test_scenario_parsing():
    scn, faults = parse_scenario(
        """
        # leading comment
        fault saf 3 0 0
        @2 t_mode=1
        @10 rst = 1   # inline comment
        limit 500
        """
    )
    assert scn.events == ((2, "t_mode", 1), (10, "rst", 1))
    assert scn.limit == 500
    assert len(faults) == 1


def test_scenario_fault_after_event_rejected():
    with pytest.raises(ValueError):
        parse_scenario("@2 t_mode=1\nfault saf 0 0 0\n")


def test_scenario_bad_line_reports_number():
    with pytest.raises(ValueError) as err:
        parse_scenario("@2 t_mode=1\nnonsense here\n")
    assert "line 2" in str(err.value)


@pytest.mark.parametrize("c_size", [2, 3, 4, 5, 6, 7, 8])
def test_clean_run_completes_all_sizes(c_size):
    config = BistConfig(c_size=c_size, word_width=4)
    trace, verdict = run(config, [], default_scenario())
    assert verdict.completed == 1 and verdict.any_fail == 0
    spans = state_spans(trace)
    # idle preamble, 11 march/pause passes, done tail
    march = [sp for sp in spans if sp[0] in MARCH_STATES]
    assert [s for s, _, _ in march] == list(MARCH_STATES)
    assert all(length == config.words for _, _, length in march)
    done_entry = next(start for s, start, _ in spans if s is S.S_DONE)
    assert done_entry - 2 == 11 * config.words


def test_pause_exactly_word_count_edges():
    trace, _ = run(BistConfig(c_size=8), [], default_scenario())
    spans = state_spans(trace)
    pause = next(sp for sp in spans if sp[0] is S.PAUSE)
    rdn0 = next(sp for sp in spans if sp[0] is S.RDN0)
    assert pause[2] == 256
    assert rdn0[1] == pause[1] + 256


def test_en_window():
    trace, _ = run(BistConfig(c_size=3, word_width=4), [], default_scenario())
    states = trace.signal("state")
    en = trace.signal("en")
    in_march = np.isin(states, [int(s) for s in MARCH_STATES])
    assert np.array_equal(en == 1, in_march)


def test_fail_rises_one_edge_after_mismatch():
    trace, verdict = run(
        BistConfig(c_size=8), [StuckAt(BitAddress(3, 0), 0)], default_scenario()
    )
    match = trace.signal("match")
    fail = trace.signal("fail")
    ppass = trace.signal("pass")
    first_miss = int(np.flatnonzero(match == 0)[0])
    first_fail = int(np.flatnonzero(fail == 1)[0])
    assert first_fail == first_miss + 1
    assert ppass[first_miss] == 1 and ppass[first_fail] == 0
    assert verdict.any_fail == 1
    assert verdict.first_fail_cycle == first_fail
    assert verdict.first_fail_state is S.RDN1
    assert verdict.first_fail_addr == 3


def test_read_pass_flags_clean_and_saf():
    config = BistConfig(c_size=3, word_width=4)
    trace, _ = run(config, [], default_scenario())
    assert read_pass_flags(trace) == (0, 0, 0, 0, 0)
    trace, _ = run(config, [StuckAt(BitAddress(2, 1), 0)], default_scenario())
    assert read_pass_flags(trace) == (0, 1, 0, 1, 0)
    trace, _ = run(config, [StuckAt(BitAddress(2, 1), 1)], default_scenario())
    assert read_pass_flags(trace) == (1, 0, 1, 0, 1)


def test_no_memory_access_during_pause():
    config = BistConfig(c_size=3, word_width=4)
    trace, _ = run(config, [], default_scenario())
    states = trace.signal("state")
    rw = trace.signal("rw")
    match = trace.signal("match")
    in_pause = states == int(S.PAUSE)
    assert np.all(match[in_pause] == 1)
    assert len(np.unique(rw[in_pause])) == 1  # rw stable through the pause


def test_reset_pulse_returns_to_idle():
    scn = scenario_from_events([(2, "t_mode", 1), (300, "rst", 1), (303, "rst", 0)])
    trace, verdict = run(BistConfig(c_size=8), [], scn)
    states = trace.signal("state")
    assert states[299] == int(S.RUP0)
    assert states[300] == int(S.S_IDLE)
    assert verdict.completed == 1  # restarts and finishes


def test_determinism_byte_identical():
    config = BistConfig(c_size=4, word_width=8)
    faults = [StuckAt(BitAddress(3, 2), 1)]
    a, _ = run(config, faults, default_scenario())
    b, _ = run(config, faults, default_scenario())
    assert a.to_csv() == b.to_csv()
    va, vb = io.StringIO(), io.StringIO()
    export_vcd(a, va)
    export_vcd(b, vb)
    assert va.getvalue() == vb.getvalue()


def test_trace_sample_access():
    trace, _ = run(BistConfig(c_size=2, word_width=2), [], default_scenario())
    s0 = trace[0]
    assert s0.cycle == 0
    assert s0.state == int(S.S_IDLE)
    assert s0.values["pass"] == 1
    assert len(list(trace)) == len(trace)


def test_csv_roundtrip():
    config = BistConfig(c_size=3, word_width=4)
    trace, _ = run(config, [], default_scenario())
    again = SignalTrace.from_csv(trace.to_csv(), config)
    for name in SIGNAL_ORDER:
        assert np.array_equal(trace.signals[name], again.signals[name]), name


def test_vcd_roundtrip():
    config = BistConfig(c_size=3, word_width=4)
    trace, _ = run(config, [StuckAt(BitAddress(1, 0), 1)], default_scenario())
    buf = io.StringIO()
    export_vcd(trace, buf)
    buf.seek(0)
    again = trace_from_vcd(buf)
    assert again.config == config
    for name in SIGNAL_ORDER:
        assert np.array_equal(trace.signals[name], again.signals[name]), name


def test_vcd_change_only_encoding():
    # Two-cycle trace with exactly one toggling bit: one value-change line
    # between the time markers.
    config = BistConfig(c_size=2, word_width=1)
    base = {name: np.zeros(2, dtype=np.int64) for name in SIGNAL_ORDER}
    base["c_max"][:] = 3
    base["pass"][:] = 1
    base["t_mode"][1] = 1  # the single change
    trace = SignalTrace(config, base)
    buf = io.StringIO()
    export_vcd(trace, buf)
    text = buf.getvalue()
    tail = text.split("$end\n")[-1]  # after the dumpvars block
    changes = [
        ln for ln in tail.splitlines() if ln and not ln.startswith("#")
    ]
    assert len(changes) == 1


def test_vcd_empty_trace_rejected():
    config = BistConfig(c_size=2, word_width=1)
    empty = SignalTrace(config, {n: np.zeros(0, dtype=np.int64) for n in SIGNAL_ORDER})
    with pytest.raises(ValueError):
        export_vcd(empty, io.StringIO())


def test_fault_out_of_bounds_rejected():
    with pytest.raises(ValueError):
        run(BistConfig(c_size=2, word_width=2), [StuckAt(BitAddress(64, 0), 0)], default_scenario())


def test_scenario_limit_caps_run():
    scn = scenario_from_events([(2, "t_mode", 1)], limit=100)
    trace, verdict = run(BistConfig(c_size=8), [], scn)
    assert len(trace) == 100
    assert verdict.completed == 0


def test_post_done_events_keep_run_alive():
    scn = scenario_from_events(
        [(2, "t_mode", 1), (2822, "t_mode", 0), (2830, "t_mode", 1)]
    )
    trace, verdict = run(BistConfig(c_size=8), [], scn)
    states = trace.signal("state")
    assert verdict.completed == 1
    # second march runs to done again after the restart
    done_cycles = np.flatnonzero(states == int(S.S_DONE))
    assert done_cycles[0] == 2818
    assert done_cycles[-1] >= 2830 + 11 * 256
