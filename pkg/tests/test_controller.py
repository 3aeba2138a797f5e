import itertools

import pytest

from marchsim.controller import (
    ControllerInputs,
    ControllerRegs,
    ControllerState,
    MARCH_STATES,
    READ_STATES,
    STATE_BY_NAME,
    reset,
    step,
    transition_universe,
)

S = ControllerState
GO = ControllerInputs(t_mode=1, rst=0, match=1)
IDLE = ControllerInputs(t_mode=0, rst=0, match=1)
RST = ControllerInputs(t_mode=1, rst=1, match=1)


def test_reset_values():
    r = reset()
    assert r.state is S.S_IDLE
    assert (r.en, r.done, r.fail, r.pass_) == (0, 0, 0, 1)
    assert (r.count, r.g_patt, r.rw) == (0, 1, 1)
    assert reset() == reset()


def test_idle_holds_without_t_mode():
    r = reset()
    assert step(r, IDLE) == r


def test_test_start():
    r = step(reset(), GO)
    assert r.state is S.WDN0
    assert (r.en, r.count, r.rw, r.g_patt) == (1, 255, 0, 0)


def test_reset_dominates_everywhere():
    r = reset()
    seen = {r.state}
    assert step(r, RST) == reset()
    for _ in range(4000):
        r = step(r, GO)
        if r.state not in seen:
            seen.add(r.state)
            assert step(r, RST) == reset()
    assert len(seen) == 13


def test_step_is_pure():
    r = step(reset(), GO)
    a = step(r, GO)
    b = step(r, GO)
    assert a == b == step(r, GO)


# Independent golden model: pass schedule derived from the per-state
# behaviour table, not from the step function.  Each march state runs for
# exactly 2**c_size edges; the tuple is (rw, g_patt, direction) where
# direction +1 counts c_min..c_max and -1 counts c_max..c_min.
PASS_TABLE = [
    (S.WDN0, 0, 0, -1),
    (S.RUP0, 1, 0, +1),
    (S.WUP1, 0, 1, +1),
    (S.RDN1, 1, 1, -1),
    (S.WDNA0, 0, 0, -1),
    (S.PAUSE, 0, 0, +1),
    (S.RDN0, 1, 0, -1),
    (S.WDN1, 0, 1, -1),
    (S.RUP1, 1, 1, +1),
    (S.WUP0, 0, 0, +1),
    (S.RDNA0, 1, 0, -1),
]


def golden_clean_run(c_size):
    """Expected (state, count, rw, g_patt, en, done) per edge after start."""
    top = (1 << c_size) - 1
    out = []
    for state, rw, g_patt, direction in PASS_TABLE:
        counts = range(top, -1, -1) if direction < 0 else range(top + 1)
        for count in counts:
            out.append((state, count, rw, g_patt, 1, 0))
    out.append((S.S_DONE, top, 1, 0, 0, 1))
    return out


@pytest.mark.parametrize("c_size", [2, 3, 4, 8])
def test_clean_run_matches_golden_model(c_size):
    regs = reset(c_size)
    golden = golden_clean_run(c_size)
    regs = step(regs, GO)
    for i, (state, count, rw, g_patt, en, done) in enumerate(golden):
        assert regs.state is state, (i, regs)
        assert regs.count == count, (i, regs)
        assert (regs.rw, regs.g_patt, regs.en, regs.done) == (rw, g_patt, en, done), (i, regs)
        regs = step(regs, GO)
    # parked in done while t_mode stays high
    assert regs.state is S.S_DONE
    assert step(regs, GO).state is S.S_DONE


def test_march_state_durations():
    regs = step(reset(3), GO)
    durations = []
    current, length = regs.state, 0
    for _ in range(8 * 11 + 1):
        if regs.state is current:
            length += 1
        else:
            durations.append((current, length))
            current, length = regs.state, 1
        regs = step(regs, GO)
    assert durations == [(s, 8) for s, _, _, _ in PASS_TABLE]


def test_counter_wraps_into_done():
    # The final read pass decrements through c_min; the wrap parks the
    # counter at c_max when done is entered.
    regs = step(reset(2), GO)
    while regs.state is not S.S_DONE:
        regs = step(regs, GO)
    assert regs.count == regs.c_max


def test_match_sampled_only_in_read_states():
    miss = ControllerInputs(t_mode=1, rst=0, match=0)
    regs = step(reset(2), GO)  # wdn0
    assert regs.state is S.WDN0
    r2 = step(regs, miss)
    assert (r2.fail, r2.pass_) == (0, 1)  # write pass ignores match
    while regs.state is not S.RUP0:
        regs = step(regs, GO)
    r3 = step(regs, miss)
    assert (r3.fail, r3.pass_) == (1, 0)
    r4 = step(r3, GO)
    assert (r4.fail, r4.pass_) == (0, 1)  # match restores pass


def test_rw_one_exactly_in_read_states():
    regs = step(reset(3), GO)
    for _ in range(8 * 11 + 2):
        if regs.state in READ_STATES:
            assert regs.rw == 1
        elif regs.state in set(MARCH_STATES) - READ_STATES - {S.PAUSE}:
            assert regs.rw == 0
        regs = step(regs, GO)


def test_pause_holds_rw():
    regs = step(reset(3), GO)
    prev = None
    while regs.state is not S.PAUSE:
        prev = regs
        regs = step(regs, GO)
    assert regs.rw == prev.rw  # inherited from the write pass before


def test_done_to_idle_keeps_done_until_reset():
    regs = step(reset(2), GO)
    while regs.state is not S.S_DONE:
        regs = step(regs, GO)
    parked = step(regs, IDLE)
    assert parked.state is S.S_IDLE
    assert parked.done == 1  # only reset clears the done flag
    assert step(parked, RST).done == 0


def test_done_implies_en_zero():
    regs = step(reset(2), GO)
    while regs.state is not S.S_DONE:
        regs = step(regs, GO)
    assert regs.en == 0


def test_transition_universe_size_and_members():
    arcs = transition_universe()
    assert len(arcs) == 24
    assert (S.PAUSE, S.RDN0) in arcs
    assert (S.WDNA0, S.PAUSE) in arcs
    assert (S.RUP0, S.RDN1) not in arcs
    assert (S.S_DONE, S.S_IDLE) in arcs
    assert all(b is S.S_IDLE or True for _, b in arcs)
    # every non-idle state has a reset arc
    for s in ControllerState:
        if s is not S.S_IDLE:
            assert (s, S.S_IDLE) in arcs


def test_reachable_transitions_stay_in_universe():
    universe = transition_universe()
    regs = reset(2)
    rng_inputs = itertools.cycle(
        [GO, GO, GO, GO, GO, GO, GO, RST, GO, GO, IDLE, GO]
    )
    prev = regs.state
    for inputs in itertools.islice(rng_inputs, 3000):
        regs = step(regs, inputs)
        if regs.state is not prev:
            assert (prev, regs.state) in universe
        prev = regs.state


def test_state_names_roundtrip():
    assert STATE_BY_NAME["wdna0"] is S.WDNA0
    assert len(STATE_BY_NAME) == 13
