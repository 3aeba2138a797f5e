"""Cycle-accurate 13-state MBIST controller FSM with registered outputs.

The transition function walks a modified March C sequence one pass per
state, reusing the address counter as the pause timer.  Counter arithmetic
is modulo 2**c_size like the RTL register it models; in particular the
final read pass leaves the counter wrapped back to c_max when the done
state is entered.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum


class ControllerState(IntEnum):
    S_IDLE = 0
    WDN0 = 1
    RUP0 = 2
    WUP1 = 3
    RDN1 = 4
    WDNA0 = 5
    PAUSE = 6
    RDN0 = 7
    WDN1 = 8
    RUP1 = 9
    WUP0 = 10
    RDNA0 = 11
    S_DONE = 12


# Canonical lowercase names as used in trace files and property text.
STATE_NAMES = {
    ControllerState.S_IDLE: "s_idle",
    ControllerState.WDN0: "wdn0",
    ControllerState.RUP0: "rup0",
    ControllerState.WUP1: "wup1",
    ControllerState.RDN1: "rdn1",
    ControllerState.WDNA0: "wdna0",
    ControllerState.PAUSE: "pause",
    ControllerState.RDN0: "rdn0",
    ControllerState.WDN1: "wdn1",
    ControllerState.RUP1: "rup1",
    ControllerState.WUP0: "wup0",
    ControllerState.RDNA0: "rdna0",
    ControllerState.S_DONE: "s_done",
}
STATE_BY_NAME = {v: k for k, v in STATE_NAMES.items()}

READ_STATES = frozenset(
    {
        ControllerState.RUP0,
        ControllerState.RDN1,
        ControllerState.RDN0,
        ControllerState.RUP1,
        ControllerState.RDNA0,
    }
)
WRITE_STATES = frozenset(
    {
        ControllerState.WDN0,
        ControllerState.WUP1,
        ControllerState.WDNA0,
        ControllerState.WDN1,
        ControllerState.WUP0,
    }
)
MARCH_STATES = (
    ControllerState.WDN0,
    ControllerState.RUP0,
    ControllerState.WUP1,
    ControllerState.RDN1,
    ControllerState.WDNA0,
    ControllerState.PAUSE,
    ControllerState.RDN0,
    ControllerState.WDN1,
    ControllerState.RUP1,
    ControllerState.WUP0,
    ControllerState.RDNA0,
)


@dataclass(frozen=True)
class ControllerInputs:
    t_mode: int
    rst: int
    match: int = 1


@dataclass(frozen=True)
class ControllerRegs:
    state: ControllerState
    en: int
    rw: int
    g_patt: int
    done: int
    pass_: int
    fail: int
    count: int
    c_size: int

    @property
    def c_min(self) -> int:
        return 0

    @property
    def c_max(self) -> int:
        return (1 << self.c_size) - 1


def reset(c_size: int = 8) -> ControllerRegs:
    """Registered values straight out of reset."""
    if c_size < 1:
        raise ValueError("c_size must be >= 1")
    return ControllerRegs(
        state=ControllerState.S_IDLE,
        en=0,
        rw=1,
        g_patt=1,
        done=0,
        pass_=1,
        fail=0,
        count=0,
        c_size=c_size,
    )


def step(regs: ControllerRegs, inputs: ControllerInputs) -> ControllerRegs:
    """One positive clock edge.

    Reset dominates.  The match input is only sampled in the five read
    states; pass/fail therefore lag the comparator by one edge.
    """
    if inputs.rst:
        return reset(regs.c_size)

    s = regs.state
    c_min, c_max = regs.c_min, regs.c_max
    wrap = c_max  # count register is c_size bits wide
    count = regs.count

    def match_regs() -> dict:
        if inputs.match:
            return {"pass_": 1, "fail": 0}
        return {"pass_": 0, "fail": 1}

    if s is ControllerState.S_IDLE:
        if not inputs.t_mode:
            return regs
        return replace(regs, state=ControllerState.WDN0, en=1, count=c_max, rw=0, g_patt=0)

    if s is ControllerState.WDN0:
        if count == c_min:
            return replace(regs, state=ControllerState.RUP0, rw=1, count=c_min)
        return replace(regs, count=(count - 1) & wrap)

    if s is ControllerState.RUP0:
        upd = match_regs()
        if count == c_max:
            return replace(
                regs, state=ControllerState.WUP1, g_patt=1, rw=0, count=c_min, **upd
            )
        return replace(regs, count=(count + 1) & wrap, **upd)

    if s is ControllerState.WUP1:
        if count == c_max:
            return replace(regs, state=ControllerState.RDN1, rw=1, count=c_max)
        return replace(regs, count=(count + 1) & wrap)

    if s is ControllerState.RDN1:
        upd = match_regs()
        if count == c_min:
            return replace(
                regs, state=ControllerState.WDNA0, g_patt=0, rw=0, count=c_max, **upd
            )
        return replace(regs, count=(count - 1) & wrap, **upd)

    if s is ControllerState.WDNA0:
        # RTL typo'd the hold branch as wdn0; the pass must march to
        # completion, so this is a self loop.
        if count == c_min:
            return replace(regs, state=ControllerState.PAUSE, count=c_min)
        return replace(regs, count=(count - 1) & wrap)

    if s is ControllerState.PAUSE:
        if count == c_max:
            return replace(regs, state=ControllerState.RDN0, rw=1, count=c_max)
        return replace(regs, count=(count + 1) & wrap)

    if s is ControllerState.RDN0:
        upd = match_regs()
        if count == c_min:
            return replace(
                regs, state=ControllerState.WDN1, rw=0, g_patt=1, count=c_max, **upd
            )
        return replace(regs, count=(count - 1) & wrap, **upd)

    if s is ControllerState.WDN1:
        if count == c_min:
            return replace(regs, state=ControllerState.RUP1, rw=1, count=c_min)
        return replace(regs, count=(count - 1) & wrap)

    if s is ControllerState.RUP1:
        upd = match_regs()
        if count == c_max:
            return replace(
                regs, state=ControllerState.WUP0, g_patt=0, rw=0, count=c_min, **upd
            )
        return replace(regs, count=(count + 1) & wrap, **upd)

    if s is ControllerState.WUP0:
        if count == c_max:
            return replace(regs, state=ControllerState.RDNA0, rw=1, count=c_max)
        return replace(regs, count=(count + 1) & wrap)

    if s is ControllerState.RDNA0:
        upd = match_regs()
        if count == c_min:
            # No explicit count assignment here in the source: the
            # unconditional decrement wraps 0 back to c_max.
            return replace(
                regs,
                state=ControllerState.S_DONE,
                done=1,
                en=0,
                count=(count - 1) & wrap,
                **upd,
            )
        return replace(regs, count=(count - 1) & wrap, **upd)

    # S_DONE: holds while t_mode stays high; dropping it returns to idle
    # without touching any other register (done stays set until reset).
    if inputs.t_mode:
        return regs
    return replace(regs, state=ControllerState.S_IDLE)


def transition_universe() -> frozenset[tuple[ControllerState, ControllerState]]:
    """All 24 legal arcs: the forward chain plus one reset arc per state."""
    forward = [(ControllerState.S_IDLE, ControllerState.WDN0)]
    forward += [
        (MARCH_STATES[i], MARCH_STATES[i + 1]) for i in range(len(MARCH_STATES) - 1)
    ]
    forward.append((ControllerState.RDNA0, ControllerState.S_DONE))
    to_idle = [
        (s, ControllerState.S_IDLE)
        for s in ControllerState
        if s is not ControllerState.S_IDLE
    ]
    return frozenset(forward + to_idle)
