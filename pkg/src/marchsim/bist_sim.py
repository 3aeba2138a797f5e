"""Full MBIST harness: controller + address/pattern generators + signature
comparator wired to a fault-injectable memory, producing per-edge traces.

The datapath is slaved to the controller: the address is the counter value,
the pattern word is all-zeros or all-ones per g_patt, and the comparator
result feeds back into the next edge's step.  Traces record post-edge
(registered) values only.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace as _replace
from typing import Iterator, Sequence

import numpy as np

from .controller import (
    STATE_BY_NAME,
    STATE_NAMES,
    ControllerInputs,
    ControllerState,
    READ_STATES,
    WRITE_STATES,
    reset,
    step,
)
from .fault_memory import FaultMemory, FaultSpec, MemoryConfig, parse_fault_spec

import os

if os.environ.get("MARCHSIM_PURE_PYTHON"):
    _kernels = None
else:
    try:
        from . import _kernels
    except ImportError:  # pure-Python fallback only
        _kernels = None


@dataclass(frozen=True)
class BistConfig:
    c_size: int = 8
    word_width: int = 32

    def __post_init__(self):
        if self.c_size < 1:
            raise ValueError("c_size must be >= 1")
        if self.word_width < 1:
            raise ValueError("word_width must be >= 1")
        # Triggers the shared cell-count limit early.
        MemoryConfig(self.words, self.word_width)

    @property
    def words(self) -> int:
        return 1 << self.c_size

    @property
    def pattern_zero(self) -> int:
        return 0

    @property
    def pattern_one(self) -> int:
        return (1 << self.word_width) - 1

    def pattern(self, g_patt: int) -> int:
        return self.pattern_one if g_patt else self.pattern_zero

    def signal_widths(self) -> dict[str, int]:
        one = 1
        return {
            "t_mode": one,
            "rst": one,
            "match": one,
            "en": one,
            "rw": one,
            "g_patt": one,
            "done": one,
            "pass": one,
            "fail": one,
            "state": 4,
            "count": self.c_size,
            "addr": self.c_size,
            "data_written": self.word_width,
            "mem_out": self.word_width,
            "signature": self.word_width,
            "c_min": self.c_size,
            "c_max": self.c_size,
        }


SIGNAL_ORDER = (
    "t_mode",
    "rst",
    "match",
    "en",
    "rw",
    "g_patt",
    "done",
    "pass",
    "fail",
    "state",
    "count",
    "addr",
    "data_written",
    "mem_out",
    "signature",
    "c_min",
    "c_max",
)


@dataclass(frozen=True)
class TraceSample:
    cycle: int
    values: dict[str, int]

    def __getattr__(self, name):
        try:
            return self.values[name]
        except KeyError:
            raise AttributeError(name) from None


class SignalTrace:
    """Per-edge record of every named signal, cycle 0 upward."""

    def __init__(self, config: BistConfig, signals: dict[str, np.ndarray]):
        missing = set(SIGNAL_ORDER) - set(signals)
        if missing:
            raise ValueError(f"trace missing signals: {sorted(missing)}")
        lengths = {len(v) for v in signals.values()}
        if len(lengths) != 1:
            raise ValueError("trace signals have mismatched lengths")
        self.config = config
        self.signals = {name: np.asarray(signals[name], dtype=np.int64) for name in SIGNAL_ORDER}

    def __len__(self) -> int:
        return len(self.signals["state"])

    def __getitem__(self, cycle: int) -> TraceSample:
        return TraceSample(
            cycle=cycle,
            values={name: int(arr[cycle]) for name, arr in self.signals.items()},
        )

    def __iter__(self) -> Iterator[TraceSample]:
        for c in range(len(self)):
            yield self[c]

    def signal(self, name: str) -> np.ndarray:
        try:
            return self.signals[name]
        except KeyError:
            raise KeyError(f"trace has no signal {name!r}") from None

    def states(self) -> list[ControllerState]:
        return [ControllerState(int(v)) for v in self.signals["state"]]

    # -- CSV round trip -------------------------------------------------

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("cycle," + ",".join(SIGNAL_ORDER) + "\n")
        cols = [self.signals[name] for name in SIGNAL_ORDER]
        for c in range(len(self)):
            out.write(str(c) + "," + ",".join(str(int(col[c])) for col in cols) + "\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, config: BistConfig) -> "SignalTrace":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty trace CSV")
        header = lines[0].split(",")
        if header[0] != "cycle":
            raise ValueError("trace CSV must start with a cycle column")
        names = header[1:]
        rows = [[int(v) for v in ln.split(",")] for ln in lines[1:]]
        signals = {
            name: np.array([row[i + 1] for row in rows], dtype=np.int64)
            for i, name in enumerate(names)
        }
        return cls(config, signals)


@dataclass(frozen=True)
class Scenario:
    """Timed t_mode/rst assignments plus an optional run-length cap."""

    events: tuple[tuple[int, str, int], ...]
    limit: int | None = None

    def __post_init__(self):
        last = -1
        seen: set[tuple[int, str]] = set()
        for cycle, sig, val in self.events:
            if sig not in ("t_mode", "rst"):
                raise ValueError(f"scenario drives unknown signal {sig!r}")
            if val not in (0, 1):
                raise ValueError("scenario values must be 0 or 1")
            if cycle < last:
                raise ValueError("scenario events must be in cycle order")
            if (cycle, sig) in seen:
                raise ValueError(f"duplicate assignment to {sig} at cycle {cycle}")
            seen.add((cycle, sig))
            last = cycle
        if self.limit is not None and self.limit < 1:
            raise ValueError("scenario limit must be >= 1")

    @property
    def last_event_cycle(self) -> int:
        return max((c for c, _, _ in self.events), default=0)


def scenario_from_events(events: Sequence[tuple[int, str, int]], limit: int | None = None) -> Scenario:
    return Scenario(events=tuple(sorted(events, key=lambda e: e[0])), limit=limit)


def parse_scenario(text: str) -> tuple[Scenario, list[FaultSpec]]:
    """Parse the line-based scenario format.

    `fault <class> <params...>` lines (before the first `@`) inject
    defects, `@<cycle> <signal>=<0|1>` drives an input, `limit <N>` caps
    the run, `#` starts a comment.
    """
    events: list[tuple[int, str, int]] = []
    faults: list[FaultSpec] = []
    limit = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("@"):
                head, assign = line.split(None, 1)
                cycle = int(head[1:])
                sig, val = assign.replace(" ", "").split("=")
                events.append((cycle, sig, int(val)))
            elif line.startswith("fault"):
                if events:
                    raise ValueError("fault lines must precede the first @ event")
                faults.append(parse_fault_spec(line.split()[1:]))
            elif line.startswith("limit"):
                limit = int(line.split()[1])
            else:
                raise ValueError(f"unrecognized line {line!r}")
        except ValueError as exc:
            raise ValueError(f"scenario line {lineno}: {exc}") from None
    return scenario_from_events(events, limit), faults


@dataclass(frozen=True)
class TestVerdict:
    completed: int
    any_fail: int
    first_fail_cycle: int | None = None
    first_fail_state: ControllerState | None = None
    first_fail_addr: int | None = None


def _input_arrays(scenario: Scenario, n_edges: int) -> tuple[np.ndarray, np.ndarray]:
    t_mode = np.zeros(n_edges, dtype=np.int64)
    rst = np.zeros(n_edges, dtype=np.int64)
    arrays = {"t_mode": t_mode, "rst": rst}
    cur = {"t_mode": 0, "rst": 0}
    events = sorted(scenario.events, key=lambda e: e[0])
    idx = 0
    for e in range(n_edges):
        while idx < len(events) and events[idx][0] == e:
            _, sig, val = events[idx]
            cur[sig] = val
            idx += 1
        t_mode[e] = cur["t_mode"]
        rst[e] = cur["rst"]
    return t_mode, rst


def _run_python(
    config: BistConfig,
    faults: Sequence[FaultSpec],
    t_mode: np.ndarray,
    rst: np.ndarray,
    n_edges: int,
    post_done_edges: int,
    fast_forward_pause: bool,
    init_fill: int,
    last_event: int,
) -> dict[str, np.ndarray]:
    mem = FaultMemory(MemoryConfig(config.words, config.word_width))
    if init_fill:
        mem.fill(1, cycle=0)
    for f in faults:
        mem.inject(f)

    cols = {name: np.zeros(n_edges, dtype=np.int64) for name in SIGNAL_ORDER}
    regs = reset(config.c_size)
    c_max = regs.c_max
    match_prev = 1
    mem_out_prev = 0
    data_written_prev = 0
    settled_run = 0
    used = 0
    for e in range(n_edges):
        regs = step(regs, ControllerInputs(int(t_mode[e]), int(rst[e]), match_prev))
        if (
            fast_forward_pause
            and regs.state is ControllerState.PAUSE
            and regs.count == 0
        ):
            # Jump the pause timer so the idle stretch collapses to one edge.
            regs = _replace(regs, count=c_max)
        st = regs.state
        addr = regs.count
        signature = config.pattern(regs.g_patt)
        data_written = data_written_prev
        mem_out = mem_out_prev
        match_new = 1
        if regs.en and st in WRITE_STATES:
            data_written = config.pattern(regs.g_patt)
            mem.write(addr, data_written, e)
        elif regs.en and st in READ_STATES:
            mem_out = mem.read(addr, e)
            match_new = 1 if mem_out == signature else 0

        cols["t_mode"][e] = t_mode[e]
        cols["rst"][e] = rst[e]
        cols["match"][e] = match_new
        cols["en"][e] = regs.en
        cols["rw"][e] = regs.rw
        cols["g_patt"][e] = regs.g_patt
        cols["done"][e] = regs.done
        cols["pass"][e] = regs.pass_
        cols["fail"][e] = regs.fail
        cols["state"][e] = int(st)
        cols["count"][e] = regs.count
        cols["addr"][e] = addr
        cols["data_written"][e] = data_written
        cols["mem_out"][e] = mem_out
        cols["signature"][e] = signature
        cols["c_min"][e] = 0
        cols["c_max"][e] = c_max

        match_prev = match_new
        mem_out_prev = mem_out
        data_written_prev = data_written
        used = e + 1
        # A run is over once the controller has settled (done, or parked in
        # idle with the test request dropped) for post_done_edges extra
        # samples and no scenario event can still wake it up.
        settled = st is ControllerState.S_DONE or (
            st is ControllerState.S_IDLE and not t_mode[e] and not rst[e]
        )
        if settled and e >= last_event:
            settled_run += 1
        else:
            settled_run = 0
        if settled_run > post_done_edges:
            break
    return {name: col[:used] for name, col in cols.items()}


def run(
    config: BistConfig,
    faults: Sequence[FaultSpec] = (),
    scenario: Scenario | None = None,
    *,
    post_done_edges: int = 8,
    fast_forward_pause: bool = False,
    init_fill: int = 0,
    use_kernel: bool | None = None,
) -> tuple[SignalTrace, TestVerdict]:
    """Simulate one BIST run and return (trace, verdict).

    The run ends at the scenario cap (`limit`), or post_done_edges after
    the controller settles: sitting in done, or parked in idle with
    t_mode low, with no scenario event still to come.  first_fail_state
    and first_fail_addr name the read that produced the first mismatch;
    first_fail_cycle is the edge where the registered fail bit rose.
    """
    if scenario is None or not scenario.events:
        raise ValueError("scenario with at least one event required")
    mem_cfg = MemoryConfig(config.words, config.word_width)
    probe = FaultMemory(mem_cfg)
    for f in faults:
        probe.inject(f)  # bounds-check before committing to a run

    if scenario.limit is not None:
        n_edges = scenario.limit
    else:
        n_edges = scenario.last_event_cycle + 13 * config.words + 64 + post_done_edges
    t_mode, rst = _input_arrays(scenario, n_edges)

    want_kernel = use_kernel if use_kernel is not None else _kernels is not None
    if want_kernel and _kernels is None:
        raise RuntimeError("compiled kernel requested but not available")
    if want_kernel:
        cols = _kernels.run_edges(
            config.c_size,
            config.word_width,
            t_mode,
            rst,
            n_edges,
            [_kernels.pack_fault(f) for f in faults],
            post_done_edges,
            1 if fast_forward_pause else 0,
            1 if init_fill else 0,
            scenario.last_event_cycle,
        )
    else:
        cols = _run_python(
            config,
            faults,
            t_mode,
            rst,
            n_edges,
            post_done_edges,
            fast_forward_pause,
            1 if init_fill else 0,
            scenario.last_event_cycle,
        )

    trace = SignalTrace(config, cols)
    state = trace.signals["state"]
    fail = trace.signals["fail"]
    match = trace.signals["match"]
    completed = 1 if np.any(state == int(ControllerState.S_DONE)) else 0
    fail_idx = np.flatnonzero(fail == 1)
    mismatch_idx = np.flatnonzero(match == 0)
    verdict = TestVerdict(
        completed=completed,
        any_fail=1 if fail_idx.size else 0,
        first_fail_cycle=int(fail_idx[0]) if fail_idx.size else None,
        first_fail_state=(
            ControllerState(int(state[mismatch_idx[0]])) if mismatch_idx.size else None
        ),
        first_fail_addr=(
            int(trace.signals["addr"][mismatch_idx[0]]) if mismatch_idx.size else None
        ),
    )
    return trace, verdict


READ_PASS_ORDER = (
    ControllerState.RUP0,
    ControllerState.RDN1,
    ControllerState.RDN0,
    ControllerState.RUP1,
    ControllerState.RDNA0,
)


def read_pass_flags(trace: SignalTrace) -> tuple[int, int, int, int, int]:
    """Per read pass: was any comparator mismatch sampled in that state."""
    state = trace.signal("state")
    match = trace.signal("match")
    return tuple(
        1 if np.any((state == int(s)) & (match == 0)) else 0 for s in READ_PASS_ORDER
    )


def default_scenario(start: int = 2, limit: int | None = None) -> Scenario:
    """Raise t_mode at `start` and hold it for a full march."""
    return scenario_from_events([(start, "t_mode", 1)], limit=limit)
