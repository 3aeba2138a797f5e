"""FSM, toggle and assertion coverage collected from traces and
directive statistics.

The composite SCORE is the unweighted mean of the categories that have
data (TOGGLE, FSM, ASSERT); language-level source metrics (line, branch,
condition) have no meaning for a behavioural model and are deliberately
absent from the report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .bist_sim import SIGNAL_ORDER, SignalTrace
from .controller import ControllerState, STATE_NAMES, transition_universe
from .property_engine import DirectiveStats


class ModelConformanceError(RuntimeError):
    """A trace contains an arc outside the legal transition universe."""


@dataclass
class ToggleBit:
    rose: bool = False
    fell: bool = False

    @property
    def covered(self) -> bool:
        return self.rose and self.fell


@dataclass
class ToggleSignal:
    name: str
    width: int
    bits: list[ToggleBit]
    ever_changed: bool = False

    @property
    def covered(self) -> bool:
        return all(b.covered for b in self.bits)

    @property
    def is_constant(self) -> bool:
        return not self.ever_changed


@dataclass
class CoverageReport:
    states_covered: int = 0
    states_total: int = 13
    transitions_covered: int = 0
    transitions_total: int = 24
    covered_states: set[ControllerState] = field(default_factory=set)
    covered_transitions: set[tuple[ControllerState, ControllerState]] = field(default_factory=set)
    toggle: dict[str, ToggleSignal] = field(default_factory=dict)
    assert_covered: int = 0
    assert_total: int = 0
    cover_covered: int = 0
    cover_total: int = 0

    # -- category percentages -------------------------------------------

    def fsm_percent(self) -> float:
        state_pct = 100.0 * self.states_covered / self.states_total
        trans_pct = 100.0 * self.transitions_covered / self.transitions_total
        return (state_pct + trans_pct) / 2.0

    def toggle_percent(self) -> float | None:
        if not self.toggle:
            return None
        bits = [b for sig in self.toggle.values() for b in sig.bits]
        return 100.0 * sum(1 for b in bits if b.covered) / len(bits)

    def assert_percent(self) -> float | None:
        if self.assert_total == 0:
            return None
        return 100.0 * self.assert_covered / self.assert_total

    def cover_percent(self) -> float | None:
        if self.cover_total == 0:
            return None
        return 100.0 * self.cover_covered / self.cover_total

    def score(self) -> float | None:
        cats = [
            p
            for p in (self.toggle_percent(), self.fsm_percent(), self.assert_percent())
            if p is not None
        ]
        if not cats:
            return None
        return sum(cats) / len(cats)


def fsm_coverage(traces: Iterable[SignalTrace]) -> tuple[int, int, CoverageReport]:
    """States (of 13) and legal arcs (of 24) observed across the traces."""
    universe = transition_universe()
    report = CoverageReport()
    for trace in traces:
        states = trace.signal("state")
        for v in np.unique(states):
            report.covered_states.add(ControllerState(int(v)))
        if len(states) > 1:
            prev = states[:-1]
            nxt = states[1:]
            changed = prev != nxt
            for a, b in zip(prev[changed], nxt[changed]):
                arc = (ControllerState(int(a)), ControllerState(int(b)))
                if arc not in universe:
                    raise ModelConformanceError(
                        f"illegal transition {STATE_NAMES[arc[0]]} -> {STATE_NAMES[arc[1]]}"
                    )
                report.covered_transitions.add(arc)
    report.states_covered = len(report.covered_states)
    report.transitions_covered = len(report.covered_transitions)
    return report.states_covered, report.transitions_covered, report


def toggle_coverage(traces: Sequence[SignalTrace]) -> dict[str, ToggleSignal]:
    """Per-bit 0->1 / 1->0 records for every trace signal."""
    if not traces:
        raise ValueError("toggle coverage needs at least one trace")
    widths = traces[0].config.signal_widths()
    out = {
        name: ToggleSignal(name=name, width=widths[name], bits=[ToggleBit() for _ in range(widths[name])])
        for name in SIGNAL_ORDER
    }
    for trace in traces:
        for name in SIGNAL_ORDER:
            arr = trace.signals[name]
            sig = out[name]
            if len(arr) > 1 and bool(np.any(arr[1:] != arr[:-1])):
                sig.ever_changed = True
            for bit in range(sig.width):
                bits = (arr >> bit) & 1
                if len(bits) > 1:
                    prev = bits[:-1]
                    nxt = bits[1:]
                    if np.any((prev == 0) & (nxt == 1)):
                        sig.bits[bit].rose = True
                    if np.any((prev == 1) & (nxt == 0)):
                        sig.bits[bit].fell = True
    return out


def assertion_coverage(stats: dict[str, DirectiveStats]) -> tuple[float | None, float | None]:
    """(assert fraction, cover fraction): covered means at least one real
    success / match."""
    asserts = [s for s in stats.values() if s.kind == "assert"]
    covers = [s for s in stats.values() if s.kind == "cover"]
    afrac = (
        sum(1 for s in asserts if s.real_successes >= 1) / len(asserts) if asserts else None
    )
    cfrac = sum(1 for s in covers if s.matches >= 1) / len(covers) if covers else None
    return afrac, cfrac


def collect(
    traces: Sequence[SignalTrace],
    stats: dict[str, DirectiveStats] | None = None,
) -> CoverageReport:
    """Full report over traces plus optional directive statistics."""
    if traces:
        _, _, report = fsm_coverage(traces)
        report.toggle = toggle_coverage(traces)
    else:
        report = CoverageReport()
    if stats:
        asserts = [s for s in stats.values() if s.kind == "assert"]
        covers = [s for s in stats.values() if s.kind == "cover"]
        report.assert_total = len(asserts)
        report.assert_covered = sum(1 for s in asserts if s.real_successes >= 1)
        report.cover_total = len(covers)
        report.cover_covered = sum(1 for s in covers if s.matches >= 1)
    return report


def _pct(value: float | None) -> str:
    return "--" if value is None else f"{value:.2f}"


def render(report: CoverageReport, fmt: str = "text") -> str:
    if fmt == "json":
        doc = {
            "score": report.score(),
            "toggle_percent": report.toggle_percent(),
            "fsm_percent": report.fsm_percent(),
            "assert_percent": report.assert_percent(),
            "cover_percent": report.cover_percent(),
            "states_covered": report.states_covered,
            "states_total": report.states_total,
            "transitions_covered": report.transitions_covered,
            "transitions_total": report.transitions_total,
            "covered_states": sorted(STATE_NAMES[s] for s in report.covered_states),
            "covered_transitions": sorted(
                f"{STATE_NAMES[a]}->{STATE_NAMES[b]}" for a, b in report.covered_transitions
            ),
            "assert_covered": report.assert_covered,
            "assert_total": report.assert_total,
            "cover_covered": report.cover_covered,
            "cover_total": report.cover_total,
            "toggle": {
                name: {
                    "width": sig.width,
                    "constant": sig.is_constant,
                    "covered": sig.covered,
                    "bits": [{"rose": b.rose, "fell": b.fell} for b in sig.bits],
                }
                for name, sig in sorted(report.toggle.items())
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown coverage format {fmt!r}")

    lines = []
    lines.append("Coverage Summary (behavioural model; no source-text metrics)")
    lines.append("")
    lines.append(f"{'SCORE':>8} {'TOGGLE':>8} {'FSM':>8} {'ASSERT':>8}")
    lines.append(
        f"{_pct(report.score()):>8} {_pct(report.toggle_percent()):>8} "
        f"{_pct(report.fsm_percent()):>8} {_pct(report.assert_percent()):>8}"
    )
    lines.append("")
    lines.append(
        f"FSM states      {report.states_covered}/{report.states_total}"
    )
    lines.append(
        f"FSM transitions {report.transitions_covered}/{report.transitions_total}"
    )
    if report.assert_total or report.cover_total:
        lines.append(f"Asserts covered {report.assert_covered}/{report.assert_total}")
        lines.append(f"Covers matched  {report.cover_covered}/{report.cover_total}")
    lines.append("")
    if report.toggle:
        lines.append("Toggle detail (per signal: covered bits / width)")
        for name in SIGNAL_ORDER:
            sig = report.toggle.get(name)
            if sig is None:
                continue
            covered = sum(1 for b in sig.bits if b.covered)
            note = "  [constant]" if sig.is_constant else ""
            lines.append(f"  {name:<14} {covered}/{sig.width}{note}")
        lines.append("")
    return "\n".join(lines)


def parse_report_json(text: str) -> CoverageReport:
    """Rebuild a CoverageReport from its JSON rendering."""
    doc = json.loads(text)
    by_name = {v: k for k, v in STATE_NAMES.items()}
    report = CoverageReport(
        states_covered=doc["states_covered"],
        states_total=doc["states_total"],
        transitions_covered=doc["transitions_covered"],
        transitions_total=doc["transitions_total"],
        assert_covered=doc["assert_covered"],
        assert_total=doc["assert_total"],
        cover_covered=doc["cover_covered"],
        cover_total=doc["cover_total"],
    )
    report.covered_states = {by_name[s] for s in doc["covered_states"]}
    for arc in doc["covered_transitions"]:
        a, b = arc.split("->")
        report.covered_transitions.add((by_name[a], by_name[b]))
    for name, sig in doc["toggle"].items():
        ts = ToggleSignal(
            name=name,
            width=sig["width"],
            bits=[ToggleBit(rose=b["rose"], fell=b["fell"]) for b in sig["bits"]],
            ever_changed=not sig["constant"],
        )
        report.toggle[name] = ts
    return report
