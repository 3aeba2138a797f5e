"""Value-change-dump export for signal traces, plus a reader for round trips.

Output follows the usual IEEE-1364 text layout: fixed header, one $var per
trace signal (vectors for multi-bit signals), a $dumpvars block with the
cycle-0 values, then change-only records.  A trailing time marker pins the
trace length so a reader can recover the exact sample count.
"""

from __future__ import annotations

from typing import TextIO

import numpy as np

from .bist_sim import SIGNAL_ORDER, BistConfig, SignalTrace

_ID_FIRST, _ID_LAST = 33, 126


def _id_for(index: int) -> str:
    span = _ID_LAST - _ID_FIRST + 1
    chars = []
    index += 1
    while index > 0:
        index -= 1
        chars.append(chr(_ID_FIRST + index % span))
        index //= span
    return "".join(reversed(chars))


def _fmt(value: int, width: int, ident: str) -> str:
    if width == 1:
        return f"{value & 1}{ident}"
    return f"b{value:0{width}b} {ident}"


def export_vcd(trace: SignalTrace, dest: TextIO) -> None:
    """Write the trace as a VCD document (timescale 1ns, 1 cycle = 1ns)."""
    if len(trace) == 0:
        raise ValueError("cannot export an empty trace")
    widths = trace.config.signal_widths()
    ids = {name: _id_for(i) for i, name in enumerate(SIGNAL_ORDER)}

    dest.write("$version marchsim $end\n")
    dest.write("$timescale 1ns $end\n")
    dest.write("$scope module mbist $end\n")
    for name in SIGNAL_ORDER:
        w = widths[name]
        label = name if w == 1 else f"{name} [{w - 1}:0]"
        dest.write(f"$var wire {w} {ids[name]} {label} $end\n")
    dest.write("$upscope $end\n")
    dest.write("$enddefinitions $end\n")

    dest.write("#0\n$dumpvars\n")
    last = {}
    for name in SIGNAL_ORDER:
        v = int(trace.signals[name][0])
        last[name] = v
        dest.write(_fmt(v, widths[name], ids[name]) + "\n")
    dest.write("$end\n")

    n = len(trace)
    for c in range(1, n):
        changes = []
        for name in SIGNAL_ORDER:
            v = int(trace.signals[name][c])
            if v != last[name]:
                last[name] = v
                changes.append(_fmt(v, widths[name], ids[name]))
        if changes:
            dest.write(f"#{c}\n")
            for line in changes:
                dest.write(line + "\n")
    dest.write(f"#{n}\n")


def read_vcd(src: TextIO) -> tuple[dict[str, np.ndarray], dict[str, int]]:
    """Recover per-cycle signal arrays and widths from a VCD document."""
    widths: dict[str, int] = {}
    names: dict[str, str] = {}  # id -> signal name
    tokens = src.read().split()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "$var":
            w = int(tokens[i + 2])
            ident = tokens[i + 3]
            name = tokens[i + 4]
            names[ident] = name
            widths[name] = w
            while tokens[i] != "$end":
                i += 1
        elif tok == "$enddefinitions":
            i += 1
            break
        i += 1

    changes: dict[str, list[tuple[int, int]]] = {n: [] for n in names.values()}
    time = 0
    end_time = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.startswith("#"):
            time = int(tok[1:])
            end_time = max(end_time, time)
        elif tok in ("$dumpvars", "$end"):
            pass
        elif tok.startswith("b"):
            value = int(tok[1:], 2)
            ident = tokens[i + 1]
            changes[names[ident]].append((time, value))
            i += 1
        elif tok[0] in "01":
            value = int(tok[0])
            ident = tok[1:]
            changes[names[ident]].append((time, value))
        i += 1

    n = end_time
    if n == 0:
        raise ValueError("VCD document has no samples")
    signals = {}
    for name, items in changes.items():
        arr = np.zeros(n, dtype=np.int64)
        cur = 0
        idx = 0
        for c in range(n):
            while idx < len(items) and items[idx][0] == c:
                cur = items[idx][1]
                idx += 1
            arr[c] = cur
        signals[name] = arr
    return signals, widths


def trace_from_vcd(src: TextIO) -> SignalTrace:
    """Rebuild a SignalTrace, inferring the configuration from var widths."""
    signals, widths = read_vcd(src)
    config = BistConfig(c_size=widths["count"], word_width=widths["data_written"])
    return SignalTrace(config, signals)
