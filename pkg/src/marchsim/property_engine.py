"""Clocked temporal property evaluation over signal traces.

The supported subset covers boolean expressions over trace signals,
fixed ##N delays, overlapped/non-overlapped implication and disable iff.
Attempts start at every cycle.  Semantics per attempt starting at t:

  * cycles are scanned in order; a true disable condition anywhere in
    [t, current check cycle] cancels the attempt (disabled bucket),
  * an antecedent mismatch makes the attempt vacuous,
  * a consequent (or plain-sequence) mismatch is a failure,
  * anything still pending when the trace ends is incomplete,
  * otherwise the attempt is a real success (a match, for covers).

first_match(...) over a single-cycle sequence is the identity and is
accepted as such; multi-cycle first_match is not supported.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .bist_sim import SignalTrace
from .controller import STATE_BY_NAME

STATE_ALPHABET = {name: int(st) for name, st in STATE_BY_NAME.items()}
# The RTL's property text freely shortens the two bookend state names.
STATE_ALPHABET["idle"] = STATE_ALPHABET["s_idle"]
STATE_ALPHABET["done"] = STATE_ALPHABET["s_done"]


class PropertySyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


# -- expression tree ---------------------------------------------------------


@dataclass(frozen=True)
class Ident:
    name: str


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class Cmp:
    op: str  # "==" or "!="
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class And:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Or:
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class Stable:
    signal: str


Expr = Ident | Num | Cmp | Not | And | Or | Stable


def expr_text(e: Expr) -> str:
    if isinstance(e, Ident):
        return e.name
    if isinstance(e, Num):
        return str(e.value)
    if isinstance(e, Cmp):
        return f"{expr_text(e.lhs)} {e.op} {expr_text(e.rhs)}"
    if isinstance(e, Not):
        return f"!({expr_text(e.operand)})"
    if isinstance(e, And):
        return f"({expr_text(e.lhs)} && {expr_text(e.rhs)})"
    if isinstance(e, Or):
        return f"({expr_text(e.lhs)} || {expr_text(e.rhs)})"
    if isinstance(e, Stable):
        return f"stable({e.signal})"
    raise TypeError(e)


class UnknownSignalError(KeyError):
    pass


def _values(e: Expr, trace: SignalTrace, alphabet: dict[str, int]):
    """Numeric value of a sub-expression: ndarray or scalar int."""
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Ident):
        if e.name in trace.signals:
            return trace.signals[e.name]
        if e.name in alphabet:
            return alphabet[e.name]
        raise UnknownSignalError(f"unknown signal or enumerant {e.name!r}")
    return eval_expr(e, trace, alphabet).astype(np.int64)


def _cmp_side(side: Expr, other: Expr, trace: SignalTrace, alphabet: dict[str, int]):
    """Comparison operand value; a bare name compared against the state
    signal binds to the state enumerant even when it shadows a signal
    (the done/idle shorthands)."""
    if (
        isinstance(side, Ident)
        and isinstance(other, Ident)
        and other.name == "state"
        and side.name in alphabet
    ):
        return alphabet[side.name]
    return _values(side, trace, alphabet)


def eval_expr(e: Expr, trace: SignalTrace, alphabet: dict[str, int]) -> np.ndarray:
    """Elementwise truth value of e at every trace cycle."""
    n = len(trace)
    if isinstance(e, (Ident, Num)):
        v = _values(e, trace, alphabet)
        if isinstance(v, np.ndarray):
            return v != 0
        return np.full(n, v != 0)
    if isinstance(e, Cmp):
        l = _cmp_side(e.lhs, e.rhs, trace, alphabet)
        r = _cmp_side(e.rhs, e.lhs, trace, alphabet)
        res = (l == r) if e.op == "==" else (l != r)
        if isinstance(res, np.ndarray):
            return res
        return np.full(n, bool(res))
    if isinstance(e, Not):
        return ~eval_expr(e.operand, trace, alphabet)
    if isinstance(e, And):
        return eval_expr(e.lhs, trace, alphabet) & eval_expr(e.rhs, trace, alphabet)
    if isinstance(e, Or):
        return eval_expr(e.lhs, trace, alphabet) | eval_expr(e.rhs, trace, alphabet)
    if isinstance(e, Stable):
        if e.signal not in trace.signals:
            raise UnknownSignalError(f"unknown signal {e.signal!r}")
        arr = trace.signals[e.signal]
        out = np.empty(n, dtype=bool)
        out[0] = True  # no previous sample, nothing changed yet
        out[1:] = arr[1:] == arr[:-1]
        return out
    raise TypeError(e)


# -- sequences and properties -------------------------------------------------


@dataclass(frozen=True)
class SequenceExpr:
    """Boolean items at fixed offsets from the sequence start."""

    items: tuple[tuple[int, Expr], ...]

    @property
    def span(self) -> int:
        return self.items[-1][0]


@dataclass(frozen=True)
class PropertyDef:
    consequent: SequenceExpr
    antecedent: SequenceExpr | None = None
    non_overlapped: bool = False
    delay: int = 0
    disable_iff: Expr | None = None


@dataclass(frozen=True)
class Directive:
    kind: str  # "assert" | "cover"
    name: str
    prop: PropertyDef
    severity: str = "error"  # info | warning | error | fatal
    pass_message: str | None = None
    fail_message: str | None = None


SEVERITIES = ("info", "warning", "error", "fatal")


# -- property DSL parser -------------------------------------------------------


class _Lexer:
    SYMBOLS = ("|->", "|=>", "##", "==", "!=", "&&", "||", "(", ")", "!")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        self._lex()
        self.idx = 0

    def _lex(self):
        t = self.text
        i = 0
        while i < len(t):
            if t[i].isspace():
                i += 1
                continue
            matched = False
            for sym in self.SYMBOLS:
                if t.startswith(sym, i):
                    self.tokens.append(("sym", sym, i))
                    i += len(sym)
                    matched = True
                    break
            if matched:
                continue
            if t[i].isdigit():
                j = i
                while j < len(t) and t[j].isdigit():
                    j += 1
                self.tokens.append(("num", t[i:j], i))
                i = j
                continue
            if t[i].isalpha() or t[i] in "_$":
                j = i
                while j < len(t) and (t[j].isalnum() or t[j] in "_$"):
                    j += 1
                self.tokens.append(("word", t[i:j], i))
                i = j
                continue
            raise PropertySyntaxError(f"unexpected character {t[i]!r}", i)
        self.tokens.append(("eof", "", len(t)))

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.idx]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.idx]
        self.idx += 1
        return tok

    def accept(self, kind: str, value: str | None = None) -> bool:
        k, v, _ = self.peek()
        if k == kind and (value is None or v == value):
            self.idx += 1
            return True
        return False

    def expect(self, kind: str, value: str | None = None) -> tuple[str, str, int]:
        k, v, p = self.peek()
        if k != kind or (value is not None and v != value):
            want = value if value is not None else kind
            raise PropertySyntaxError(f"expected {want!r}, got {v!r}", p)
        return self.next()


def _parse_primary(lx: _Lexer) -> Expr:
    k, v, p = lx.peek()
    if lx.accept("sym", "("):
        inner = _parse_or(lx)
        lx.expect("sym", ")")
        return inner
    if k == "num":
        lx.next()
        return Num(int(v))
    if k == "word":
        lx.next()
        word = v.lstrip("$")
        if word == "stable":
            lx.expect("sym", "(")
            _, sig, _ = lx.expect("word")
            lx.expect("sym", ")")
            return Stable(sig)
        if word == "first_match":
            # identity for the single-cycle sequences this engine supports
            lx.expect("sym", "(")
            inner = _parse_or(lx)
            lx.expect("sym", ")")
            return inner
        return Ident(v)
    raise PropertySyntaxError(f"expected an expression, got {v!r}", p)


def _parse_unary(lx: _Lexer) -> Expr:
    if lx.accept("sym", "!"):
        return Not(_parse_unary(lx))
    return _parse_cmp(lx)


def _parse_cmp(lx: _Lexer) -> Expr:
    lhs = _parse_primary(lx)
    k, v, _ = lx.peek()
    if k == "sym" and v in ("==", "!="):
        lx.next()
        rhs = _parse_primary(lx)
        return Cmp(v, lhs, rhs)
    return lhs


def _parse_and(lx: _Lexer) -> Expr:
    node = _parse_unary(lx)
    while lx.accept("sym", "&&"):
        node = And(node, _parse_unary(lx))
    return node


def _parse_or(lx: _Lexer) -> Expr:
    node = _parse_and(lx)
    while lx.accept("sym", "||"):
        node = Or(node, _parse_and(lx))
    return node


def _parse_delay(lx: _Lexer) -> int:
    lx.expect("sym", "##")
    _, v, p = lx.expect("num")
    d = int(v)
    if d < 1:
        raise PropertySyntaxError("delay must be >= 1", p)
    return d


def _parse_sequence(lx: _Lexer) -> SequenceExpr:
    offset = 0
    items: list[tuple[int, Expr]] = []
    if lx.peek()[:2] == ("sym", "##"):
        offset = _parse_delay(lx)
    items.append((offset, _parse_or(lx)))
    while lx.peek()[:2] == ("sym", "##"):
        offset += _parse_delay(lx)
        items.append((offset, _parse_or(lx)))
    return SequenceExpr(items=tuple(items))


def parse_property(text: str) -> PropertyDef:
    """Parse `[disable iff (expr)] seq [ |-> | |=> [##N] seq ]`."""
    lx = _Lexer(text)
    disable = None
    k, v, _ = lx.peek()
    if k == "word" and v == "disable":
        lx.next()
        lx.expect("word", "iff")
        lx.expect("sym", "(")
        disable = _parse_or(lx)
        lx.expect("sym", ")")
    first = _parse_sequence(lx)
    k, v, p = lx.peek()
    if k == "sym" and v in ("|->", "|=>"):
        lx.next()
        delay = 0
        if lx.peek()[:2] == ("sym", "##"):
            delay = _parse_delay(lx)
        consequent = _parse_sequence(lx)
        lx.expect("eof")
        return PropertyDef(
            consequent=consequent,
            antecedent=first,
            non_overlapped=(v == "|=>"),
            delay=delay,
            disable_iff=disable,
        )
    lx.expect("eof")
    return PropertyDef(consequent=first, disable_iff=disable)


def parse_suite(text: str) -> list[Directive]:
    """Parse suite files: `assert NAME [SEVERITY] : PROP` / `cover NAME : PROP`."""
    out: list[Directive] = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, proptext = line.partition(":")
        parts = head.split()
        try:
            if not proptext or len(parts) not in (2, 3):
                raise ValueError("expected `assert|cover NAME [SEVERITY] : property`")
            kind = parts[0]
            if kind not in ("assert", "cover"):
                raise ValueError(f"unknown directive kind {kind!r}")
            name = parts[1]
            severity = parts[2] if len(parts) == 3 else "error"
            if severity not in SEVERITIES:
                raise ValueError(f"unknown severity {severity!r}")
            if name in names:
                raise ValueError(f"duplicate directive name {name!r}")
            names.add(name)
            prop = parse_property(proptext.strip())
        except ValueError as exc:
            raise ValueError(f"suite line {lineno}: {exc}") from None
        out.append(Directive(kind=kind, name=name, prop=prop, severity=severity))
    return out


# -- evaluation ----------------------------------------------------------------


class Verdict(IntEnum):
    PENDING = 0
    REAL_SUCCESS = 1
    FAILURE = 2
    VACUOUS = 3
    DISABLED = 4
    INCOMPLETE = 5


_ANT, _CON = 0, 1


def _checks(prop: PropertyDef) -> list[tuple[int, int, Expr]]:
    checks = []
    if prop.antecedent is not None:
        for off, e in prop.antecedent.items:
            checks.append((off, _ANT, e))
        base = prop.antecedent.span + prop.delay + (1 if prop.non_overlapped else 0)
    else:
        base = 0
    for off, e in prop.consequent.items:
        checks.append((base + off, _CON, e))
    checks.sort(key=lambda c: (c[0], c[1]))
    return checks


def attempt_verdicts(
    trace: SignalTrace,
    prop: PropertyDef,
    alphabet: dict[str, int] | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-attempt verdict codes plus the index of the deciding check.

    One attempt per trace cycle; the index is -1 for attempts not decided
    by a specific mismatching check (successes, disables, incompletes).
    """
    alphabet = STATE_ALPHABET if alphabet is None else alphabet
    n = len(trace)
    verdict = np.full(n, int(Verdict.PENDING), dtype=np.int8)
    decide_idx = np.full(n, -1, dtype=np.int64)
    checks = _checks(prop)
    starts = np.arange(n, dtype=np.int64)

    dis_prefix = None
    if prop.disable_iff is not None:
        d = eval_expr(prop.disable_iff, trace, alphabet).astype(np.int64)
        dis_prefix = np.concatenate([[0], np.cumsum(d)])

    for idx, (off, role, e) in enumerate(checks):
        arr = eval_expr(e, trace, alphabet)
        pending = verdict == int(Verdict.PENDING)
        if not pending.any():
            break
        c = starts + off
        if dis_prefix is not None:
            upto = np.minimum(c, n - 1)
            window = (dis_prefix[upto + 1] - dis_prefix[starts]) > 0
            newly = pending & window
            verdict[newly] = int(Verdict.DISABLED)
            pending &= ~newly
        out = pending & (c >= n)
        verdict[out] = int(Verdict.INCOMPLETE)
        pending &= ~out
        cc = np.minimum(c, n - 1)
        bad = pending & ~arr[cc]
        verdict[bad] = int(Verdict.VACUOUS if role == _ANT else Verdict.FAILURE)
        decide_idx[bad] = idx
    verdict[verdict == int(Verdict.PENDING)] = int(Verdict.REAL_SUCCESS)
    return verdict, decide_idx


@dataclass
class DirectiveStats:
    name: str
    kind: str
    severity: str
    attempts: int = 0
    real_successes: int = 0
    failures: int = 0
    vacuous: int = 0
    disabled: int = 0
    incomplete: int = 0

    @property
    def matches(self) -> int:
        return self.real_successes

    def conserves(self) -> bool:
        return self.attempts == (
            self.real_successes + self.failures + self.vacuous + self.disabled + self.incomplete
        )


@dataclass(frozen=True)
class LogEvent:
    cycle: int
    directive: str
    start_cycle: int
    severity: str
    offending: str
    message: str

    def render(self) -> str:
        return (
            f"{self.directive}: started at {self.start_cycle} failed at {self.cycle} "
            f"Offending '{self.offending}'\n"
            f"{self.severity.capitalize()}: {self.directive}: at time {self.cycle} {self.message}"
        )


def _stats_from_verdicts(d: Directive, verdict: np.ndarray) -> DirectiveStats:
    counts = np.bincount(verdict, minlength=6)
    return DirectiveStats(
        name=d.name,
        kind=d.kind,
        severity=d.severity,
        attempts=int(len(verdict)),
        real_successes=int(counts[int(Verdict.REAL_SUCCESS)]),
        failures=int(counts[int(Verdict.FAILURE)]),
        vacuous=int(counts[int(Verdict.VACUOUS)]),
        disabled=int(counts[int(Verdict.DISABLED)]),
        incomplete=int(counts[int(Verdict.INCOMPLETE)]),
    )


def _offending(prop: PropertyDef, idx: int) -> tuple[int, str]:
    checks = _checks(prop)
    off, _, e = checks[idx]
    return off, expr_text(e)


def evaluate(
    trace: SignalTrace,
    suite: Sequence[Directive],
    alphabet: dict[str, int] | None = None,
) -> tuple[dict[str, DirectiveStats], list[LogEvent]]:
    """Evaluate every directive; returns per-directive stats and the
    failure event log ordered by (cycle, directive name).

    A failing fatal directive aborts evaluation: its own counters stop at
    the first failing attempt and later directives are not attempted.
    """
    stats: dict[str, DirectiveStats] = {}
    events: list[LogEvent] = []
    seen = set()
    for d in suite:
        if d.name in seen:
            raise ValueError(f"duplicate directive name {d.name!r}")
        seen.add(d.name)

    aborted = False
    for d in suite:
        if aborted:
            stats[d.name] = DirectiveStats(name=d.name, kind=d.kind, severity=d.severity)
            continue
        verdict, decide_idx = attempt_verdicts(trace, d.prop, alphabet)
        if d.kind == "assert" and d.severity == "fatal":
            fails = np.flatnonzero(verdict == int(Verdict.FAILURE))
            if fails.size:
                cut = int(fails[0]) + 1
                verdict = verdict[:cut]
                decide_idx = decide_idx[:cut]
                aborted = True
        stats[d.name] = _stats_from_verdicts(d, verdict)
        if d.kind == "assert":
            for t in np.flatnonzero(verdict == int(Verdict.FAILURE)):
                off, text = _offending(d.prop, int(decide_idx[t]))
                events.append(
                    LogEvent(
                        cycle=int(t) + off,
                        directive=d.name,
                        start_cycle=int(t),
                        severity=d.severity,
                        offending=text,
                        message=d.fail_message or "property failed",
                    )
                )
    events.sort(key=lambda ev: (ev.cycle, ev.directive, ev.start_cycle))
    return stats, events


def merge_stats(
    parts: Iterable[dict[str, DirectiveStats]],
) -> dict[str, DirectiveStats]:
    """Accumulate per-directive stats across runs (deterministic order)."""
    merged: dict[str, DirectiveStats] = {}
    for part in parts:
        for name, s in part.items():
            if name not in merged:
                merged[name] = DirectiveStats(name=s.name, kind=s.kind, severity=s.severity)
            m = merged[name]
            m.attempts += s.attempts
            m.real_successes += s.real_successes
            m.failures += s.failures
            m.vacuous += s.vacuous
            m.disabled += s.disabled
            m.incomplete += s.incomplete
    return merged


# -- built-in directive suite ---------------------------------------------------

_IDLE_STATES = (
    "rup0",
    "wdn0",
    "wup1",
    "rdn1",
    "wdna0",
    "rdn0",
    "wdn1",
    "rup1",
    "wup0",
    "rdna0",
    "s_done",
)


def _suite_sources(pause_delay: int) -> list[tuple[str, str, str, str | None, str | None]]:
    src: list[tuple[str, str, str, str | None, str | None]] = []

    def add(name, text, severity="error", pmsg=None, fmsg=None):
        src.append((name, text, severity, pmsg, fmsg))

    # counter loop invariants inside the long states
    add("Ap_loop_wdn0", "disable iff (state != wdn0) (state == wdn0 && count != c_min) |-> (state == wdn0)")
    add("Ap_loop_pause", "disable iff (state != pause) (state == pause && count != c_max) |-> (state == pause)")
    add("Ap_loop_done", "disable iff (state != s_done) (state == s_done && t_mode) |-> (state == s_done)")
    add("Ap_loop_rdna0", "disable iff (state != rdna0) (state == rdna0 && count != c_min) |-> (state == rdna0)")
    # reset escape from every march state
    for st in _IDLE_STATES:
        add(f"Ap_{st}_idle", f"(state == {st}) |=> (rst == 1 && state == s_idle)")
    # reset / idle behaviour
    add("Ap1", "rst |-> state == s_idle", "info", "property is succeeded", "property is failed")
    add("Ap6", "rst |-> stable(state)", "warning", "High rst no state transition", "state transition is not stable with rst")
    add("Ap9", "disable iff (rst == 1) !t_mode |-> state == s_idle")
    add("Ap11", "!(rst && t_mode)", "error", "input constraints is ok", "fatal is occured")
    # interface timing
    add("Ap2", "first_match(state == wdn0) |-> (t_mode && en)", "warning", "enable rose at right time", "enable is not at right time")
    add("Ap3", "first_match(state == rup0) |-> (t_mode && en)")
    add("Ap4", "first_match(state == wup1) |-> (t_mode && en)")
    add("Ap5", "disable iff (!t_mode) t_mode |-> en", "warning", "enable rise is ok", "enable gets delay")
    add("Ap7", f"(state == pause) |-> ##{pause_delay} (state == rdn0)")
    add("Ap8", "disable iff (rst) t_mode", "error", "t_mode and rst are synchronized", "t_mode and rst are not synchronized")
    add("Ap15", "match |-> pass")
    add("Ap16", "match |-> !(fail && pass)")
    add("Ap17", "t_mode |-> !(pass && fail)")
    # qualified forward transitions
    add("Ap10", "(state == pause && count == c_max) |=> (state == rdn0)", "warning", "rdn0 state transition is legal", "rdn0 state transition is illegal")
    add("Ap12", "(state == s_idle && count == c_min) |-> ##1 (state == wdn0)", "warning", "wdn0 state transition is legal", "wdn0 state transition is illegal")
    add("Ap13", "(state == wdn0 && count == c_min) |-> ##1 (state == rup0)", "warning", "rup0 state transition is legal", "rup0 state transition is illegal")
    add("Ap14", "(state == rup0 && count == c_max) |-> ##1 (state == wup1)", "warning", "wup1 state transition is legal", "wup1 state transition is illegal")
    # unqualified next-state checks, verbatim including the ones that fail
    # on every non-boundary cycle
    add("Ap18", "(state == wdna0) |=> (state == pause && count == c_min)")
    add("Ap19", "(state == s_idle) |=> (state == wdn0 && t_mode)")
    add("Ap20", "(state == wdn0) |=> (state == rup0 && count == c_min)")
    add("Ap21", "(state == rup0) |=> (state == wup1 && count == c_min)")
    add("Ap22", "(state == wup1) |=> (state == rdn1 && count == c_max)")
    add("Ap23", "(state == rdn1) |=> (state == wdna0 && count == c_max)")
    add("Ap24", "(state == pause) |=> (state == pause && !(count == c_max))")
    add("Ap25", "(state == pause) |=> (state == rdn0 && count == c_max)")
    add("Ap26", "(state == rdn0) |=> (state == wdn1 && count == c_max)")
    add("Ap27", "(state == wdn1) |=> (state == rup1 && count == c_min)")
    add("Ap28", "(state == rup1) |=> (state == wup0 && count == c_min)")
    add("Ap29", "(state == wup0) |=> (state == rdna0 && count == c_max)")
    add("Ap30", "(state == rdna0) |=> (state == rdna0 && !(count == c_min))")
    add("Ap31", "(state == rdna0) |=> (state == s_done && count == c_max)")
    # done state
    add("Ap32", "(state == s_done) |=> (state == s_done && !rst)")
    add("Ap33", "(state == s_done) |=> (state == s_idle && rst)")
    # datapath values
    add("Ap34", "(state == wdn0) |-> !(rw || g_patt)")
    add("Ap_check_idle_en", "disable iff (state != s_idle) ##1 (en == 0)")
    add("Ap_check_en_value", "disable iff (state == s_idle) (en == 1)")
    add("Ap_check_pause", "disable iff (state != pause) (en == 1) |-> stable(rw)")
    add("Ap_check_done", "disable iff (state != s_done) ##1 (done == 1) |-> (en == 0)")
    return src


def builtin_suite(pause_delay: int = 256) -> list[Directive]:
    """The controller's full directive suite: 53 asserts plus 53 covers.

    pause_delay parameterizes the one literal-delay check so the suite can
    follow the counter width; 256 matches the default 8-bit counter.
    """
    directives: list[Directive] = []
    covers: list[Directive] = []
    for name, text, severity, pmsg, fmsg in _suite_sources(pause_delay):
        prop = parse_property(text)
        directives.append(
            Directive(
                kind="assert",
                name=name,
                prop=prop,
                severity=severity,
                pass_message=pmsg,
                fail_message=fmsg,
            )
        )
        covers.append(Directive(kind="cover", name="Cp" + name[2:], prop=prop))
    return directives + covers


# -- reporting -------------------------------------------------------------------


def render_report(stats: dict[str, DirectiveStats], fmt: str = "text") -> str:
    """Assertion/cover tables in the classic verification-report layout."""
    asserts = sorted((s for s in stats.values() if s.kind == "assert"), key=lambda s: s.name)
    covers = sorted((s for s in stats.values() if s.kind == "cover"), key=lambda s: s.name)

    if fmt == "json":
        doc = {
            "asserts": [
                {
                    "name": s.name,
                    "severity": s.severity,
                    "attempts": s.attempts,
                    "real_successes": s.real_successes,
                    "failures": s.failures,
                    "vacuous": s.vacuous,
                    "disabled": s.disabled,
                    "incomplete": s.incomplete,
                }
                for s in asserts
            ],
            "covers": [
                {
                    "name": s.name,
                    "attempts": s.attempts,
                    "matches": s.matches,
                    "incomplete": s.incomplete,
                }
                for s in covers
            ],
            "summary": _summary(asserts, covers),
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")

    lines: list[str] = []
    name_w = max([len("ASSERTIONS")] + [len(s.name) for s in asserts + covers])
    lines.append("Detail Report for Assertions")
    lines.append("")
    header = f"{'ASSERTIONS':<{name_w}}  {'ATTEMPTS':>9} {'REAL SUCCESSES':>15} {'FAILURES':>9} {'INCOMPLETE':>11}"
    lines.append(header)
    for s in asserts:
        lines.append(
            f"{s.name:<{name_w}}  {s.attempts:>9} {s.real_successes:>15} {s.failures:>9} {s.incomplete:>11}"
        )
    lines.append("")
    lines.append("Detail Report for Cover Properties")
    lines.append("")
    lines.append(f"{'COVER PROPERTIES':<{name_w}}  {'ATTEMPTS':>9} {'MATCHES':>9} {'INCOMPLETE':>11}")
    for s in covers:
        lines.append(f"{s.name:<{name_w}}  {s.attempts:>9} {s.matches:>9} {s.incomplete:>11}")
    lines.append("")

    summary = _summary(asserts, covers)
    lines.append("Assertions by Category")
    lines.append(f"{'':<12}{'ASSERT':>8} {'COVER':>8}")
    lines.append(f"{'Total':<12}{summary['assert_total']:>8} {summary['cover_total']:>8}")
    lines.append("")
    lines.append("Assertions by Severity")
    lines.append(f"{'':<12}{'ASSERT':>8}")
    for sev in SEVERITIES:
        lines.append(f"{sev.capitalize():<12}{summary['by_severity'][sev]:>8}")
    lines.append("")
    return "\n".join(lines)


def _summary(asserts, covers) -> dict:
    return {
        "assert_total": len(asserts),
        "cover_total": len(covers),
        "assert_with_success": sum(1 for s in asserts if s.real_successes >= 1),
        "cover_with_match": sum(1 for s in covers if s.matches >= 1),
        "by_severity": {sev: sum(1 for s in asserts if s.severity == sev) for sev in SEVERITIES},
    }


def parse_report_json(text: str) -> dict[str, DirectiveStats]:
    """Inverse of render_report(fmt='json') for the stats it carries."""
    doc = json.loads(text)
    out: dict[str, DirectiveStats] = {}
    for row in doc["asserts"]:
        out[row["name"]] = DirectiveStats(
            name=row["name"],
            kind="assert",
            severity=row["severity"],
            attempts=row["attempts"],
            real_successes=row["real_successes"],
            failures=row["failures"],
            vacuous=row["vacuous"],
            disabled=row["disabled"],
            incomplete=row["incomplete"],
        )
    for row in doc["covers"]:
        out[row["name"]] = DirectiveStats(
            name=row["name"],
            kind="cover",
            severity="error",
            attempts=row["attempts"],
            real_successes=row["matches"],
            incomplete=row["incomplete"],
            vacuous=row["attempts"] - row["matches"] - row["incomplete"],
        )
    return out
