"""March test algorithms: representation, parsing, printing and expansion.

Notation (ASCII form of the usual arrow glyphs):

    { b(w0); u(r0,w1); d(r1,w0) }

``u`` marches addresses up (0..n-1), ``d`` marches down (n-1..0) and ``b``
means either order is acceptable (resolved to up during expansion).
``pause(N)`` suspends marching for N idle cycles; a bare ``pause`` uses the
expansion-time default.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Union


class MarchOp(Enum):
    R0 = "r0"
    R1 = "r1"
    W0 = "w0"
    W1 = "w1"

    @property
    def is_read(self) -> bool:
        return self in (MarchOp.R0, MarchOp.R1)

    @property
    def bit(self) -> int:
        """Expected bit for reads, written bit for writes."""
        return 1 if self in (MarchOp.R1, MarchOp.W1) else 0


class Direction(Enum):
    UP = "u"
    DOWN = "d"
    EITHER = "b"


@dataclass(frozen=True)
class MarchingElement:
    direction: Direction
    ops: tuple[MarchOp, ...]

    def __post_init__(self):
        if not self.ops:
            raise ValueError("marching element needs at least one op")


@dataclass(frozen=True)
class PauseElement:
    """Idle element; cycles=None defers to the expansion default."""

    cycles: int | None = None

    def __post_init__(self):
        if self.cycles is not None and self.cycles < 1:
            raise ValueError("pause length must be >= 1")


MarchElement = Union[MarchingElement, PauseElement]


@dataclass(frozen=True)
class MarchAlgorithm:
    name: str
    elements: tuple[MarchElement, ...]

    def __post_init__(self):
        if not self.elements:
            raise ValueError("algorithm needs at least one element")


@dataclass(frozen=True)
class Access:
    """One memory operation produced by expansion."""

    addr: int
    op: MarchOp


@dataclass(frozen=True)
class PauseMark:
    """Marker for an idle stretch between accesses."""

    cycles: int


class MarchSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def op_count(alg: MarchAlgorithm) -> int:
    """Memory operations per cell: the coefficient of n in the test time."""
    return sum(
        len(e.ops) for e in alg.elements if isinstance(e, MarchingElement)
    )


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise MarchSyntaxError(f"expected '{ch}'", self.pos)
        self.pos += 1

    def word(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] == "_"
        ):
            self.pos += 1
        if self.pos == start:
            raise MarchSyntaxError("expected a token", start)
        return self.text[start : self.pos]

    def number(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise MarchSyntaxError("expected a number", start)
        return int(self.text[start : self.pos])


_DIRECTIONS = {"u": Direction.UP, "d": Direction.DOWN, "b": Direction.EITHER}
_OPS = {op.value: op for op in MarchOp}


def parse_march(text: str, name: str = "custom") -> MarchAlgorithm:
    """Parse `{ elem (; elem)* }` March notation.

    Raises MarchSyntaxError (with position) on malformed input.
    """
    s = _Scanner(text)
    s.expect("{")
    elements: list[MarchElement] = []
    while True:
        elements.append(_parse_element(s))
        if s.peek() == ";":
            s.expect(";")
            continue
        break
    s.expect("}")
    s.skip_ws()
    if s.pos != len(text):
        raise MarchSyntaxError("trailing input after '}'", s.pos)
    return MarchAlgorithm(name=name, elements=tuple(elements))


def _parse_element(s: _Scanner) -> MarchElement:
    s.skip_ws()
    start = s.pos
    word = s.word()
    if word == "pause":
        if s.peek() == "(":
            s.expect("(")
            npos = s.pos
            n = s.number()
            s.expect(")")
            if n < 1:
                raise MarchSyntaxError("pause length must be >= 1", npos)
            return PauseElement(cycles=n)
        return PauseElement(cycles=None)
    if word not in _DIRECTIONS:
        raise MarchSyntaxError(f"unknown element head {word!r}", start)
    direction = _DIRECTIONS[word]
    s.expect("(")
    ops = []
    while True:
        oppos = s.pos
        tok = s.word()
        if tok not in _OPS:
            raise MarchSyntaxError(f"unknown op token {tok!r}", oppos)
        ops.append(_OPS[tok])
        if s.peek() == ",":
            s.expect(",")
            continue
        break
    s.expect(")")
    if not ops:
        raise MarchSyntaxError("empty op list", start)
    return MarchingElement(direction=direction, ops=tuple(ops))


def format_march(alg: MarchAlgorithm) -> str:
    """Canonical single-line notation; inverse of parse_march."""
    parts = []
    for e in alg.elements:
        if isinstance(e, PauseElement):
            parts.append("pause" if e.cycles is None else f"pause({e.cycles})")
        else:
            ops = ",".join(op.value for op in e.ops)
            parts.append(f"{e.direction.value}({ops})")
    return "{ " + "; ".join(parts) + " }"


def expand(
    alg: MarchAlgorithm,
    n: int,
    pause_cycles: int | None = None,
) -> list[Access | PauseMark]:
    """Expand to the concrete access sequence over an n-word memory.

    Up elements apply the full op list to each address 0..n-1 in turn,
    down elements go n-1..0, and Either is resolved to up so that runs
    stay deterministic.  Pause elements become PauseMark entries; those
    without an explicit length use pause_cycles (default: n).
    """
    if n < 1:
        raise ValueError("memory must have at least one word")
    default_pause = n if pause_cycles is None else pause_cycles
    out: list[Access | PauseMark] = []
    for e in alg.elements:
        if isinstance(e, PauseElement):
            out.append(PauseMark(e.cycles if e.cycles is not None else default_pause))
            continue
        addrs: Iterator[int]
        if e.direction is Direction.DOWN:
            addrs = range(n - 1, -1, -1)
        else:
            addrs = range(n)
        for addr in addrs:
            for op in e.ops:
                out.append(Access(addr, op))
    return out


def _alg(name: str, text: str) -> MarchAlgorithm:
    return parse_march(text, name=name)


# Classic single-bit-background March tests, plus the modified March C
# variants this workbench is built around.  march_c_fsm is the exact
# single-op-per-pass sequence the FSM controller walks (one state per pass,
# with the counter-timed pause between the w0-down and r0-down passes).
_BUILTINS: dict[str, MarchAlgorithm] = {
    alg.name: alg
    for alg in [
        _alg("mats+", "{ b(w0); u(r0,w1); d(r1,w0) }"),
        _alg("mats++", "{ b(w0); u(r0,w1); d(r1,w0,r0) }"),
        _alg("march_x", "{ b(w0); u(r0,w1); d(r1,w0); b(r0) }"),
        _alg("march_c-", "{ b(w0); u(r0,w1); u(r1,w0); d(r0,w1); d(r1,w0); b(r0) }"),
        _alg("march_a", "{ b(w0); u(r0,w1,w0,w1); u(r1,w0,w1); d(r1,w0,w1,w0); d(r0,w1,w0) }"),
        _alg("march_b", "{ b(w0); u(r0,w1,r1,w0,r0,w1); u(r1,w0,w1); d(r1,w0,w1,w0); d(r0,w1,w0) }"),
        _alg("march_sr", "{ d(w0); u(r0,w1,r1,w0); d(r0,r0); u(w1); d(r1,w0,r0,w1); u(r1,r1) }"),
        _alg(
            "march_ss",
            "{ b(w0); u(r0,r0,w0,r0,w1); u(r1,r1,w1,r1,w0); "
            "d(r0,r0,w0,r0,w1); d(r1,r1,w1,r1,w0); b(r0) }",
        ),
        _alg("march_diag", "{ b(w0); u(r0,w1); b(w1,r1); d(r1,w0,r0); b(w0,r0) }"),
        _alg(
            "march_c_pause",
            "{ b(w0); u(r0,w1); u(r1,w0); pause; d(r0,w1); d(r1,w0); b(r0) }",
        ),
        _alg(
            "march_c_fsm",
            "{ d(w0); u(r0); u(w1); d(r1); d(w0); pause; d(r0); d(w1); u(r1); u(w0); d(r0) }",
        ),
    ]
}


class UnknownAlgorithmError(KeyError):
    def __init__(self, name: str):
        valid = ", ".join(sorted(_BUILTINS))
        super().__init__(f"unknown algorithm {name!r}; valid names: {valid}")
        self.name = name


def builtin(name: str) -> MarchAlgorithm:
    """Look up a registered algorithm by name."""
    try:
        return _BUILTINS[name]
    except KeyError:
        raise UnknownAlgorithmError(name) from None


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)
