"""Bit-accurate SRAM model with injectable defects.

Supported fault classes: stuck-at (SAF), transition (TF), address decoder
(AF), coupling (CF: inversion / idempotent / state) and data retention
(DRF).  Cells are individual bits; a word is a row of `width` cells.  Time
is an explicit cycle argument to read/write so the memory stays a passive
component of whatever drives it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

# Keeps enumeration sweeps and numpy timestamp arrays comfortably bounded.
MAX_CELLS = 1 << 20
MAX_WIDTH = 62


@dataclass(frozen=True)
class MemoryConfig:
    words: int
    width: int = 32

    def __post_init__(self):
        if self.words < 1 or self.width < 1:
            raise ValueError("words and width must be positive")
        if self.width > MAX_WIDTH:
            raise ValueError(f"width above implementation limit {MAX_WIDTH}")
        if self.words * self.width > MAX_CELLS:
            raise ValueError(f"cell count above implementation limit {MAX_CELLS}")

    @property
    def cells(self) -> int:
        return self.words * self.width

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


@dataclass(frozen=True)
class BitAddress:
    word: int
    bit: int


class Edge(Enum):
    RISING = "rising"
    FALLING = "falling"
    ANY = "any"


class DecayMode(Enum):
    TO_ZERO = "tozero"
    TO_ONE = "toone"
    COMPLEMENT = "complement"


@dataclass(frozen=True)
class StuckAt:
    cell: BitAddress
    value: int


@dataclass(frozen=True)
class Transition:
    """Cell cannot cross one write edge (rising: 0->1 blocked)."""

    cell: BitAddress
    blocked: Edge


@dataclass(frozen=True)
class NoAccess:
    addr: int


@dataclass(frozen=True)
class MapsTo:
    addr: int
    other: int


@dataclass(frozen=True)
class AlsoAccesses:
    addr: int
    other: int


AddressFault = Union[NoAccess, MapsTo, AlsoAccesses]


@dataclass(frozen=True)
class Inversion:
    trigger: Edge


@dataclass(frozen=True)
class Idempotent:
    trigger: Edge
    forced: int


@dataclass(frozen=True)
class StateCoupling:
    aggressor_value: int
    forced: int


@dataclass(frozen=True)
class Coupling:
    kind: Union[Inversion, Idempotent, StateCoupling]
    aggressor: BitAddress
    victim: BitAddress


@dataclass(frozen=True)
class Retention:
    """Cell decays once left unwritten longer than limit_cycles."""

    cell: BitAddress
    limit_cycles: int
    decay: DecayMode


FaultSpec = Union[StuckAt, Transition, NoAccess, MapsTo, AlsoAccesses, Coupling, Retention]


class FaultClass(Enum):
    SAF = "saf"
    TF = "tf"
    AF = "af"
    CFIN = "cfin"
    CFID = "cfid"
    CFST = "cfst"
    DRF = "drf"


def fault_class(fault: FaultSpec) -> FaultClass:
    if isinstance(fault, StuckAt):
        return FaultClass.SAF
    if isinstance(fault, Transition):
        return FaultClass.TF
    if isinstance(fault, (NoAccess, MapsTo, AlsoAccesses)):
        return FaultClass.AF
    if isinstance(fault, Coupling):
        if isinstance(fault.kind, Inversion):
            return FaultClass.CFIN
        if isinstance(fault.kind, Idempotent):
            return FaultClass.CFID
        return FaultClass.CFST
    if isinstance(fault, Retention):
        return FaultClass.DRF
    raise TypeError(f"not a fault spec: {fault!r}")


class FaultMemory:
    """Single-owner mutable memory instance; not safe for concurrent use."""

    def __init__(self, config: MemoryConfig):
        self.config = config
        self._data = [0] * config.words
        # Shadow of the last word written to each address as requested,
        # ignoring decoder faults; models the bus the decoder failed to drive.
        self._shadow = [0] * config.words
        self._last_write = np.zeros((config.words, config.width), dtype=np.int64)
        self._stuck: list[StuckAt] = []
        self._trans: list[Transition] = []
        self._af: list[AddressFault] = []
        self._coupling: list[Coupling] = []
        self._retention: list[Retention] = []

    # -- fault management ---------------------------------------------------

    def _check_cell(self, cell: BitAddress):
        if not (0 <= cell.word < self.config.words):
            raise ValueError(f"word {cell.word} out of range")
        if not (0 <= cell.bit < self.config.width):
            raise ValueError(f"bit {cell.bit} out of range")

    def _check_addr(self, addr: int):
        if not (0 <= addr < self.config.words):
            raise ValueError(f"address {addr} out of range")

    def inject(self, fault: FaultSpec):
        if isinstance(fault, StuckAt):
            self._check_cell(fault.cell)
            if fault.value not in (0, 1):
                raise ValueError("stuck value must be 0 or 1")
            self._stuck.append(fault)
        elif isinstance(fault, Transition):
            self._check_cell(fault.cell)
            if fault.blocked is Edge.ANY:
                raise ValueError("transition fault blocks rising or falling, not any")
            self._trans.append(fault)
        elif isinstance(fault, NoAccess):
            self._check_addr(fault.addr)
            self._af.append(fault)
        elif isinstance(fault, (MapsTo, AlsoAccesses)):
            self._check_addr(fault.addr)
            self._check_addr(fault.other)
            if fault.addr == fault.other:
                raise ValueError("decoder fault needs two distinct addresses")
            self._af.append(fault)
        elif isinstance(fault, Coupling):
            self._check_cell(fault.aggressor)
            self._check_cell(fault.victim)
            if fault.aggressor == fault.victim:
                raise ValueError("coupling aggressor and victim must differ")
            self._coupling.append(fault)
        elif isinstance(fault, Retention):
            self._check_cell(fault.cell)
            if fault.limit_cycles < 1:
                raise ValueError("retention limit must be >= 1")
            self._retention.append(fault)
        else:
            raise TypeError(f"not a fault spec: {fault!r}")

    def clear_faults(self):
        """Remove all injected faults; cell contents stay as they are."""
        self._stuck.clear()
        self._trans.clear()
        self._af.clear()
        self._coupling.clear()
        self._retention.clear()

    @property
    def faults(self) -> list[FaultSpec]:
        return [*self._stuck, *self._trans, *self._af, *self._coupling, *self._retention]

    # -- content helpers ----------------------------------------------------

    def fill(self, bit: int, cycle: int = 0):
        """Force every cell to `bit`, bypassing fault semantics.

        Models power-up content; timestamps reset to `cycle`.
        """
        word = self.config.mask if bit else 0
        for i in range(self.config.words):
            self._data[i] = word
            self._shadow[i] = word
        self._last_write.fill(cycle)

    def raw_word(self, addr: int) -> int:
        self._check_addr(addr)
        return self._data[addr]

    # -- access path --------------------------------------------------------

    def _resolve_af(self, addr: int) -> tuple[str, int, list[int]]:
        """First matching decoder fault wins; no chaining."""
        for f in self._af:
            if f.addr == addr:
                if isinstance(f, NoAccess):
                    return ("none", addr, [])
                if isinstance(f, MapsTo):
                    return ("mapped", f.other, [f.other])
                return ("also", addr, [addr, f.other])
        return ("direct", addr, [addr])

    def _store(self, addr: int, data: int, cycle: int):
        """Write one physical word, honouring per-bit cell faults."""
        old = self._data[addr]
        new = 0
        for bit in range(self.config.width):
            ob = (old >> bit) & 1
            nb = (data >> bit) & 1
            for t in self._trans:
                if t.cell.word == addr and t.cell.bit == bit:
                    if t.blocked is Edge.RISING and ob == 0 and nb == 1:
                        nb = ob
                    elif t.blocked is Edge.FALLING and ob == 1 and nb == 0:
                        nb = ob
            for s in self._stuck:
                if s.cell.word == addr and s.cell.bit == bit:
                    nb = s.value
            new |= nb << bit
        self._data[addr] = new
        self._last_write[addr, :] = cycle
        return old, new

    def _apply_coupling(self, transitions: dict[tuple[int, int], tuple[int, int]], cycle: int):
        """Fire write-triggered couplings off the direct write's bit edges."""
        for cf in self._coupling:
            if isinstance(cf.kind, StateCoupling):
                continue  # enforced at read time
            key = (cf.aggressor.word, cf.aggressor.bit)
            if key not in transitions:
                continue
            ob, nb = transitions[key]
            edge = None
            if ob == 0 and nb == 1:
                edge = Edge.RISING
            elif ob == 1 and nb == 0:
                edge = Edge.FALLING
            if edge is None:
                continue
            trigger = cf.kind.trigger
            if trigger is not Edge.ANY and trigger is not edge:
                continue
            vw, vb = cf.victim.word, cf.victim.bit
            cur = (self._data[vw] >> vb) & 1
            if isinstance(cf.kind, Inversion):
                forced = cur ^ 1
            else:
                forced = cf.kind.forced
            for s in self._stuck:
                if s.cell.word == vw and s.cell.bit == vb:
                    forced = s.value
            self._data[vw] = (self._data[vw] & ~(1 << vb)) | (forced << vb)
            self._last_write[vw, vb] = cycle

    def write(self, addr: int, data: int, cycle: int):
        self._check_addr(addr)
        data &= self.config.mask
        self._shadow[addr] = data
        _, _, targets = self._resolve_af(addr)
        transitions: dict[tuple[int, int], tuple[int, int]] = {}
        for t in targets:
            old, new = self._store(t, data, cycle)
            for bit in range(self.config.width):
                transitions[(t, bit)] = ((old >> bit) & 1, (new >> bit) & 1)
        if transitions:
            self._apply_coupling(transitions, cycle)

    def read(self, addr: int, cycle: int) -> int:
        self._check_addr(addr)
        kind, target, _ = self._resolve_af(addr)
        if kind == "none":
            # Undriven bit lines: pessimistically the complement of what the
            # address should be holding, so detection is deterministic.
            return (~self._shadow[addr]) & self.config.mask
        if kind == "also":
            other = next(f.other for f in self._af if f.addr == addr and isinstance(f, AlsoAccesses))
            a = self._read_word(addr, cycle)
            b = self._read_word(other, cycle)
            agree = ~(a ^ b) & self.config.mask
            # Disagreeing bits short the lines to an undefined level; model
            # it as the complement of the addressed cell's bit.
            return (a & agree) | (~a & ~agree & self.config.mask)
        return self._read_word(target, cycle)

    def _read_word(self, addr: int, cycle: int) -> int:
        value = self._data[addr]
        out = 0
        for bit in range(self.config.width):
            vb = (value >> bit) & 1
            for r in self._retention:
                if r.cell.word == addr and r.cell.bit == bit:
                    if cycle - int(self._last_write[addr, bit]) > r.limit_cycles:
                        if r.decay is DecayMode.TO_ZERO:
                            vb = 0
                        elif r.decay is DecayMode.TO_ONE:
                            vb = 1
                        else:
                            vb = vb ^ 1
            for cf in self._coupling:
                if not isinstance(cf.kind, StateCoupling):
                    continue
                if cf.victim.word != addr or cf.victim.bit != bit:
                    continue
                aw, ab = cf.aggressor.word, cf.aggressor.bit
                if (self._data[aw] >> ab) & 1 == cf.kind.aggressor_value:
                    vb = cf.kind.forced
            for s in self._stuck:
                if s.cell.word == addr and s.cell.bit == bit:
                    vb = s.value
            out |= vb << bit
        return out


def new_memory(config: MemoryConfig) -> FaultMemory:
    return FaultMemory(config)


def enumerate_faults(
    config: MemoryConfig,
    classes: set[FaultClass] | frozenset[FaultClass],
    neighborhood_limit: int = 64,
    drf_limit: int = 8,
) -> list[FaultSpec]:
    """Deterministic fault instance list for capability sweeps.

    Coupling pairs cover every ordered (aggressor, victim) combination,
    which is only tractable for small memories; the neighborhood_limit
    guard refuses larger ones.
    """
    if not classes:
        raise ValueError("need at least one fault class")
    cells = [
        BitAddress(w, b) for w in range(config.words) for b in range(config.width)
    ]
    out: list[FaultSpec] = []
    if FaultClass.SAF in classes:
        for c in cells:
            out.append(StuckAt(c, 0))
            out.append(StuckAt(c, 1))
    if FaultClass.TF in classes:
        for c in cells:
            out.append(Transition(c, Edge.RISING))
            out.append(Transition(c, Edge.FALLING))
    if FaultClass.AF in classes:
        for a in range(config.words):
            out.append(NoAccess(a))
        for a in range(config.words):
            for b in range(config.words):
                if a != b:
                    out.append(MapsTo(a, b))
        for a in range(config.words):
            for b in range(config.words):
                if a != b:
                    out.append(AlsoAccesses(a, b))
    wants_cf = classes & {FaultClass.CFIN, FaultClass.CFID, FaultClass.CFST}
    if wants_cf:
        if config.cells > neighborhood_limit:
            raise ValueError(
                f"coupling enumeration limited to {neighborhood_limit} cells "
                f"(got {config.cells})"
            )
        pairs = [(a, v) for a in cells for v in cells if a != v]
        if FaultClass.CFIN in classes:
            for a, v in pairs:
                for trig in (Edge.RISING, Edge.FALLING):
                    out.append(Coupling(Inversion(trig), a, v))
        if FaultClass.CFID in classes:
            for a, v in pairs:
                for trig in (Edge.RISING, Edge.FALLING):
                    for forced in (0, 1):
                        out.append(Coupling(Idempotent(trig, forced), a, v))
        if FaultClass.CFST in classes:
            for a, v in pairs:
                for av in (0, 1):
                    for forced in (0, 1):
                        out.append(Coupling(StateCoupling(av, forced), a, v))
    if FaultClass.DRF in classes:
        for c in cells:
            for mode in (DecayMode.TO_ZERO, DecayMode.TO_ONE, DecayMode.COMPLEMENT):
                out.append(Retention(c, drf_limit, mode))
    return out


_EDGES = {"rising": Edge.RISING, "falling": Edge.FALLING, "any": Edge.ANY}
_DECAYS = {m.value: m for m in DecayMode}


def parse_fault_spec(tokens: list[str]) -> FaultSpec:
    """Parse the CLI/scenario fault syntax: `<class> <params...>`.

    saf W B V | tf W B rising|falling | af noaccess A | af mapsto A B |
    af also A B | cfin AW AB VW VB EDGE | cfid AW AB VW VB EDGE F |
    cfst AW AB VW VB AV F | drf W B LIMIT MODE
    """
    if not tokens:
        raise ValueError("empty fault spec")
    kind, args = tokens[0].lower(), tokens[1:]
    try:
        if kind == "saf" and len(args) == 3:
            return StuckAt(BitAddress(int(args[0]), int(args[1])), int(args[2]))
        if kind == "tf" and len(args) == 3:
            return Transition(BitAddress(int(args[0]), int(args[1])), _EDGES[args[2]])
        if kind == "af" and len(args) >= 2:
            sub = args[0].lower()
            if sub == "noaccess" and len(args) == 2:
                return NoAccess(int(args[1]))
            if sub == "mapsto" and len(args) == 3:
                return MapsTo(int(args[1]), int(args[2]))
            if sub == "also" and len(args) == 3:
                return AlsoAccesses(int(args[1]), int(args[2]))
        if kind == "cfin" and len(args) == 5:
            return Coupling(
                Inversion(_EDGES[args[4]]),
                BitAddress(int(args[0]), int(args[1])),
                BitAddress(int(args[2]), int(args[3])),
            )
        if kind == "cfid" and len(args) == 6:
            return Coupling(
                Idempotent(_EDGES[args[4]], int(args[5])),
                BitAddress(int(args[0]), int(args[1])),
                BitAddress(int(args[2]), int(args[3])),
            )
        if kind == "cfst" and len(args) == 6:
            return Coupling(
                StateCoupling(int(args[4]), int(args[5])),
                BitAddress(int(args[0]), int(args[1])),
                BitAddress(int(args[2]), int(args[3])),
            )
        if kind == "drf" and len(args) == 4:
            return Retention(
                BitAddress(int(args[0]), int(args[1])), int(args[2]), _DECAYS[args[3]]
            )
    except (KeyError, ValueError) as exc:
        raise ValueError(f"bad fault spec {' '.join(tokens)!r}: {exc}") from None
    raise ValueError(f"bad fault spec {' '.join(tokens)!r}")


def format_fault_spec(fault: FaultSpec) -> str:
    if isinstance(fault, StuckAt):
        return f"saf {fault.cell.word} {fault.cell.bit} {fault.value}"
    if isinstance(fault, Transition):
        return f"tf {fault.cell.word} {fault.cell.bit} {fault.blocked.value}"
    if isinstance(fault, NoAccess):
        return f"af noaccess {fault.addr}"
    if isinstance(fault, MapsTo):
        return f"af mapsto {fault.addr} {fault.other}"
    if isinstance(fault, AlsoAccesses):
        return f"af also {fault.addr} {fault.other}"
    if isinstance(fault, Coupling):
        a, v = fault.aggressor, fault.victim
        if isinstance(fault.kind, Inversion):
            return f"cfin {a.word} {a.bit} {v.word} {v.bit} {fault.kind.trigger.value}"
        if isinstance(fault.kind, Idempotent):
            return (
                f"cfid {a.word} {a.bit} {v.word} {v.bit} "
                f"{fault.kind.trigger.value} {fault.kind.forced}"
            )
        return (
            f"cfst {a.word} {a.bit} {v.word} {v.bit} "
            f"{fault.kind.aggressor_value} {fault.kind.forced}"
        )
    if isinstance(fault, Retention):
        return (
            f"drf {fault.cell.word} {fault.cell.bit} "
            f"{fault.limit_cycles} {fault.decay.value}"
        )
    raise TypeError(f"not a fault spec: {fault!r}")
