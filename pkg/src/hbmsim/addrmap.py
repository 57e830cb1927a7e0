"""Address mapping between application byte addresses and DRAM coordinates.

A mapping policy is an ordered list of bit-field segments (most significant
first) that slices the decoded address field into row / bank group / bank /
column indices.  Policies are plain data, so custom layouts can be supplied
from config files in addition to the named built-ins.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple


class Field(enum.Enum):
    ROW = "row"
    BANK_GROUP = "bank_group"
    BANK = "bank"
    COLUMN = "column"


class AddressAlignmentError(ValueError):
    pass


class AddressRangeError(ValueError):
    pass


class CoordinateRangeError(ValueError):
    pass


@dataclass(frozen=True)
class MemoryKind:
    """Static geometry of one memory flavor (per channel)."""

    name: str
    addr_field_lo: int       # lowest decoded address bit (burst offset below)
    addr_field_hi: int       # highest decoded address bit
    min_burst_bytes: int
    bus_bytes_per_cycle: int
    clock_mhz: float

    @property
    def field_width(self) -> int:
        return self.addr_field_hi - self.addr_field_lo + 1

    @property
    def address_space_bytes(self) -> int:
        return 1 << (self.addr_field_hi + 1)

    def __post_init__(self):
        assert self.min_burst_bytes == 1 << self.addr_field_lo


HBM = MemoryKind("hbm", addr_field_lo=5, addr_field_hi=27,
                 min_burst_bytes=32, bus_bytes_per_cycle=32, clock_mhz=450.0)
DDR4 = MemoryKind("ddr4", addr_field_lo=6, addr_field_hi=33,
                  min_burst_bytes=64, bus_bytes_per_cycle=64, clock_mhz=300.0)

KINDS = {"hbm": HBM, "ddr4": DDR4}

# Per-field index widths implied by the geometry.
_FIELD_WIDTHS = {
    "hbm": {Field.ROW: 14, Field.BANK_GROUP: 2, Field.BANK: 2, Field.COLUMN: 5},
    "ddr4": {Field.ROW: 17, Field.BANK_GROUP: 2, Field.BANK: 2, Field.COLUMN: 7},
}


@dataclass(frozen=True)
class DecodedAddress:
    row: int
    bank_group: int
    bank: int
    column: int

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.row, self.bank_group, self.bank, self.column)


@dataclass(frozen=True)
class MappingPolicy:
    """Named segment layout for one memory kind.

    ``segments`` is ordered most significant first; a field split across
    several segments concatenates the earlier segment as the high-order bits.
    """

    name: str
    kind: MemoryKind
    segments: Tuple[Tuple[Field, int], ...]

    def __post_init__(self):
        total = sum(w for _, w in self.segments)
        if total != self.kind.field_width:
            raise ValueError(
                f"policy {self.name}: segment widths sum to {total}, "
                f"expected {self.kind.field_width} for {self.kind.name}")
        expected = _FIELD_WIDTHS[self.kind.name]
        for field in Field:
            got = sum(w for f, w in self.segments if f is field)
            if got != expected[field]:
                raise ValueError(
                    f"policy {self.name}: {field.value} width {got}, "
                    f"expected {expected[field]}")

    def field_width(self, field: Field) -> int:
        return sum(w for f, w in self.segments if f is field)

    def field_layout(self) -> Tuple[Tuple[Field, int], ...]:
        return self.segments


def _build(name: str, kind: MemoryKind,
           layout: Iterable[Tuple[Field, int]]) -> MappingPolicy:
    return MappingPolicy(name, kind, tuple(layout))


_R, _G, _B, _C = Field.ROW, Field.BANK_GROUP, Field.BANK, Field.COLUMN

HBM_POLICIES = {
    "RBC": _build("RBC", HBM, [(_R, 14), (_G, 2), (_B, 2), (_C, 5)]),
    "RCB": _build("RCB", HBM, [(_R, 14), (_C, 5), (_G, 2), (_B, 2)]),
    "BRC": _build("BRC", HBM, [(_G, 2), (_B, 2), (_R, 14), (_C, 5)]),
    "RGBCG": _build("RGBCG", HBM, [(_R, 14), (_G, 1), (_B, 2), (_C, 5), (_G, 1)]),
    "BRGCG": _build("BRGCG", HBM, [(_B, 2), (_R, 14), (_G, 1), (_C, 5), (_G, 1)]),
}

DDR4_POLICIES = {
    "RBC": _build("RBC", DDR4, [(_R, 17), (_G, 2), (_B, 2), (_C, 7)]),
    "RCB": _build("RCB", DDR4, [(_R, 17), (_C, 7), (_B, 2), (_G, 2)]),
    "BRC": _build("BRC", DDR4, [(_G, 2), (_B, 2), (_R, 17), (_C, 7)]),
    "RCBI": _build("RCBI", DDR4, [(_R, 17), (_C, 6), (_B, 2), (_C, 1), (_G, 2)]),
}

DEFAULT_POLICY = {"hbm": "RGBCG", "ddr4": "RCB"}


def policies_for(kind: MemoryKind) -> dict:
    return HBM_POLICIES if kind is HBM or kind.name == "hbm" else DDR4_POLICIES


def get_policy(name: str, kind: MemoryKind) -> MappingPolicy:
    """Look up a built-in policy by name, case-insensitive."""
    table = policies_for(kind)
    key = name.upper()
    if key not in table:
        raise KeyError(
            f"unknown policy {name!r} for {kind.name}; "
            f"valid: {', '.join(sorted(table))}")
    return table[key]


def policy_from_layout(name: str, kind: MemoryKind,
                       layout: Sequence[Sequence]) -> MappingPolicy:
    """Build a custom policy from [[field_name, width], ...] config data."""
    fields = {f.value: f for f in Field}
    segs = []
    for item in layout:
        fname, width = item
        if fname not in fields:
            raise ValueError(f"unknown field name {fname!r}")
        segs.append((fields[fname], int(width)))
    return MappingPolicy(name, kind, tuple(segs))


def _check_address(policy: MappingPolicy, byte_addr: int) -> None:
    kind = policy.kind
    if byte_addr < 0 or byte_addr >= kind.address_space_bytes:
        raise AddressRangeError(
            f"address {byte_addr:#x} outside {kind.name} space "
            f"(< {kind.address_space_bytes:#x})")
    if byte_addr & (kind.min_burst_bytes - 1):
        raise AddressAlignmentError(
            f"address {byte_addr:#x} not aligned to "
            f"{kind.min_burst_bytes}-byte burst")


def decode(policy: MappingPolicy, byte_addr: int) -> DecodedAddress:
    """Split a byte address into (row, bank group, bank, column)."""
    _check_address(policy, byte_addr)
    field = byte_addr >> policy.kind.addr_field_lo
    acc = {Field.ROW: 0, Field.BANK_GROUP: 0, Field.BANK: 0, Field.COLUMN: 0}
    remaining = policy.kind.field_width
    for f, w in policy.segments:
        remaining -= w
        val = (field >> remaining) & ((1 << w) - 1)
        acc[f] = (acc[f] << w) | val
    return DecodedAddress(row=acc[Field.ROW], bank_group=acc[Field.BANK_GROUP],
                          bank=acc[Field.BANK], column=acc[Field.COLUMN])


def encode(policy: MappingPolicy, coords: DecodedAddress) -> int:
    """Inverse of :func:`decode`; returns the aligned byte address."""
    values = {Field.ROW: coords.row, Field.BANK_GROUP: coords.bank_group,
              Field.BANK: coords.bank, Field.COLUMN: coords.column}
    for f, v in values.items():
        width = policy.field_width(f)
        if v < 0 or v >= (1 << width):
            raise CoordinateRangeError(
                f"{f.value}={v} exceeds {width}-bit field of {policy.name}")
    consumed = {f: 0 for f in Field}
    field = 0
    for f, w in policy.segments:
        total = policy.field_width(f)
        consumed[f] += w
        part = (values[f] >> (total - consumed[f])) & ((1 << w) - 1)
        field = (field << w) | part
    return field << policy.kind.addr_field_lo


def field_layout(policy: MappingPolicy) -> Tuple[Tuple[Field, int], ...]:
    """The exact segment list used by decode/encode, MSB first."""
    return policy.field_layout()


def compile_decoder(policy: MappingPolicy):
    """Return a fast field -> (row, bg, bank, col) function for hot loops.

    Takes the already-shifted address field (byte_addr >> addr_field_lo)
    and performs no validation.
    """
    # (field, shift_in_addr_field, mask, shift_into_value)
    ops = {f: [] for f in Field}
    remaining = policy.kind.field_width
    consumed = {f: 0 for f in Field}
    for f, w in policy.segments:
        remaining -= w
        consumed[f] += w
        dest_shift = policy.field_width(f) - consumed[f]
        ops[f].append((remaining, (1 << w) - 1, dest_shift))

    row_ops = ops[Field.ROW]
    bg_ops = ops[Field.BANK_GROUP]
    bank_ops = ops[Field.BANK]
    col_ops = ops[Field.COLUMN]

    def decode_field(field: int):
        row = 0
        for s, m, d in row_ops:
            row |= ((field >> s) & m) << d
        bg = 0
        for s, m, d in bg_ops:
            bg |= ((field >> s) & m) << d
        bank = 0
        for s, m, d in bank_ops:
            bank |= ((field >> s) & m) << d
        col = 0
        for s, m, d in col_ops:
            col |= ((field >> s) & m) << d
        return row, bg, bank, col

    return decode_field
