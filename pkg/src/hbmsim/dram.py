"""Cycle-approximate timing model for one pseudo channel.

Tracks per-bank row-buffer state, activate/precharge latencies, per-bank-group
column-command spacing, a global command-rate floor, data-bus occupancy and
the periodic refresh schedule.  One column command is issued per minimum-burst
unit, so layouts that interleave the low bank-group bit across consecutive
units genuinely spread consecutive commands over bank groups.
"""

from __future__ import annotations

import bisect
import enum
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .addrmap import DecodedAddress, MemoryKind

NUM_BANK_GROUPS = 4
NUM_BANKS_PER_GROUP = 4


class AccessClass(enum.Enum):
    PAGE_HIT = "hit"
    PAGE_CLOSED = "closed"
    PAGE_MISS = "miss"
    REFRESH = "refresh"  # deferred past a refresh window


@dataclass(frozen=True)
class TimingParams:
    """Clock and DRAM timing constants for one memory kind.

    All command timings are in cycles of the channel clock; the refresh
    interval and stall are in nanoseconds.  ``efficiency_overhead`` is a
    fixed per-transaction data-bus overhead (may be fractional) calibrated
    against sustained sequential throughput.  ``t_cmd`` is the minimum
    spacing between the first column commands of successive transactions,
    modeling the controller's per-transaction command processing rate.
    ``t_faw`` caps the activate rate: a new activate may not issue sooner
    than t_faw cycles after the fourth-most-recent one (0 disables).
    ``shared_cmd_bus`` models a single command bus where precharge and
    activate commands occupy slots that column commands could have used
    (DDR4); HBM has split row/column command buses and leaves it off.
    """

    clock_mhz: float
    t_cas: int
    t_rcd: int
    t_rp: int
    t_ras: int          # minimum activate -> precharge spacing
    t_ccd_s: int        # column-to-column, different bank group
    t_ccd_l: int        # column-to-column, same bank group
    t_cmd: int          # per-transaction command-rate floor
    t_refi_ns: float
    t_rfc_ns: float
    bus_bytes_per_cycle: int
    efficiency_overhead: float = 0.0
    t_faw: int = 0      # four-activate window (0 = unconstrained)
    shared_cmd_bus: bool = False

    def __post_init__(self):
        if not (self.t_ccd_l >= self.t_ccd_s >= 1):
            raise ValueError("require t_ccd_l >= t_ccd_s >= 1")
        if self.t_refi_ns <= self.t_rfc_ns:
            raise ValueError("require t_refi > t_rfc")
        for name in ("t_cas", "t_rcd", "t_rp", "t_ras", "t_cmd", "t_faw"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def t_refi_cycles(self) -> int:
        return round(self.t_refi_ns * self.clock_mhz / 1000.0)

    @property
    def t_rfc_cycles(self) -> int:
        return round(self.t_rfc_ns * self.clock_mhz / 1000.0)

    def hit_latency(self) -> int:
        return self.t_cas

    def closed_latency(self) -> int:
        return self.t_cas + self.t_rcd

    def miss_latency(self) -> int:
        return self.t_cas + self.t_rp + self.t_rcd

    def cycles_to_ns(self, cycles: float) -> float:
        return cycles * 1000.0 / self.clock_mhz


# Calibrated presets for the two memory controllers of the target board.
# t_ccd/t_cmd/t_ras and the efficiency overhead are free parameters tuned
# so sustained sequential throughput and the policy/stride trends match the
# measured board; latencies (t_cas/t_rcd/t_rp) are exact fits.
TIMING_PRESETS = {
    "hbm-u280": TimingParams(
        clock_mhz=450.0, t_cas=48, t_rcd=7, t_rp=7, t_ras=23,
        t_ccd_s=1, t_ccd_l=2, t_cmd=2,
        t_refi_ns=7800.0, t_rfc_ns=160.0,
        bus_bytes_per_cycle=32, efficiency_overhead=0.09),
    "ddr4-u280": TimingParams(
        clock_mhz=300.0, t_cas=22, t_rcd=5, t_rp=5, t_ras=24,
        t_ccd_s=1, t_ccd_l=2, t_cmd=1,
        t_refi_ns=7800.0, t_rfc_ns=350.0,
        bus_bytes_per_cycle=64, efficiency_overhead=0.0, t_faw=9,
        shared_cmd_bus=True),
}

KIND_PRESET = {"hbm": "hbm-u280", "ddr4": "ddr4-u280"}


def refresh_windows(params: TimingParams, up_to: int) -> List[Tuple[int, int]]:
    """Refresh stall windows [(start, end), ...] with start < up_to.

    Windows begin at k * t_refi (k >= 1) and last t_rfc; all banks are
    closed once a window has passed.
    """
    refi = params.t_refi_cycles
    rfc = params.t_rfc_cycles
    out = []
    start = refi
    while start < up_to:
        out.append((start, start + rfc))
        start += refi
    return out


@dataclass
class BankState:
    open_row: Optional[int] = None


_NEG_INF = -(1 << 60)


class PseudoChannel:
    """Single-owner state machine for one pseudo channel.

    Not thread safe; distinct channels never interact and may be simulated
    in parallel.
    """

    def __init__(self, kind: MemoryKind, timing: Optional[TimingParams] = None):
        self.kind = kind
        self.timing = timing or TIMING_PRESETS[KIND_PRESET[kind.name]]
        n = NUM_BANK_GROUPS * NUM_BANKS_PER_GROUP
        self._open_row: List[Optional[int]] = [None] * n
        self._bank_free: List[int] = [0] * n
        self._last_act: List[int] = [_NEG_INF] * n
        self._last_col_bg: List[int] = [_NEG_INF] * NUM_BANK_GROUPS
        self._last_col_any: int = _NEG_INF
        self._last_txn_col: int = _NEG_INF
        self._act_window: List[int] = []  # up to 4 most recent activates
        self._bus_free: float = 0.0
        self._next_refresh: int = self.timing.t_refi_cycles
        self.now: int = 0

    # -- inspection ------------------------------------------------------

    def bank_state(self, bank_group: int, bank: int) -> BankState:
        return BankState(self._open_row[bank_group * NUM_BANKS_PER_GROUP + bank])

    def classify_access(self, coords: DecodedAddress) -> AccessClass:
        """What a transaction at ``coords`` would see right now."""
        open_row = self._open_row[coords.bank_group * NUM_BANKS_PER_GROUP
                                  + coords.bank]
        if open_row is None:
            return AccessClass.PAGE_CLOSED
        if open_row == coords.row:
            return AccessClass.PAGE_HIT
        return AccessClass.PAGE_MISS

    # -- scheduling ------------------------------------------------------

    def _apply_refresh(self) -> None:
        end = self._next_refresh + self.timing.t_rfc_cycles
        for i in range(len(self._open_row)):
            self._open_row[i] = None
            if self._bank_free[i] < end:
                self._bank_free[i] = end
            self._last_act[i] = _NEG_INF
        self._act_window = []
        if self._bus_free < end:
            self._bus_free = float(end)
        self._next_refresh += self.timing.t_refi_cycles

    def _unit_col(self, unit, base, first, last_col_bg, last_col_any,
                  last_txn_col, open_row, bank_free, last_act):
        """Earliest column-command cycle for one unit given scratch state."""
        t = self.timing
        row, bg, bank, _col = unit
        bi = bg * NUM_BANKS_PER_GROUP + bank
        avail = base if base > bank_free[bi] else bank_free[bi]
        cur = open_row[bi]
        faw_floor = (self._act_window[0] + t.t_faw
                     if t.t_faw and len(self._act_window) == 4 else _NEG_INF)
        if cur is None:
            cls = AccessClass.PAGE_CLOSED
            act = avail if avail > faw_floor else faw_floor
            col = act + t.t_rcd
        elif cur == row:
            cls = AccessClass.PAGE_HIT
            act = None
            col = avail
        else:
            cls = AccessClass.PAGE_MISS
            pre = avail
            ras_ok = last_act[bi] + t.t_ras
            if pre < ras_ok:
                pre = ras_ok
            act = pre + t.t_rp
            if act < faw_floor:
                act = faw_floor
            col = act + t.t_rcd
        c = last_col_bg[bg] + t.t_ccd_l
        if col < c:
            col = c
        c = last_col_any + t.t_ccd_s
        if col < c:
            col = c
        if first:
            c = last_txn_col + t.t_cmd
            if col < c:
                col = c
        # data beat for this unit rides the bus at col + t_cas; when the
        # bus is the binding constraint the command slot inherits the
        # fractional backlog so per-transaction overhead accumulates
        # instead of rounding up to whole cycles
        c = self._bus_free - t.t_cas
        if col < c:
            col = c
        return col, cls, act, bi, bg

    def service_units(self, units: Sequence[Tuple[int, int, int, int]],
                      issue_cycle: int) -> Tuple[int, AccessClass, int]:
        """Schedule one transaction made of per-minimum-burst units.

        Each unit is a (row, bank_group, bank, column) tuple.  Returns
        (completion_cycle, classification, first_column_cmd_cycle); the
        classification is the first unit's, or REFRESH if the transaction
        was deferred past a refresh window.
        """
        t = self.timing
        base = issue_cycle
        deferred = False
        while True:
            saved_bg = list(self._last_col_bg)
            saved_any = self._last_col_any
            saved_acts = list(self._act_window)
            undo_banks = []
            cols = []
            first_col = None
            cls_first = None
            for k, unit in enumerate(units):
                col, cls, act, bi, bg = self._unit_col(
                    unit, base, k == 0, self._last_col_bg,
                    self._last_col_any, self._last_txn_col,
                    self._open_row, self._bank_free, self._last_act)
                undo_banks.append((bi, self._open_row[bi],
                                   self._bank_free[bi], self._last_act[bi]))
                self._open_row[bi] = unit[0]
                self._bank_free[bi] = col + 1
                if act is not None:
                    self._last_act[bi] = act
                    if self.timing.t_faw:
                        bisect.insort(self._act_window, act)
                        if len(self._act_window) > 4:
                            self._act_window.pop(0)
                if k == 0:
                    first_col = col
                    cls_first = cls
                if col > self._last_col_bg[bg]:
                    self._last_col_bg[bg] = col
                self._last_col_any = col
                if t.shared_cmd_bus and act is not None:
                    # row commands occupy command-bus slots behind this
                    # column command, delaying the next one
                    self._last_col_any += (
                        2 if cls is AccessClass.PAGE_MISS else 1)
                cols.append(col)
            completion = cols[-1] + t.t_cas
            if completion >= self._next_refresh:
                # roll back and retry past the refresh window
                for bi, row_v, free_v, act_v in reversed(undo_banks):
                    self._open_row[bi] = row_v
                    self._bank_free[bi] = free_v
                    self._last_act[bi] = act_v
                self._last_col_bg = saved_bg
                self._last_col_any = saved_any
                self._act_window = saved_acts
                end = self._next_refresh + t.t_rfc_cycles
                self._apply_refresh()
                base = max(base, end)
                deferred = True
                continue
            break
        self._last_txn_col = first_col
        for k, col in enumerate(cols):
            data = col + t.t_cas
            if data + 1 > self._bus_free:
                self._bus_free = data + 1.0
        self._bus_free += t.efficiency_overhead
        if completion > self.now:
            self.now = completion
        cls = AccessClass.REFRESH if deferred else cls_first
        return completion, cls, first_col

    # -- single-coordinate convenience API --------------------------------

    def service_read(self, coords: DecodedAddress, burst_bytes: int,
                     issue_cycle: int) -> Tuple[int, AccessClass]:
        """Single-command read of ``burst_bytes`` at one coordinate.

        Multi-beat bursts occupy the bus for burst/bus cycles; callers that
        know the per-unit coordinates (the engine) should use
        :meth:`service_units` instead so bank-group interleaving is modeled.
        """
        if burst_bytes % self.timing.bus_bytes_per_cycle:
            raise ValueError("burst_bytes must be a multiple of the bus width")
        beats = burst_bytes // self.timing.bus_bytes_per_cycle
        completion, cls, first_col = self.service_units(
            [coords.as_tuple()], issue_cycle)
        if beats > 1:
            completion += beats - 1
            self._bus_free += beats - 1
            if completion > self.now:
                self.now = completion
        return completion, cls

    def service_write(self, coords: DecodedAddress, burst_bytes: int,
                      issue_cycle: int) -> int:
        """Writes share the read timing model; only throughput is reported."""
        completion, _cls = self.service_read(coords, burst_bytes, issue_cycle)
        return completion
