"""Benchmark engine: traversal address generation and the two run modes.

One engine owns one pseudo channel plus a route.  Latency mode issues reads
strictly serially (the next read starts only when the previous one finished);
throughput mode admits transactions in traversal order as fast as channel
timing permits, so bank-group interleaving between consecutive commands is
what hides timing restrictions.  The outstanding limit bounds the admission
queue depth; since commands issue in order, any depth >= 1 produces the same
timing and the knob exists to mirror the hardware configuration surface.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

from .addrmap import MappingPolicy, compile_decoder
from .dram import AccessClass, PseudoChannel

DEFAULT_TRACE_CAPACITY = 1024
DEFAULT_OUTSTANDING = 64


class ValidationError(ValueError):
    """A traversal parameter violates its constraint."""


def _is_pow2(x: int) -> bool:
    return x > 0 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class RstConfig:
    """Runtime parameters of one repetitive sequential traversal task.

    initial_addr (A), burst_bytes (B), stride (S) and working_set (W) are in
    bytes; count (N) is the number of transactions.
    """

    initial_addr: int
    burst_bytes: int
    stride: int
    working_set: int
    count: int

    def validate(self, policy: MappingPolicy) -> None:
        kind = policy.kind
        if not _is_pow2(self.burst_bytes):
            raise ValidationError("B must be a power of 2")
        if not _is_pow2(self.stride):
            raise ValidationError("S must be a power of 2")
        if not (_is_pow2(self.working_set) and self.working_set > 16):
            raise ValidationError("W (>16) must be a power of 2")
        if self.burst_bytes < kind.min_burst_bytes:
            raise ValidationError(
                f"B must be >= {kind.min_burst_bytes} for {kind.name}")
        if self.stride > self.working_set:
            raise ValidationError("S must not be larger than W")
        if self.burst_bytes > self.working_set:
            raise ValidationError("B must not be larger than W")
        if self.stride % kind.min_burst_bytes:
            raise ValidationError(
                f"S must be a multiple of the {kind.min_burst_bytes}-byte "
                f"minimum burst")
        if self.initial_addr % kind.min_burst_bytes:
            raise ValidationError("A must be aligned to the minimum burst")
        if self.count < 0:
            raise ValidationError("N must be >= 0")
        if self.initial_addr + self.working_set > kind.address_space_bytes:
            raise ValidationError(
                f"A + W exceeds the {kind.name} address space")


def gen_address(cfg: RstConfig, i: int) -> int:
    """Address of the i-th transaction: A + (i * S) mod W."""
    return cfg.initial_addr + (i * cfg.stride) % cfg.working_set


@dataclass(frozen=True)
class TraceEntry:
    index: int
    issue_cycle: int
    latency_cycles: int
    classification: AccessClass  # simulator ground truth (debug tag)


@dataclass
class LatencyTrace:
    """Ordered per-transaction latency samples; capped at ``capacity``."""

    entries: List[TraceEntry] = field(default_factory=list)
    capacity: int = DEFAULT_TRACE_CAPACITY

    def __len__(self) -> int:
        return len(self.entries)

    def latencies(self) -> List[int]:
        return [e.latency_cycles for e in self.entries]

    def hw_latency_bytes(self) -> bytes:
        """Hardware-style export: one byte per entry, clamped to 255."""
        return bytes(min(e.latency_cycles, 255) for e in self.entries)


@dataclass(frozen=True)
class ThroughputReport:
    transactions: int
    bytes_moved: int
    cycles: int
    gbps: float

    @staticmethod
    def build(transactions: int, bytes_moved: int, cycles: int,
              clock_mhz: float) -> "ThroughputReport":
        if cycles > 0:
            gbps = bytes_moved * clock_mhz * 1e6 / cycles / 1e9
        else:
            gbps = 0.0
        return ThroughputReport(transactions, bytes_moved, cycles, gbps)


class Engine:
    """Drives one channel through one traversal task."""

    def __init__(self, policy: MappingPolicy, channel: PseudoChannel,
                 route_extra_cycles: int = 0,
                 outstanding_limit: int = DEFAULT_OUTSTANDING):
        if outstanding_limit < 1:
            raise ValueError("outstanding_limit must be >= 1")
        self.policy = policy
        self.channel = channel
        self.route_extra = route_extra_cycles
        self.outstanding_limit = outstanding_limit
        self._decode = compile_decoder(policy)

    def _units(self, cfg: RstConfig, i: int):
        """Per-minimum-burst unit coordinates of transaction i.

        Units wrap inside [A, A + W) so bursts larger than the stride stay
        within the working set.
        """
        unit = self.policy.kind.min_burst_bytes
        lo = self.policy.kind.addr_field_lo
        offset = (i * cfg.stride) % cfg.working_set
        n = cfg.burst_bytes // unit
        dec = self._decode
        base = cfg.initial_addr
        w = cfg.working_set
        return [dec((base + (offset + k * unit) % w) >> lo) for k in range(n)]

    def run_read_latency(self, cfg: RstConfig,
                         capacity: int = DEFAULT_TRACE_CAPACITY) -> LatencyTrace:
        cfg.validate(self.policy)
        trace = LatencyTrace(capacity=capacity)
        issue = 0
        for i in range(cfg.count):
            units = self._units(cfg, i)
            completion, cls, _col = self.channel.service_units(units, issue)
            latency = completion - issue + self.route_extra
            if i < capacity:
                trace.entries.append(TraceEntry(i, issue, latency, cls))
            issue = issue + latency
        return trace

    def _run_throughput(self, cfg: RstConfig) -> ThroughputReport:
        cfg.validate(self.policy)
        n = cfg.count
        if n == 0:
            return ThroughputReport.build(0, 0, 0, self.channel.timing.clock_mhz)
        ch = self.channel
        max_completion = 0
        for i in range(n):
            completion, _cls, _col = ch.service_units(self._units(cfg, i), 0)
            if completion > max_completion:
                max_completion = completion
        return ThroughputReport.build(
            n, n * cfg.burst_bytes, max_completion,
            self.channel.timing.clock_mhz)

    def run_read_throughput(self, cfg: RstConfig) -> ThroughputReport:
        return self._run_throughput(cfg)

    def run_write_throughput(self, cfg: RstConfig) -> ThroughputReport:
        # Writes saturate the channel the same way; the timing model is
        # shared, so the write path differs only in not recording latencies.
        return self._run_throughput(cfg)
