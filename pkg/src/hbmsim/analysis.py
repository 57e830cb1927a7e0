"""Post-processing of latency traces and throughput reports."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .dram import AccessClass, TimingParams
from .engine import LatencyTrace, ThroughputReport


class InsufficientDataError(ValueError):
    pass


@dataclass
class LatencyHistogram:
    buckets: Dict[int, int] = field(default_factory=dict)
    modal_latency: Optional[int] = None
    populations: Dict[str, int] = field(default_factory=lambda: {
        "hit": 0, "closed": 0, "miss": 0, "refresh": 0})

    def total(self) -> int:
        return sum(self.buckets.values())


@dataclass(frozen=True)
class RefreshEstimate:
    interval_ns: float
    spike_count: int
    spike_threshold: int
    spike_issue_cycles: Tuple[int, ...] = ()


def modal_latency(trace: LatencyTrace) -> Optional[int]:
    if not trace.entries:
        return None
    counts = Counter(trace.latencies())
    # deterministic tie-break: smallest latency among the most common
    best = max(counts.values())
    return min(l for l, c in counts.items() if c == best)


def default_spike_threshold(trace: LatencyTrace,
                            params: Optional[TimingParams] = None) -> int:
    """Modal latency plus the worst page-miss overhead plus slack."""
    modal = modal_latency(trace)
    if modal is None:
        raise InsufficientDataError("empty trace")
    extra = (params.t_rp + params.t_rcd + 10) if params is not None else 25
    return modal + extra


def detect_refresh_interval(trace: LatencyTrace, clock_mhz: float,
                            spike_threshold: Optional[int] = None,
                            params: Optional[TimingParams] = None
                            ) -> RefreshEstimate:
    """Estimate the refresh period from latency spikes in a serial trace."""
    if spike_threshold is None:
        spike_threshold = default_spike_threshold(trace, params)
    spikes = [e.issue_cycle for e in trace.entries
              if e.latency_cycles > spike_threshold]
    if len(spikes) < 2:
        raise InsufficientDataError(
            f"need >= 2 spikes above {spike_threshold} cycles, "
            f"found {len(spikes)}")
    gaps = [b - a for a, b in zip(spikes, spikes[1:])]
    mean_cycles = sum(gaps) / len(gaps)
    return RefreshEstimate(
        interval_ns=mean_cycles * 1000.0 / clock_mhz,
        spike_count=len(spikes),
        spike_threshold=spike_threshold,
        spike_issue_cycles=tuple(spikes))


def classify_trace(trace: LatencyTrace, params: TimingParams,
                   route_extra: int = 0) -> LatencyHistogram:
    """Attribute each latency sample to hit/closed/miss/refresh populations.

    Samples are matched within +-1 cycle of the three idle latencies shifted
    by the route extra; anything above the miss level is refresh-affected.
    """
    hist = LatencyHistogram()
    if not trace.entries:
        return hist
    hit = params.hit_latency() + route_extra
    closed = params.closed_latency() + route_extra
    miss = params.miss_latency() + route_extra
    counts = Counter(trace.latencies())
    hist.buckets = dict(sorted(counts.items()))
    hist.modal_latency = modal_latency(trace)
    for lat, n in counts.items():
        if abs(lat - hit) <= 1:
            hist.populations["hit"] += n
        elif abs(lat - closed) <= 1:
            hist.populations["closed"] += n
        elif abs(lat - miss) <= 1:
            hist.populations["miss"] += n
        elif lat > miss + 1:
            hist.populations["refresh"] += n
        else:
            # between the canonical levels; attribute to the nearest one
            nearest = min(("hit", hit), ("closed", closed), ("miss", miss),
                          key=lambda kv: abs(lat - kv[1]))
            hist.populations[nearest[0]] += n
    return hist


def ground_truth_populations(trace: LatencyTrace) -> Dict[str, int]:
    """Per-class counts from the simulator's own classification tags."""
    pops = {"hit": 0, "closed": 0, "miss": 0, "refresh": 0}
    for e in trace.entries:
        pops[e.classification.value] += 1
    return pops


def summarize_sweep(reports: Sequence[Tuple[str, int, int, ThroughputReport]]
                    ) -> List[dict]:
    """One row per (policy, B, S) combination, deterministically ordered."""
    rows = [{"policy": policy, "B": b, "S": s, "gbps": rep.gbps,
             "transactions": rep.transactions, "cycles": rep.cycles}
            for policy, s, b, rep in reports]
    rows.sort(key=lambda r: (r["policy"], r["B"], r["S"]))
    return rows
