"""Trace analysis tests: modal latency, spike detection, classification."""

import pytest

from hbmsim.addrmap import HBM, get_policy
from hbmsim.analysis import (
    InsufficientDataError,
    classify_trace,
    default_spike_threshold,
    detect_refresh_interval,
    ground_truth_populations,
    modal_latency,
    summarize_sweep,
)
from hbmsim.dram import TIMING_PRESETS, AccessClass, PseudoChannel
from hbmsim.engine import Engine, LatencyTrace, RstConfig, ThroughputReport, TraceEntry

HBM_T = TIMING_PRESETS["hbm-u280"]


def _trace(samples):
    """Build a trace from (issue_cycle, latency) pairs tagged as hits."""
    entries = [
        TraceEntry(i, issue, lat, AccessClass.PAGE_HIT)
        for i, (issue, lat) in enumerate(samples)
    ]
    return LatencyTrace(entries=entries, capacity=len(entries) or 1)


def _simulated_trace(stride, count=1024):
    ch = PseudoChannel(HBM, HBM_T)
    eng = Engine(get_policy("RGBCG", HBM), ch)
    return eng.run_read_latency(RstConfig(0, 32, stride, 1 << 24, count))


# ---------------------------------------------------------------------------
# Modal latency and thresholds
# ---------------------------------------------------------------------------


def test_modal_latency_picks_most_common():
    trace = _trace([(0, 48), (50, 48), (100, 62), (200, 48)])
    assert modal_latency(trace) == 48


def test_modal_latency_tie_breaks_to_smallest():
    trace = _trace([(0, 62), (50, 48), (100, 62), (200, 48)])
    assert modal_latency(trace) == 48


def test_modal_latency_empty_trace():
    assert modal_latency(_trace([])) is None


def test_default_spike_threshold_requires_data():
    with pytest.raises(InsufficientDataError):
        default_spike_threshold(_trace([]))
    base = default_spike_threshold(_trace([(0, 48), (10, 48)]))
    assert base > 48
    with_params = default_spike_threshold(_trace([(0, 48)]), params=HBM_T)
    assert with_params == 48 + HBM_T.t_rp + HBM_T.t_rcd + 10


# ---------------------------------------------------------------------------
# Refresh interval detection
# ---------------------------------------------------------------------------


def test_detect_refresh_interval_synthetic():
    # Hits every 100 cycles with a spike every 3510 cycles.
    samples = []
    for issue in range(0, 15000, 100):
        lat = 300 if issue % 3500 == 0 and issue else 48
        samples.append((issue, lat))
    est = detect_refresh_interval(_trace(samples), clock_mhz=450.0,
                                  spike_threshold=200)
    assert est.interval_ns == pytest.approx(3500 / 450e6 * 1e9)
    assert est.spike_count == len(est.spike_issue_cycles) >= 3
    gaps = [b - a for a, b in
            zip(est.spike_issue_cycles, est.spike_issue_cycles[1:])]
    assert set(gaps) == {3500}


def test_detect_refresh_interval_requires_two_spikes():
    with pytest.raises(InsufficientDataError):
        detect_refresh_interval(_trace([(0, 48), (100, 400)]), 450.0,
                                spike_threshold=200)


def test_detect_refresh_interval_on_simulated_trace():
    trace = _simulated_trace(stride=64, count=2048)
    est = detect_refresh_interval(trace, HBM_T.clock_mhz, params=HBM_T)
    assert est.interval_ns == pytest.approx(7800.0, rel=0.02)


# ---------------------------------------------------------------------------
# Classification against simulator ground truth
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("stride", [64, 128, 128 * 1024])
def test_classifier_matches_ground_truth(stride):
    trace = _simulated_trace(stride)
    hist = classify_trace(trace, HBM_T)
    assert hist.populations == ground_truth_populations(trace)
    assert hist.total() == len(trace.entries)


def test_classifier_with_route_offset():
    ch = PseudoChannel(HBM, HBM_T)
    eng = Engine(get_policy("RGBCG", HBM), ch, route_extra_cycles=29)
    trace = eng.run_read_latency(RstConfig(0, 32, 128, 1 << 24, 512))
    hist = classify_trace(trace, HBM_T, route_extra=29)
    assert hist.populations == ground_truth_populations(trace)


# ---------------------------------------------------------------------------
# Sweep summaries
# ---------------------------------------------------------------------------


def test_summarize_sweep_orders_rows():
    rep = ThroughputReport.build(10, 640, 100, 450.0)
    reports = [
        ("RCB", 128, 64, rep),
        ("RBC", 64, 32, rep),
        ("RBC", 64, 64, rep),
        ("RBC", 128, 32, rep),
    ]
    rows = summarize_sweep(reports)
    key = [(r["policy"], r["B"], r["S"]) for r in rows]
    assert key == [
        ("RBC", 32, 64),
        ("RBC", 32, 128),
        ("RBC", 64, 64),
        ("RCB", 64, 128),
    ]
    assert all(r["gbps"] == rep.gbps for r in rows)
