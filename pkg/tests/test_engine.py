"""Traversal-engine tests: address generation, serial latency mode, and
throughput mode invariants.

The iterative address oracle below recomputes the traversal one step at a
time (add the stride, wrap at the working-set edge) independently of the
closed-form generator.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbmsim.addrmap import DDR4, HBM, KINDS, get_policy
from hbmsim.dram import KIND_PRESET, TIMING_PRESETS, PseudoChannel
from hbmsim.engine import Engine, RstConfig, ValidationError, gen_address


def _channel(kind):
    return PseudoChannel(kind, TIMING_PRESETS[KIND_PRESET[kind.name]])


def _engine(kind, policy_name, **kw):
    return Engine(get_policy(policy_name, kind), _channel(kind), **kw)


def iterative_addresses(cfg, n):
    """Step-by-step reference for the traversal address sequence."""
    out = []
    offset = 0
    for _ in range(n):
        out.append(cfg.initial_addr + offset)
        offset += cfg.stride
        if offset >= cfg.working_set:
            offset -= cfg.working_set
    return out


# ---------------------------------------------------------------------------
# Address generation
# ---------------------------------------------------------------------------


def test_gen_address_matches_iterative_oracle():
    cfg = RstConfig(initial_addr=0x400, burst_bytes=32, stride=96,
                    working_set=1 << 12, count=0)
    want = iterative_addresses(cfg, 500)
    assert [gen_address(cfg, i) for i in range(500)] == want


def test_gen_address_wraps_at_working_set():
    cfg = RstConfig(0, 32, 1 << 10, 1 << 12, 0)
    assert [gen_address(cfg, i) for i in range(5)] == [0, 1024, 2048, 3072, 0]


@settings(max_examples=400, deadline=None)
@given(data=st.data())
def test_gen_address_matches_oracle_random_configs(data):
    kind = data.draw(st.sampled_from(list(KINDS.values())))
    unit = kind.min_burst_bytes
    w_log2 = data.draw(st.integers(6, 27))
    w = 1 << w_log2
    s = unit * data.draw(
        st.integers(1, max(1, w // unit)).filter(lambda k: k * unit <= w)
    )
    a = unit * data.draw(st.integers(0, 1024))
    cfg = RstConfig(a, unit, s, w, 0)
    n = data.draw(st.integers(1, 64))
    start = data.draw(st.integers(0, 1 << 20))
    oracle = iterative_addresses(cfg, start + n)[start:]
    assert [gen_address(cfg, i) for i in range(start, start + n)] == oracle


# ---------------------------------------------------------------------------
# Configuration validation
# ---------------------------------------------------------------------------


def test_config_validation_errors():
    pol = get_policy("RGBCG", HBM)
    ok = RstConfig(0, 32, 64, 1 << 12, 10)
    ok.validate(pol)
    with pytest.raises(ValidationError):  # burst not a power of two
        RstConfig(0, 48, 64, 1 << 12, 10).validate(pol)
    with pytest.raises(ValidationError):  # burst below the minimum unit
        RstConfig(0, 16, 64, 1 << 12, 10).validate(pol)
    with pytest.raises(ValidationError):  # stride exceeds working set
        RstConfig(0, 32, 1 << 13, 1 << 12, 10).validate(pol)
    with pytest.raises(ValidationError):  # stride not unit-aligned
        RstConfig(0, 32, 40, 1 << 12, 10).validate(pol)
    with pytest.raises(ValidationError):  # region beyond the address space
        RstConfig(0, 32, 64, 1 << 29, 10).validate(pol)
    with pytest.raises(ValidationError):  # working set not a power of two
        RstConfig(0, 32, 64, 3 << 11, 10).validate(pol)
    with pytest.raises(ValidationError):  # negative count
        RstConfig(0, 32, 64, 1 << 12, -1).validate(pol)


# ---------------------------------------------------------------------------
# Serial latency mode
# ---------------------------------------------------------------------------


def test_serial_issue_ordering_invariant():
    eng = _engine(HBM, "RGBCG")
    trace = eng.run_read_latency(RstConfig(0, 32, 64, 1 << 20, 400))
    entries = trace.entries
    assert len(entries) == 400
    assert entries[0].issue_cycle == 0
    for prev, cur in zip(entries, entries[1:]):
        assert cur.issue_cycle == prev.issue_cycle + prev.latency_cycles


def test_trace_capacity_limits_entries():
    eng = _engine(HBM, "RGBCG")
    trace = eng.run_read_latency(RstConfig(0, 32, 64, 1 << 20, 400), capacity=100)
    assert len(trace.entries) == 100
    assert [e.index for e in trace.entries] == list(range(100))


def test_route_extra_cycles_shift_every_latency():
    cfg = RstConfig(0, 32, 64, 1 << 20, 50)
    base = _engine(HBM, "RGBCG").run_read_latency(cfg)
    routed = _engine(HBM, "RGBCG", route_extra_cycles=9).run_read_latency(cfg)
    for a, b in zip(base.entries, routed.entries):
        assert b.latency_cycles == a.latency_cycles + 9


def test_sequential_latency_levels_match_timing():
    # A tight sequential walk is page-hit dominated; a huge stride forces a
    # row miss every time (same bank, new row).
    t = TIMING_PRESETS["hbm-u280"]
    hits = _engine(HBM, "RGBCG").run_read_latency(RstConfig(0, 32, 128, 1 << 24, 256))
    from hbmsim.analysis import modal_latency

    assert modal_latency(hits) == t.hit_latency()
    misses = _engine(HBM, "RGBCG").run_read_latency(
        RstConfig(0, 32, 128 * 1024, 1 << 24, 256)
    )
    assert modal_latency(misses) == t.miss_latency()


def test_zero_count_produces_empty_results():
    eng = _engine(HBM, "RGBCG")
    cfg = RstConfig(0, 32, 64, 1 << 12, 0)
    assert eng.run_read_latency(cfg).entries == []
    rep = eng.run_read_throughput(cfg)
    assert rep.transactions == 0 and rep.bytes_moved == 0 and rep.gbps == 0.0


# ---------------------------------------------------------------------------
# Throughput mode
# ---------------------------------------------------------------------------


def test_throughput_report_conserves_bytes():
    eng = _engine(DDR4, "RCB")
    rep = eng.run_read_throughput(RstConfig(0, 64, 64, 1 << 20, 3000))
    assert rep.transactions == 3000
    assert rep.bytes_moved == 3000 * 64
    assert rep.gbps > 0
    assert rep.gbps == pytest.approx(
        rep.bytes_moved * 300e6 / rep.cycles / 1e9
    )


def test_write_throughput_equals_read_throughput():
    cfg = RstConfig(0, 32, 1024, 1 << 22, 2000)
    read = _engine(HBM, "RGBCG").run_read_throughput(cfg)
    write = _engine(HBM, "RGBCG").run_write_throughput(cfg)
    assert write == read


def test_outstanding_limit_does_not_change_in_order_timing():
    cfg = RstConfig(0, 32, 2048, 1 << 22, 2000)
    reps = [
        _engine(HBM, "RGBCG", outstanding_limit=lim).run_read_throughput(cfg)
        for lim in (1, 16, 64)
    ]
    assert reps[0] == reps[1] == reps[2]


def test_burst_larger_than_stride_is_accepted():
    # Bursts wrap inside the working set, so B > S is a legal (overlapping)
    # traversal.
    eng = _engine(HBM, "RGBCG")
    rep = eng.run_read_throughput(RstConfig(0, 256, 32, 1 << 12, 500))
    assert rep.bytes_moved == 500 * 256


def test_throughput_deterministic():
    cfg = RstConfig(0, 64, 4096, 1 << 24, 4000)
    a = _engine(DDR4, "RCB").run_read_throughput(cfg)
    b = _engine(DDR4, "RCB").run_read_throughput(cfg)
    assert a == b
