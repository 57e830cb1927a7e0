"""Pseudo-channel timing model tests.

Latency identities and the frozen cycle counts below were derived by hand
from the timing parameters (CAS / RCD / RP composition, column-to-column
spacing, refresh cadence) and serve as an independent oracle for the
channel's event arithmetic.
"""

import pytest

from hbmsim.addrmap import DDR4, HBM, DecodedAddress
from hbmsim.dram import (
    KIND_PRESET,
    TIMING_PRESETS,
    AccessClass,
    PseudoChannel,
    TimingParams,
    refresh_windows,
)

HBM_T = TIMING_PRESETS["hbm-u280"]
DDR4_T = TIMING_PRESETS["ddr4-u280"]


# ---------------------------------------------------------------------------
# Latency identities
# ---------------------------------------------------------------------------


def test_idle_latency_composition():
    for t in (HBM_T, DDR4_T):
        assert t.hit_latency() == t.t_cas
        assert t.closed_latency() == t.t_cas + t.t_rcd
        assert t.miss_latency() == t.t_cas + t.t_rp + t.t_rcd


def test_preset_idle_latencies():
    assert (HBM_T.hit_latency(), HBM_T.closed_latency(), HBM_T.miss_latency()) == (
        48,
        55,
        62,
    )
    assert (DDR4_T.hit_latency(), DDR4_T.closed_latency(), DDR4_T.miss_latency()) == (
        22,
        27,
        32,
    )


def test_cycles_to_ns():
    assert HBM_T.cycles_to_ns(450) == pytest.approx(1000.0)
    assert DDR4_T.cycles_to_ns(27) == pytest.approx(90.0)


def test_kind_preset_mapping():
    assert KIND_PRESET["hbm"] == "hbm-u280"
    assert KIND_PRESET["ddr4"] == "ddr4-u280"
    assert HBM_T.bus_bytes_per_cycle == HBM.min_burst_bytes
    assert DDR4_T.bus_bytes_per_cycle == DDR4.min_burst_bytes


def test_timing_validation():
    with pytest.raises(ValueError):
        TimingParams(450, 48, 7, 7, 23, 2, 1, 2, 7800, 160, 32)  # ccd_l < ccd_s
    with pytest.raises(ValueError):
        TimingParams(450, 48, 7, 7, 23, 1, 2, 2, 100, 160, 32)  # refi <= rfc


# ---------------------------------------------------------------------------
# Refresh window arithmetic
# ---------------------------------------------------------------------------


def test_refresh_windows_hbm():
    # 7800 ns at 450 MHz = 3510 cycles between refreshes, 160 ns = 72 busy.
    assert refresh_windows(HBM_T, 11000) == [
        (3510, 3582),
        (7020, 7092),
        (10530, 10602),
    ]


def test_refresh_windows_ddr4():
    # 7800 ns at 300 MHz = 2340 cycles, 350 ns = 105 busy.
    assert refresh_windows(DDR4_T, 5000) == [(2340, 2445), (4680, 4785)]


# ---------------------------------------------------------------------------
# Access classification and command spacing
# ---------------------------------------------------------------------------


def _hbm_channel():
    return PseudoChannel(HBM, HBM_T)


def test_classification_sequence():
    ch = _hbm_channel()
    a = DecodedAddress(0, 0, 0, 0)
    assert ch.classify_access(a) is AccessClass.PAGE_CLOSED
    ch.service_units([a.as_tuple()], 0)
    assert ch.classify_access(DecodedAddress(0, 0, 0, 1)) is AccessClass.PAGE_HIT
    assert ch.classify_access(DecodedAddress(1, 0, 0, 0)) is AccessClass.PAGE_MISS
    # A different bank is untouched, hence still closed.
    assert ch.classify_access(DecodedAddress(0, 0, 1, 0)) is AccessClass.PAGE_CLOSED


def test_first_access_latency_matches_closed():
    ch = _hbm_channel()
    completion, cls, first_col = ch.service_units([(0, 0, 0, 0)], 0)
    assert cls is AccessClass.PAGE_CLOSED
    assert first_col == HBM_T.t_rcd
    assert completion == HBM_T.closed_latency()


def test_same_bank_group_hit_respects_long_column_spacing():
    ch = _hbm_channel()
    c1, _, col1 = ch.service_units([(0, 0, 0, 0)], 0)
    c2, cls, col2 = ch.service_units([(0, 0, 0, 1)], 0)
    assert cls is AccessClass.PAGE_HIT
    # Second column command cannot land closer than t_ccd_l after the first.
    assert col2 - col1 >= HBM_T.t_ccd_l
    assert c1 == 55 and c2 == 57


def test_page_miss_latency_after_open_row():
    ch = _hbm_channel()
    ch.service_units([(0, 0, 0, 0)], 0)
    # Issue late enough that every command-bus floor from the first access
    # has expired, but before the first refresh window.
    completion, cls, _ = ch.service_units([(1, 0, 0, 0)], 100)
    assert cls is AccessClass.PAGE_MISS
    assert completion - 100 == HBM_T.miss_latency()


def test_column_commands_strictly_ordered():
    ch = _hbm_channel()
    cols = []
    for i in range(64):
        _, _, col = ch.service_units([(0, i % 4, 0, i % 32)], 0)
        cols.append(col)
    assert cols == sorted(cols)
    assert all(b > a for a, b in zip(cols, cols[1:]))


def test_activate_window_throttles_burst_of_activates():
    fast = TimingParams(300, 22, 5, 5, 24, 1, 2, 1, 7800, 350, 64, t_faw=100)
    base = TimingParams(300, 22, 5, 5, 24, 1, 2, 1, 7800, 350, 64, t_faw=0)
    units = [(0, g, b, 0) for g, b in
             [(0, 0), (1, 0), (2, 0), (3, 0), (0, 1)]]

    def fifth_col(timing):
        ch = PseudoChannel(DDR4, timing)
        col = None
        for u in units:
            _, _, col = ch.service_units([u], 0)
        return col

    assert fifth_col(base) < 50
    # The fifth activate must wait out the four-activate window.
    assert fifth_col(fast) >= 100


def test_shared_command_bus_penalizes_row_commands():
    shared = TIMING_PRESETS["ddr4-u280"]
    split = TimingParams(300, 22, 5, 5, 24, 1, 2, 1, 7800, 350, 64,
                         shared_cmd_bus=False)

    def stream_completion(timing):
        # Rotate across all 16 banks so the per-bank row cycle is hidden and
        # command-bus occupancy is what limits the miss stream.
        ch = PseudoChannel(DDR4, timing)
        completion = 0
        for i in range(128):
            unit = (i // 16, (i % 16) // 4, i % 4, 0)
            completion, _, _ = ch.service_units([unit], 0)
        return completion

    # Row commands (precharge + activate) steal column-command slots when the
    # channel shares one command bus, so the miss stream takes longer.
    assert stream_completion(shared) > stream_completion(split)


def test_refresh_defers_overlapping_transaction():
    ch = _hbm_channel()
    windows = refresh_windows(HBM_T, 4000)
    start, end = windows[0]
    completion, cls, _ = ch.service_units([(0, 0, 0, 0)], start - 2)
    assert cls is AccessClass.REFRESH
    assert completion >= end
    # After the refresh every bank is closed again.
    assert ch.classify_access(DecodedAddress(0, 0, 0, 1)) is AccessClass.PAGE_HIT


def test_transaction_clear_of_refresh_is_untouched():
    ch = _hbm_channel()
    completion, cls, _ = ch.service_units([(0, 0, 0, 0)], 0)
    assert cls is AccessClass.PAGE_CLOSED
    assert completion == HBM_T.closed_latency()


def test_service_read_matches_service_units_for_single_unit():
    a = _hbm_channel()
    b = _hbm_channel()
    coords = DecodedAddress(3, 1, 2, 4)
    ra = a.service_units([coords.as_tuple()], 0)
    rb = b.service_read(coords, HBM.min_burst_bytes, 0)
    assert ra[0] == rb[0]


def test_deterministic_replay():
    def run():
        ch = _hbm_channel()
        out = []
        for i in range(500):
            out.append(ch.service_units([(i % 7, i % 4, 0, i % 32)], 0))
        return out

    assert run() == run()
