"""Latency model of the switch between 32 AXI channels and 32 HBM channels.

The switch is built from eight fully connected 4-port mini-switches with
links between adjacent ones; crossing from one half of the stack pair to the
other costs an extra hop.  Latency depends only on the (source mini-switch,
destination mini-switch) pair.  Only the penalties toward destination
mini-switch 0 are measured values; the rest of the table is extrapolated by
distance with the same stack-crossing step.  Link contention between
concurrent cross-switch flows is not modeled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

NUM_CHANNELS = 32
NUM_MINI_SWITCHES = 8
PORTS_PER_MINI_SWITCH = 4

# Extra cycles every transaction pays once the switch is in the path.
SWITCH_BASE_CYCLES = 7
# Additional cost of crossing between the two groups of four mini-switches.
_STACK_CROSS_CYCLES = 9


def mini_switch_of(channel: int) -> int:
    if not 0 <= channel < NUM_CHANNELS:
        raise ValueError(f"channel {channel} out of range 0..31")
    return channel // PORTS_PER_MINI_SWITCH


def _default_penalty(src_ms: int, dst_ms: int) -> int:
    d = abs(src_ms - dst_ms)
    if d == 0:
        return 0
    penalty = 2 * d - 1
    if (src_ms < 4) != (dst_ms < 4):
        penalty += _STACK_CROSS_CYCLES
    return penalty


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class SwitchTopology:
    enabled: bool = True
    penalty_override: Optional[Dict[Tuple[int, int], int]] = None

    def penalty(self, src_ms: int, dst_ms: int) -> int:
        if self.penalty_override is not None:
            key = (src_ms, dst_ms)
            if key in self.penalty_override:
                return self.penalty_override[key]
        return _default_penalty(src_ms, dst_ms)


def route_latency(topo: SwitchTopology, axi_ch: int, hbm_ch: int) -> int:
    """Extra cycles added to every transaction on this route."""
    src = mini_switch_of(axi_ch)
    dst = mini_switch_of(hbm_ch)
    if not topo.enabled:
        if axi_ch != hbm_ch:
            raise RoutingError(
                f"switch disabled: AXI channel {axi_ch} can only reach its "
                f"own HBM channel, not {hbm_ch}")
        return 0
    return SWITCH_BASE_CYCLES + topo.penalty(src, dst)


def route_throughput_factor(topo: SwitchTopology, axi_ch: int,
                            hbm_ch: int) -> float:
    """Throughput multiplier for a single active flow.

    A lone flow sustains the same throughput regardless of distance; this
    is the seam where cross-switch link contention would be modeled.
    """
    route_latency(topo, axi_ch, hbm_ch)  # validate the route
    return 1.0
