"""Deterministic HBM/DDR4 memory subsystem simulator and benchmark harness."""

from .addrmap import (DDR4, DDR4_POLICIES, DEFAULT_POLICY, HBM, HBM_POLICIES,
                      KINDS, DecodedAddress, MappingPolicy, MemoryKind,
                      decode, encode, get_policy)
from .config import ConfigError, ExperimentConfig, SweepSpec
from .dram import (AccessClass, PseudoChannel, TimingParams, TIMING_PRESETS,
                   refresh_windows)
from .engine import (Engine, LatencyTrace, RstConfig, ThroughputReport,
                     TraceEntry, ValidationError, gen_address)
from .harness import (PRESETS, RunArtifact, list_presets, run_experiment,
                      run_preset, sweep)
from .interconnect import SwitchTopology, mini_switch_of, route_latency

__version__ = "0.1.0"

__all__ = [
    "AccessClass", "ConfigError", "DDR4", "DDR4_POLICIES", "DEFAULT_POLICY",
    "DecodedAddress", "Engine", "ExperimentConfig", "HBM", "HBM_POLICIES",
    "KINDS", "LatencyTrace", "MappingPolicy", "MemoryKind", "PRESETS",
    "PseudoChannel", "RstConfig", "RunArtifact", "SweepSpec",
    "SwitchTopology", "ThroughputReport", "TimingParams", "TIMING_PRESETS",
    "TraceEntry", "ValidationError", "decode", "encode", "gen_address",
    "get_policy", "list_presets", "mini_switch_of", "refresh_windows",
    "run_experiment", "run_preset", "sweep", "route_latency",
]
