"""Experiment configuration: JSON schema, validation, serialization."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, asdict
from typing import Dict, List, Optional, Tuple

from . import addrmap
from .addrmap import MemoryKind, MappingPolicy
from .dram import TIMING_PRESETS, KIND_PRESET, TimingParams
from .engine import (DEFAULT_OUTSTANDING, DEFAULT_TRACE_CAPACITY, RstConfig)
from .interconnect import SwitchTopology, route_latency

MODES = ("latency", "read_throughput", "write_throughput")


class ConfigError(ValueError):
    """Invalid experiment configuration, with the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


@dataclass
class SweepSpec:
    policies: List[str]
    strides: List[int]
    bursts: List[int]
    working_sets: List[int]

    def points(self):
        for policy in self.policies:
            for b in self.bursts:
                for s in self.strides:
                    for w in self.working_sets:
                        yield policy, b, s, w


@dataclass
class ExperimentConfig:
    kind: str
    mode: str
    policy: str = ""
    switch_enabled: bool = False
    timing_preset: str = ""
    timing_overrides: Dict[str, float] = dc_field(default_factory=dict)
    rst: Optional[Dict[str, int]] = None
    sweep: Optional[SweepSpec] = None
    channels: List[Tuple[int, int]] = dc_field(default_factory=lambda: [(0, 0)])
    trace_capacity: int = DEFAULT_TRACE_CAPACITY
    outstanding_limit: int = DEFAULT_OUTSTANDING

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        kind = data.get("kind")
        if kind not in addrmap.KINDS:
            raise ConfigError("kind", f"must be one of {sorted(addrmap.KINDS)}")
        mode = data.get("mode")
        if mode not in MODES:
            raise ConfigError("mode", f"must be one of {MODES}")
        policy = data.get("policy", addrmap.DEFAULT_POLICY[kind])
        switch = data.get("switch", {})
        if not isinstance(switch, dict):
            raise ConfigError("switch", "must be an object")
        timing = data.get("timing", KIND_PRESET[kind])
        overrides: Dict[str, float] = {}
        if isinstance(timing, dict):
            preset = timing.get("preset", KIND_PRESET[kind])
            overrides = dict(timing.get("overrides", {}))
        else:
            preset = timing
        if preset not in TIMING_PRESETS:
            raise ConfigError("timing", f"unknown preset {preset!r}; "
                              f"valid: {sorted(TIMING_PRESETS)}")
        sweep = None
        if "sweep" in data:
            sw = data["sweep"]
            try:
                sweep = SweepSpec(
                    policies=list(sw.get("policies",
                                          [addrmap.DEFAULT_POLICY[kind]])),
                    strides=[int(x) for x in sw["S"]],
                    bursts=[int(x) for x in sw["B"]],
                    working_sets=[int(x) for x in sw.get("W", [])] or
                                 [int(data["rst"]["W"])])
            except KeyError as e:
                raise ConfigError("sweep", f"missing key {e}")
            for name, lst in (("policies", sweep.policies),
                              ("S", sweep.strides), ("B", sweep.bursts),
                              ("W", sweep.working_sets)):
                if not lst:
                    raise ConfigError(f"sweep.{name}", "must be non-empty")
        rst = data.get("rst")
        if rst is None and sweep is None:
            raise ConfigError("rst", "either rst or sweep is required")
        channels = [tuple(pair) for pair in data.get("channels", [[0, 0]])]
        cfg = ExperimentConfig(
            kind=kind, mode=mode, policy=policy,
            switch_enabled=bool(switch.get("enabled", False)),
            timing_preset=preset, timing_overrides=overrides,
            rst=dict(rst) if rst is not None else None,
            sweep=sweep, channels=channels,
            trace_capacity=int(data.get("trace_capacity",
                                        DEFAULT_TRACE_CAPACITY)),
            outstanding_limit=int(data.get("outstanding_limit",
                                           DEFAULT_OUTSTANDING)))
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind,
            "mode": self.mode,
            "policy": self.policy,
            "switch": {"enabled": self.switch_enabled},
            "timing": ({"preset": self.timing_preset,
                        "overrides": self.timing_overrides}
                       if self.timing_overrides else self.timing_preset),
            "channels": [list(p) for p in self.channels],
            "trace_capacity": self.trace_capacity,
            "outstanding_limit": self.outstanding_limit,
        }
        if self.rst is not None:
            out["rst"] = dict(self.rst)
        if self.sweep is not None:
            out["sweep"] = {"policies": self.sweep.policies,
                            "S": self.sweep.strides,
                            "B": self.sweep.bursts,
                            "W": self.sweep.working_sets}
        return out

    # -- resolution -------------------------------------------------------

    @property
    def memory_kind(self) -> MemoryKind:
        return addrmap.KINDS[self.kind]

    def mapping_policy(self, name: Optional[str] = None) -> MappingPolicy:
        try:
            return addrmap.get_policy(name or self.policy, self.memory_kind)
        except KeyError as e:
            raise ConfigError("policy", str(e))

    def timing(self) -> TimingParams:
        base = TIMING_PRESETS[self.timing_preset]
        if not self.timing_overrides:
            return base
        from dataclasses import replace
        try:
            return replace(base, **self.timing_overrides)
        except TypeError as e:
            raise ConfigError("timing.overrides", str(e))

    def topology(self) -> SwitchTopology:
        return SwitchTopology(enabled=self.switch_enabled)

    def rst_config(self, stride: Optional[int] = None,
                   burst: Optional[int] = None,
                   working_set: Optional[int] = None,
                   count: Optional[int] = None) -> RstConfig:
        rst = self.rst or {}
        try:
            return RstConfig(
                initial_addr=int(rst.get("A", 0)),
                burst_bytes=burst if burst is not None else int(rst["B"]),
                stride=stride if stride is not None else int(rst["S"]),
                working_set=(working_set if working_set is not None
                             else int(rst["W"])),
                count=count if count is not None else int(rst["N"]))
        except KeyError as e:
            raise ConfigError("rst", f"missing parameter {e}")

    def validate(self) -> None:
        self.mapping_policy()
        self.timing()
        if self.outstanding_limit < 1:
            raise ConfigError("outstanding_limit", "must be >= 1")
        topo = self.topology()
        if self.kind == "ddr4" and self.switch_enabled:
            raise ConfigError("switch.enabled",
                              "the mini-switch exists only on the hbm side")
        for axi, hbm in self.channels:
            if self.kind == "hbm":
                try:
                    route_latency(topo, axi, hbm)
                except ValueError as e:
                    raise ConfigError("channels", str(e))
            elif axi != hbm or not 0 <= axi < 2:
                raise ConfigError("channels",
                                  "ddr4 engines attach to channel 0 or 1")
        if self.sweep is not None:
            for pname in self.sweep.policies:
                self.mapping_policy(pname)
            for policy, b, s, w in self.sweep.points():
                self.rst_config(stride=s, burst=b, working_set=w,
                                count=0).validate(self.mapping_policy(policy))
        elif self.rst is not None:
            self.rst_config().validate(self.mapping_policy())
