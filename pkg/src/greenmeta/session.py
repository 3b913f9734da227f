"""Deterministic sender/receiver simulation of a P2P call with DOR-reqs.

The sender keeps an abstract encoder configuration that requests modify.
The receiver's dynamic decoding power is ``baseline * prod(1 - s/100)`` over
the profile savings ``s`` of every action currently in effect, plus an
optional static floor that no request can reduce. Time advances from event
to event, so energies between events are exact products.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .adaptation import (DISABLE_BI_PREDICTION, DISABLE_FRACPEL,
                         DISABLE_INTRA_IN_B, DISABLE_LOOP_FILTERS,
                         AdaptationAction, DeviceProfile, SavingsEntry)
from .dor_req import DorRequest, decode_hex
from .errors import ScenarioError, SessionEnded
from .profiles import load_profile

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncoderConfig:
    out_width: int = 1920
    out_height: int = 1080
    out_fps: int = 60
    no_dbf: bool = False
    no_sao: bool = False
    bframes_zero: bool = False
    no_b_intra: bool = False
    forbid_fracpel: bool = False
    derdo_percent: Optional[int] = None

    def __post_init__(self):
        if min(self.out_width, self.out_height, self.out_fps) <= 0:
            raise ScenarioError("output size and frame rate must be positive")

    def encoder_flags(self) -> list[str]:
        """Equivalent x265/ffmpeg command-line switches."""
        flags = []
        if self.no_dbf:
            flags.append("--no-deblock")
        if self.no_sao:
            flags.append("--no-sao")
        if self.bframes_zero:
            flags += ["--bframes", "0"]
        if self.no_b_intra:
            flags.append("--no-b-intra")
        if self.forbid_fracpel:
            flags.append("--derdo-fracpel-penalty")
        if self.derdo_percent is not None:
            flags += ["--derdo", str(self.derdo_percent)]
        flags += ["-vf", f"scale={self.out_width}:{self.out_height}",
                  "-r", str(self.out_fps)]
        return flags


def apply_request_to_config(cfg: EncoderConfig, req: DorRequest) -> EncoderConfig:
    """Sender reaction to one request.

    Tool bits only ever switch tools off; zero-valued size and frame-rate
    fields leave the output format alone. The neutral ops codeword keeps
    any earlier operations-reduction setting.
    """
    req.validate()
    changes = {}
    if req.disable_loop_filters:
        changes["no_dbf"] = True
        changes["no_sao"] = True
    if req.disable_bi_prediction:
        changes["bframes_zero"] = True
    if req.disable_intra_in_B:
        changes["no_b_intra"] = True
    if req.disable_fracpel_filtering:
        changes["forbid_fracpel"] = True
    if req.ops_percent != 0:
        changes["derdo_percent"] = req.ops_percent
    if req.pic_width_in_luma_samples:
        changes["out_width"] = req.pic_width_in_luma_samples
    if req.pic_height_in_luma_samples:
        changes["out_height"] = req.pic_height_in_luma_samples
    if req.frames_per_second:
        changes["out_fps"] = req.frames_per_second
    return dataclasses.replace(cfg, **changes) if changes else cfg


def active_actions(cfg: EncoderConfig, source: EncoderConfig) -> list:
    """Actions in effect, derived by comparing ``cfg`` with the source
    format. Loop-filter actions are returned per filter."""
    actions = []
    if cfg.derdo_percent:
        actions.append(AdaptationAction.ops_reduction(cfg.derdo_percent))
    if cfg.no_dbf:
        actions.append(AdaptationAction(DISABLE_LOOP_FILTERS, loop_filter="dbf"))
    if cfg.no_sao:
        actions.append(AdaptationAction(DISABLE_LOOP_FILTERS, loop_filter="sao"))
    if cfg.bframes_zero:
        actions.append(AdaptationAction(DISABLE_BI_PREDICTION))
    if cfg.no_b_intra:
        actions.append(AdaptationAction(DISABLE_INTRA_IN_B))
    if cfg.forbid_fracpel:
        actions.append(AdaptationAction(DISABLE_FRACPEL))
    if (cfg.out_width, cfg.out_height) != (source.out_width, source.out_height):
        actions.append(AdaptationAction.set_resolution(cfg.out_width,
                                                       cfg.out_height))
    if cfg.out_fps != source.out_fps:
        actions.append(AdaptationAction.set_fps(cfg.out_fps))
    return actions


def calibrated_entries(cfg: EncoderConfig, source: EncoderConfig,
                       profile: DeviceProfile):
    """Profile entries matching the active actions, and the actions the
    profile has no measurement for."""
    entries: list[SavingsEntry] = []
    missing: list[AdaptationAction] = []
    acts = active_actions(cfg, source)
    generic_lf = profile.lookup(AdaptationAction(DISABLE_LOOP_FILTERS))
    used_generic = False
    for act in acts:
        if act.kind == DISABLE_LOOP_FILTERS and generic_lf is not None:
            if not used_generic:
                entries.append(generic_lf)
                used_generic = True
            continue
        entry = profile.lookup(act)
        if entry is None:
            missing.append(act)
        else:
            entries.append(entry)
    return entries, missing


def power_factor(entries: Sequence[SavingsEntry]) -> float:
    """Remaining share of dynamic power; savings stack multiplicatively."""
    factor = 1.0
    for e in entries:
        factor *= 1.0 - e.savings_pct / 100.0
    return factor


@dataclass(frozen=True)
class LedgerEvent:
    time: float
    request: DorRequest
    savings_pct: float
    uncalibrated: tuple[str, ...] = ()


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    dynamic_watts: float
    baseline_energy: float
    actual_energy: float


@dataclass(frozen=True)
class EnergyLedger:
    baseline_energy: float = 0.0
    actual_energy: float = 0.0
    static_energy: float = 0.0
    events: tuple[LedgerEvent, ...] = ()
    segments: tuple[Segment, ...] = ()

    @property
    def saved_energy(self) -> float:
        return self.baseline_energy - self.actual_energy

    @property
    def realized_savings_pct(self) -> float:
        if self.baseline_energy <= 0:
            return 0.0
        return 100.0 * (1.0 - self.actual_energy / self.baseline_energy)


@dataclass(frozen=True)
class SessionState:
    profile: DeviceProfile
    drain_watts_baseline: float
    battery_joules: float = math.inf
    static_watts: float = 0.0
    source: EncoderConfig = field(default_factory=EncoderConfig)
    sender: Optional[EncoderConfig] = None
    clock: float = 0.0
    ledger: EnergyLedger = field(default_factory=EnergyLedger)
    exhausted_at: Optional[float] = None

    def __post_init__(self):
        if self.sender is None:
            object.__setattr__(self, "sender", self.source)
        if not self.drain_watts_baseline > 0:
            raise ScenarioError("baseline drain must be positive")
        if self.static_watts < 0 or self.battery_joules < 0:
            raise ScenarioError("static power and battery must be >= 0")

    def dynamic_watts(self) -> float:
        entries, _ = calibrated_entries(self.sender, self.source, self.profile)
        return self.drain_watts_baseline * power_factor(entries)


def _deliver(state: SessionState, req: DorRequest) -> SessionState:
    sender = apply_request_to_config(state.sender, req)
    entries, missing = calibrated_entries(sender, state.source, state.profile)
    for act in missing:
        log.warning("no calibrated savings for %s; counted as 0%%",
                    act.describe())
    event = LedgerEvent(state.clock, req,
                        100.0 * (1.0 - power_factor(entries)),
                        tuple(a.describe() for a in missing))
    ledger = dataclasses.replace(state.ledger,
                                 events=state.ledger.events + (event,))
    return dataclasses.replace(state, sender=sender, ledger=ledger)


def _advance(state: SessionState, until: float,
             pending: Optional[DorRequest]) -> SessionState:
    if state.battery_joules <= 0:
        raise SessionEnded(f"battery exhausted at t={state.exhausted_at}")
    if pending is not None:
        state = _deliver(state, pending)
    dt = until - state.clock
    dyn = state.dynamic_watts()
    total = dyn + state.static_watts
    battery = state.battery_joules
    exhausted_at = None
    if math.isfinite(battery) and total * dt >= battery:
        dt = battery / total
        until = state.clock + dt
        battery = 0.0
        exhausted_at = until
    elif math.isfinite(battery):
        battery -= total * dt
    seg = Segment(state.clock, until, dyn, state.drain_watts_baseline * dt,
                  dyn * dt)
    old = state.ledger
    ledger = dataclasses.replace(
        old,
        baseline_energy=old.baseline_energy + seg.baseline_energy,
        actual_energy=old.actual_energy + seg.actual_energy,
        static_energy=old.static_energy + state.static_watts * dt,
        segments=old.segments + (seg,))
    return dataclasses.replace(state, clock=until, battery_joules=battery,
                               ledger=ledger, exhausted_at=exhausted_at)


def step_session(state: SessionState, dt: float,
                 pending: Optional[DorRequest] = None) -> SessionState:
    """Apply ``pending`` (if any), then run for ``dt`` seconds or until the
    battery runs out, whichever comes first."""
    if not dt > 0:
        raise ScenarioError(f"step length must be positive, got {dt}")
    return _advance(state, state.clock + dt, pending)


@dataclass(frozen=True)
class SessionResult:
    state: SessionState
    duration: float

    @property
    def ledger(self) -> EnergyLedger:
        return self.state.ledger

    @property
    def realized_savings_pct(self) -> float:
        return self.ledger.realized_savings_pct

    @property
    def exhausted_at(self) -> Optional[float]:
        return self.state.exhausted_at

    def to_json(self) -> dict:
        led = self.ledger
        return {
            "duration_s": self.duration,
            "end_time_s": self.state.clock,
            "realized_savings_pct": self.realized_savings_pct,
            "baseline_energy_j": led.baseline_energy,
            "actual_energy_j": led.actual_energy,
            "saved_energy_j": led.saved_energy,
            "static_energy_j": led.static_energy,
            "battery_remaining_j": (None if math.isinf(self.state.battery_joules)
                                    else self.state.battery_joules),
            "battery_exhausted_at_s": self.exhausted_at,
            "final_encoder_flags": self.state.sender.encoder_flags(),
            "events": [{"t_s": e.time, "request_hex": e.request.to_hex(),
                        "active_savings_pct": e.savings_pct,
                        "uncalibrated": list(e.uncalibrated)}
                       for e in led.events],
            "segments": [dataclasses.asdict(s) for s in led.segments],
        }

    def to_text(self) -> str:
        led = self.ledger
        lines = [f"realized savings : {self.realized_savings_pct:.4f} %",
                 f"baseline energy  : {led.baseline_energy:.6g} J",
                 f"actual energy    : {led.actual_energy:.6g} J",
                 f"saved energy     : {led.saved_energy:.6g} J"]
        if self.exhausted_at is not None:
            lines.append(f"battery empty at : {self.exhausted_at:.6g} s")
        lines.append("")
        lines.append(f"{'start_s':>10} {'end_s':>10} {'dyn_W':>10} "
                     f"{'baseline_J':>12} {'actual_J':>12}")
        for s in led.segments:
            lines.append(f"{s.start:10.3f} {s.end:10.3f} {s.dynamic_watts:10.4f} "
                         f"{s.baseline_energy:12.4f} {s.actual_energy:12.4f}")
        if led.events:
            lines.append("")
            lines.append(f"{'t_s':>10}  {'request':12}  {'savings_%':>9}")
            for e in led.events:
                lines.append(f"{e.time:10.3f}  {e.request.to_hex():12}  "
                             f"{e.savings_pct:9.4f}")
        return "\n".join(lines)


def run_session(scenario: Sequence[tuple[float, DorRequest]], duration: float,
                state0: SessionState, latency: float = 0.0) -> SessionResult:
    """Replay timed requests against ``state0`` until ``duration`` or an
    empty battery. Each request reaches the sender ``latency`` seconds after
    it is sent; requests arriving after ``duration`` are dropped."""
    if not duration > 0:
        raise ScenarioError("duration must be positive")
    if latency < 0:
        raise ScenarioError("latency must be >= 0")
    last = -math.inf
    for t, _ in scenario:
        if not t > last:
            raise ScenarioError("event times must be strictly increasing")
        if not 0 <= t <= duration:
            raise ScenarioError(f"event time {t} outside [0, {duration}]")
        last = t
    deliveries = [(t + latency, req) for t, req in scenario
                  if t + latency <= duration]

    state = state0
    idx = 0
    while state.clock < duration and state.exhausted_at is None:
        pending = None
        if idx < len(deliveries) and deliveries[idx][0] <= state.clock:
            pending = deliveries[idx][1]
            idx += 1
        until = deliveries[idx][0] if idx < len(deliveries) else duration
        state = _advance(state, until, pending)
    if state.exhausted_at is None:
        # requests landing exactly at the end still reach the sender
        for _, req in deliveries[idx:]:
            state = _deliver(state, req)
    return SessionResult(state, duration)


@dataclass(frozen=True)
class Scenario:
    duration_s: float
    baseline_watts: float
    profile: DeviceProfile
    events: tuple[tuple[float, DorRequest], ...] = ()
    static_watts: float = 0.0
    battery_joules: float = math.inf
    latency_s: float = 0.0
    source: EncoderConfig = field(default_factory=EncoderConfig)

    def initial_state(self) -> SessionState:
        return SessionState(self.profile, self.baseline_watts,
                            battery_joules=self.battery_joules,
                            static_watts=self.static_watts,
                            source=self.source)

    def run(self) -> SessionResult:
        return run_session(self.events, self.duration_s, self.initial_state(),
                           latency=self.latency_s)

    @classmethod
    def from_json(cls, obj: dict) -> "Scenario":
        """Build from the scenario file layout::

            {"duration_s": 600, "baseline_watts": 2.0, "static_watts": 0,
             "profile": {...} | "table2/hardware/ClassB",
             "events": [{"t_s": 0, "request_hex": "7E45000B401E"}],
             "battery_joules": 5000, "latency_s": 0.1,
             "source": {"width": 1920, "height": 1080, "fps": 60}}

        Only ``duration_s``, ``baseline_watts`` and ``profile`` are required.
        """
        try:
            events = tuple((float(e["t_s"]), decode_hex(e["request_hex"]))
                           for e in obj.get("events", ()))
            src = obj.get("source", {})
            battery = obj.get("battery_joules")
            return cls(
                duration_s=float(obj["duration_s"]),
                baseline_watts=float(obj["baseline_watts"]),
                profile=load_profile(obj["profile"]),
                events=events,
                static_watts=float(obj.get("static_watts", 0.0)),
                battery_joules=math.inf if battery is None else float(battery),
                latency_s=float(obj.get("latency_s", 0.0)),
                source=EncoderConfig(int(src.get("width", 1920)),
                                     int(src.get("height", 1080)),
                                     int(src.get("fps", 60))),
            )
        except KeyError as exc:
            raise ScenarioError(f"scenario lacks {exc}") from None

    @classmethod
    def load(cls, path) -> "Scenario":
        with open(path) as fh:
            try:
                return cls.from_json(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"{path}: {exc}") from None
