"""Deterministic discrete-time simulation of the advisory pipeline.

Each 0.1 s tick the fixed-time controller emits a raw frame, the RSU decodes
it and broadcasts a packet (zone geometry included), the link drops or delays
it, the OBU filters delivered packets to the zone containing the vehicle, the
advisory engine updates, a driver model picks an acceleration, and the vehicle
steps.  Every observable lands in a timestamped event log, which is the whole
test surface: identical (config, scenario, link seed) triples must produce
byte-identical logs.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass
from typing import Optional

from . import advisory_engine as adv
from .advisory_engine import AdvisoryParams, AdvisoryState
from .geo_zone import (
    GeoPoint,
    TriZone,
    ZoneConfig,
    distance_to_stopbar,
    locate,
    project_local,
    unproject_local,
)
from .signal_plan import controller_state
from .spat_codec import (
    Color,
    FrameFormat,
    SpatCodecError,
    SpatSnapshot,
    decode_m60,
    decode_tw900,
    encode_m60,
    encode_tw900,
)

TICK_S = 0.1
ACCEL_MIN_MPS2 = -4.5
ACCEL_MAX_MPS2 = 3.0
FOLLOWER_GAIN = 2.0
FOLLOWER_BRAKE_MPS2 = -3.0
POST_CROSSING_TICKS = 50

# Event kinds, in the rough order they appear within a tick.
FRAME_EMITTED = "FRAME_EMITTED"
DECODE_ERROR = "DECODE_ERROR"
PACKET_SENT = "PACKET_SENT"
PACKET_DROPPED = "PACKET_DROPPED"
PACKET_DELIVERED = "PACKET_DELIVERED"
ZONE_ENTERED = "ZONE_ENTERED"
ZONE_EXITED = "ZONE_EXITED"
ADVISORY_ACTIVATED = "ADVISORY_ACTIVATED"
ADVISORY_DEACTIVATED = "ADVISORY_DEACTIVATED"
PHASE_CHANGED = "PHASE_CHANGED"
VEHICLE_STATE = "VEHICLE_STATE"
RUN_ENDED = "RUN_ENDED"


class ConfigError(ValueError):
    pass


class MalformedLog(ValueError):
    pass


# -- Deterministic PRNG ----------------------------------------------------------


class SplitMix64:
    """splitmix64 with the standard constants; bit-reproducible anywhere.

    From seed 0 the first outputs are E220A8397B1DCDAF, 6E789E6AA1B965F4,
    06C45D188009454F.
    """

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self._state = seed & self._MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & self._MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53-bit resolution."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_int(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (modulo reduction; fine for a sim)."""
        return lo + self.next_u64() % (hi - lo + 1)


# -- Link, vehicle, scenario -------------------------------------------------------


@dataclass(frozen=True)
class LinkConfig:
    drop_prob: float = 0.0
    latency_min_ticks: int = 0
    latency_max_ticks: int = 0
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ValueError(f"drop_prob must be in [0, 1], got {self.drop_prob}")
        if self.latency_min_ticks < 0 or self.latency_max_ticks < self.latency_min_ticks:
            raise ValueError("latency ticks must satisfy 0 <= min <= max")


@dataclass(frozen=True)
class ApproachRay:
    """1-D track for the vehicle: from its spawn point straight to a stop bar."""

    origin: GeoPoint
    stopbar_xy: tuple[float, float]
    unit_away: tuple[float, float]


@dataclass(frozen=True)
class VehicleState:
    ray: ApproachRay
    pos: GeoPoint
    speed_mps: float
    along_m: float


def step_vehicle(v: VehicleState, command_accel_mps2: float, dt_s: float = TICK_S) -> VehicleState:
    """One Euler step along the approach ray; acceleration is clamped."""
    a = min(ACCEL_MAX_MPS2, max(ACCEL_MIN_MPS2, command_accel_mps2))
    speed = max(0.0, v.speed_mps + a * dt_s)
    along = v.along_m - speed * dt_s
    sx, sy = v.ray.stopbar_xy
    ux, uy = v.ray.unit_away
    pos = unproject_local(sx + along * ux, sy + along * uy, v.ray.origin)
    return VehicleState(v.ray, pos, speed, along)


DRIVER_SCRIPTED = "scripted"
DRIVER_ADVICE_FOLLOWER = "advice_follower"
DRIVER_EXTERNAL = "external"

FRAME_FORMATS = ("m60", "tw900", "alternate")


@dataclass(frozen=True)
class Scenario:
    spawn: GeoPoint
    initial_speed_mps: float
    approach_phase_id: int
    driver: str
    max_ticks: int
    frame_format: str = "m60"
    script: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        if self.driver not in (DRIVER_SCRIPTED, DRIVER_ADVICE_FOLLOWER, DRIVER_EXTERNAL):
            raise ConfigError(f"unknown driver type {self.driver!r}")
        if self.frame_format not in FRAME_FORMATS:
            raise ConfigError(f"frame_format must be one of {FRAME_FORMATS}, got {self.frame_format!r}")
        if self.initial_speed_mps < 0:
            raise ConfigError("initial_speed_mps must be non-negative")
        if self.max_ticks <= 0:
            raise ConfigError("max_ticks must be positive")
        object.__setattr__(self, "script", tuple(sorted(self.script, key=lambda e: e[0])))


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a Scenario from its JSON form (see the scenario schema)."""
    if not isinstance(doc, dict):
        raise ConfigError("scenario must be a JSON object")
    known = {"spawn", "initial_speed_mps", "approach_phase_id", "driver", "max_ticks", "frame_format"}
    extra = doc.keys() - known
    if extra:
        raise ConfigError(f"scenario: unknown field(s): {', '.join(sorted(extra))}")
    missing = {"spawn", "initial_speed_mps", "approach_phase_id", "driver", "max_ticks"} - doc.keys()
    if missing:
        raise ConfigError(f"scenario: missing field(s): {', '.join(sorted(missing))}")
    spawn = doc["spawn"]
    if not isinstance(spawn, list) or len(spawn) != 2:
        raise ConfigError("scenario.spawn must be a [lat, lon] pair")
    driver_doc = doc["driver"]
    if not isinstance(driver_doc, dict) or "type" not in driver_doc:
        raise ConfigError("scenario.driver must be an object with a 'type' field")
    extra = driver_doc.keys() - {"type", "script"}
    if extra:
        raise ConfigError(f"scenario.driver: unknown field(s): {', '.join(sorted(extra))}")
    script = []
    for entry in driver_doc.get("script", []):
        if not isinstance(entry, list) or len(entry) != 2:
            raise ConfigError("scenario.driver.script entries must be [tick, accel] pairs")
        script.append((int(entry[0]), float(entry[1])))
    try:
        return Scenario(
            spawn=GeoPoint(float(spawn[0]), float(spawn[1])),
            initial_speed_mps=float(doc["initial_speed_mps"]),
            approach_phase_id=int(doc["approach_phase_id"]),
            driver=str(driver_doc["type"]),
            max_ticks=int(doc["max_ticks"]),
            frame_format=str(doc.get("frame_format", "m60")),
            script=tuple(script),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"scenario: {exc}") from None


def load_scenario(document: str) -> Scenario:
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario is not valid JSON: {exc}") from None
    return scenario_from_dict(doc)


@dataclass(frozen=True)
class RsuPacket:
    snapshot: SpatSnapshot
    zones: tuple[TriZone, ...]
    sent_tick: int


# -- Event log ---------------------------------------------------------------------


@dataclass(frozen=True)
class SimEvent:
    tick: int
    kind: str
    payload: dict

    def to_json_line(self) -> str:
        return json.dumps(
            {"tick": self.tick, "kind": self.kind, "payload": self.payload},
            separators=(",", ":"),
        )


def parse_event_line(line: str) -> SimEvent:
    try:
        doc = json.loads(line)
        return SimEvent(int(doc["tick"]), str(doc["kind"]), dict(doc["payload"]))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise MalformedLog(f"bad event line {line!r}: {exc}") from None


def write_events_jsonl(events: list[SimEvent]) -> str:
    return "".join(e.to_json_line() + "\n" for e in events)


def read_events_jsonl(text: str) -> list[SimEvent]:
    return [parse_event_line(line) for line in text.splitlines() if line.strip()]


def _recommendation_payload(rec: adv.SpeedRecommendation) -> dict:
    if rec.kind is adv.AdviceKind.PROCEED:
        return {
            "kind": "proceed",
            "target_mps": rec.target_mps,
            "window": [rec.window_mps[0], rec.window_mps[1]],
        }
    if rec.kind is adv.AdviceKind.PREPARE_TO_STOP:
        return {"kind": "stop"}
    return {"kind": "none"}


# -- The simulation ------------------------------------------------------------------


class Simulation:
    """Single-writer simulation loop; construct once, then step() to the end.

    External control (the live console) injects accelerations between ticks
    via :meth:`set_external_accel`; everything else is sealed at construction,
    so a run is a pure function of (config, scenario, link).
    """

    def __init__(
        self,
        cfg: ZoneConfig,
        scenario: Scenario,
        link: LinkConfig,
        params: Optional[AdvisoryParams] = None,
    ):
        self.cfg = cfg
        self.scenario = scenario
        self.link = link
        self.params = params or AdvisoryParams()

        limits = [z.speed_limit_mps for z in cfg.zones]
        if self.params.v_floor_mps >= min(limits):
            raise ConfigError(
                f"v_floor_mps {self.params.v_floor_mps} must be below every zone "
                f"speed limit (lowest is {min(limits)})"
            )
        approach = [z for z in cfg.zones if z.phase_id == scenario.approach_phase_id]
        if not approach:
            raise ConfigError(f"no zone for approach phase {scenario.approach_phase_id}")
        self._approach_zone = approach[0]
        try:
            spawn_xy = project_local(scenario.spawn, cfg.ref_point)
            stop_xy = project_local(self._approach_zone.stopbar, cfg.ref_point)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        dx, dy = spawn_xy[0] - stop_xy[0], spawn_xy[1] - stop_xy[1]
        along0 = math.hypot(dx, dy)
        if along0 == 0.0:
            raise ConfigError("spawn point coincides with the stop bar")
        ray = ApproachRay(cfg.ref_point, stop_xy, (dx / along0, dy / along0))
        self._vehicle = VehicleState(ray, scenario.spawn, scenario.initial_speed_mps, along0)

        self._advisory = AdvisoryState.initial(self._approach_zone.phase_id)
        self._ref_zone = self._approach_zone
        self._zone_phase_occupied: Optional[int] = None
        self._rng = SplitMix64(link.seed)
        self._in_flight: list[tuple[int, int, int, RsuPacket]] = []
        self._send_counter = 0
        self._last_processed_sent_tick = -1
        self._script_accel = 0.0
        self._script_idx = 0
        self._external_accel = 0.0
        self._tick = 0
        self._crossing_tick: Optional[int] = None
        self._finished = False
        self.events: list[SimEvent] = []

    # -- public surface --

    @property
    def tick(self) -> int:
        return self._tick

    @property
    def finished(self) -> bool:
        return self._finished

    @property
    def vehicle(self) -> VehicleState:
        return self._vehicle

    @property
    def advisory(self) -> AdvisoryState:
        return self._advisory

    def set_external_accel(self, accel_mps2: float) -> None:
        self._external_accel = float(accel_mps2)

    def run(self) -> list[SimEvent]:
        while not self._finished:
            self.step()
        return self.events

    def step(self) -> list[SimEvent]:
        """Advance one tick; returns the events it produced."""
        if self._finished:
            raise RuntimeError("simulation already finished")
        t = self._tick
        first_new = len(self.events)

        snapshot = controller_state(
            self.cfg.plan, t, intersection_id=self.cfg.intersection_id, seq=t
        )
        fmt = self._format_for_tick(t)
        raw = encode_m60(snapshot) if fmt is FrameFormat.M60_LIKE else encode_tw900(snapshot)
        self._emit(t, FRAME_EMITTED, {
            "format": fmt.value,
            "seq": t,
            "time_ds": t,
            "phase_colors": "".join(p.color.value for p in snapshot.phases),
        })

        decoded = self._rsu_decode(t, raw, fmt)
        if decoded is not None:
            self._emit(t, PACKET_SENT, {"seq": t})
            drop_draw = self._rng.next_float()
            latency = self._rng.next_int(self.link.latency_min_ticks, self.link.latency_max_ticks)
            if drop_draw < self.link.drop_prob:
                self._emit(t, PACKET_DROPPED, {"seq": t})
            else:
                packet = RsuPacket(decoded, self.cfg.zones, sent_tick=t)
                heapq.heappush(self._in_flight, (t + latency, self._send_counter, latency, packet))
                self._send_counter += 1

        while self._in_flight and self._in_flight[0][0] <= t:
            _, _, latency, packet = heapq.heappop(self._in_flight)
            stale = packet.sent_tick <= self._last_processed_sent_tick
            self._emit(t, PACKET_DELIVERED, {
                "seq": packet.sent_tick,
                "latency_ticks": latency,
                "stale": stale,
            })
            if not stale:
                self._last_processed_sent_tick = packet.sent_tick
                self._obu_process(t, packet)

        accel = self._driver_accel(t)
        self._vehicle = step_vehicle(self._vehicle, accel)
        if self._crossing_tick is None and self._vehicle.along_m <= 0.0:
            self._crossing_tick = t
        self._emit_vehicle_state(t)

        crossed_out = self._crossing_tick is not None and t >= self._crossing_tick + POST_CROSSING_TICKS
        if crossed_out or t + 1 >= self.scenario.max_ticks:
            self._emit(t, RUN_ENDED, {
                "reason": "stopbar_crossed" if crossed_out else "max_ticks",
                "ticks": t + 1,
                "crossing_tick": self._crossing_tick,
            })
            self._finished = True
        self._tick += 1
        return self.events[first_new:]

    # -- internals --

    def _emit(self, tick: int, kind: str, payload: dict) -> None:
        self.events.append(SimEvent(tick, kind, payload))

    def _format_for_tick(self, t: int) -> FrameFormat:
        if self.scenario.frame_format == "m60":
            return FrameFormat.M60_LIKE
        if self.scenario.frame_format == "tw900":
            return FrameFormat.TW900_LIKE
        return FrameFormat.M60_LIKE if t % 2 == 0 else FrameFormat.TW900_LIKE

    def _rsu_decode(self, t: int, raw: bytes, fmt: FrameFormat) -> Optional[SpatSnapshot]:
        try:
            if fmt is FrameFormat.M60_LIKE:
                return decode_m60(raw)
            return decode_tw900(raw)
        except SpatCodecError as exc:
            self._emit(t, DECODE_ERROR, {"error": type(exc).__name__, "detail": str(exc)})
            return None

    def _obu_process(self, t: int, packet: RsuPacket) -> None:
        pos = self._vehicle.pos
        zone = locate(pos, self.cfg)
        in_zone = zone is not None

        if in_zone and self._zone_phase_occupied != zone.phase_id:
            if self._zone_phase_occupied is not None:
                self._emit(t, ZONE_EXITED, {"phase_id": self._zone_phase_occupied})
            self._emit(t, ZONE_ENTERED, {"phase_id": zone.phase_id})
            self._zone_phase_occupied = zone.phase_id
        elif not in_zone and self._zone_phase_occupied is not None:
            self._emit(t, ZONE_EXITED, {"phase_id": self._zone_phase_occupied})
            self._zone_phase_occupied = None

        if in_zone and zone.phase_id != self._ref_zone.phase_id:
            # Straight handoff between zones: close out the old advisory and
            # restart tracking on the new phase.
            if self._advisory.active:
                d_old = distance_to_stopbar(pos, self._ref_zone)
                self._emit(t, ADVISORY_DEACTIVATED, {
                    "reason": adv.DeactivationReason.LEFT_ZONE.value,
                    "distance_m": d_old,
                })
            self._advisory = AdvisoryState.initial(zone.phase_id)
            self._ref_zone = zone

        ps = packet.snapshot.phase(self._ref_zone.phase_id)
        d = distance_to_stopbar(pos, self._ref_zone)
        self._advisory, events = adv.update(
            self._advisory, ps, d, in_zone, self._ref_zone.speed_limit_mps, self.params
        )
        for event in events:
            if isinstance(event, adv.AdvisoryActivated):
                self._emit(t, ADVISORY_ACTIVATED, {"phase_id": event.phase_id, "distance_m": d})
            elif isinstance(event, adv.AdvisoryDeactivated):
                self._emit(t, ADVISORY_DEACTIVATED, {"reason": event.reason.value, "distance_m": d})
            else:
                self._emit(t, PHASE_CHANGED, {
                    "phase_id": event.phase_id,
                    "from": event.from_color.value,
                    "to": event.to_color.value,
                    "beep": event.beep,
                })

    def _driver_accel(self, t: int) -> float:
        driver = self.scenario.driver
        if driver == DRIVER_SCRIPTED:
            script = self.scenario.script
            while self._script_idx < len(script) and script[self._script_idx][0] <= t:
                self._script_accel = script[self._script_idx][1]
                self._script_idx += 1
            return self._script_accel
        if driver == DRIVER_ADVICE_FOLLOWER:
            rec = self._advisory.recommendation
            if rec.kind is adv.AdviceKind.PROCEED:
                return FOLLOWER_GAIN * (rec.target_mps - self._vehicle.speed_mps)
            if rec.kind is adv.AdviceKind.PREPARE_TO_STOP:
                return FOLLOWER_BRAKE_MPS2 if self._vehicle.speed_mps > 0 else 0.0
            return 0.0
        return self._external_accel

    def _emit_vehicle_state(self, t: int) -> None:
        v = self._vehicle
        state = self._advisory
        self._emit(t, VEHICLE_STATE, {
            "speed_mps": v.speed_mps,
            "along_m": v.along_m,
            "distance_m": distance_to_stopbar(v.pos, self._ref_zone),
            "lat": v.pos.lat_deg,
            "lon": v.pos.lon_deg,
            "phase_id": state.phase_id,
            "active": state.active,
            "countdown_ds": state.countdown_ds,
            "color": state.current_color.value if state.current_color is not None else None,
            "recommendation": _recommendation_payload(state.recommendation),
        })


def run_scenario(
    cfg: ZoneConfig,
    scenario: Scenario,
    link: LinkConfig,
    params: Optional[AdvisoryParams] = None,
) -> list[SimEvent]:
    """Run a scenario to completion and return its full event log."""
    return Simulation(cfg, scenario, link, params).run()


# -- Metrics --------------------------------------------------------------------------


@dataclass(frozen=True)
class MetricsReport:
    stops: int
    time_stopped_s: float
    arrival_tick: Optional[int]
    arrived_on_green: bool
    red_violation: bool
    mean_speed_mps: float
    packets_sent: int
    packets_dropped: int
    packets_delivered: int

    def to_dict(self) -> dict:
        return {
            "stops": self.stops,
            "time_stopped_s": self.time_stopped_s,
            "arrival_tick": self.arrival_tick,
            "arrived_on_green": self.arrived_on_green,
            "red_violation": self.red_violation,
            "mean_speed_mps": self.mean_speed_mps,
            "packets_sent": self.packets_sent,
            "packets_dropped": self.packets_dropped,
            "packets_delivered": self.packets_delivered,
        }


def compute_metrics(events: list[SimEvent]) -> MetricsReport:
    """Summarize a run from its event log alone.

    Raises:
        MalformedLog: the log lacks vehicle states or required payload fields.
    """
    speeds: list[float] = []
    prev_speed: Optional[float] = None
    stops = 0
    stopped_ticks = 0
    arrival_tick: Optional[int] = None
    arrival_phase: Optional[int] = None
    frame_colors: dict[int, str] = {}
    sent = dropped = delivered = 0
    try:
        for event in events:
            if event.kind == VEHICLE_STATE:
                speed = float(event.payload["speed_mps"])
                speeds.append(speed)
                if speed == 0.0:
                    stopped_ticks += 1
                if prev_speed == 0.0 and speed > 0.0:
                    stops += 1
                prev_speed = speed
                if arrival_tick is None and float(event.payload["along_m"]) <= 0.0:
                    arrival_tick = event.tick
                    arrival_phase = int(event.payload["phase_id"])
            elif event.kind == FRAME_EMITTED:
                frame_colors[event.tick] = str(event.payload["phase_colors"])
            elif event.kind == PACKET_SENT:
                sent += 1
            elif event.kind == PACKET_DROPPED:
                dropped += 1
            elif event.kind == PACKET_DELIVERED:
                delivered += 1
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedLog(f"bad event payload: {exc}") from None
    if not speeds:
        raise MalformedLog("log contains no VEHICLE_STATE events")
    arrived_on_green = False
    red_violation = False
    if arrival_tick is not None:
        colors = frame_colors.get(arrival_tick)
        if colors is None or arrival_phase is None:
            raise MalformedLog(f"no controller frame at arrival tick {arrival_tick}")
        color = colors[arrival_phase - 1]
        arrived_on_green = color == Color.GREEN.value
        red_violation = color == Color.RED.value
    return MetricsReport(
        stops=stops,
        time_stopped_s=round(stopped_ticks * TICK_S, 6),
        arrival_tick=arrival_tick,
        arrived_on_green=arrived_on_green,
        red_violation=red_violation,
        mean_speed_mps=sum(speeds) / len(speeds),
        packets_sent=sent,
        packets_dropped=dropped,
        packets_delivered=delivered,
    )
