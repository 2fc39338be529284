"""Driver advisory computation: countdown, gating, and speed recommendation.

The engine is a pure state-transition function.  Each received SPaT packet
produces a new ``AdvisoryState`` plus the events the driver display must
surface (activation, deactivation, phase-change beep).  The speed rule finds
the constant-speed window that arrives inside the approach phase's green
interval and recommends its supremum, so following the advice minimizes delay
while still arriving on green.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Union

from .spat_codec import Color, PhaseState


class PhaseMismatch(Exception):
    """An active advisory was fed a different phase; reset the state instead."""

    def __init__(self, prev_phase_id: int, new_phase_id: int):
        super().__init__(
            f"advisory state tracks phase {prev_phase_id} but packet is for "
            f"phase {new_phase_id}; reset state on zone changes"
        )


@dataclass(frozen=True)
class AdvisoryParams:
    """Gating distances and speed-rule tuning, all configurable.

    ``max_start_m``/``min_stop_m`` bound the advisory display zone along the
    approach.  ``green_end_margin_s`` trims the end of green so advice never
    targets the last instant.  ``v_floor_mps`` is the slowest speed worth
    recommending; it must stay below every zone speed limit.
    """

    max_start_m: float = 500.0
    min_stop_m: float = 20.0
    green_end_margin_s: float = 1.0
    v_floor_mps: float = 2.0

    def __post_init__(self):
        if self.max_start_m <= 0 or self.min_stop_m <= 0:
            raise ValueError("distance gates must be positive")
        if self.min_stop_m >= self.max_start_m:
            raise ValueError(
                f"min_stop_m ({self.min_stop_m}) must be below max_start_m ({self.max_start_m})"
            )
        if self.green_end_margin_s < 0:
            raise ValueError("green_end_margin_s must be non-negative")
        if self.v_floor_mps <= 0:
            raise ValueError("v_floor_mps must be positive")


@dataclass(frozen=True)
class PhaseSchedule:
    """Three consecutive intervals (color, start_ds, end_ds) starting now."""

    intervals: tuple[tuple[Color, int, int], tuple[Color, int, int], tuple[Color, int, int]]


def build_schedule(ps: PhaseState) -> PhaseSchedule:
    """Unroll a phase state into its 3-interval look-ahead schedule."""
    t1 = ps.remaining_ds
    t2 = t1 + ps.next1_ds
    t3 = t2 + ps.next2_ds
    c1 = ps.color
    c2 = c1.next
    c3 = c2.next
    return PhaseSchedule(((c1, 0, t1), (c2, t1, t2), (c3, t2, t3)))


def green_window_s(sched: PhaseSchedule) -> tuple[float, float]:
    """Bounds of the schedule's unique green interval, in seconds."""
    for color, start, end in sched.intervals:
        if color is Color.GREEN:
            return start / 10.0, end / 10.0
    raise AssertionError("3-interval color cycle always contains green")


class AdviceKind(Enum):
    PROCEED = "proceed"
    PREPARE_TO_STOP = "stop"
    NO_ADVICE = "none"


@dataclass(frozen=True)
class SpeedRecommendation:
    kind: AdviceKind
    target_mps: Optional[float] = None
    window_mps: Optional[tuple[float, float]] = None


NO_ADVICE = SpeedRecommendation(AdviceKind.NO_ADVICE)
PREPARE_TO_STOP = SpeedRecommendation(AdviceKind.PREPARE_TO_STOP)


def compute_speed_advice(
    d_m: float,
    sched: PhaseSchedule,
    speed_limit_mps: float,
    params: AdvisoryParams,
) -> SpeedRecommendation:
    """Constant-speed feasibility against the margin-trimmed green window.

    With green window [g0, g1] and g1' = g1 - margin, the feasible speeds are
    [d/g1', U] clipped to [v_floor, speed_limit], where U caps arrival before
    the green starts (U = d/g0 when the green is in the future).  An empty
    window means no constant legal speed arrives on green: prepare to stop.
    """
    g0, g1 = green_window_s(sched)
    g1_trim = g1 - params.green_end_margin_s
    if g1_trim <= g0:
        return PREPARE_TO_STOP
    upper = speed_limit_mps if g0 == 0 else min(speed_limit_mps, d_m / g0)
    lo = max(d_m / g1_trim, params.v_floor_mps)
    hi = min(upper, speed_limit_mps)
    if lo > hi:
        return PREPARE_TO_STOP
    target = hi
    arrival_s = d_m / target
    assert g0 - 1e-9 <= arrival_s <= g1_trim + 1e-9, (
        f"proceed advice must arrive inside trimmed green: {arrival_s} vs [{g0}, {g1_trim}]"
    )
    return SpeedRecommendation(AdviceKind.PROCEED, target_mps=target, window_mps=(lo, hi))


class DeactivationReason(Enum):
    PASSED_MIN_DIST = "PASSED_MIN_DIST"
    LEFT_ZONE = "LEFT_ZONE"
    BEYOND_MAX_DIST = "BEYOND_MAX_DIST"


@dataclass(frozen=True)
class PhaseChanged:
    phase_id: int
    from_color: Color
    to_color: Color
    beep: bool = True


@dataclass(frozen=True)
class AdvisoryActivated:
    phase_id: int


@dataclass(frozen=True)
class AdvisoryDeactivated:
    reason: DeactivationReason


AdvisoryEvent = Union[PhaseChanged, AdvisoryActivated, AdvisoryDeactivated]


@dataclass(frozen=True)
class AdvisoryState:
    """What the driver display shows for one tracked phase.

    ``current_color`` is None only in the initial state, before the first
    packet for this phase has been processed.
    """

    active: bool
    phase_id: int
    countdown_ds: int
    current_color: Optional[Color]
    recommendation: SpeedRecommendation
    distance_m: float

    @classmethod
    def initial(cls, phase_id: int) -> "AdvisoryState":
        return cls(
            active=False,
            phase_id=phase_id,
            countdown_ds=0,
            current_color=None,
            recommendation=NO_ADVICE,
            distance_m=float("inf"),
        )


def update(
    prev: AdvisoryState,
    ps: PhaseState,
    d_m: float,
    vehicle_in_zone: bool,
    speed_limit_mps: float,
    params: AdvisoryParams,
) -> tuple[AdvisoryState, list[AdvisoryEvent]]:
    """Advance the advisory for one received packet.

    Activation requires the vehicle to be inside its zone and within the
    [min_stop_m, max_start_m] distance gate.  Phase-change notifications are
    driver-facing, so they only fire while the advisory is active.

    Raises:
        PhaseMismatch: active state fed a packet for a different phase.
    """
    if prev.active and prev.phase_id != ps.phase_id:
        raise PhaseMismatch(prev.phase_id, ps.phase_id)

    active = vehicle_in_zone and params.min_stop_m <= d_m <= params.max_start_m
    events: list[AdvisoryEvent] = []
    if active and not prev.active:
        events.append(AdvisoryActivated(ps.phase_id))
    elif prev.active and not active:
        if not vehicle_in_zone:
            reason = DeactivationReason.LEFT_ZONE
        elif d_m < params.min_stop_m:
            reason = DeactivationReason.PASSED_MIN_DIST
        else:
            reason = DeactivationReason.BEYOND_MAX_DIST
        events.append(AdvisoryDeactivated(reason))

    if (
        active
        and prev.phase_id == ps.phase_id
        and prev.current_color is not None
        and prev.current_color is not ps.color
    ):
        events.append(PhaseChanged(ps.phase_id, prev.current_color, ps.color))

    if active:
        recommendation = compute_speed_advice(d_m, build_schedule(ps), speed_limit_mps, params)
    else:
        recommendation = NO_ADVICE
    state = AdvisoryState(
        active=active,
        phase_id=ps.phase_id,
        countdown_ds=ps.remaining_ds,
        current_color=ps.color,
        recommendation=recommendation,
        distance_m=d_m,
    )
    return state, events
