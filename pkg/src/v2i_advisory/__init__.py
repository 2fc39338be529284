"""Desk-scale V2I intersection approach advisory system.

Decodes raw SPaT frames from two simulated controller families, broadcasts
them with triangular approach-zone geometry, filters them by GPS containment
on a simulated on-board unit, and computes driver advisories (countdown,
phase-change notification, feasible-speed recommendation) inside a
deterministic 10 Hz simulation with a live WebSocket console mode.
"""

from .advisory_engine import (
    AdviceKind,
    AdvisoryParams,
    AdvisoryState,
    SpeedRecommendation,
    build_schedule,
    compute_speed_advice,
    green_window_s,
    update,
)
from .geo_zone import (
    GeoPoint,
    TriZone,
    ZoneConfig,
    distance_to_stopbar,
    haversine_m,
    load_zone_config,
    locate,
    point_in_triangle,
    project_local,
)
from .signal_plan import PhasePlan, SignalPlan, controller_state
from .sim import (
    LinkConfig,
    MetricsReport,
    Scenario,
    SimEvent,
    Simulation,
    compute_metrics,
    load_scenario,
    run_scenario,
)
from .spat_codec import (
    Color,
    FrameFormat,
    PhaseState,
    SpatSnapshot,
    decode_m60,
    decode_tw900,
    detect_format,
    encode_m60,
    encode_rsu_string,
    encode_tw900,
    parse_rsu_string,
)

__version__ = "0.1.0"
