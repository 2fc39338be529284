"""Bundled reference intersection: a standard 8-phase layout for demos and tests.

Four legs meet at the reference point.  Each leg carries two side-by-side
triangular approach zones (left-turn lane nearest the centerline, through
lanes outboard), assigned the usual dual-ring phase numbers: eastbound 5/2,
westbound 1/6, northbound 3/8, southbound 7/4.  Zones reach 900 m out so the
500 m advisory gate, not the geometry, decides when advice starts.
"""

from __future__ import annotations

import json

from .geo_zone import GeoPoint, ZoneConfig, load_zone_config, unproject_local

REF_LAT = 36.0
REF_LON = -84.0

STOPBAR_SETBACK_M = 15.0
ZONE_REACH_M = 900.0
HALF_LANE_M = 4.0
INNER_CENTER_M = 4.5
OUTER_CENTER_M = 13.5

MAIN_LIMIT_MPS = 17.88  # 40 mph
SIDE_LIMIT_MPS = 15.65  # 35 mph
TURN_LIMIT_MPS = 8.9    # 20 mph

# (approach heading unit vector toward the stop bar, lateral unit to the
# driver's left-hand road centerline side, left phase, through phase,
# through limit)
_LEGS = (
    ((1.0, 0.0), (0.0, 1.0), 5, 2, MAIN_LIMIT_MPS),    # eastbound on the west leg
    ((-1.0, 0.0), (0.0, -1.0), 1, 6, MAIN_LIMIT_MPS),  # westbound on the east leg
    ((0.0, 1.0), (-1.0, 0.0), 3, 8, SIDE_LIMIT_MPS),   # northbound on the south leg
    ((0.0, -1.0), (1.0, 0.0), 7, 4, SIDE_LIMIT_MPS),   # southbound on the north leg
)


def _latlon(x: float, y: float) -> list[float]:
    p = unproject_local(x, y, GeoPoint(REF_LAT, REF_LON))
    return [p.lat_deg, p.lon_deg]


def _zone(heading, lateral, phase_id, center_offset_m, limit) -> dict:
    hx, hy = heading
    lx, ly = lateral
    # Apex at the stop bar, base spread across the lane corridor far out.
    apex = (-hx * STOPBAR_SETBACK_M + lx * center_offset_m,
            -hy * STOPBAR_SETBACK_M + ly * center_offset_m)
    base_c = (-hx * ZONE_REACH_M + lx * center_offset_m,
              -hy * ZONE_REACH_M + ly * center_offset_m)
    base1 = (base_c[0] + lx * HALF_LANE_M, base_c[1] + ly * HALF_LANE_M)
    base2 = (base_c[0] - lx * HALF_LANE_M, base_c[1] - ly * HALF_LANE_M)
    return {
        "phase_id": phase_id,
        "vertices": [_latlon(*apex), _latlon(*base1), _latlon(*base2)],
        "stopbar": _latlon(*apex),
        "speed_limit_mps": limit,
    }


def reference_config_dict() -> dict:
    zones = []
    for heading, lateral, left_phase, through_phase, limit in _LEGS:
        zones.append(_zone(heading, lateral, left_phase, INNER_CENTER_M, TURN_LIMIT_MPS))
        zones.append(_zone(heading, lateral, through_phase, OUTER_CENTER_M, limit))
    zones.sort(key=lambda z: z["phase_id"])
    return {
        "version": 1,
        "intersection_id": 42,
        "ref_point": {"lat": REF_LAT, "lon": REF_LON},
        "zones": zones,
        "plan": {
            "cycle_ds": 900,
            "phases": [
                {"phase_id": 1, "offset_ds": 0, "green_ds": 100, "yellow_ds": 30},
                {"phase_id": 2, "offset_ds": 130, "green_ds": 300, "yellow_ds": 40},
                {"phase_id": 3, "offset_ds": 470, "green_ds": 100, "yellow_ds": 30},
                {"phase_id": 4, "offset_ds": 600, "green_ds": 260, "yellow_ds": 40},
                {"phase_id": 5, "offset_ds": 0, "green_ds": 100, "yellow_ds": 30},
                {"phase_id": 6, "offset_ds": 130, "green_ds": 300, "yellow_ds": 40},
                {"phase_id": 7, "offset_ds": 470, "green_ds": 100, "yellow_ds": 30},
                {"phase_id": 8, "offset_ds": 600, "green_ds": 260, "yellow_ds": 40},
            ],
        },
    }


def reference_config() -> ZoneConfig:
    return load_zone_config(json.dumps(reference_config_dict()))


def spawn_on_approach(phase_id: int, distance_m: float) -> list[float]:
    """A spawn point ``distance_m`` up the given approach, mid-corridor."""
    for heading, lateral, left_phase, through_phase, _limit in _LEGS:
        if phase_id in (left_phase, through_phase):
            hx, hy = heading
            lx, ly = lateral
            offset = INNER_CENTER_M if phase_id == left_phase else OUTER_CENTER_M
            x = -hx * (STOPBAR_SETBACK_M + distance_m) + lx * offset
            y = -hy * (STOPBAR_SETBACK_M + distance_m) + ly * offset
            return _latlon(x, y)
    raise ValueError(f"no approach carries phase {phase_id}")


def scenario_dict(
    distance_m: float = 800.0,
    initial_speed_mps: float = 15.0,
    approach_phase_id: int = 2,
    driver: str = "scripted",
    max_ticks: int = 900,
    frame_format: str = "m60",
    script: list | None = None,
) -> dict:
    doc = {
        "spawn": spawn_on_approach(approach_phase_id, distance_m),
        "initial_speed_mps": initial_speed_mps,
        "approach_phase_id": approach_phase_id,
        "driver": {"type": driver},
        "max_ticks": max_ticks,
        "frame_format": frame_format,
    }
    if script is not None:
        doc["driver"]["script"] = script
    return doc
