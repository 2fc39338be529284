"""Triangular approach zones: config loading, containment, and distances.

GPS coordinates are projected onto a local tangent plane (equirectangular
about the intersection's reference point) before any geometry runs.  At the
sub-kilometer scale of one intersection the projection error is below a
centimeter, so plain planar triangle tests are exact enough for lane-level
zone filtering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .signal_plan import SignalPlan, plan_from_dict
from .spat_codec import PHASE_COUNT

EARTH_RADIUS_M = 6_371_000.0
LOCAL_RANGE_DEG = 1.0
MIN_TRIANGLE_AREA_M2 = 1.0

# Barycentric lattice with i+j+k = 13 gives 105 sample points per triangle.
_OVERLAP_GRID_N = 13


class GeoZoneError(ValueError):
    pass


class OutOfLocalRange(GeoZoneError):
    pass


class SchemaError(GeoZoneError):
    """Structural config problem (missing/extra field, wrong type or value)."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ValidationError(GeoZoneError):
    """Semantic config problem(s); ``issues`` lists every one found."""

    def __init__(self, issues: list[str]):
        super().__init__("; ".join(issues))
        self.issues = issues


@dataclass(frozen=True)
class GeoPoint:
    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"lat_deg must be in [-90, 90], got {self.lat_deg}")
        if not -180.0 <= self.lon_deg < 180.0:
            raise ValueError(f"lon_deg must be in [-180, 180), got {self.lon_deg}")


@dataclass(frozen=True)
class TriZone:
    """One approach: a triangle of GPS vertices tied to a signal phase."""

    phase_id: int
    vertices: tuple[GeoPoint, GeoPoint, GeoPoint]
    stopbar: GeoPoint
    speed_limit_mps: float


@dataclass(frozen=True)
class ZoneConfig:
    intersection_id: int
    ref_point: GeoPoint
    zones: tuple[TriZone, ...]
    plan: SignalPlan


# -- Projection and distance ----------------------------------------------------


def project_local(p: GeoPoint, origin: GeoPoint) -> tuple[float, float]:
    """Equirectangular projection of ``p`` about ``origin``, in meters.

    Raises:
        OutOfLocalRange: point is 1 degree or more away from the origin in
            latitude or longitude; the flat-earth approximation is local only.
    """
    dlat = p.lat_deg - origin.lat_deg
    dlon = p.lon_deg - origin.lon_deg
    if abs(dlat) >= LOCAL_RANGE_DEG or abs(dlon) >= LOCAL_RANGE_DEG:
        raise OutOfLocalRange(
            f"point ({p.lat_deg}, {p.lon_deg}) too far from origin "
            f"({origin.lat_deg}, {origin.lon_deg}) for local projection"
        )
    x = EARTH_RADIUS_M * math.radians(dlon) * math.cos(math.radians(origin.lat_deg))
    y = EARTH_RADIUS_M * math.radians(dlat)
    return x, y


def unproject_local(x: float, y: float, origin: GeoPoint) -> GeoPoint:
    """Analytic inverse of :func:`project_local`."""
    lat = origin.lat_deg + math.degrees(y / EARTH_RADIUS_M)
    lon = origin.lon_deg + math.degrees(x / (EARTH_RADIUS_M * math.cos(math.radians(origin.lat_deg))))
    return GeoPoint(lat, lon)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in meters (spherical earth, R = 6,371,000 m)."""
    phi1 = math.radians(a.lat_deg)
    phi2 = math.radians(b.lat_deg)
    dphi = math.radians(b.lat_deg - a.lat_deg)
    dlam = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dphi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


# -- Triangle tests --------------------------------------------------------------


def _cross(ax: float, ay: float, bx: float, by: float, px: float, py: float) -> float:
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


def point_in_triangle(p: GeoPoint, zone: TriZone, origin: GeoPoint) -> bool:
    """Same-side sign test on the projected triangle; edges count as inside."""
    px, py = project_local(p, origin)
    (ax, ay), (bx, by), (cx, cy) = (project_local(v, origin) for v in zone.vertices)
    d1 = _cross(ax, ay, bx, by, px, py)
    d2 = _cross(bx, by, cx, cy, px, py)
    d3 = _cross(cx, cy, ax, ay, px, py)
    has_neg = d1 < 0 or d2 < 0 or d3 < 0
    has_pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (has_neg and has_pos)


# Cross products are in m^2 (twice the sub-triangle area).  Points on a shared
# edge land within float noise of zero, so the strict-interior test used by the
# overlap check keeps a margin well above that noise and far below any
# real penetration (1 mm against a 1 km edge is ~1 m^2).
_INTERIOR_EPS_M2 = 1e-6


def _strictly_inside(px: float, py: float, tri: tuple[tuple[float, float], ...]) -> bool:
    (ax, ay), (bx, by), (cx, cy) = tri
    d1 = _cross(ax, ay, bx, by, px, py)
    d2 = _cross(bx, by, cx, cy, px, py)
    d3 = _cross(cx, cy, ax, ay, px, py)
    eps = _INTERIOR_EPS_M2
    return (d1 > eps and d2 > eps and d3 > eps) or (d1 < -eps and d2 < -eps and d3 < -eps)


def _triangle_area_m2(tri: tuple[tuple[float, float], ...]) -> float:
    (ax, ay), (bx, by), (cx, cy) = tri
    return abs(_cross(ax, ay, bx, by, cx, cy)) / 2.0


def locate(p: GeoPoint, cfg: ZoneConfig) -> TriZone | None:
    """Zone containing ``p``, or None; boundary ties go to the lowest phase_id."""
    best = None
    for zone in cfg.zones:
        if (best is None or zone.phase_id < best.phase_id) and point_in_triangle(p, zone, cfg.ref_point):
            best = zone
    return best


def distance_to_stopbar(p: GeoPoint, zone: TriZone) -> float:
    """Straight-line distance to the zone's stop bar, meters."""
    return haversine_m(p, zone.stopbar)


# -- Config loading ---------------------------------------------------------------
#
# JSON schema (unknown keys rejected at every level):
# {
#   "version": 1,
#   "intersection_id": int >= 0,
#   "ref_point": {"lat": deg, "lon": deg},
#   "zones": [
#     {"phase_id": 1..8, "vertices": [[lat,lon],[lat,lon],[lat,lon]],
#      "stopbar": [lat,lon], "speed_limit_mps": positive real}
#   ],
#   "plan": {"cycle_ds": int,
#            "phases": [{"phase_id": 1..8, "offset_ds": int,
#                        "green_ds": int, "yellow_ds": int} x8]}
# }


def load_zone_config(document: str) -> ZoneConfig:
    """Parse and fully validate a zone-setup config document.

    Raises:
        SchemaError: structural problems, fail-fast with a JSON path.
        ValidationError: semantic problems (geometry, phase range, plan),
            collected across the whole document.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}", path="$") from None
    _require_object(doc, {"version", "intersection_id", "ref_point", "zones", "plan"}, "$")
    if doc["version"] != 1:
        raise SchemaError(f"unsupported version {doc['version']!r}", path="$.version")
    intersection_id = _require_int(doc["intersection_id"], "$.intersection_id", minimum=0)
    ref_point = _parse_latlon_object(doc["ref_point"], "$.ref_point")

    if not isinstance(doc["zones"], list) or not doc["zones"]:
        raise SchemaError("must be a non-empty array", path="$.zones")
    zones = []
    for i, zdoc in enumerate(doc["zones"]):
        path = f"$.zones[{i}]"
        _require_object(zdoc, {"phase_id", "vertices", "stopbar", "speed_limit_mps"}, path)
        phase_id = _require_int(zdoc["phase_id"], f"{path}.phase_id")
        if not isinstance(zdoc["vertices"], list) or len(zdoc["vertices"]) != 3:
            raise SchemaError("must be an array of 3 [lat, lon] pairs", path=f"{path}.vertices")
        vertices = tuple(
            _parse_latlon_pair(v, f"{path}.vertices[{j}]") for j, v in enumerate(zdoc["vertices"])
        )
        stopbar = _parse_latlon_pair(zdoc["stopbar"], f"{path}.stopbar")
        speed = zdoc["speed_limit_mps"]
        if not isinstance(speed, (int, float)) or isinstance(speed, bool) or not speed > 0:
            raise SchemaError(f"must be a positive number, got {speed!r}", path=f"{path}.speed_limit_mps")
        zones.append(TriZone(phase_id, vertices, stopbar, float(speed)))

    plan_doc = doc["plan"]
    _require_object(plan_doc, {"cycle_ds", "phases"}, "$.plan")
    _require_int(plan_doc["cycle_ds"], "$.plan.cycle_ds")
    if not isinstance(plan_doc["phases"], list):
        raise SchemaError("must be an array", path="$.plan.phases")
    for i, pdoc in enumerate(plan_doc["phases"]):
        path = f"$.plan.phases[{i}]"
        _require_object(pdoc, {"phase_id", "offset_ds", "green_ds", "yellow_ds"}, path)
        for key in ("phase_id", "offset_ds", "green_ds", "yellow_ds"):
            _require_int(pdoc[key], f"{path}.{key}")
    phase_ids = [p["phase_id"] for p in plan_doc["phases"]]
    if sorted(phase_ids) != sorted(set(phase_ids)):
        raise SchemaError("duplicate phase_id entries", path="$.plan.phases")
    plan = plan_from_dict(plan_doc)

    cfg = ZoneConfig(intersection_id, ref_point, tuple(zones), plan)
    issues = validate_zone_config(cfg)
    if issues:
        raise ValidationError(issues)
    return cfg


def validate_zone_config(cfg: ZoneConfig) -> list[str]:
    """Collect every semantic problem in the config; empty list means valid."""
    issues = []
    projected: list[tuple[tuple[float, float], ...] | None] = []
    for i, zone in enumerate(cfg.zones):
        ok = True
        if not 1 <= zone.phase_id <= PHASE_COUNT:
            issues.append(f"zone {i}: phase out of range: {zone.phase_id}")
        try:
            tri = tuple(project_local(v, cfg.ref_point) for v in zone.vertices)
            project_local(zone.stopbar, cfg.ref_point)
        except OutOfLocalRange as exc:
            issues.append(f"zone {i}: {exc}")
            projected.append(None)
            continue
        if _triangle_area_m2(tri) <= MIN_TRIANGLE_AREA_M2:
            issues.append(f"zone {i}: collinear or degenerate triangle (area <= 1 m^2)")
            ok = False
        if ok and not point_in_triangle(zone.stopbar, zone, cfg.ref_point):
            issues.append(f"zone {i}: stopbar outside triangle")
        projected.append(tri if ok else None)
    for i in range(len(cfg.zones)):
        for j in range(i + 1, len(cfg.zones)):
            if projected[i] is not None and projected[j] is not None:
                if _triangles_overlap(projected[i], projected[j]):
                    issues.append(f"zone {i}: overlaps zone {j}")
    issues.extend(cfg.plan.validate())
    return issues


def _triangles_overlap(a: tuple[tuple[float, float], ...], b: tuple[tuple[float, float], ...]) -> bool:
    # Strict interior tests only: zones may legally share edges or vertices
    # (the locate() tie-break exists exactly for that case).
    for px, py in a:
        if _strictly_inside(px, py, b):
            return True
    for px, py in b:
        if _strictly_inside(px, py, a):
            return True
    for tri, other in ((a, b), (b, a)):
        (ax, ay), (bx, by), (cx, cy) = tri
        n = _OVERLAP_GRID_N
        for i in range(n + 1):
            for j in range(n + 1 - i):
                k = n - i - j
                px = (i * ax + j * bx + k * cx) / n
                py = (i * ay + j * by + k * cy) / n
                if _strictly_inside(px, py, other):
                    return True
    return False


# -- Schema walking helpers -------------------------------------------------------


def _require_object(value, keys: set[str], path: str) -> None:
    if not isinstance(value, dict):
        raise SchemaError(f"must be an object, got {type(value).__name__}", path=path)
    missing = keys - value.keys()
    if missing:
        raise SchemaError(f"missing field(s): {', '.join(sorted(missing))}", path=path)
    extra = value.keys() - keys
    if extra:
        raise SchemaError(f"unknown field(s): {', '.join(sorted(extra))}", path=path)


def _require_int(value, path: str, minimum: int | None = None) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise SchemaError(f"must be an integer, got {value!r}", path=path)
    if minimum is not None and value < minimum:
        raise SchemaError(f"must be >= {minimum}, got {value}", path=path)
    return value


def _require_number(value, path: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaError(f"must be a number, got {value!r}", path=path)
    return float(value)


def _parse_latlon_object(value, path: str) -> GeoPoint:
    _require_object(value, {"lat", "lon"}, path)
    return _make_point(_require_number(value["lat"], f"{path}.lat"),
                       _require_number(value["lon"], f"{path}.lon"), path)


def _parse_latlon_pair(value, path: str) -> GeoPoint:
    if not isinstance(value, list) or len(value) != 2:
        raise SchemaError("must be a [lat, lon] pair", path=path)
    return _make_point(_require_number(value[0], f"{path}[0]"),
                       _require_number(value[1], f"{path}[1]"), path)


def _make_point(lat: float, lon: float, path: str) -> GeoPoint:
    try:
        return GeoPoint(lat, lon)
    except ValueError as exc:
        raise SchemaError(str(exc), path=path) from None
