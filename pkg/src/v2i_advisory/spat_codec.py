"""Codecs for raw SPaT controller frames and the RSU broadcast string.

Two controller families are supported, each with its own wire layout:
the M60-like format (big-endian, one record per phase, XOR checksum) and
the TW900-like format (little-endian, per-color bitmasks, CRC-16/CCITT-FALSE).
Both decode into the same canonical ``SpatSnapshot`` so everything downstream
of the RSU is controller-agnostic.  The RSU side re-encodes snapshots as a
pipe-delimited ASCII line with fixed fields.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum

PHASE_COUNT = 8

# -- Errors -------------------------------------------------------------------


class SpatCodecError(ValueError):
    """Base class for frame and string codec failures.

    ``offset`` is the octet offset (or pipe-field index, for the RSU string)
    the failure was detected at.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (offset {offset})")
        self.offset = offset


class BadMagic(SpatCodecError):
    pass


class BadLength(SpatCodecError):
    pass


class BadChecksum(SpatCodecError):
    pass


class BadCrc(SpatCodecError):
    pass


class BadColorCode(SpatCodecError):
    pass


class BadPhaseCount(SpatCodecError):
    pass


class BadMask(SpatCodecError):
    pass


class FieldOverflow(SpatCodecError):
    pass


class MalformedLine(SpatCodecError):
    """RSU string parse failure; ``offset`` is the 0-based pipe-field index."""


# -- Canonical model ----------------------------------------------------------


class Color(Enum):
    RED = "R"
    GREEN = "G"
    YELLOW = "Y"

    @property
    def next(self) -> "Color":
        """Cyclic successor: RED -> GREEN -> YELLOW -> RED."""
        return _NEXT[self]


_NEXT = {Color.RED: Color.GREEN, Color.GREEN: Color.YELLOW, Color.YELLOW: Color.RED}

_COLOR_BY_LETTER = {c.value: c for c in Color}

# M60-like status octet color codes.
_M60_COLOR_CODE = {Color.RED: 0, Color.GREEN: 1, Color.YELLOW: 2}
_M60_COLOR_BY_CODE = {v: k for k, v in _M60_COLOR_CODE.items()}


@dataclass(frozen=True)
class PhaseState:
    """Signal state of one phase: current color plus the next two intervals.

    Durations are deciseconds.  The colors of the next1/next2 intervals are
    not stored; they follow from the fixed color cycle.
    """

    phase_id: int
    color: Color
    remaining_ds: int
    next1_ds: int
    next2_ds: int

    def __post_init__(self):
        if not 1 <= self.phase_id <= PHASE_COUNT:
            raise ValueError(f"phase_id must be 1..{PHASE_COUNT}, got {self.phase_id}")
        if not isinstance(self.color, Color):
            raise ValueError(f"color must be a Color, got {self.color!r}")
        for name in ("remaining_ds", "next1_ds", "next2_ds"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")


@dataclass(frozen=True)
class SpatSnapshot:
    """Decoded signal state for one intersection: all 8 phases at one instant.

    ``phases`` is canonicalized to phase_id order so snapshots compare equal
    regardless of input ordering.
    """

    intersection_id: int
    controller_time_ds: int
    seq: int
    phases: tuple[PhaseState, ...]

    def __post_init__(self):
        for name in ("intersection_id", "controller_time_ds", "seq"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")
        phases = tuple(sorted(self.phases, key=lambda p: p.phase_id))
        if [p.phase_id for p in phases] != list(range(1, PHASE_COUNT + 1)):
            raise ValueError("phases must cover phase_ids 1..8 exactly once")
        object.__setattr__(self, "phases", phases)

    def phase(self, phase_id: int) -> PhaseState:
        return self.phases[phase_id - 1]


class FrameFormat(Enum):
    M60_LIKE = "m60"
    TW900_LIKE = "tw900"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class RawFrame:
    data: bytes
    format_tag: FrameFormat


# -- Checksums ----------------------------------------------------------------


def xor_checksum(data: bytes) -> int:
    """XOR of all octets."""
    result = 0
    for b in data:
        result ^= b
    return result


def crc16_ccitt_false(data: bytes) -> int:
    """CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no XOR-out.

    Check value: crc16_ccitt_false(b"123456789") == 0x29B1.
    """
    crc = 0xFFFF
    for b in data:
        crc ^= b << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) if crc & 0x8000 else (crc << 1)
            crc &= 0xFFFF
    return crc


# -- Format detection ---------------------------------------------------------

M60_MAGIC = b"\xa5\x60"
M60_FRAME_LEN = 67
M60_VERSION = 0x01

TW900_MAGIC = b"\x90\x09"
TW900_FRAME_LEN = 62


def detect_format(data: bytes) -> FrameFormat:
    """Classify raw bytes by magic and length only; checksums are not checked."""
    if len(data) == M60_FRAME_LEN and data[:2] == M60_MAGIC:
        return FrameFormat.M60_LIKE
    if len(data) == TW900_FRAME_LEN and data[:2] == TW900_MAGIC:
        return FrameFormat.TW900_LIKE
    return FrameFormat.UNKNOWN


# -- M60-like format -----------------------------------------------------------
#
# 67 octets, multi-octet integers big-endian:
#   [0..1]  magic A5 60
#   [2]     version = 01
#   [3..4]  intersection_id  u16
#   [5..8]  controller_time_ds  u32
#   [9]     phase_count = 08
#   [10..65] 8 records of 7 octets (phase i at offset 10 + 7*(i-1)):
#            [0]    status: bits 0-1 color (0=RED 1=GREEN 2=YELLOW), bits 2-7 zero
#            [1..2] remaining_ds u16, [3..4] next1_ds u16, [5..6] next2_ds u16
#   [66]    XOR of octets 0..65
#
# The layout carries no sequence number; decode_m60 reports seq=0.


def decode_m60(data: bytes) -> SpatSnapshot:
    """Decode an M60-like frame.

    The trailing XOR checksum is verified before any field is interpreted.

    Raises:
        BadLength, BadMagic, BadChecksum, BadPhaseCount, BadColorCode
    """
    if len(data) >= 2 and data[:2] != M60_MAGIC:
        raise BadMagic(f"expected magic A5 60, got {data[:2].hex(' ').upper()}", offset=0)
    if len(data) != M60_FRAME_LEN:
        raise BadLength(
            f"M60-like frame must be {M60_FRAME_LEN} octets, got {len(data)}",
            offset=len(data),
        )
    expected = xor_checksum(data[:66])
    if data[66] != expected:
        raise BadChecksum(
            f"XOR checksum mismatch: frame has {data[66]:02X}, computed {expected:02X}",
            offset=66,
        )
    if data[9] != PHASE_COUNT:
        raise BadPhaseCount(f"phase count must be 8, got {data[9]}", offset=9)
    intersection_id, = struct.unpack_from(">H", data, 3)
    controller_time_ds, = struct.unpack_from(">I", data, 5)
    phases = []
    for i in range(PHASE_COUNT):
        base = 10 + 7 * i
        status = data[base]
        if status not in _M60_COLOR_BY_CODE:
            raise BadColorCode(f"invalid status octet {status:02X} for phase {i + 1}", offset=base)
        remaining, next1, next2 = struct.unpack_from(">HHH", data, base + 1)
        phases.append(PhaseState(i + 1, _M60_COLOR_BY_CODE[status], remaining, next1, next2))
    return SpatSnapshot(intersection_id, controller_time_ds, seq=0, phases=tuple(phases))


def encode_m60(snapshot: SpatSnapshot) -> bytes:
    """Encode a snapshot as an M60-like frame (drops ``seq``; layout has none).

    Raises:
        FieldOverflow: intersection_id beyond u16, time beyond u32, or any
            duration beyond u16.
    """
    if snapshot.intersection_id > 0xFFFF:
        raise FieldOverflow(f"intersection_id {snapshot.intersection_id} exceeds u16")
    if snapshot.controller_time_ds > 0xFFFFFFFF:
        raise FieldOverflow(f"controller_time_ds {snapshot.controller_time_ds} exceeds u32")
    _check_durations_u16(snapshot)
    out = bytearray()
    out += M60_MAGIC
    out.append(M60_VERSION)
    out += struct.pack(">H", snapshot.intersection_id)
    out += struct.pack(">I", snapshot.controller_time_ds)
    out.append(PHASE_COUNT)
    for ps in snapshot.phases:
        out.append(_M60_COLOR_CODE[ps.color])
        out += struct.pack(">HHH", ps.remaining_ds, ps.next1_ds, ps.next2_ds)
    out.append(xor_checksum(bytes(out)))
    return bytes(out)


# -- TW900-like format ----------------------------------------------------------
#
# 62 octets, multi-octet integers little-endian:
#   [0..1]   magic 90 09
#   [2]      length octet = 3E (62)
#   [3..6]   intersection_id u32
#   [7..8]   seq u16
#   [9]      green_mask   (bit i-1 <-> phase i)
#   [10]     yellow_mask
#   [11]     red_mask     (masks one-hot per bit position)
#   [12..27] eight u16 remaining_ds, phase 1 first
#   [28..43] eight u16 next1_ds
#   [44..59] eight u16 next2_ds
#   [60..61] CRC-16/CCITT-FALSE over octets 0..59, little-endian
#
# The layout carries no controller clock; decode_tw900 reports
# controller_time_ds=0.


def decode_tw900(data: bytes) -> SpatSnapshot:
    """Decode a TW900-like frame.

    The CRC is verified before any field is interpreted.

    Raises:
        BadLength, BadMagic, BadCrc, BadMask
    """
    if len(data) >= 2 and data[:2] != TW900_MAGIC:
        raise BadMagic(f"expected magic 90 09, got {data[:2].hex(' ').upper()}", offset=0)
    if len(data) != TW900_FRAME_LEN:
        raise BadLength(
            f"TW900-like frame must be {TW900_FRAME_LEN} octets, got {len(data)}",
            offset=len(data),
        )
    received, = struct.unpack_from("<H", data, 60)
    computed = crc16_ccitt_false(data[:60])
    if received != computed:
        raise BadCrc(f"CRC mismatch: frame has {received:04X}, computed {computed:04X}", offset=60)
    if data[2] != TW900_FRAME_LEN:
        raise BadLength(f"length octet must be 3E, got {data[2]:02X}", offset=2)
    intersection_id, = struct.unpack_from("<I", data, 3)
    seq, = struct.unpack_from("<H", data, 7)
    green, yellow, red = data[9], data[10], data[11]
    remaining = struct.unpack_from("<8H", data, 12)
    next1 = struct.unpack_from("<8H", data, 28)
    next2 = struct.unpack_from("<8H", data, 44)
    phases = []
    for i in range(PHASE_COUNT):
        bit = 1 << i
        claimed = [c for c, mask in ((Color.GREEN, green), (Color.YELLOW, yellow), (Color.RED, red)) if mask & bit]
        if len(claimed) != 1:
            raise BadMask(f"phase {i + 1} claimed by {len(claimed)} color masks", offset=9)
        phases.append(PhaseState(i + 1, claimed[0], remaining[i], next1[i], next2[i]))
    return SpatSnapshot(intersection_id, controller_time_ds=0, seq=seq, phases=tuple(phases))


def encode_tw900(snapshot: SpatSnapshot) -> bytes:
    """Encode a snapshot as a TW900-like frame (drops ``controller_time_ds``).

    Raises:
        FieldOverflow: intersection_id beyond u32, seq beyond u16, or any
            duration beyond u16.
    """
    if snapshot.intersection_id > 0xFFFFFFFF:
        raise FieldOverflow(f"intersection_id {snapshot.intersection_id} exceeds u32")
    if snapshot.seq > 0xFFFF:
        raise FieldOverflow(f"seq {snapshot.seq} exceeds u16")
    _check_durations_u16(snapshot)
    masks = {Color.GREEN: 0, Color.YELLOW: 0, Color.RED: 0}
    for i, ps in enumerate(snapshot.phases):
        masks[ps.color] |= 1 << i
    out = bytearray()
    out += TW900_MAGIC
    out.append(TW900_FRAME_LEN)
    out += struct.pack("<I", snapshot.intersection_id)
    out += struct.pack("<H", snapshot.seq)
    out += bytes([masks[Color.GREEN], masks[Color.YELLOW], masks[Color.RED]])
    out += struct.pack("<8H", *(p.remaining_ds for p in snapshot.phases))
    out += struct.pack("<8H", *(p.next1_ds for p in snapshot.phases))
    out += struct.pack("<8H", *(p.next2_ds for p in snapshot.phases))
    out += struct.pack("<H", crc16_ccitt_false(bytes(out)))
    return bytes(out)


def _check_durations_u16(snapshot: SpatSnapshot) -> None:
    for ps in snapshot.phases:
        for name in ("remaining_ds", "next1_ds", "next2_ds"):
            value = getattr(ps, name)
            if value > 0xFFFF:
                raise FieldOverflow(f"phase {ps.phase_id} {name} {value} exceeds u16")


def decode(data: bytes, format_tag: FrameFormat | None = None) -> SpatSnapshot:
    """Decode through the common platform: detect the format, then dispatch."""
    tag = format_tag or detect_format(data)
    if tag is FrameFormat.M60_LIKE:
        return decode_m60(data)
    if tag is FrameFormat.TW900_LIKE:
        return decode_tw900(data)
    raise BadMagic("unrecognized frame format", offset=0)


# -- RSU string ----------------------------------------------------------------
#
# One ASCII line, pipe-delimited, fixed field order:
#   SPAT|<version=1>|<intersection_id>|<controller_time_ds>|<seq>|<p1>|...|<p8>
# where <pi> = <phase_id>:<color R|G|Y>:<remaining_ds>:<next1_ds>:<next2_ds>

RSU_STRING_VERSION = 1
_RSU_FIELD_COUNT = 5 + PHASE_COUNT


def encode_rsu_string(snapshot: SpatSnapshot) -> str:
    """Render a snapshot as the RSU's predefined-field line (no newline)."""
    fields = [
        "SPAT",
        str(RSU_STRING_VERSION),
        str(snapshot.intersection_id),
        str(snapshot.controller_time_ds),
        str(snapshot.seq),
    ]
    for ps in snapshot.phases:
        fields.append(f"{ps.phase_id}:{ps.color.value}:{ps.remaining_ds}:{ps.next1_ds}:{ps.next2_ds}")
    return "|".join(fields)


def parse_rsu_string(line: str) -> SpatSnapshot:
    """Parse an RSU line; exact inverse of :func:`encode_rsu_string`.

    Raises:
        MalformedLine: wrong field count, bad header or version, unknown color
            code, non-numeric field, or bad phase ids; ``offset`` is the
            0-based pipe-field index.
    """
    fields = line.rstrip("\r\n").split("|")
    if len(fields) != _RSU_FIELD_COUNT:
        raise MalformedLine(
            f"expected {_RSU_FIELD_COUNT} pipe-delimited fields, got {len(fields)}",
            offset=len(fields) - 1,
        )
    if fields[0] != "SPAT":
        raise MalformedLine(f"expected header SPAT, got {fields[0]!r}", offset=0)
    if fields[1] != str(RSU_STRING_VERSION):
        raise MalformedLine(f"unsupported version {fields[1]!r}", offset=1)
    intersection_id = _parse_int(fields, 2)
    controller_time_ds = _parse_int(fields, 3)
    seq = _parse_int(fields, 4)
    phases = []
    for i in range(PHASE_COUNT):
        index = 5 + i
        parts = fields[index].split(":")
        if len(parts) != 5:
            raise MalformedLine(f"phase field must have 5 subfields, got {len(parts)}", offset=index)
        if parts[1] not in _COLOR_BY_LETTER:
            raise MalformedLine(f"unknown color code {parts[1]!r}", offset=index)
        try:
            phase_id, remaining, next1, next2 = (int(parts[k]) for k in (0, 2, 3, 4))
            phases.append(PhaseState(phase_id, _COLOR_BY_LETTER[parts[1]], remaining, next1, next2))
        except ValueError as exc:
            raise MalformedLine(f"bad phase field: {exc}", offset=index) from None
    try:
        return SpatSnapshot(intersection_id, controller_time_ds, seq, tuple(phases))
    except ValueError as exc:
        raise MalformedLine(f"bad phase ids: {exc}", offset=5) from None


def _parse_int(fields: list[str], index: int) -> int:
    value = fields[index]
    if not value.isdigit():
        raise MalformedLine(f"non-numeric field {value!r}", offset=index)
    return int(value)


# -- Snapshot <-> JSON-friendly dict (CLI and live protocol plumbing) ----------


def snapshot_to_dict(snapshot: SpatSnapshot) -> dict:
    return {
        "intersection_id": snapshot.intersection_id,
        "controller_time_ds": snapshot.controller_time_ds,
        "seq": snapshot.seq,
        "phases": [
            {
                "phase_id": ps.phase_id,
                "color": ps.color.value,
                "remaining_ds": ps.remaining_ds,
                "next1_ds": ps.next1_ds,
                "next2_ds": ps.next2_ds,
            }
            for ps in snapshot.phases
        ],
    }


def snapshot_from_dict(doc: dict) -> SpatSnapshot:
    try:
        phases = tuple(
            PhaseState(
                int(p["phase_id"]),
                _COLOR_BY_LETTER[p["color"]],
                int(p["remaining_ds"]),
                int(p["next1_ds"]),
                int(p["next2_ds"]),
            )
            for p in doc["phases"]
        )
        return SpatSnapshot(
            int(doc["intersection_id"]),
            int(doc["controller_time_ds"]),
            int(doc["seq"]),
            phases,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad snapshot document: {exc}") from None
