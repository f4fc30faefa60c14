"""Wire protocol for zone edits and state broadcasts.

One message per line: a UTF-8 JSON object with a required ``"type"``
discriminator. A remove message with id 0 is the clear-all command, since
zone IDs start at 1. Unknown message types are rejected; unknown extra fields
are ignored for forward compatibility. Map cell payloads are base64 of one
byte per cell, row-major: 0 free, 100 occupied, 255 unknown.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

from ..grid import OccupancyGrid
from ..geometry import Polygon, DegeneratePolygonError
from ..zones import DuplicateIdError, InvalidIdError, UnknownIdError, ZoneRegistry

CLEAR_ID = 0

GOLDEN_DIR = Path(__file__).parent / "golden"


class ProtocolError(ValueError):
    """Frame is not a valid message: bad JSON, bad type, or schema violation."""


@dataclass(frozen=True)
class AddZone:
    zone_id: int
    vertices: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class RemoveZone:
    zone_id: int  # 0 means clear all


@dataclass(frozen=True)
class MapState:
    width: int
    height: int
    resolution: float
    origin: tuple[float, float, float]
    cells: bytes
    seq: int = 0


@dataclass(frozen=True)
class RobotState:
    pose: tuple[float, float, float]
    path: tuple[tuple[float, float], ...] = ()
    seq: int = 0


@dataclass(frozen=True)
class ErrorReply:
    code: str
    message: str = ""


WireMessage = Union[AddZone, RemoveZone, MapState, RobotState, ErrorReply]


def encode(msg: WireMessage) -> str:
    """Canonical single-line JSON frame (no trailing newline)."""
    if isinstance(msg, AddZone):
        payload = {
            "type": "add",
            "id": msg.zone_id,
            "vertices": [[x, y] for x, y in msg.vertices],
        }
    elif isinstance(msg, RemoveZone):
        payload = {"type": "remove", "id": msg.zone_id}
    elif isinstance(msg, MapState):
        payload = {
            "type": "map",
            "width": msg.width,
            "height": msg.height,
            "resolution": msg.resolution,
            "origin": list(msg.origin),
            "cells": base64.b64encode(msg.cells).decode("ascii"),
            "seq": msg.seq,
        }
    elif isinstance(msg, RobotState):
        payload = {
            "type": "robot",
            "pose": list(msg.pose),
            "path": [[x, y] for x, y in msg.path],
            "seq": msg.seq,
        }
    elif isinstance(msg, ErrorReply):
        payload = {"type": "error", "code": msg.code, "message": msg.message}
    else:
        raise TypeError(f"not a wire message: {msg!r}")
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _require_number(obj: dict, key: str) -> float:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"field {key!r} must be a number")
    return float(value)


def _require_int(obj: dict, key: str) -> int:
    value = obj.get(key)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProtocolError(f"field {key!r} must be an integer")
    return value


def _point_list(obj: dict, key: str) -> list[tuple[float, float]]:
    raw = obj.get(key)
    if not isinstance(raw, list):
        raise ProtocolError(f"field {key!r} must be a list of [x, y] pairs")
    points = []
    for item in raw:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in item)
        ):
            raise ProtocolError(f"field {key!r} must be a list of [x, y] pairs")
        points.append((float(item[0]), float(item[1])))
    return points


def decode(frame: str | bytes) -> WireMessage:
    """Parse one frame; raises ProtocolError on malformed or schema-violating input."""
    if isinstance(frame, bytes):
        try:
            frame = frame.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ProtocolError(f"frame is not UTF-8: {exc}") from exc
    try:
        obj = json.loads(frame)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"frame is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ProtocolError("frame must be a JSON object")
    msg_type = obj.get("type")
    if msg_type == "add":
        zone_id = _require_int(obj, "id")
        if zone_id < 1:
            raise ProtocolError(f"add id must be >= 1, got {zone_id}")
        vertices = _point_list(obj, "vertices")
        if len(vertices) < 3:
            raise ProtocolError(f"add needs >= 3 vertices, got {len(vertices)}")
        return AddZone(zone_id, tuple(vertices))
    if msg_type == "remove":
        zone_id = _require_int(obj, "id")
        if zone_id < 0:
            raise ProtocolError(f"remove id must be >= 0, got {zone_id}")
        return RemoveZone(zone_id)
    if msg_type == "map":
        width = _require_int(obj, "width")
        height = _require_int(obj, "height")
        if width < 1 or height < 1:
            raise ProtocolError(f"bad map dimensions {width}x{height}")
        resolution = _require_number(obj, "resolution")
        if resolution <= 0:
            raise ProtocolError(f"map resolution must be > 0, got {resolution}")
        origin = obj.get("origin")
        if not isinstance(origin, list) or len(origin) != 3:
            raise ProtocolError("map origin must be [x, y, theta]")
        cells_b64 = obj.get("cells")
        if not isinstance(cells_b64, str):
            raise ProtocolError("map cells must be a base64 string")
        try:
            cells = base64.b64decode(cells_b64, validate=True)
        except (binascii.Error, ValueError) as exc:
            raise ProtocolError(f"map cells are not valid base64: {exc}") from exc
        if len(cells) != width * height:
            raise ProtocolError(
                f"map cells length {len(cells)} != {width}x{height}"
            )
        seq = _require_int(obj, "seq") if "seq" in obj else 0
        return MapState(width, height, resolution, tuple(float(v) for v in origin), cells, seq)
    if msg_type == "robot":
        pose = obj.get("pose")
        if not isinstance(pose, list) or len(pose) != 3:
            raise ProtocolError("robot pose must be [x, y, theta]")
        path = _point_list(obj, "path") if "path" in obj else []
        seq = _require_int(obj, "seq") if "seq" in obj else 0
        return RobotState(tuple(float(v) for v in pose), tuple(path), seq)
    if msg_type == "error":
        code = obj.get("code")
        if not isinstance(code, str) or not code:
            raise ProtocolError("error code must be a non-empty string")
        message = obj.get("message", "")
        if not isinstance(message, str):
            raise ProtocolError("error message must be a string")
        return ErrorReply(code, message)
    raise ProtocolError(f"unknown message type {msg_type!r}")


def map_state_of(grid: OccupancyGrid, seq: int = 0) -> MapState:
    o = grid.origin
    return MapState(
        grid.width,
        grid.height,
        grid.resolution,
        (o.x, o.y, o.theta),
        grid.to_cell_bytes(),
        seq,
    )


@dataclass(frozen=True)
class ApplyResult:
    """Outcome of applying one edit message to a registry."""

    applied: bool
    error: ErrorReply | None = None
    map_state: MapState | None = None


def apply_message(registry: ZoneRegistry, msg: AddZone | RemoveZone, seq: int = 0) -> ApplyResult:
    """Apply an edit to the registry.

    Success yields a MapState broadcast of the new composite. Domain errors
    (duplicate/unknown/invalid id, degenerate polygon) leave the registry
    untouched and yield an error reply addressed to the sender only.
    """
    try:
        if isinstance(msg, AddZone):
            registry.add_zone(msg.zone_id, Polygon(msg.vertices))
        elif isinstance(msg, RemoveZone):
            if msg.zone_id == CLEAR_ID:
                registry.clear()
            else:
                registry.delete_zone(msg.zone_id)
        else:
            return ApplyResult(False, ErrorReply("bad_message", f"cannot apply {type(msg).__name__}"))
    except DuplicateIdError as exc:
        return ApplyResult(False, ErrorReply("duplicate_id", str(exc)))
    except UnknownIdError as exc:
        return ApplyResult(False, ErrorReply("unknown_id", f"no zone with id {exc.args[0]}"))
    except InvalidIdError as exc:
        return ApplyResult(False, ErrorReply("invalid_id", str(exc)))
    except (DegeneratePolygonError, OverflowError) as exc:
        # OverflowError: vertex coordinates too extreme to quantize
        return ApplyResult(False, ErrorReply("invalid_polygon", str(exc)))
    return ApplyResult(True, None, map_state_of(registry.composite, seq))
