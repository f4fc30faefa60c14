"""Occupancy-grid data model, world/grid coordinate mapping, and map file I/O.

Grids are immutable after construction and safe to share across threads;
anything that needs a different map builds a new grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple

import numpy as np

# Byte encoding shared by the in-memory store and the wire protocol.
FREE_BYTE = 0
OCCUPIED_BYTE = 100
UNKNOWN_BYTE = 255

# Graymap pixel values written by save_map (load_map accepts any 0..255).
_PGM_BY_STATE = {FREE_BYTE: 254, UNKNOWN_BYTE: 205, OCCUPIED_BYTE: 0}

META_KEYS = ("image", "resolution", "origin", "negate", "occupied_thresh", "free_thresh")


class CellState(Enum):
    """Cost state of one grid cell."""

    FREE = "free"
    OCCUPIED = "occupied"
    UNKNOWN = "unknown"


_BYTE_BY_STATE = {
    CellState.FREE: FREE_BYTE,
    CellState.OCCUPIED: OCCUPIED_BYTE,
    CellState.UNKNOWN: UNKNOWN_BYTE,
}
_STATE_BY_BYTE = {v: k for k, v in _BYTE_BY_STATE.items()}


class OutOfBoundsError(Exception):
    """A queried point or index falls outside the grid."""


class MapFormatError(Exception):
    """Malformed map image or metadata."""


def normalize_angle(theta: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t > math.pi:
        t -= 2.0 * math.pi
    elif t <= -math.pi:
        t += 2.0 * math.pi
    return t


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position in meters, heading in radians, wrapped to (-pi, pi]."""

    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))


class GridIndex(NamedTuple):
    col: int
    row: int


def round_half_up(value: float) -> int:
    """Round to the nearest integer, ties away from the lower side (0.5 -> 1, -0.5 -> 0)."""
    return math.floor(value + 0.5)


class OccupancyGrid:
    """2D lattice of three-state cells with resolution and world origin.

    ``origin`` is the world pose of the *center* of cell (col=0, row=0);
    ``origin.theta`` rotates the grid axes within the world frame. Cells are
    stored row-major.
    """

    __slots__ = ("width", "height", "resolution", "origin", "_data")

    def __init__(
        self,
        width: int,
        height: int,
        resolution: float,
        origin: Pose2D = Pose2D(0.0, 0.0, 0.0),
        cells: Iterable[CellState] | None = None,
    ) -> None:
        if width < 1 or height < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {width}x{height}")
        if resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {resolution}")
        object.__setattr__(self, "width", int(width))
        object.__setattr__(self, "height", int(height))
        object.__setattr__(self, "resolution", float(resolution))
        object.__setattr__(self, "origin", origin)
        if cells is None:
            data = np.full(width * height, FREE_BYTE, dtype=np.uint8)
        else:
            data = np.fromiter((_BYTE_BY_STATE[c] for c in cells), dtype=np.uint8)
            if data.size != width * height:
                raise ValueError(
                    f"expected {width * height} cells, got {data.size}"
                )
        data.flags.writeable = False
        object.__setattr__(self, "_data", data)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("OccupancyGrid is immutable")

    @classmethod
    def from_cell_bytes(
        cls,
        width: int,
        height: int,
        resolution: float,
        origin: Pose2D,
        data: bytes | bytearray | np.ndarray,
    ) -> "OccupancyGrid":
        """Build a grid from the row-major byte encoding (0 free, 100 occupied, 255 unknown)."""
        if width < 1 or height < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {width}x{height}")
        if resolution <= 0:
            raise ValueError(f"resolution must be > 0, got {resolution}")
        arr = np.frombuffer(bytes(data), dtype=np.uint8).copy()
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} cell bytes, got {arr.size}")
        bad = ~np.isin(arr, (FREE_BYTE, OCCUPIED_BYTE, UNKNOWN_BYTE))
        if bad.any():
            raise ValueError(f"invalid cell byte {int(arr[bad][0])}")
        grid = cls.__new__(cls)
        object.__setattr__(grid, "width", int(width))
        object.__setattr__(grid, "height", int(height))
        object.__setattr__(grid, "resolution", float(resolution))
        object.__setattr__(grid, "origin", origin)
        arr.flags.writeable = False
        object.__setattr__(grid, "_data", arr)
        return grid

    @classmethod
    def filled(
        cls,
        width: int,
        height: int,
        resolution: float,
        origin: Pose2D = Pose2D(0.0, 0.0, 0.0),
        state: CellState = CellState.FREE,
    ) -> "OccupancyGrid":
        data = np.full(width * height, _BYTE_BY_STATE[state], dtype=np.uint8)
        return cls.from_cell_bytes(width, height, resolution, origin, data.tobytes())

    @property
    def data(self) -> np.ndarray:
        """Read-only flat byte view, row-major; same encoding as the wire protocol."""
        return self._data

    def to_cell_bytes(self) -> bytes:
        return self._data.tobytes()

    def in_bounds(self, col: int, row: int) -> bool:
        return 0 <= col < self.width and 0 <= row < self.height

    def state_at(self, idx: GridIndex | tuple[int, int]) -> CellState:
        col, row = idx
        if not self.in_bounds(col, row):
            raise OutOfBoundsError(f"index ({col},{row}) outside {self.width}x{self.height} grid")
        return _STATE_BY_BYTE[int(self._data[row * self.width + col])]

    def states(self) -> list[CellState]:
        """Row-major list of all cell states (intended for small grids and tests)."""
        return [_STATE_BY_BYTE[int(b)] for b in self._data]

    def with_occupied(self, flat_indices: np.ndarray | Iterable[int]) -> "OccupancyGrid":
        """Copy of this grid with the given flat cells set to Occupied."""
        data = self._data.copy()
        idx = np.asarray(flat_indices if isinstance(flat_indices, np.ndarray) else list(flat_indices), dtype=np.int64)
        if idx.size:
            data[idx] = OCCUPIED_BYTE
        return OccupancyGrid.from_cell_bytes(self.width, self.height, self.resolution, self.origin, data.tobytes())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OccupancyGrid):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and self.resolution == other.resolution
            and self.origin == other.origin
            and bool(np.array_equal(self._data, other._data))
        )

    def __hash__(self) -> int:
        return hash((self.width, self.height, self.resolution, self.origin, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"OccupancyGrid({self.width}x{self.height}, res={self.resolution}, origin={self.origin})"


def same_geometry(a: OccupancyGrid, b: OccupancyGrid) -> bool:
    return (
        a.width == b.width
        and a.height == b.height
        and a.resolution == b.resolution
        and a.origin == b.origin
    )


def world_to_cell(grid: OccupancyGrid, point: tuple[float, float]) -> tuple[int, int]:
    """Quantize a world point to (col, row) on the grid lattice, without bounds checking.

    May return negative or past-the-edge indices; rasterization clips those later.
    """
    ox, oy, th = grid.origin.x, grid.origin.y, grid.origin.theta
    dx = point[0] - ox
    dy = point[1] - oy
    cos_t = math.cos(th)
    sin_t = math.sin(th)
    local_x = cos_t * dx + sin_t * dy
    local_y = -sin_t * dx + cos_t * dy
    return (
        round_half_up(local_x / grid.resolution),
        round_half_up(local_y / grid.resolution),
    )


def world_to_grid(grid: OccupancyGrid, point: tuple[float, float]) -> GridIndex:
    """Cell whose center is nearest to ``point``; OutOfBoundsError when outside the grid."""
    col, row = world_to_cell(grid, point)
    if not grid.in_bounds(col, row):
        raise OutOfBoundsError(
            f"point {point} maps to ({col},{row}) outside {grid.width}x{grid.height} grid"
        )
    return GridIndex(col, row)


def grid_to_world(grid: OccupancyGrid, idx: GridIndex | tuple[int, int]) -> tuple[float, float]:
    """World coordinates of the center of the given cell."""
    col, row = idx
    if not grid.in_bounds(col, row):
        raise OutOfBoundsError(f"index ({col},{row}) outside {grid.width}x{grid.height} grid")
    lx = col * grid.resolution
    ly = row * grid.resolution
    th = grid.origin.theta
    cos_t = math.cos(th)
    sin_t = math.sin(th)
    return (
        grid.origin.x + cos_t * lx - sin_t * ly,
        grid.origin.y + sin_t * lx + cos_t * ly,
    )


# ---------------------------------------------------------------------------
# Map file I/O: binary P5 graymap + "key: value" metadata text.
# ---------------------------------------------------------------------------


def _parse_pgm(data: bytes) -> tuple[int, int, bytes]:
    """Parse a binary P5 graymap; returns (width, height, pixel bytes)."""
    pos = 0

    def _next_token() -> bytes:
        nonlocal pos
        while pos < len(data):
            ch = data[pos : pos + 1]
            if ch == b"#":
                while pos < len(data) and data[pos : pos + 1] not in (b"\n", b""):
                    pos += 1
            elif ch.isspace():
                pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MapFormatError("truncated graymap header")
        return data[start:pos]

    magic = _next_token()
    if magic != b"P5":
        raise MapFormatError(f"expected P5 graymap, got magic {magic!r}")
    try:
        width = int(_next_token())
        height = int(_next_token())
        maxval = int(_next_token())
    except ValueError as exc:
        raise MapFormatError("non-numeric graymap dimensions") from exc
    if width < 1 or height < 1:
        raise MapFormatError(f"bad graymap dimensions {width}x{height}")
    if maxval != 255:
        raise MapFormatError(f"only 8-bit graymaps supported, maxval={maxval}")
    pos += 1  # single whitespace byte after maxval
    pixels = data[pos : pos + width * height]
    if len(pixels) != width * height:
        raise MapFormatError(
            f"expected {width * height} pixel bytes, got {len(pixels)}"
        )
    return width, height, pixels


def parse_metadata(text: str) -> dict[str, str]:
    """Parse "key: value" metadata lines; blank lines and '#' comments ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise MapFormatError(f"metadata line {lineno} is not 'key: value': {raw!r}")
        key, value = line.split(":", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_float_triple(value: str) -> tuple[float, float, float]:
    stripped = value.strip()
    if not (stripped.startswith("[") and stripped.endswith("]")):
        raise MapFormatError(f"expected [x, y, theta], got {value!r}")
    parts = stripped[1:-1].split(",")
    if len(parts) != 3:
        raise MapFormatError(f"expected three components in {value!r}")
    try:
        x, y, th = (float(p) for p in parts)
    except ValueError as exc:
        raise MapFormatError(f"non-numeric component in {value!r}") from exc
    return x, y, th


def load_map(image: bytes, metadata: str) -> OccupancyGrid:
    """Build a grid from a P5 graymap plus metadata text.

    Pixel occupancy is (255 - v) / 255 (or v / 255 with negate=1); values above
    occupied_thresh are Occupied, below free_thresh Free, otherwise Unknown.
    Image row 0 is the top of the map, i.e. grid row height-1.
    """
    width, height, pixels = _parse_pgm(image)
    meta = parse_metadata(metadata)
    for key in ("resolution", "origin", "negate", "occupied_thresh", "free_thresh"):
        if key not in meta:
            raise MapFormatError(f"missing metadata key {key!r}")
    try:
        resolution = float(meta["resolution"])
        negate = int(meta["negate"])
        occupied_thresh = float(meta["occupied_thresh"])
        free_thresh = float(meta["free_thresh"])
    except ValueError as exc:
        raise MapFormatError("non-numeric metadata value") from exc
    ox, oy, oth = _parse_float_triple(meta["origin"])
    if resolution <= 0:
        raise MapFormatError(f"resolution must be > 0, got {resolution}")
    if not (0.0 <= free_thresh <= 1.0 and 0.0 <= occupied_thresh <= 1.0):
        raise MapFormatError("thresholds must lie in [0, 1]")
    if free_thresh >= occupied_thresh:
        raise MapFormatError(
            f"free_thresh {free_thresh} must be < occupied_thresh {occupied_thresh}"
        )

    img = np.frombuffer(pixels, dtype=np.uint8).reshape(height, width)
    img = img[::-1, :]  # image top row -> highest grid row
    values = img.astype(np.float64)
    occ = values / 255.0 if negate else (255.0 - values) / 255.0
    data = np.full((height, width), UNKNOWN_BYTE, dtype=np.uint8)
    data[occ > occupied_thresh] = OCCUPIED_BYTE
    data[occ < free_thresh] = FREE_BYTE
    return OccupancyGrid.from_cell_bytes(
        width, height, resolution, Pose2D(ox, oy, oth), data.tobytes()
    )


def save_map(grid: OccupancyGrid, image_name: str = "map.pgm") -> tuple[bytes, str]:
    """Serialize a grid to (P5 graymap bytes, metadata text).

    load_map(save_map(g)) reproduces g cell-for-cell under the default thresholds.
    """
    flat = grid.data
    pixels = np.full(flat.shape, _PGM_BY_STATE[UNKNOWN_BYTE], dtype=np.uint8)
    pixels[flat == FREE_BYTE] = _PGM_BY_STATE[FREE_BYTE]
    pixels[flat == OCCUPIED_BYTE] = _PGM_BY_STATE[OCCUPIED_BYTE]
    img = pixels.reshape(grid.height, grid.width)[::-1, :]
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    o = grid.origin
    meta = (
        f"image: {image_name}\n"
        f"resolution: {grid.resolution!r}\n"
        f"origin: [{o.x!r}, {o.y!r}, {o.theta!r}]\n"
        "negate: 0\n"
        "occupied_thresh: 0.65\n"
        "free_thresh: 0.196\n"
    )
    return header + img.tobytes(), meta


def read_map_files(stem) -> OccupancyGrid:
    """Load "<stem>.pgm" + "<stem>.meta"."""
    from pathlib import Path

    stem = Path(stem)
    image = Path(f"{stem}.pgm").read_bytes()
    metadata = Path(f"{stem}.meta").read_text(encoding="utf-8")
    return load_map(image, metadata)


def write_map_files(grid: OccupancyGrid, stem) -> None:
    """Write "<stem>.pgm" + "<stem>.meta"."""
    from pathlib import Path

    stem = Path(stem)
    image, metadata = save_map(grid, image_name=f"{stem.name}.pgm")
    Path(f"{stem}.pgm").write_bytes(image)
    Path(f"{stem}.meta").write_text(metadata, encoding="utf-8")
