"""Navigation-trial simulation and the built-in evaluation scenarios.

A trial plans on the drawn (composite) map and validates the plan against the
ground-truth map: unreachable goals are no-path failures, and any planned
cell that is truly occupied is a collision. This path-intersection check is
the desk-scale stand-in for physically driving the robot. A small constant
speed stepper moves the live robot marker along the planned polyline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path as FilePath

import numpy as np

from .geometry import Polygon
from .grid import (
    GridIndex,
    MapFormatError,
    OCCUPIED_BYTE,
    OccupancyGrid,
    Pose2D,
    parse_metadata,
    read_map_files,
    same_geometry,
    world_to_grid,
    write_map_files,
)
from . import planner
from .planner import Path, PlanConfig, PlanningError


class TrialResult(Enum):
    SUCCESS = "success"
    COLLISION_FAILURE = "collision_failure"
    NO_PATH_FAILURE = "no_path_failure"


@dataclass(frozen=True)
class Scenario:
    """Base map, ground-truth map (base + true obstacles), and the start/goal poses."""

    name: str
    base: OccupancyGrid
    truth: OccupancyGrid
    start: Pose2D
    goal: Pose2D

    def __post_init__(self) -> None:
        if not same_geometry(self.base, self.truth):
            raise ValueError("base and ground-truth maps must share geometry")
        for label, pose in (("start", self.start), ("goal", self.goal)):
            idx = world_to_grid(self.truth, (pose.x, pose.y))
            if self.truth.data[idx.row * self.truth.width + idx.col] == OCCUPIED_BYTE:
                raise ValueError(f"{label} pose is occupied in the ground truth")


@dataclass(frozen=True)
class TrialOutcome:
    result: TrialResult
    path: Path | None
    length_m: float | None
    collision_cells: tuple[GridIndex, ...] = ()

    def __post_init__(self) -> None:
        if (self.result is TrialResult.COLLISION_FAILURE) != bool(self.collision_cells):
            raise ValueError("collision cells must be present exactly for collision failures")


def run_trial(scenario: Scenario, drawn: OccupancyGrid, cfg: PlanConfig = PlanConfig()) -> TrialOutcome:
    """Plan on the drawn map and judge the plan against the ground truth."""
    if not same_geometry(scenario.base, drawn):
        raise ValueError("drawn map does not match the scenario's grid geometry")
    start = world_to_grid(drawn, (scenario.start.x, scenario.start.y))
    goal = world_to_grid(drawn, (scenario.goal.x, scenario.goal.y))
    try:
        path = planner.plan(drawn, start, goal, cfg)
    except PlanningError:
        return TrialOutcome(TrialResult.NO_PATH_FAILURE, None, None)
    truth = scenario.truth.data
    width = scenario.truth.width
    hits = tuple(
        c for c in path.cells if truth[c.row * width + c.col] == OCCUPIED_BYTE
    )
    length = planner.path_length(path, drawn.resolution)
    if hits:
        return TrialOutcome(TrialResult.COLLISION_FAILURE, path, length, hits)
    return TrialOutcome(TrialResult.SUCCESS, path, length)


# ---------------------------------------------------------------------------
# Constant-speed robot marker for the live service.
# ---------------------------------------------------------------------------


def step_pose(
    points: tuple[tuple[float, float], ...],
    traveled: float,
    speed: float,
    dt: float,
) -> tuple[float, Pose2D]:
    """Advance ``speed * dt`` meters along the polyline from ``traveled``.

    Returns (new traveled distance, pose); the pose clamps at the final point
    with the heading of the last non-degenerate segment.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if speed <= 0:
        raise ValueError("speed must be > 0")
    if not points:
        raise ValueError("empty polyline")
    new_traveled = traveled + speed * dt
    return _pose_at(points, new_traveled)


def polyline_length(points: tuple[tuple[float, float], ...]) -> float:
    return sum(
        math.hypot(x1 - x0, y1 - y0) for (x0, y0), (x1, y1) in zip(points, points[1:])
    )


def _pose_at(points: tuple[tuple[float, float], ...], distance: float) -> tuple[float, Pose2D]:
    heading = 0.0
    remaining = max(distance, 0.0)
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        seg = math.hypot(x1 - x0, y1 - y0)
        if seg == 0.0:
            continue
        heading = math.atan2(y1 - y0, x1 - x0)
        if remaining <= seg:
            t = remaining / seg
            return distance, Pose2D(x0 + t * (x1 - x0), y0 + t * (y1 - y0), heading)
        remaining -= seg
    total = polyline_length(points)
    x, y = points[-1]
    return min(distance, total), Pose2D(x, y, heading)


class RobotMotion:
    """Mutable marker state: position along a world polyline at constant speed."""

    def __init__(self, points: tuple[tuple[float, float], ...], speed: float) -> None:
        if speed <= 0:
            raise ValueError("speed must be > 0")
        self.points = tuple(points)
        self.speed = float(speed)
        self.traveled = 0.0
        self.pose = _pose_at(self.points, 0.0)[1] if self.points else Pose2D(0.0, 0.0)

    @property
    def at_goal(self) -> bool:
        return not self.points or self.traveled >= polyline_length(self.points)

    def step(self, dt: float) -> Pose2D:
        if not self.points or self.at_goal:
            return self.pose
        self.traveled, self.pose = step_pose(self.points, self.traveled, self.speed, dt)
        return self.pose


# ---------------------------------------------------------------------------
# Built-in scenarios. Synthetic desk-scale layouts: stage 1 has a single thin
# panel obstacle; stage 2 has two thin panels plus one box.
# ---------------------------------------------------------------------------

_RES = 0.05


def _room(width: int, height: int) -> np.ndarray:
    """Free room with an occupied border wall ring, as cell bytes."""
    data = np.zeros((height, width), dtype=np.uint8)
    data[0, :] = OCCUPIED_BYTE
    data[-1, :] = OCCUPIED_BYTE
    data[:, 0] = OCCUPIED_BYTE
    data[:, -1] = OCCUPIED_BYTE
    return data


def _with_blocks(data: np.ndarray, blocks: list[tuple[int, int, int, int]]) -> np.ndarray:
    out = data.copy()
    for col0, col1, row0, row1 in blocks:
        out[row0 : row1 + 1, col0 : col1 + 1] = OCCUPIED_BYTE
    return out


def _grid(width: int, height: int, data: np.ndarray) -> OccupancyGrid:
    return OccupancyGrid.from_cell_bytes(width, height, _RES, Pose2D(0.0, 0.0, 0.0), data.tobytes())


# (col0, col1, row0, row1) inclusive cell blocks of the true obstacles
_STAGE1_OBSTACLES = [(15, 15, 5, 14)]
_STAGE2_OBSTACLES = [(12, 12, 2, 11), (24, 24, 12, 21), (30, 33, 9, 13)]


def _block_polygon(col0: int, col1: int, row0: int, row1: int, margin: float) -> Polygon:
    """World rectangle that quantizes to the given cell block grown by ``margin`` cells."""
    x0 = (col0 - margin) * _RES - 0.01
    x1 = (col1 + margin) * _RES + 0.01
    y0 = (row0 - margin) * _RES - 0.01
    y1 = (row1 + margin) * _RES + 0.01
    return Polygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def stage1() -> Scenario:
    base = _room(30, 20)
    truth = _with_blocks(base, _STAGE1_OBSTACLES)
    return Scenario(
        "stage1",
        _grid(30, 20, base),
        _grid(30, 20, truth),
        Pose2D(3 * _RES, 10 * _RES),
        Pose2D(26 * _RES, 10 * _RES),
    )


def stage2() -> Scenario:
    base = _room(40, 24)
    truth = _with_blocks(base, _STAGE2_OBSTACLES)
    return Scenario(
        "stage2",
        _grid(40, 24, base),
        _grid(40, 24, truth),
        Pose2D(3 * _RES, 12 * _RES),
        Pose2D(36 * _RES, 12 * _RES),
    )


def stage1_reference_zones() -> list[Polygon]:
    """Zones that rasterize exactly onto stage 1's true obstacle cells."""
    return [_block_polygon(*block, margin=0.0) for block in _STAGE1_OBSTACLES]


def stage1_oversized_zones() -> list[Polygon]:
    """Deliberately loose zones: two extra cells of margin on every side."""
    return [_block_polygon(*block, margin=2.0) for block in _STAGE1_OBSTACLES]


def stage2_reference_zones() -> list[Polygon]:
    return [_block_polygon(*block, margin=0.0) for block in _STAGE2_OBSTACLES]


def stage2_oversized_zones() -> list[Polygon]:
    return [_block_polygon(*block, margin=1.0) for block in _STAGE2_OBSTACLES]


_BUILTIN = {"stage1": stage1, "stage2": stage2}


def builtin_scenario(name: str) -> Scenario:
    try:
        return _BUILTIN[name]()
    except KeyError:
        raise KeyError(f"unknown built-in scenario {name!r}; have {sorted(_BUILTIN)}") from None


# ---------------------------------------------------------------------------
# Scenario files: a "key: value" manifest naming two map file stems.
# ---------------------------------------------------------------------------


def write_scenario(scenario: Scenario, directory: str | FilePath) -> FilePath:
    """Write maps plus manifest into ``directory``; returns the manifest path."""
    directory = FilePath(directory)
    directory.mkdir(parents=True, exist_ok=True)
    base_stem = directory / f"{scenario.name}_base"
    truth_stem = directory / f"{scenario.name}_truth"
    write_map_files(scenario.base, base_stem)
    write_map_files(scenario.truth, truth_stem)
    s, g = scenario.start, scenario.goal
    manifest = (
        f"name: {scenario.name}\n"
        f"base: {base_stem.name}\n"
        f"truth: {truth_stem.name}\n"
        f"start: [{s.x!r}, {s.y!r}, {s.theta!r}]\n"
        f"goal: [{g.x!r}, {g.y!r}, {g.theta!r}]\n"
    )
    manifest_path = directory / f"{scenario.name}.scenario"
    manifest_path.write_text(manifest, encoding="utf-8")
    return manifest_path


def load_scenario(manifest_path: str | FilePath) -> Scenario:
    manifest_path = FilePath(manifest_path)
    meta = parse_metadata(manifest_path.read_text(encoding="utf-8"))
    for key in ("name", "base", "truth", "start", "goal"):
        if key not in meta:
            raise MapFormatError(f"scenario manifest missing key {key!r}")

    def _pose(value: str) -> Pose2D:
        parts = value.strip().lstrip("[").rstrip("]").split(",")
        if len(parts) != 3:
            raise MapFormatError(f"expected [x, y, theta], got {value!r}")
        return Pose2D(*(float(p) for p in parts))

    directory = manifest_path.parent
    return Scenario(
        meta["name"],
        read_map_files(directory / meta["base"]),
        read_map_files(directory / meta["truth"]),
        _pose(meta["start"]),
        _pose(meta["goal"]),
    )
