"""Global path planning on the composite costmap.

8-connected A* with the octile-distance heuristic; unit cost for straight
steps, sqrt(2) for diagonals. Diagonal moves may not cut corners: both
orthogonally adjacent cells must be traversable. Unknown cells are blocked by
default. Tie-breaking is pinned (equal f: higher g first, then row-major
index) so plans are reproducible across runs and platforms.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .grid import (
    FREE_BYTE,
    GridIndex,
    OccupancyGrid,
    OutOfBoundsError,
    UNKNOWN_BYTE,
    grid_to_world,
)

SQRT2 = math.sqrt(2.0)

_STRAIGHT = ((1, 0), (-1, 0), (0, 1), (0, -1))
_DIAGONAL = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class PlanningError(Exception):
    pass


class StartBlockedError(PlanningError):
    pass


class GoalBlockedError(PlanningError):
    pass


class NoPathError(PlanningError):
    pass


@dataclass(frozen=True)
class PlanConfig:
    unknown_is_blocked: bool = True
    allow_diagonal: bool = True


@dataclass(frozen=True)
class Path:
    """Start-to-goal cell chain; consecutive cells are 8-adjacent and traversable."""

    cells: tuple[GridIndex, ...]
    cost: float

    def world_points(self, grid: OccupancyGrid) -> tuple[tuple[float, float], ...]:
        return tuple(grid_to_world(grid, c) for c in self.cells)

    def step_counts(self) -> tuple[int, int]:
        """(straight, diagonal) step counts; exact representation of the cost."""
        straight = diagonal = 0
        for (c0, r0), (c1, r1) in zip(self.cells, self.cells[1:]):
            if c0 != c1 and r0 != r1:
                diagonal += 1
            else:
                straight += 1
        return straight, diagonal


def _traversable_mask(grid: OccupancyGrid, cfg: PlanConfig):
    flat = grid.data
    if cfg.unknown_is_blocked:
        return flat == FREE_BYTE
    return (flat == FREE_BYTE) | (flat == UNKNOWN_BYTE)


def plan(
    grid: OccupancyGrid,
    start: GridIndex | tuple[int, int],
    goal: GridIndex | tuple[int, int],
    cfg: PlanConfig = PlanConfig(),
) -> Path:
    """Minimum-cost path from start to goal, or a typed PlanningError."""
    width, height = grid.width, grid.height
    start = GridIndex(*start)
    goal = GridIndex(*goal)
    for name, idx in (("start", start), ("goal", goal)):
        if not grid.in_bounds(idx.col, idx.row):
            raise OutOfBoundsError(f"{name} {tuple(idx)} outside {width}x{height} grid")
    open_cells = _traversable_mask(grid, cfg)
    start_flat = start.row * width + start.col
    goal_flat = goal.row * width + goal.col
    if not open_cells[start_flat]:
        raise StartBlockedError(f"start {tuple(start)} is not traversable")
    if not open_cells[goal_flat]:
        raise GoalBlockedError(f"goal {tuple(goal)} is not traversable")

    def heuristic(col: int, row: int) -> float:
        dx = abs(col - goal.col)
        dy = abs(row - goal.row)
        if cfg.allow_diagonal:
            return (dx + dy) + (SQRT2 - 2.0) * min(dx, dy)
        return float(dx + dy)

    g_best: dict[int, float] = {start_flat: 0.0}
    parent: dict[int, int] = {}
    closed: set[int] = set()
    h0 = heuristic(start.col, start.row)
    heap: list[tuple[float, float, int]] = [(h0, 0.0, start_flat)]

    while heap:
        f, neg_g, flat = heapq.heappop(heap)
        if flat in closed:
            continue
        g_here = -neg_g
        if g_here > g_best.get(flat, math.inf):
            continue  # stale entry
        closed.add(flat)
        if flat == goal_flat:
            cells = []
            cursor = flat
            while True:
                cells.append(GridIndex(cursor % width, cursor // width))
                if cursor == start_flat:
                    break
                cursor = parent[cursor]
            cells.reverse()
            return Path(tuple(cells), g_here)
        col = flat % width
        row = flat // width

        for dc, dr in _STRAIGHT:
            nc, nr = col + dc, row + dr
            if not (0 <= nc < width and 0 <= nr < height):
                continue
            nflat = nr * width + nc
            if not open_cells[nflat] or nflat in closed:
                continue
            g_new = g_here + 1.0
            if g_new < g_best.get(nflat, math.inf):
                g_best[nflat] = g_new
                parent[nflat] = flat
                heapq.heappush(heap, (g_new + heuristic(nc, nr), -g_new, nflat))
        if cfg.allow_diagonal:
            for dc, dr in _DIAGONAL:
                nc, nr = col + dc, row + dr
                if not (0 <= nc < width and 0 <= nr < height):
                    continue
                # no corner cutting: both orthogonal neighbors must be open
                if not open_cells[row * width + nc] or not open_cells[nr * width + col]:
                    continue
                nflat = nr * width + nc
                if not open_cells[nflat] or nflat in closed:
                    continue
                g_new = g_here + SQRT2
                if g_new < g_best.get(nflat, math.inf):
                    g_best[nflat] = g_new
                    parent[nflat] = flat
                    heapq.heappush(heap, (g_new + heuristic(nc, nr), -g_new, nflat))

    raise NoPathError(f"goal {tuple(goal)} unreachable from {tuple(start)}")


def path_length(path: Path, resolution: float) -> float:
    """Sum of Euclidean distances between consecutive cell centers, in meters."""
    straight, diagonal = path.step_counts()
    return (straight + diagonal * SQRT2) * resolution
