"""Shared generators and small builders for the test suite."""

from __future__ import annotations

import random

import numpy as np

from zonemap.geometry import Polygon
from zonemap.grid import FREE_BYTE, OCCUPIED_BYTE, UNKNOWN_BYTE, OccupancyGrid, Pose2D

_CHAR_BYTES = {".": FREE_BYTE, "#": OCCUPIED_BYTE, "?": UNKNOWN_BYTE}


def grid_from_rows(rows: list[str], resolution: float = 0.05, origin: Pose2D = Pose2D(0, 0, 0)) -> OccupancyGrid:
    """Build a grid from strings, top row first ('.' free, '#' occupied, '?' unknown)."""
    height = len(rows)
    width = len(rows[0])
    data = np.zeros((height, width), dtype=np.uint8)
    for r, line in enumerate(rows):
        assert len(line) == width, "ragged rows"
        for c, ch in enumerate(line):
            data[height - 1 - r, c] = _CHAR_BYTES[ch]
    return OccupancyGrid.from_cell_bytes(width, height, resolution, origin, data.tobytes())


def random_cell_polygon(rng: random.Random, n_min: int = 3, n_max: int = 10, span: int = 63) -> list[tuple[int, int]]:
    """Random integer-vertex polygon (possibly self-intersecting), no consecutive duplicates."""
    n = rng.randint(n_min, n_max)
    pts: list[tuple[int, int]] = []
    while len(pts) < n:
        p = (rng.randint(0, span), rng.randint(0, span))
        if pts and p == pts[-1]:
            continue
        pts.append(p)
    while pts[0] == pts[-1]:
        pts[-1] = (rng.randint(0, span), rng.randint(0, span))
    return pts


def random_convex_cell_polygon(rng: random.Random, span: int = 40) -> list[tuple[int, int]]:
    """Random strictly convex counter-clockwise polygon with integer vertices."""
    import math

    while True:
        cx = rng.randint(10, span - 10)
        cy = rng.randint(10, span - 10)
        radius = rng.uniform(4.0, 9.0)
        n = rng.randint(3, 8)
        angles = sorted(rng.uniform(0, 2 * math.pi) for _ in range(n))
        pts = [
            (int(round(cx + radius * math.cos(a))), int(round(cy + radius * math.sin(a))))
            for a in angles
        ]
        dedup = [p for i, p in enumerate(pts) if p != pts[(i - 1) % len(pts)]]
        if len(dedup) < 3:
            continue
        if _strictly_convex_ccw(dedup):
            return dedup


def _strictly_convex_ccw(pts: list[tuple[int, int]]) -> bool:
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        x2, y2 = pts[(i + 2) % n]
        if (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1) <= 0:
            return False
    return True


def random_world_polygon(rng: random.Random, resolution: float, span_cells: int, n_min: int = 3, n_max: int = 8) -> Polygon:
    """Random world-frame polygon roughly covering the given grid span."""
    while True:
        n = rng.randint(n_min, n_max)
        pts = []
        for _ in range(n):
            pts.append(
                (
                    rng.uniform(-1.5, span_cells + 1.5) * resolution,
                    rng.uniform(-1.5, span_cells + 1.5) * resolution,
                )
            )
        try:
            return Polygon(pts)
        except ValueError:
            continue


def random_map(rng: random.Random, width: int, height: int, occupied_frac: float = 0.2, unknown_frac: float = 0.0) -> OccupancyGrid:
    data = np.full(width * height, FREE_BYTE, dtype=np.uint8)
    for i in range(width * height):
        roll = rng.random()
        if roll < occupied_frac:
            data[i] = OCCUPIED_BYTE
        elif roll < occupied_frac + unknown_frac:
            data[i] = UNKNOWN_BYTE
    return OccupancyGrid.from_cell_bytes(width, height, 0.05, Pose2D(0, 0, 0), data.tobytes())


def random_states_grid(rng: random.Random, width: int, height: int) -> OccupancyGrid:
    """Uniformly random three-state grid."""
    choices = (FREE_BYTE, OCCUPIED_BYTE, UNKNOWN_BYTE)
    data = bytes(rng.choice(choices) for _ in range(width * height))
    return OccupancyGrid.from_cell_bytes(width, height, 0.05, Pose2D(0, 0, 0), data)
