"""Polygon rasterization on the cell lattice and rigid frame alignment.

Rasterization operates on polygons whose vertices are already quantized to
integer (col, row) lattice coordinates; cell centers coincide with lattice
points. All lattice predicates use exact integer arithmetic so results are
reproducible across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cmp_to_key
from typing import Sequence

from .grid import GridIndex


class DegeneratePolygonError(ValueError):
    """Unusable polygon: <3 vertices, repeated consecutive vertices, or non-finite coordinates."""


@dataclass(frozen=True)
class Polygon:
    """Closed polygon: ordered world-frame vertices, last implicitly connects to first."""

    vertices: tuple[tuple[float, float], ...]

    def __init__(self, vertices: Sequence[Sequence[float]]) -> None:
        pts = tuple((float(v[0]), float(v[1])) for v in vertices)
        if len(pts) < 3:
            raise DegeneratePolygonError(f"polygon needs >= 3 vertices, got {len(pts)}")
        for i, p in enumerate(pts):
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise DegeneratePolygonError(f"non-finite vertex at index {i}")
            if p == pts[(i + 1) % len(pts)]:
                raise DegeneratePolygonError(f"consecutive duplicate vertex at index {i}")
        object.__setattr__(self, "vertices", pts)

    def centroid(self) -> tuple[float, float]:
        n = len(self.vertices)
        return (
            sum(x for x, _ in self.vertices) / n,
            sum(y for _, y in self.vertices) / n,
        )


@dataclass(frozen=True)
class AnchorTransform:
    """Rigid 2D transform mapping drawing-frame points into map-frame points."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0

    @classmethod
    def identity(cls) -> "AnchorTransform":
        return cls(0.0, 0.0, 0.0)

    def inverse(self) -> "AnchorTransform":
        cos_t = math.cos(self.theta)
        sin_t = math.sin(self.theta)
        return AnchorTransform(
            -(cos_t * self.x + sin_t * self.y),
            -(-sin_t * self.x + cos_t * self.y),
            -self.theta,
        )


def apply_anchor(t: AnchorTransform, point: tuple[float, float]) -> tuple[float, float]:
    """Rotate ``point`` by ``t.theta`` then translate by ``(t.x, t.y)``."""
    cos_t = math.cos(t.theta)
    sin_t = math.sin(t.theta)
    return (
        t.x + cos_t * point[0] - sin_t * point[1],
        t.y + sin_t * point[0] + cos_t * point[1],
    )


def _round_ratio(num: int, den: int) -> int:
    """round(num / den) with halves up, exact; den > 0."""
    return (2 * num + den) // (2 * den)


def line_cells(a: tuple[int, int], b: tuple[int, int]) -> list[GridIndex]:
    """Cells of the integer line trace from a to b, both endpoints included.

    Samples max(|dcol|, |drow|) + 1 evenly spaced points along the segment and
    rounds each to the nearest lattice point (halves up), which yields an
    8-connected chain whose cell set is independent of traversal direction.
    """
    c0, r0 = int(a[0]), int(a[1])
    c1, r1 = int(b[0]), int(b[1])
    dc = c1 - c0
    dr = r1 - r0
    n = max(abs(dc), abs(dr))
    if n == 0:
        return [GridIndex(c0, r0)]
    return [
        GridIndex(c0 + _round_ratio(i * dc, n), r0 + _round_ratio(i * dr, n))
        for i in range(n + 1)
    ]


def _sample_window(start: int, delta: int, n: int, lo: int, hi: int) -> tuple[int, int]:
    """Contiguous i-range in [0, n] whose rounded samples lie in [lo, hi].

    The sample coordinate start + round(i*delta/n) is monotone in i, so the
    feasible set is an interval; found by binary search. Returns (first,
    last), empty when first > last.
    """

    def coord(i: int) -> int:
        return start + _round_ratio(i * delta, n)

    ascending = delta >= 0
    low_bound, high_bound = (lo, hi) if ascending else (hi, lo)

    # first i with coord(i) >= low_bound (ascending) / <= low_bound (descending)
    a, b = 0, n + 1
    while a < b:
        mid = (a + b) // 2
        ok = coord(mid) >= low_bound if ascending else coord(mid) <= low_bound
        if ok:
            b = mid
        else:
            a = mid + 1
    first = a
    # last i with coord(i) <= high_bound (ascending) / >= high_bound (descending)
    a, b = -1, n
    while a < b:
        mid = (a + b + 1) // 2
        ok = coord(mid) <= high_bound if ascending else coord(mid) >= high_bound
        if ok:
            a = mid
        else:
            b = mid - 1
    return first, a


def line_cells_clipped(a: tuple[int, int], b: tuple[int, int], bounds: tuple[int, int]) -> list[GridIndex]:
    """In-bounds cells of the trace from a to b, identical to filtering line_cells.

    Runs in O(cells inside + log n) even when the endpoints are astronomically
    far away, which keeps hostile or buggy coordinates from stalling callers.
    """
    width, height = bounds
    c0, r0 = int(a[0]), int(a[1])
    c1, r1 = int(b[0]), int(b[1])
    dc = c1 - c0
    dr = r1 - r0
    n = max(abs(dc), abs(dr))
    if n == 0:
        return [GridIndex(c0, r0)] if 0 <= c0 < width and 0 <= r0 < height else []
    col_first, col_last = _sample_window(c0, dc, n, 0, width - 1)
    row_first, row_last = _sample_window(r0, dr, n, 0, height - 1)
    first = max(col_first, row_first)
    last = min(col_last, row_last)
    return [
        GridIndex(c0 + _round_ratio(i * dc, n), r0 + _round_ratio(i * dr, n))
        for i in range(first, last + 1)
    ]


def trace_edges(cells: Sequence[tuple[int, int]], bounds: tuple[int, int] | None = None) -> set[GridIndex]:
    """Union of the integer line traces of all polygon edges (closed ring).

    With ``bounds`` = (width, height), returns exactly the in-bounds subset.
    """
    pts = [(int(c), int(r)) for c, r in cells]
    ring: set[GridIndex] = set()
    for i in range(len(pts)):
        a, b = pts[i], pts[(i + 1) % len(pts)]
        if bounds is None:
            ring.update(line_cells(a, b))
        else:
            ring.update(line_cells_clipped(a, b, bounds))
    return ring


def _ceil_ratio(num: int, den: int) -> int:
    """ceil(num / den), exact; den > 0."""
    return -((-num) // den)


def _compare_ratios(a: tuple[int, int], b: tuple[int, int]) -> int:
    lhs = a[0] * b[1]
    rhs = b[0] * a[1]
    return (lhs > rhs) - (lhs < rhs)


def fill_interior(cells: Sequence[tuple[int, int]], bounds: tuple[int, int] | None = None) -> set[GridIndex]:
    """Lattice points strictly inside the polygon under the even-odd rule.

    Boundary points (on any edge, including horizontal ones) are excluded;
    trace_edges covers those. Self-intersecting polygons fill by parity.
    With ``bounds`` = (width, height), returns exactly the in-bounds subset
    (scanline rows and spans are clamped, so cost stays O(grid)).
    """
    pts = [(int(c), int(r)) for c, r in cells]
    if len(pts) < 3:
        return set()
    edges = []
    for i in range(len(pts)):
        a, b = pts[i], pts[(i + 1) % len(pts)]
        if a != b:
            edges.append((a, b))
    if not edges:
        return set()

    rows = [r for _, r in pts]
    row_lo, row_hi = min(rows), max(rows)
    col_clip: tuple[int, int] | None = None
    if bounds is not None:
        row_lo = max(row_lo, 0)
        row_hi = min(row_hi, bounds[1] - 1)
        col_clip = (0, bounds[0])
    out: set[GridIndex] = set()
    for y in range(row_lo, row_hi + 1):
        crossings: list[tuple[int, int]] = []  # x = num/den, den > 0
        boundary_x: set[int] = set()
        for (x0, y0), (x1, y1) in edges:
            if y0 == y1:
                if y0 == y:
                    lo, hi = (x0, x1) if x0 <= x1 else (x1, x0)
                    if col_clip is not None:
                        lo, hi = max(lo, col_clip[0]), min(hi, col_clip[1] - 1)
                    boundary_x.update(range(lo, hi + 1))
                continue
            num = x0 * (y1 - y0) + (y - y0) * (x1 - x0)
            den = y1 - y0
            if den < 0:
                num, den = -num, -den
            if min(y0, y1) <= y <= max(y0, y1) and num % den == 0:
                boundary_x.add(num // den)
            if (y0 <= y < y1) or (y1 <= y < y0):
                crossings.append((num, den))
        if not crossings:
            continue
        # exact rational ordering; denominators are positive
        crossings.sort(key=cmp_to_key(_compare_ratios))
        for k in range(0, len(crossings) - 1, 2):
            lo = _ceil_ratio(*crossings[k])
            hi = _ceil_ratio(*crossings[k + 1])
            if col_clip is not None:
                lo, hi = max(lo, col_clip[0]), min(hi, col_clip[1])
            for x in range(lo, hi):
                if x not in boundary_x:
                    out.add(GridIndex(x, y))
    return out


def polygon_footprint(cells: Sequence[tuple[int, int]], bounds: tuple[int, int] | None = None) -> set[GridIndex]:
    """Edge trace plus strict interior: the full cell coverage of a zone."""
    return trace_edges(cells, bounds) | fill_interior(cells, bounds)


def _on_segment(px: float, py: float, a: tuple[float, float], b: tuple[float, float]) -> bool:
    (x0, y0), (x1, y1) = a, b
    cross = (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0)
    if cross != 0.0:
        return False
    return min(x0, x1) <= px <= max(x0, x1) and min(y0, y1) <= py <= max(y0, y1)


def point_in_polygon(point: tuple[float, float], poly: Polygon) -> bool:
    """Even-odd containment test; points exactly on an edge count as inside."""
    px, py = float(point[0]), float(point[1])
    verts = poly.vertices
    inside = False
    for i in range(len(verts)):
        a = verts[i]
        b = verts[(i + 1) % len(verts)]
        if _on_segment(px, py, a, b):
            return True
        (x0, y0), (x1, y1) = a, b
        if (y0 <= py < y1) or (y1 <= py < y0):
            x_cross = x0 + (py - y0) * (x1 - x0) / (y1 - y0)
            if px < x_cross:
                inside = not inside
    return inside
