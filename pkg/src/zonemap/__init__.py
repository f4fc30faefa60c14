"""Keep-out zone editing for occupancy-grid maps.

Draw polygonal keep-out zones, rasterize them into a costmap, keep them in a
persistent registry, synchronize edits over a line/websocket protocol, plan
paths on the composite map, and evaluate map accuracy against ground truth.
"""

from .geometry import AnchorTransform, Polygon, apply_anchor, fill_interior, point_in_polygon, trace_edges
from .grid import (
    CellState,
    GridIndex,
    OccupancyGrid,
    OutOfBoundsError,
    Pose2D,
    grid_to_world,
    load_map,
    save_map,
    world_to_grid,
)
from .metrics import ConfusionCounts, MetricReport, classify_cells, compute_metrics, wall_mask_from_base
from .planner import Path, PlanConfig, path_length, plan
from .zones import Zone, ZoneRegistry, load_store, recompose, save_store

__version__ = "0.1.0"

__all__ = [
    "AnchorTransform",
    "CellState",
    "ConfusionCounts",
    "GridIndex",
    "MetricReport",
    "OccupancyGrid",
    "OutOfBoundsError",
    "Path",
    "PlanConfig",
    "Polygon",
    "Pose2D",
    "Zone",
    "ZoneRegistry",
    "apply_anchor",
    "classify_cells",
    "compute_metrics",
    "fill_interior",
    "grid_to_world",
    "load_map",
    "load_store",
    "path_length",
    "plan",
    "point_in_polygon",
    "recompose",
    "save_map",
    "save_store",
    "trace_edges",
    "wall_mask_from_base",
    "world_to_grid",
]
