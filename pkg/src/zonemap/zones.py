"""Zone registry: base map + ID-keyed keep-out zones + derived composite map.

The registry's defining invariant is that the composite always equals
``recompose(base, zones)``: the base map with every zone footprint marked
Occupied, applied in ascending-ID order. Deletion is literally
reset-and-reapply. Mutations are meant to be serialized through one owner;
readers get immutable grid snapshots.
"""

from __future__ import annotations

import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .geometry import AnchorTransform, Polygon, polygon_footprint
from .grid import OCCUPIED_BYTE, OccupancyGrid, world_to_cell

log = logging.getLogger(__name__)


class InvalidIdError(ValueError):
    """Zone IDs are integers >= 1."""


class DuplicateIdError(ValueError):
    """A zone with this ID already exists."""


class UnknownIdError(KeyError):
    """No zone with this ID exists."""


class StoreFormatError(ValueError):
    """Persistence document is malformed."""


@dataclass(frozen=True)
class Zone:
    """One keep-out zone: positive ID, map-frame polygon, stored rotation angle.

    ``rotation`` and ``anchor`` are persisted verbatim for round-trip fidelity;
    composition rasterizes ``polygon`` as-is.
    """

    zone_id: int
    polygon: Polygon
    rotation: float = 0.0
    anchor: AnchorTransform = field(default_factory=AnchorTransform.identity)

    def __post_init__(self) -> None:
        if not isinstance(self.zone_id, int) or isinstance(self.zone_id, bool) or self.zone_id < 1:
            raise InvalidIdError(f"zone id must be an integer >= 1, got {self.zone_id!r}")


def rasterize_zone(grid: OccupancyGrid, polygon: Polygon) -> tuple[np.ndarray, bool]:
    """Zone footprint as sorted flat indices into ``grid``.

    Vertices are quantized to the lattice and the footprint (edges + even-odd
    interior) is computed clipped to the grid; cost stays bounded by the grid
    size no matter how far away the vertices land. The second value reports
    whether any cells were dropped, which is exactly "some vertex cell is out
    of bounds": the footprint never leaves the vertices' bounding box and
    always contains the vertex cells themselves.
    """
    cells = [world_to_cell(grid, v) for v in polygon.vertices]
    footprint = polygon_footprint(cells, bounds=(grid.width, grid.height))
    flat = sorted(r * grid.width + c for c, r in footprint)
    clipped = any(not grid.in_bounds(c, r) for c, r in cells)
    return np.asarray(flat, dtype=np.int64), clipped


def recompose(base: OccupancyGrid, zones: Iterable[Zone]) -> OccupancyGrid:
    """Copy of ``base`` with every zone footprint set Occupied, ascending-ID order."""
    ordered = sorted(zones, key=lambda z: z.zone_id)
    data = base.data.copy()
    for zone in ordered:
        flat, _ = rasterize_zone(base, zone.polygon)
        if flat.size:
            data[flat] = OCCUPIED_BYTE  # idempotent writes: order cannot matter
    return OccupancyGrid.from_cell_bytes(
        base.width, base.height, base.resolution, base.origin, data.tobytes()
    )


class ZoneRegistry:
    """Single-writer owner of the base map, zone table, and composite map."""

    def __init__(self, base: OccupancyGrid) -> None:
        self._base = base
        self._zones: dict[int, Zone] = {}
        self._footprints: dict[int, np.ndarray] = {}
        self._composite = base

    @property
    def base(self) -> OccupancyGrid:
        return self._base

    @property
    def composite(self) -> OccupancyGrid:
        return self._composite

    def zones(self) -> tuple[Zone, ...]:
        """Zones in ascending-ID order."""
        return tuple(self._zones[i] for i in sorted(self._zones))

    def zone_ids(self) -> tuple[int, ...]:
        return tuple(sorted(self._zones))

    def __contains__(self, zone_id: int) -> bool:
        return zone_id in self._zones

    def __len__(self) -> int:
        return len(self._zones)

    def get(self, zone_id: int) -> Zone:
        try:
            return self._zones[zone_id]
        except KeyError:
            raise UnknownIdError(zone_id) from None

    def footprint_size(self, zone_id: int) -> int:
        """In-bounds footprint cell count of a stored zone."""
        if zone_id not in self._footprints:
            raise UnknownIdError(zone_id)
        return int(self._footprints[zone_id].size)

    def allocate_id(self) -> int:
        """Next free ID: max existing + 1, starting at 1."""
        return max(self._zones, default=0) + 1

    def add_zone(
        self,
        zone_id: int,
        polygon: Polygon,
        rotation: float = 0.0,
        anchor: AnchorTransform | None = None,
    ) -> OccupancyGrid:
        """Store a zone and mark its footprint Occupied in the composite."""
        zone = Zone(zone_id, polygon, rotation, anchor or AnchorTransform.identity())
        if zone.zone_id in self._zones:
            raise DuplicateIdError(f"zone id {zone.zone_id} already present")
        flat, clipped = rasterize_zone(self._base, polygon)
        if clipped:
            log.warning("zone %d extends outside the grid; out-of-bounds cells clipped", zone.zone_id)
        self._zones[zone.zone_id] = zone
        self._footprints[zone.zone_id] = flat
        # Incremental update equals reset-and-reapply because occupancy writes
        # are idempotent and the base never changes.
        self._composite = self._composite.with_occupied(flat)
        return self._composite

    def delete_zone(self, zone_id: int) -> OccupancyGrid:
        """Remove one zone; the composite is rebuilt from base plus the survivors."""
        if zone_id not in self._zones:
            raise UnknownIdError(zone_id)
        del self._zones[zone_id]
        del self._footprints[zone_id]
        self._composite = self._rebuild()
        return self._composite

    def clear(self) -> OccupancyGrid:
        """Drop all zones; the composite reverts to the base map."""
        self._zones.clear()
        self._footprints.clear()
        self._composite = self._base
        return self._composite

    def _rebuild(self) -> OccupancyGrid:
        data = self._base.data.copy()
        for zone_id in sorted(self._zones):
            flat = self._footprints[zone_id]
            if flat.size:
                data[flat] = OCCUPIED_BYTE
        return OccupancyGrid.from_cell_bytes(
            self._base.width,
            self._base.height,
            self._base.resolution,
            self._base.origin,
            data.tobytes(),
        )


# ---------------------------------------------------------------------------
# Persistence: one JSON document holding the full zone table. Serialization is
# canonical (sorted keys, two-space indent, ascending IDs) so that
# save -> load -> save is byte-identical.
# ---------------------------------------------------------------------------


def save_store(registry: ZoneRegistry) -> str:
    doc = {
        "zones": [
            {
                "id": z.zone_id,
                "anchor": {"x": z.anchor.x, "y": z.anchor.y, "theta": z.anchor.theta},
                "rotation": z.rotation,
                "vertices": [[x, y] for x, y in z.polygon.vertices],
            }
            for z in registry.zones()
        ]
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_store(text: str) -> list[Zone]:
    """Parse and validate a persistence document into zones (ascending ID)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise StoreFormatError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("zones"), list):
        raise StoreFormatError('document must be an object with a "zones" array')
    zones: list[Zone] = []
    seen: set[int] = set()
    for i, entry in enumerate(doc["zones"]):
        if not isinstance(entry, dict):
            raise StoreFormatError(f"zones[{i}] is not an object")
        zone_id = entry.get("id")
        if not isinstance(zone_id, int) or isinstance(zone_id, bool) or zone_id < 1:
            raise InvalidIdError(f"zones[{i}].id must be an integer >= 1, got {zone_id!r}")
        if zone_id in seen:
            raise DuplicateIdError(f"duplicate zone id {zone_id} in document")
        seen.add(zone_id)
        verts = entry.get("vertices")
        if not isinstance(verts, list) or len(verts) < 3:
            raise StoreFormatError(f"zones[{i}].vertices must list >= 3 points")
        try:
            polygon = Polygon([(float(v[0]), float(v[1])) for v in verts])
        except (TypeError, ValueError, IndexError) as exc:
            raise StoreFormatError(f"zones[{i}].vertices malformed: {exc}") from exc
        anchor_doc = entry.get("anchor", {})
        if not isinstance(anchor_doc, dict):
            raise StoreFormatError(f"zones[{i}].anchor must be an object")
        try:
            anchor = AnchorTransform(
                float(anchor_doc.get("x", 0.0)),
                float(anchor_doc.get("y", 0.0)),
                float(anchor_doc.get("theta", 0.0)),
            )
            rotation = float(entry.get("rotation", 0.0))
        except (TypeError, ValueError) as exc:
            raise StoreFormatError(f"zones[{i}] has a non-numeric field: {exc}") from exc
        zones.append(Zone(zone_id, polygon, rotation, anchor))
    zones.sort(key=lambda z: z.zone_id)
    return zones


def load_store(text: str, base: OccupancyGrid) -> ZoneRegistry:
    """Rebuild a registry from a persistence document and a base map."""
    registry = ZoneRegistry(base)
    for zone in parse_store(text):
        registry.add_zone(zone.zone_id, zone.polygon, zone.rotation, zone.anchor)
    return registry


def save_store_file(registry: ZoneRegistry, path: str | Path) -> None:
    """Atomically overwrite the persistence file (temp file + rename)."""
    path = Path(path)
    text = save_store(registry)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def load_store_file(path: str | Path, base: OccupancyGrid) -> ZoneRegistry:
    return load_store(Path(path).read_text(encoding="utf-8"), base)
