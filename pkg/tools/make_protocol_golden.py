#!/usr/bin/env python3
"""Regenerate the protocol golden corpus.

The session fixture runs on an empty 8x6 grid at 0.05 m/cell. Zone vertex
coordinates are chosen so each zone quantizes to an exactly known cell block;
the expected final map is assembled here by direct array writes, not through
the registry, so the corpus is an independent check on the edit pipeline.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from zonemap import protocol

GOLDEN = Path(__file__).resolve().parent.parent / "src" / "zonemap" / "protocol" / "golden"

SESSION_GRID = {"width": 8, "height": 6, "resolution": 0.05, "origin": [0.0, 0.0, 0.0]}

# Edits: blocks are (col0..col1) x (row0..row1) after quantization.
SESSION_FRAMES = [
    # add 1: cells (1..2)x(1..2)
    protocol.AddZone(1, ((0.04, 0.04), (0.11, 0.04), (0.11, 0.11), (0.04, 0.11))),
    # add 2: cells (4..6)x(2..4)
    protocol.AddZone(2, ((0.19, 0.09), (0.31, 0.09), (0.31, 0.21), (0.19, 0.21))),
    # remove 1 again
    protocol.RemoveZone(1),
    # add 3: single cell (0, 5)
    protocol.AddZone(3, ((-0.01, 0.24), (0.01, 0.24), (0.01, 0.26), (-0.01, 0.26))),
    # unknown id: must produce an error reply and no state change
    protocol.RemoveZone(9),
]


def expected_final_cells() -> bytes:
    cells = np.zeros((6, 8), dtype=np.uint8)
    cells[2:5, 4:7] = 100  # zone 2 block
    cells[5, 0] = 100  # zone 3 cell
    return cells.tobytes()


def make_valid_frames() -> list[str]:
    cells = expected_final_cells()
    frames = [
        protocol.AddZone(1, ((0.0, 0.0), (1.0, 0.0), (0.0, 1.0))),
        protocol.AddZone(12, ((0.5, -0.25), (1.25, 0.0), (1.0, 1.5), (-0.5, 0.75))),
        protocol.RemoveZone(0),  # the clear-all command
        protocol.RemoveZone(4),
        protocol.MapState(8, 6, 0.05, (0.0, 0.0, 0.0), cells, seq=7),
        protocol.RobotState((0.15, 0.1, 1.5707963267948966), ((0.15, 0.1), (0.2, 0.15)), seq=7),
        protocol.ErrorReply("unknown_id", "no zone with id 9"),
        protocol.ErrorReply("duplicate_id"),
    ]
    return [protocol.encode(m) for m in frames]


INVALID_FRAMES = [
    {"frame": "{\"type\":\"add\",\"id\":0,\"vertices\":[[0,0],[1,0],[0,1]]}", "reason": "add id must be >= 1"},
    {"frame": "{\"type\":\"add\",\"id\":1,\"vertices\":[[0,0],[1,0]]}", "reason": "add needs >= 3 vertices"},
    {"frame": "{\"type\":\"add\",\"id\":1.5,\"vertices\":[[0,0],[1,0],[0,1]]}", "reason": "id must be an integer"},
    {"frame": "{\"type\":\"remove\",\"id\":-1}", "reason": "remove id must be >= 0"},
    {"frame": "{\"type\":\"teleport\",\"id\":1}", "reason": "unknown message type"},
    {"frame": "{\"id\":1}", "reason": "missing type"},
    {"frame": "not json at all", "reason": "not JSON"},
    {"frame": "[1,2,3]", "reason": "not an object"},
    {"frame": "{\"type\":\"map\",\"width\":2,\"height\":2,\"resolution\":0.05,\"origin\":[0,0,0],\"cells\":\"AAA=\"}", "reason": "cell count mismatch"},
    {"frame": "{\"type\":\"map\",\"width\":2,\"height\":2,\"resolution\":0.05,\"origin\":[0,0,0],\"cells\":\"@@@\"}", "reason": "bad base64"},
    {"frame": "{\"type\":\"error\",\"code\":\"\"}", "reason": "empty error code"},
    {"frame": "{\"type\":\"robot\",\"pose\":[0,0]}", "reason": "pose needs three components"},
]


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    (GOLDEN / "frames.jsonl").write_text("\n".join(make_valid_frames()) + "\n", encoding="utf-8")
    (GOLDEN / "invalid_frames.jsonl").write_text(
        "\n".join(json.dumps(e, sort_keys=True) for e in INVALID_FRAMES) + "\n", encoding="utf-8"
    )
    (GOLDEN / "session_replay.jsonl").write_text(
        "\n".join(protocol.encode(m) for m in SESSION_FRAMES) + "\n", encoding="utf-8"
    )
    final = {
        "grid": SESSION_GRID,
        "final_cells_b64": base64.b64encode(expected_final_cells()).decode("ascii"),
        "final_zone_ids": [2, 3],
        "error_replies": 1,
    }
    (GOLDEN / "session_final.json").write_text(
        json.dumps(final, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"wrote golden corpus to {GOLDEN}")


if __name__ == "__main__":
    main()
