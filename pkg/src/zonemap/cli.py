"""Command-line entry points: apply, metrics, plan, trial, serve.

Exit codes: 0 success (planner results such as "no path" are results, not
failures), 1 missing/unreadable files, 2 malformed documents or arguments,
3 incompatible grids. Machine-readable output is versioned with "schema": 1
and carries no timestamps, so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import metrics as metrics_mod
from . import navsim, planner
from .grid import (
    MapFormatError,
    OutOfBoundsError,
    read_map_files,
    same_geometry,
    world_to_grid,
    write_map_files,
)
from .metrics import GridMismatchError
from .service import ServiceConfig, run_service
from .zones import StoreFormatError, ZoneRegistry, parse_store, recompose

EXIT_OK = 0
EXIT_FILE = 1
EXIT_SCHEMA = 2
EXIT_MISMATCH = 3

JSON_SCHEMA_VERSION = 1


class _CliError(Exception):
    def __init__(self, code: int, message: str) -> None:
        super().__init__(message)
        self.code = code


def _read_map(stem: str):
    try:
        return read_map_files(stem)
    except FileNotFoundError as exc:
        raise _CliError(EXIT_FILE, f"map not found: {exc}") from exc
    except MapFormatError as exc:
        raise _CliError(EXIT_SCHEMA, f"bad map {stem}: {exc}") from exc


def _read_zones(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError as exc:
        raise _CliError(EXIT_FILE, f"zones document not found: {path}") from exc
    try:
        return parse_store(text)
    except (StoreFormatError, ValueError) as exc:
        raise _CliError(EXIT_SCHEMA, f"bad zones document {path}: {exc}") from exc


def _read_scenario(path: str):
    if not Path(path).exists() and path in ("stage1", "stage2"):
        return navsim.builtin_scenario(path)
    try:
        return navsim.load_scenario(path)
    except FileNotFoundError as exc:
        raise _CliError(EXIT_FILE, f"scenario not found: {exc}") from exc
    except (MapFormatError, ValueError) as exc:
        raise _CliError(EXIT_SCHEMA, f"bad scenario {path}: {exc}") from exc


def _parse_point(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise _CliError(EXIT_SCHEMA, f"expected X,Y in meters, got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise _CliError(EXIT_SCHEMA, f"non-numeric coordinate in {text!r}") from exc


def cmd_apply(args: argparse.Namespace) -> int:
    base = _read_map(args.map)
    zones = _read_zones(args.zones)
    registry = ZoneRegistry(base)
    rows = []
    for zone in zones:
        registry.add_zone(zone.zone_id, zone.polygon, zone.rotation, zone.anchor)
        rows.append((zone.zone_id, registry.footprint_size(zone.zone_id)))
    write_map_files(registry.composite, args.output)
    if args.json:
        print(
            json.dumps(
                {
                    "schema": JSON_SCHEMA_VERSION,
                    "output": str(args.output),
                    "zones": [{"id": i, "footprint_cells": n} for i, n in rows],
                },
                sort_keys=True,
            )
        )
    else:
        for zone_id, count in rows:
            print(f"zone {zone_id}: {count} cells")
        print(f"wrote {args.output}.pgm + {args.output}.meta")
    return EXIT_OK


def cmd_metrics(args: argparse.Namespace) -> int:
    truth = _read_map(args.ground_truth)
    drawn = _read_map(args.drawn)
    wall_mask: frozenset = frozenset()
    if args.walls_from:
        base = _read_map(args.walls_from)
        if not same_geometry(base, truth):
            raise _CliError(EXIT_MISMATCH, "wall-mask base does not match the ground truth grid")
        wall_mask = metrics_mod.wall_mask_from_base(base)
    try:
        counts = metrics_mod.classify_cells(truth, drawn, wall_mask)
    except GridMismatchError as exc:
        raise _CliError(EXIT_MISMATCH, str(exc)) from exc
    report = metrics_mod.compute_metrics(counts)
    if args.json:
        payload = {
            "schema": JSON_SCHEMA_VERSION,
            "counts": {
                "tp": counts.tp,
                "fp": counts.fp,
                "fn": counts.fn,
                "tn": counts.tn,
                "excluded_wall_cells": counts.excluded_wall_cells,
            },
            "metrics": report.as_dict(),
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        sys.stdout.write(metrics_mod.format_report(counts, report))
    return EXIT_OK


def cmd_plan(args: argparse.Namespace) -> int:
    grid = _read_map(args.map)
    start_w = _parse_point(args.start)
    goal_w = _parse_point(args.goal)
    result: dict = {"schema": JSON_SCHEMA_VERSION}
    path = None
    try:
        start = world_to_grid(grid, start_w)
        goal = world_to_grid(grid, goal_w)
        path = planner.plan(grid, start, goal)
        result.update(
            {
                "result": "path",
                "length_m": planner.path_length(path, grid.resolution),
                "cells": len(path.cells),
            }
        )
    except OutOfBoundsError as exc:
        raise _CliError(EXIT_SCHEMA, str(exc)) from exc
    except planner.StartBlockedError:
        result["result"] = "start_blocked"
    except planner.GoalBlockedError:
        result["result"] = "goal_blocked"
    except planner.NoPathError:
        result["result"] = "no_path"
    if args.dump_path and path is not None:
        Path(args.dump_path).write_text(
            "".join(f"{c},{r}\n" for c, r in path.cells), encoding="utf-8"
        )
    if args.json:
        print(json.dumps(result, sort_keys=True))
    else:
        print(f"result: {result['result']}")
        if path is not None:
            print(f"length_m: {result['length_m']:.4f}")
            print(f"cells: {result['cells']}")
    return EXIT_OK


def cmd_trial(args: argparse.Namespace) -> int:
    scenario = _read_scenario(args.scenario)
    zones = _read_zones(args.zones) if args.zones else []
    drawn = recompose(scenario.base, zones)
    outcome = navsim.run_trial(scenario, drawn)
    if args.json:
        payload = {
            "schema": JSON_SCHEMA_VERSION,
            "result": outcome.result.value,
            "length_m": outcome.length_m,
            "collision_cells": [[c, r] for c, r in outcome.collision_cells],
        }
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"result: {outcome.result.value}")
        if outcome.length_m is not None:
            print(f"length_m: {outcome.length_m:.4f}")
        if outcome.collision_cells:
            print(f"collision_cells: {len(outcome.collision_cells)}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise _CliError(EXIT_SCHEMA, f"--listen must be HOST:PORT, got {args.listen!r}")
    config = ServiceConfig(
        host=host,
        port=int(port_text),
        store_path=args.store,
        scenario=args.scenario,
        speed=args.speed,
        tick_hz=args.tick_hz,
    )
    try:
        run_service(config)
    except StoreFormatError as exc:
        raise _CliError(EXIT_SCHEMA, f"refusing to start with corrupt store: {exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zonemap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply", help="compose zones onto a map and write the result")
    p.add_argument("map", help="input map file stem (expects .pgm + .meta)")
    p.add_argument("zones", help="zones document (JSON)")
    p.add_argument("output", help="output map file stem")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("metrics", help="compare a drawn map against ground truth")
    p.add_argument("ground_truth", help="ground-truth map stem")
    p.add_argument("drawn", help="drawn map stem")
    p.add_argument("--walls-from", metavar="STEM", help="base map whose occupied cells are excluded as walls")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("plan", help="plan a path on a map")
    p.add_argument("map", help="map stem")
    p.add_argument("--start", required=True, metavar="X,Y", help="start in world meters")
    p.add_argument("--goal", required=True, metavar="X,Y", help="goal in world meters")
    p.add_argument("--dump-path", metavar="FILE", help="write the cell list to FILE")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("trial", help="run one navigation trial on a scenario")
    p.add_argument("scenario", help="scenario manifest path, or built-in name (stage1, stage2)")
    p.add_argument("--zones", metavar="FILE", help="zones document to compose onto the base map")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_trial)

    p = sub.add_parser("serve", help="run the live editing service")
    p.add_argument("--listen", default="127.0.0.1:8750", metavar="HOST:PORT")
    p.add_argument("--store", default="zones.json", metavar="PATH")
    p.add_argument("--scenario", default="stage1", metavar="PATH_OR_NAME")
    p.add_argument("--speed", type=float, default=0.25, metavar="M_PER_S")
    p.add_argument("--tick-hz", type=float, default=20.0, metavar="HZ")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
