import json

import numpy as np
import pytest

from zonemap import navsim
from zonemap.cli import EXIT_MISMATCH, EXIT_OK, EXIT_SCHEMA, main
from zonemap.geometry import Polygon
from zonemap.grid import OCCUPIED_BYTE, OccupancyGrid, read_map_files, write_map_files
from zonemap.zones import ZoneRegistry, save_store

from helpers import grid_from_rows

EMPTY_STORE = '{\n  "zones": []\n}\n'


@pytest.fixture
def workdir(tmp_path):
    write_map_files(OccupancyGrid(10, 10, 0.05), tmp_path / "base")
    (tmp_path / "empty.json").write_text(EMPTY_STORE)
    return tmp_path


def zones_doc_for(polygons, base):
    reg = ZoneRegistry(base)
    for i, poly in enumerate(polygons, start=1):
        reg.add_zone(i, poly)
    return save_store(reg)


class TestApply:
    def test_empty_zones_doc_identity(self, workdir, capsys):
        code = main(
            ["apply", str(workdir / "base"), str(workdir / "empty.json"), str(workdir / "out")]
        )
        assert code == EXIT_OK
        assert read_map_files(workdir / "out") == read_map_files(workdir / "base")

    def test_malformed_doc_exit_2_no_output(self, workdir, capsys):
        (workdir / "bad.json").write_text("{broken")
        code = main(
            ["apply", str(workdir / "base"), str(workdir / "bad.json"), str(workdir / "out")]
        )
        assert code == EXIT_SCHEMA
        assert not (workdir / "out.pgm").exists()

    def test_footprint_counts_printed(self, workdir, capsys):
        base = read_map_files(workdir / "base")
        doc = zones_doc_for(
            [Polygon([(0.04, 0.04), (0.16, 0.04), (0.16, 0.16), (0.04, 0.16)])], base
        )
        (workdir / "zones.json").write_text(doc)
        code = main(
            ["apply", str(workdir / "base"), str(workdir / "zones.json"), str(workdir / "out")]
        )
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "zone 1: 9 cells" in out

    def test_stage1_reference_zones_match_constructed_composite(self, tmp_path, capsys):
        scen = navsim.stage1()
        write_map_files(scen.base, tmp_path / "base")
        doc = zones_doc_for(navsim.stage1_reference_zones(), scen.base)
        (tmp_path / "zones.json").write_text(doc)
        code = main(
            ["apply", str(tmp_path / "base"), str(tmp_path / "zones.json"), str(tmp_path / "out")]
        )
        assert code == EXIT_OK
        # golden composite assembled independently: base plus the obstacle block
        expected = np.frombuffer(scen.base.to_cell_bytes(), dtype=np.uint8).copy().reshape(20, 30)
        expected[5:15, 15] = OCCUPIED_BYTE
        got = read_map_files(tmp_path / "out")
        assert got.to_cell_bytes() == expected.tobytes()


class TestMetricsCmd:
    def test_identical_maps(self, workdir, capsys):
        code = main(["metrics", str(workdir / "base"), str(workdir / "base")])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "accuracy: 1.000000" in out

    def test_shifted_square_counts(self, tmp_path, capsys):
        rows_truth = ["." * 10] * 3 + ["..###....."] * 3 + ["." * 10] * 4
        rows_drawn = ["." * 10] * 3 + ["...###...."] * 3 + ["." * 10] * 4
        write_map_files(grid_from_rows(rows_truth), tmp_path / "truth")
        write_map_files(grid_from_rows(rows_drawn), tmp_path / "drawn")
        code = main(["metrics", str(tmp_path / "truth"), str(tmp_path / "drawn"), "--json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["schema"] == 1
        assert payload["counts"] == {"tp": 6, "fp": 3, "fn": 3, "tn": 88, "excluded_wall_cells": 0}

    def test_undefined_prints_na(self, workdir, capsys):
        code = main(["metrics", str(workdir / "base"), str(workdir / "base")])
        assert code == EXIT_OK
        assert "precision: n/a" in capsys.readouterr().out

    def test_dimension_mismatch_exit_3(self, workdir, tmp_path, capsys):
        write_map_files(OccupancyGrid(4, 4, 0.05), workdir / "small")
        code = main(["metrics", str(workdir / "base"), str(workdir / "small")])
        assert code == EXIT_MISMATCH

    def test_walls_from(self, tmp_path, capsys):
        base = grid_from_rows(["##", ".."])
        write_map_files(base, tmp_path / "base")
        code = main(
            ["metrics", str(tmp_path / "base"), str(tmp_path / "base"), "--walls-from", str(tmp_path / "base"), "--json"]
        )
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["counts"]["excluded_wall_cells"] == 2
        assert payload["counts"]["tp"] == 0


class TestPlanCmd:
    def test_empty_grid_diagonal(self, tmp_path, capsys):
        write_map_files(OccupancyGrid(5, 5, 0.05), tmp_path / "m")
        code = main(["plan", str(tmp_path / "m"), "--start", "0,0", "--goal", "0.2,0.2"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "result: path" in out
        assert "length_m: 0.2828" in out

    def test_no_path_is_result_not_failure(self, tmp_path, capsys):
        write_map_files(grid_from_rows(["...", "###", "..."]), tmp_path / "m")
        code = main(["plan", str(tmp_path / "m"), "--start", "0,0", "--goal", "0,0.1", "--json"])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["result"] == "no_path"

    def test_dump_path(self, tmp_path, capsys):
        write_map_files(OccupancyGrid(3, 3, 0.05), tmp_path / "m")
        out_file = tmp_path / "cells.txt"
        code = main(
            ["plan", str(tmp_path / "m"), "--start", "0,0", "--goal", "0.1,0", "--dump-path", str(out_file)]
        )
        assert code == EXIT_OK
        assert out_file.read_text() == "0,0\n1,0\n2,0\n"

    def test_bad_point_syntax(self, tmp_path, capsys):
        write_map_files(OccupancyGrid(3, 3, 0.05), tmp_path / "m")
        code = main(["plan", str(tmp_path / "m"), "--start", "zap", "--goal", "0,0"])
        assert code == EXIT_SCHEMA


class TestTrialCmd:
    def test_stage2_reference_zones_success(self, tmp_path, capsys):
        scen = navsim.stage2()
        doc = zones_doc_for(navsim.stage2_reference_zones(), scen.base)
        (tmp_path / "zones.json").write_text(doc)
        code = main(["trial", "stage2", "--zones", str(tmp_path / "zones.json"), "--json"])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["result"] == "success"

    def test_stage2_no_zones_collides(self, capsys):
        code = main(["trial", "stage2", "--json"])
        assert code == EXIT_OK
        payload = json.loads(capsys.readouterr().out)
        assert payload["result"] == "collision_failure"
        assert payload["collision_cells"]

    def test_scenario_manifest_path(self, tmp_path, capsys):
        manifest = navsim.write_scenario(navsim.stage1(), tmp_path)
        code = main(["trial", str(manifest), "--json"])
        assert code == EXIT_OK
        assert json.loads(capsys.readouterr().out)["result"] == "collision_failure"


class TestDeterminism:
    def test_json_outputs_byte_identical(self, workdir, capsys):
        main(["metrics", str(workdir / "base"), str(workdir / "base"), "--json"])
        first = capsys.readouterr().out
        main(["metrics", str(workdir / "base"), str(workdir / "base"), "--json"])
        assert capsys.readouterr().out == first
