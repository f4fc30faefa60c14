import math
import random

import pytest

from zonemap.grid import (
    CellState,
    GridIndex,
    MapFormatError,
    OccupancyGrid,
    OutOfBoundsError,
    Pose2D,
    grid_to_world,
    load_map,
    save_map,
    world_to_cell,
    world_to_grid,
)

from helpers import random_states_grid


def make_grid(width=10, height=10, res=0.1, origin=Pose2D(0, 0, 0)):
    return OccupancyGrid(width, height, res, origin)


class TestCoordinates:
    def test_origin_cell(self):
        g = make_grid()
        assert world_to_grid(g, (0.0, 0.0)) == GridIndex(0, 0)

    def test_nearest_center_rounding(self):
        g = make_grid()
        assert world_to_grid(g, (0.23, 0.11)) == GridIndex(2, 1)

    def test_rotated_origin(self):
        # hand-applied inverse rigid transform: local = R(-pi/2) @ (p - t)
        g = make_grid(origin=Pose2D(1.0, 2.0, math.pi / 2))
        assert world_to_grid(g, (1.0, 2.3)) == GridIndex(3, 0)

    def test_out_of_bounds_signalled(self):
        g = make_grid()
        with pytest.raises(OutOfBoundsError):
            world_to_grid(g, (5.0, 0.0))
        with pytest.raises(OutOfBoundsError):
            world_to_grid(g, (-0.06, 0.0))

    def test_grid_to_world_cell_centers(self):
        g = make_grid()
        assert grid_to_world(g, (0, 0)) == (0.0, 0.0)
        x, y = grid_to_world(g, (2, 1))
        assert (x, y) == pytest.approx((0.2, 0.1))

    def test_grid_to_world_bounds(self):
        g = make_grid()
        with pytest.raises(OutOfBoundsError):
            grid_to_world(g, (10, 0))

    def test_round_trip_exhaustive_16x16(self):
        g = OccupancyGrid(16, 16, 0.07, Pose2D(-0.3, 1.2, 0.4))
        for col in range(16):
            for row in range(16):
                assert world_to_grid(g, grid_to_world(g, (col, row))) == GridIndex(col, row)

    def test_translation_commutes(self):
        rng = random.Random(7)
        for _ in range(200):
            ox, oy = rng.uniform(-2, 2), rng.uniform(-2, 2)
            th = rng.uniform(-3, 3)
            dx, dy = rng.uniform(-1, 1), rng.uniform(-1, 1)
            px, py = rng.uniform(-1, 1), rng.uniform(-1, 1)
            g1 = OccupancyGrid(8, 8, 0.05, Pose2D(ox, oy, th))
            g2 = OccupancyGrid(8, 8, 0.05, Pose2D(ox + dx, oy + dy, th))
            assert world_to_cell(g1, (px, py)) == world_to_cell(g2, (px + dx, py + dy))


class TestGridType:
    def test_invariants(self):
        with pytest.raises(ValueError):
            OccupancyGrid(0, 5, 0.1)
        with pytest.raises(ValueError):
            OccupancyGrid(5, 5, 0.0)
        with pytest.raises(ValueError):
            OccupancyGrid(2, 2, 0.1, cells=[CellState.FREE] * 3)

    def test_immutable(self):
        g = make_grid()
        with pytest.raises(AttributeError):
            g.width = 5
        with pytest.raises(ValueError):
            g.data[0] = 1

    def test_cells_round_trip_states(self):
        states = [CellState.FREE, CellState.OCCUPIED, CellState.UNKNOWN, CellState.FREE]
        g = OccupancyGrid(2, 2, 0.1, cells=states)
        assert g.states() == states
        assert g.state_at((1, 0)) == CellState.OCCUPIED

    def test_pose_theta_normalized(self):
        assert Pose2D(0, 0, 3 * math.pi).theta == pytest.approx(math.pi)
        assert Pose2D(0, 0, -math.pi).theta == pytest.approx(math.pi)
        assert Pose2D(0, 0, -0.5).theta == pytest.approx(-0.5)


def pgm(width, height, pixels):
    return f"P5\n{width} {height}\n255\n".encode() + bytes(pixels)


META = "image: m.pgm\nresolution: 0.05\norigin: [0.0, 0.0, 0.0]\nnegate: 0\noccupied_thresh: 0.65\nfree_thresh: 0.196\n"


class TestMapIO:
    @pytest.mark.parametrize(
        "value,state",
        [(0, CellState.OCCUPIED), (254, CellState.FREE), (205, CellState.UNKNOWN)],
    )
    def test_threshold_classes(self, value, state):
        g = load_map(pgm(1, 1, [value]), META)
        assert g.state_at((0, 0)) == state

    def test_negate(self):
        meta = META.replace("negate: 0", "negate: 1")
        g = load_map(pgm(1, 1, [255]), meta)
        assert g.state_at((0, 0)) == CellState.OCCUPIED

    def test_image_row0_is_map_top(self):
        # 1 column, 2 rows: top pixel occupied, bottom free
        g = load_map(pgm(1, 2, [0, 254]), META)
        assert g.state_at((0, 1)) == CellState.OCCUPIED
        assert g.state_at((0, 0)) == CellState.FREE

    def test_save_single_occupied_pixel(self):
        g = OccupancyGrid(1, 1, 0.05, cells=[CellState.OCCUPIED])
        image, _ = save_map(g)
        assert image.endswith(b"\x00")

    def test_save_three_states(self):
        g = OccupancyGrid(3, 1, 0.05, cells=[CellState.FREE, CellState.UNKNOWN, CellState.OCCUPIED])
        image, meta = save_map(g)
        assert image[-3:] == bytes([254, 205, 0])
        assert "occupied_thresh: 0.65" in meta

    def test_round_trip_random_grids(self):
        rng = random.Random(42)
        for _ in range(100):
            g = random_states_grid(rng, 32, 32)
            image, meta = save_map(g)
            assert load_map(image, meta) == g

    def test_comment_and_whitespace_header(self):
        data = b"P5 # a comment\n# another\n 2 1\n255\n" + bytes([0, 254])
        g = load_map(data, META)
        assert g.width == 2

    @pytest.mark.parametrize(
        "image,meta",
        [
            (b"P6\n1 1\n255\n\x00", META),  # wrong magic
            (pgm(2, 2, [0, 0, 0]), META),  # truncated pixels
            (b"P5\n1 1\n65535\n\x00\x00", META),  # not 8-bit
            (pgm(1, 1, [0]), META.replace("resolution: 0.05\n", "")),  # missing key
            (pgm(1, 1, [0]), META.replace("0.65", "1.5")),  # threshold out of range
            (pgm(1, 1, [0]), META.replace("0.196", "0.9")),  # free >= occupied
            (pgm(1, 1, [0]), META.replace("[0.0, 0.0, 0.0]", "[0.0, 0.0]")),  # bad origin
        ],
    )
    def test_malformed_inputs(self, image, meta):
        with pytest.raises(MapFormatError):
            load_map(image, meta)

    def test_file_pair_round_trip(self, tmp_path):
        from zonemap.grid import read_map_files, write_map_files

        g = random_states_grid(random.Random(3), 12, 9)
        write_map_files(g, tmp_path / "room")
        assert read_map_files(tmp_path / "room") == g
        assert (tmp_path / "room.pgm").exists() and (tmp_path / "room.meta").exists()
