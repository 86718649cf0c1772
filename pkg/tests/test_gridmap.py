import random

import pytest
from hypothesis import given, settings, strategies as st

from gridground.errors import (
    InvalidDensity,
    MalformedHeader,
    OutOfBounds,
    RaggedRows,
    UnknownCharacter,
)
from gridground.gridmap import (
    CellState,
    Connectivity,
    GridPose,
    OccupancyGrid,
    FOUR_DELTAS,
    inflate,
    load_map,
    neighbors,
    random_map,
    serialize_map,
)

from conftest import grid_from_rows, open_grid


class TestLoadMap:
    def test_parses_header_and_cells(self):
        g = load_map("3 2 0.5\n.#?\n...\n")
        assert (g.width, g.height, g.resolution) == (3, 2, 0.5)
        assert g.cell(0, 0) is CellState.FREE
        assert g.cell(1, 0) is CellState.OCCUPIED
        assert g.cell(2, 0) is CellState.UNKNOWN
        assert g.cell(2, 1) is CellState.FREE

    def test_row_major_xy_convention(self):
        # x indexes the column, y the row, origin top-left
        g = load_map("3 2 1.0\n#..\n..#\n")
        assert g.cell(0, 0) is CellState.OCCUPIED
        assert g.cell(2, 1) is CellState.OCCUPIED
        assert g.cell(2, 0) is CellState.FREE

    def test_missing_trailing_newline_ok(self):
        g = load_map("2 2 1.0\n..\n..")
        assert g.width == 2

    @pytest.mark.parametrize("header", [
        "", "3 2", "3 2 1.0 extra", "3  2 1.0", "a 2 1.0", "3 b 1.0",
        "3 2 zero", "-3 2 1.0", "3 2 -1.0", "3 2 0", "3 2 inf", "3 2 nan",
        "0 2 1.0", "3.5 2 1.0",
    ])
    def test_bad_header(self, header):
        with pytest.raises(MalformedHeader):
            load_map(header + "\n..\n..\n")

    def test_header_error_names_line_one(self):
        with pytest.raises(MalformedHeader, match="line 1"):
            load_map("bogus\n")

    def test_too_few_rows(self):
        with pytest.raises(RaggedRows):
            load_map("2 3 1.0\n..\n..\n")

    def test_too_many_rows(self):
        with pytest.raises(RaggedRows):
            load_map("2 1 1.0\n..\n..\n")

    def test_short_row_reports_position(self):
        with pytest.raises(RaggedRows, match="row 2"):
            load_map("3 2 1.0\n...\n..\n")

    def test_unknown_character_reports_position(self):
        with pytest.raises(UnknownCharacter, match="row 2.*column 3"):
            load_map("3 2 1.0\n...\n..x\n")

    def test_space_is_not_a_cell(self):
        with pytest.raises(UnknownCharacter):
            load_map("3 1 1.0\n. .\n")


class TestSerializeMap:
    def test_round_trip(self):
        text = "3 2 1.0\n.#?\n...\n"
        assert serialize_map(load_map(text)) == text

    def test_fractional_resolution_round_trip(self):
        text = "2 2 0.1\n..\n#.\n"
        assert serialize_map(load_map(text)) == text

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_round_trip_preserves_grid(self, w, h, seed):
        rng = random.Random(seed)
        cells = tuple(rng.choice(list(CellState)) for _ in range(w * h))
        g = OccupancyGrid(w, h, 1.0, cells)
        assert load_map(serialize_map(g)) == g


class TestOccupancyGrid:
    def test_cell_out_of_bounds(self):
        g = open_grid(3, 3)
        for x, y in [(-1, 0), (0, -1), (3, 0), (0, 3)]:
            with pytest.raises(OutOfBounds):
                g.cell(x, y)

    def test_validation(self):
        with pytest.raises(ValueError):
            OccupancyGrid(0, 1, 1.0, ())
        with pytest.raises(ValueError):
            OccupancyGrid(2, 2, 1.0, (CellState.FREE,) * 3)
        with pytest.raises(ValueError):
            OccupancyGrid(1, 1, 0.0, (CellState.FREE,))
        with pytest.raises(ValueError):
            OccupancyGrid(1, 1, float("nan"), (CellState.FREE,))

    def test_with_occupied_copies(self):
        g = open_grid(3, 3)
        g2 = g.with_occupied([GridPose(1, 1), GridPose(2, 0)])
        assert g2.cell(1, 1) is CellState.OCCUPIED
        assert g2.cell(2, 0) is CellState.OCCUPIED
        assert g.cell(1, 1) is CellState.FREE  # original untouched

    def test_with_occupied_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            open_grid(2, 2).with_occupied([GridPose(5, 5)])


class TestRandomMap:
    def test_border_always_free(self):
        g = random_map(10, 8, 1.0, seed=7)
        for x in range(10):
            assert g.cell(x, 0) is CellState.FREE
            assert g.cell(x, 7) is CellState.FREE
        for y in range(8):
            assert g.cell(0, y) is CellState.FREE
            assert g.cell(9, y) is CellState.FREE

    def test_density_one_fills_interior(self):
        g = random_map(6, 6, 1.0, seed=0)
        for y in range(1, 5):
            for x in range(1, 5):
                assert g.cell(x, y) is CellState.OCCUPIED

    def test_density_zero_all_free(self):
        g = random_map(6, 6, 0.0, seed=0)
        assert all(c is CellState.FREE for c in g.cells)

    def test_deterministic_per_seed(self):
        assert random_map(12, 9, 0.3, 42) == random_map(12, 9, 0.3, 42)
        assert random_map(12, 9, 0.3, 42) != random_map(12, 9, 0.3, 43)

    def test_frozen_occupancy_regression(self):
        # pinned once from the generator contract: one uniform draw per
        # interior cell in row-major order, random.Random(0)
        g = random_map(20, 20, 0.25, seed=0)
        occupied = sum(1 for c in g.cells if c is CellState.OCCUPIED)
        assert occupied == 68

    def test_draw_order_matches_stream(self):
        # interior cells consume the seeded uniform stream row-major
        rng = random.Random(5)
        expected = [rng.random() < 0.4 for _ in range(3 * 3)]
        g = random_map(5, 5, 0.4, seed=5)
        got = [g.cell(x, y) is CellState.OCCUPIED
               for y in range(1, 4) for x in range(1, 4)]
        assert got == expected

    def test_resolution_is_one(self):
        assert random_map(4, 4, 0.5, 0).resolution == 1.0

    @pytest.mark.parametrize("density", [-0.01, 1.01, float("nan"), float("inf")])
    def test_invalid_density(self, density):
        with pytest.raises(InvalidDensity):
            random_map(5, 5, density, 0)


class TestNeighbors:
    def test_four_order_up_right_left_down(self):
        g = open_grid(3, 3)
        assert neighbors(g, GridPose(1, 1)) == [
            GridPose(1, 0), GridPose(2, 1), GridPose(0, 1), GridPose(1, 2),
        ]
        assert FOUR_DELTAS == ((0, -1), (1, 0), (-1, 0), (0, 1))

    def test_four_excludes_blocked_and_oob(self):
        g = grid_from_rows([
            ".#.",
            "...",
            ".?.",
        ])
        assert neighbors(g, GridPose(1, 0)) == [GridPose(2, 0), GridPose(0, 0), GridPose(1, 1)]
        # unknown is non-traversable
        assert GridPose(1, 2) not in neighbors(g, GridPose(1, 1))

    def test_eight_appends_diagonals(self):
        g = open_grid(3, 3)
        assert neighbors(g, GridPose(1, 1), Connectivity.EIGHT) == [
            GridPose(1, 0), GridPose(2, 1), GridPose(0, 1), GridPose(1, 2),
            GridPose(2, 0), GridPose(2, 2), GridPose(0, 2), GridPose(0, 0),
        ]

    def test_diagonal_allowed_past_single_blocked_side(self):
        g = grid_from_rows([
            ".#.",
            "...",
            "...",
        ])
        # NE of (1,1) is (2,0); only one side cell (1,0) is blocked
        assert GridPose(2, 0) in neighbors(g, GridPose(1, 1), Connectivity.EIGHT)

    def test_diagonal_blocked_when_both_sides_blocked(self):
        g = grid_from_rows([
            ".#.",
            "#..",
            "...",
        ])
        # NW of (1,1) is (0,0): sides (1,0) and (0,1) both blocked
        assert GridPose(0, 0) not in neighbors(g, GridPose(1, 1), Connectivity.EIGHT)

    def test_unknown_blocks_corner_like_occupied(self):
        g = grid_from_rows([
            ".?.",
            "?..",
            "...",
        ])
        assert GridPose(0, 0) not in neighbors(g, GridPose(1, 1), Connectivity.EIGHT)

    def test_source_out_of_bounds(self):
        with pytest.raises(OutOfBounds):
            neighbors(open_grid(2, 2), GridPose(9, 9))


class TestInflate:
    def test_radius_zero_identity(self):
        g = grid_from_rows(["...", ".#.", "..."])
        assert inflate(g, 0.0) == g

    def test_radius_one_cross(self):
        g = grid_from_rows([
            ".....",
            ".....",
            "..#..",
            ".....",
            ".....",
        ])
        out = inflate(g, 1.0)
        occupied = {(x, y) for y in range(5) for x in range(5)
                    if out.cell(x, y) is CellState.OCCUPIED}
        assert occupied == {(2, 2), (1, 2), (3, 2), (2, 1), (2, 3)}

    def test_radius_1_5_disc(self):
        g = grid_from_rows([
            ".....",
            ".....",
            "..#..",
            ".....",
            ".....",
        ])
        out = inflate(g, 1.5)
        # sqrt(2) <= 1.5 so the diagonals join the disc
        assert out.cell(1, 1) is CellState.OCCUPIED
        assert out.cell(3, 3) is CellState.OCCUPIED
        assert out.cell(0, 2) is CellState.FREE

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            inflate(open_grid(2, 2), -1.0)

    def test_unknown_cells_not_dilated(self):
        g = grid_from_rows(["?..", "...", "..."])
        out = inflate(g, 1.0)
        assert out.cell(1, 0) is CellState.FREE
        assert out.cell(0, 0) is CellState.UNKNOWN
