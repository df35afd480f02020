import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import dartsolve
from dartsolve import board


def test_outcome_indexing_round_trip():
    for idx in range(board.N_OUTCOMES):
        assert board.parse_outcome(board.outcome_name(idx)) == idx


def test_scores():
    assert board.score("T20") == 60
    assert board.score("D16") == 32
    assert board.score("SB") == 25
    assert board.score("DB") == 50
    assert board.score("MISS") == 0
    assert board.SCORES.max() == board.MAX_SCORE == 60


def test_doubles_mask():
    assert board.IS_DOUBLE[board.parse_outcome("D1")]
    assert board.IS_DOUBLE[board.parse_outcome("DB")]
    assert not board.IS_DOUBLE[board.parse_outcome("SB")]
    assert not board.IS_DOUBLE[board.parse_outcome("T20")]
    assert board.IS_DOUBLE.sum() == 21


def test_parse_rejects_garbage():
    for bad in ("X20", "S0", "T21", "", "D"):
        with pytest.raises((ValueError, IndexError)):
            board.parse_outcome(bad)


class TestClassify:
    def test_known_points(self, geom):
        # straight up the +y axis: DB, SB, S20, T20, S20, D20, MISS
        ys = [0.0, 10.0, 50.0, 103.0, 130.0, 166.0, 171.0]
        labels = ["DB", "SB", "S20", "T20", "S20", "D20", "MISS"]
        for y, lab in zip(ys, labels):
            assert board.classify(geom, 0.0, y) == board.parse_outcome(lab)

    def test_neighbor_wedges(self, geom):
        # just clockwise of the top wedge sits 1; counterclockwise sits 5
        r = 50.0
        for deg, base in [(99.0 - 9.0, 20), (99.0 - 27.0, 1), (99.0 + 9.0, 5)]:
            x = r * np.cos(np.radians(deg))
            y = r * np.sin(np.radians(deg))
            assert board.classify(geom, x, y) == board.outcome_index("S", base)

    def test_boundary_ties_inward(self, geom):
        # exactly on a wire resolves toward the smaller radius
        assert board.classify(geom, 0.0, geom.r_db) == board.DB_INDEX
        assert board.classify(geom, 0.0, geom.r_sb) == board.SB_INDEX
        assert board.classify(geom, 0.0, geom.r_treble_in) == board.parse_outcome("S20")
        assert board.classify(geom, 0.0, geom.r_treble_out) == board.parse_outcome("T20")
        assert board.classify(geom, 0.0, geom.r_double_out) == board.parse_outcome("D20")
        assert board.classify(geom, 0.0, geom.r_double_out + 1e-9) == board.MISS_INDEX

    def test_region_centers_round_trip(self, geom):
        for z in range(62):
            x, y = board.region_center(geom, z)
            assert board.classify(geom, x, y) == z, board.outcome_name(z)

    def test_miss_has_no_center(self, geom):
        with pytest.raises(ValueError):
            board.region_center(geom, board.MISS_INDEX)

    @settings(max_examples=200, deadline=None)
    @given(x=st.floats(-500, 500), y=st.floats(-500, 500))
    def test_total_on_plane(self, x, y):
        geom = dartsolve.default_geometry()
        z = board.classify(geom, x, y)
        assert 0 <= z < board.N_OUTCOMES

    @settings(max_examples=100, deadline=None)
    @given(r=st.floats(16.0, 161.9), j=st.integers(0, 19))
    def test_wedge_rotation(self, r, j):
        # rotating a wedge midpoint by 18 degrees clockwise advances one
        # position in the segment order
        geom = dartsolve.default_geometry()
        theta = np.radians(90.0 - 18.0 * j)
        z = board.classify(geom, r * np.cos(theta), r * np.sin(theta))
        base = geom.segment_order[j]
        assert board.SCORES[z] in (base, 3 * base)  # single or treble ring


class TestGeometry:
    def test_json_round_trip(self, geom):
        again = board.BoardGeometry.from_json(geom.to_json())
        assert again == geom

    def test_bad_version_rejected(self, geom):
        doc = json.loads(geom.to_json())
        doc["format_version"] = 99
        with pytest.raises(ValueError):
            board.BoardGeometry.from_json(json.dumps(doc))

    def test_bad_radii_rejected(self):
        with pytest.raises(ValueError):
            board.BoardGeometry(r_db=20.0, r_sb=15.9)

    def test_bad_segment_order_rejected(self):
        with pytest.raises(ValueError):
            board.BoardGeometry(segment_order=tuple([20] * 20))


class TestActionGrid:
    def test_one_mm_grid_size(self, geom):
        grid = board.make_grid(geom, 1.0)
        assert abs(len(grid) - 90785) <= 0.005 * 90785

    def test_centers_inside_disc(self, geom):
        grid = board.make_grid(geom, 5.0)
        r = np.hypot(grid.xy[:, 0], grid.xy[:, 1])
        assert (r <= geom.r_double_out).all()

    def test_row_major_by_y_then_x(self, geom):
        grid = board.make_grid(geom, 5.0)
        order = np.lexsort((grid.xy[:, 0], grid.xy[:, 1]))
        assert (order == np.arange(len(grid))).all()

    def test_region_target_indices(self, geom):
        grid = board.make_grid(geom, 2.0)
        db = board.region_target_indices(grid, geom, board.DB_INDEX)
        labels = board.classify(geom, grid.xy[db, 0], grid.xy[db, 1])
        assert (labels == board.DB_INDEX).all()
        assert len(db) > 0

    def test_bad_cell_size(self, geom):
        with pytest.raises(ValueError):
            board.make_grid(geom, 0.0)
