import numpy as np
import pytest

from errors import EmptyCollection, NonpositiveScale, ZeroWidthSplit
from services.interval import Box, BoxCollection, box_contains, hull
from services.refinement import (
    bisect,
    default_scaling,
    equal_width_bins,
    prune,
    refine,
    resolve_scaling,
    scaled_widths,
    widest_dim,
)
from state import ObserverConfig
from tests.conftest import nested_collection, random_collection, sample_in_box

ONES = np.ones(2)


def cfg(**kwargs) -> ObserverConfig:
    return ObserverConfig(**kwargs)


class TestScaledWidths:
    def test_unit_scaling(self):
        np.testing.assert_array_equal(scaled_widths(Box([0, 0], [2, 1]), [1, 1]), [2, 1])

    def test_custom_scaling(self):
        np.testing.assert_array_equal(scaled_widths(Box([0, 0], [2, 1]), [2, 0.5]), [1, 2])

    def test_point_box(self):
        np.testing.assert_array_equal(scaled_widths(Box.point([3, 4]), [1, 1]), [0, 0])

    def test_nonpositive_scale(self):
        with pytest.raises(NonpositiveScale):
            scaled_widths(Box([0, 0], [2, 1]), [1, 0])

    def test_widest_dim(self):
        assert widest_dim(Box([0, 0], [2, 1]), [1, 1]) == 0
        assert widest_dim(Box([0, 0], [2, 1]), [2, 0.5]) == 1
        assert widest_dim(Box([0, 0], [1, 1]), [1, 1]) == 0

    def test_default_scaling_is_x0_width(self):
        np.testing.assert_array_equal(default_scaling(Box.unit(2)), [2, 2])
        assert np.all(default_scaling(Box.point([1, 2])) > 0)

    def test_configured_scaling_wins(self):
        np.testing.assert_array_equal(resolve_scaling(cfg(s=[1.0, 3.0]), Box.unit(2)), [1, 3])
        np.testing.assert_array_equal(resolve_scaling(cfg(), Box.unit(2)), [2, 2])


class TestBisect:
    def test_first_dimension(self):
        left, right = bisect(Box([0, 0], [2, 1]), 0)
        assert left == Box([0, 0], [1, 1])
        assert right == Box([1, 0], [2, 1])

    def test_second_dimension(self):
        left, right = bisect(Box([-1, 0], [1, 4]), 1)
        assert left == Box([-1, 0], [1, 2])
        assert right == Box([-1, 2], [1, 4])

    def test_hull_of_children_is_parent(self, rng):
        for _ in range(100):
            lo = rng.uniform(-10, 10, size=3)
            box = Box(lo, lo + rng.uniform(0.01, 5, size=3))
            left, right = bisect(box, int(rng.integers(0, 3)))
            assert hull(left, right) == box

    def test_zero_width(self):
        with pytest.raises(ZeroWidthSplit):
            bisect(Box([0, 0], [0, 1]), 0)


class TestBins:
    def test_last_bin_is_closed(self):
        np.testing.assert_array_equal(equal_width_bins(np.array([0.0, 0.5, 1.0]), 2), [0, 1, 1])

    def test_degenerate_range(self):
        np.testing.assert_array_equal(equal_width_bins(np.full(4, 3.0), 5), [0, 0, 0, 0])


class TestRefine:
    def test_single_doubling(self):
        result = refine(BoxCollection([[0, 0]], [[2, 1]]), cfg(M_max=2), ONES)
        assert result.boxes == [Box([0, 0], [1, 1]), Box([1, 0], [2, 1])]

    def test_cap_of_one_is_identity(self):
        collection = BoxCollection([[0, 0]], [[2, 1]])
        assert refine(collection, cfg(M_max=1), ONES) is collection

    def test_partial_round_picks_from_the_widest_bin(self):
        lo = np.zeros((4, 2))
        hi = np.array([[1.0, 0.5], [2.0, 0.5], [4.0, 0.5], [3.0, 0.5]])
        result = refine(BoxCollection(lo, hi), cfg(M_max=5), ONES)
        assert len(result) == 5
        # box 2 (width 4) is replaced in place by its two halves
        assert result[2] == Box([0, 0], [2, 0.5])
        assert result[3] == Box([2, 0], [4, 0.5])
        assert result[4] == Box([0, 0], [3, 0.5])

    def test_partial_round_uses_encounter_order_within_a_bin(self):
        lo = np.zeros((3, 1))
        hi = np.array([[1.0], [1.0], [1.0]])
        result = refine(BoxCollection(lo, hi), cfg(M_max=4), np.ones(1))
        np.testing.assert_array_equal(result.hi[:, 0], [0.5, 1.0, 1.0, 1.0])

    def test_reaches_cap_exactly(self):
        for m_max in (2, 5, 8, 13, 64, 100):
            result = refine(BoxCollection([[0, 0]], [[1, 1]]), cfg(M_max=m_max), ONES)
            assert len(result) == m_max

    def test_full_round_doubles(self):
        collection = random_collection(np.random.default_rng(0), 6)
        assert len(refine(collection, cfg(M_max=12), ONES)) == 12

    def test_more_boxes_than_cap(self):
        collection = random_collection(np.random.default_rng(1), 6)
        assert refine(collection, cfg(M_max=3), ONES) is collection

    def test_point_boxes_cannot_split(self):
        collection = BoxCollection([[1, 1], [0, 0]], [[1, 1], [2, 2]])
        result = refine(collection, cfg(M_max=10), ONES)
        assert result[0] == Box([1, 1], [1, 1])
        assert len(result) == 10

    def test_only_point_boxes(self):
        collection = BoxCollection([[1, 1]], [[1, 1]])
        assert len(refine(collection, cfg(M_max=10), ONES)) == 1

    def test_empty_collection(self):
        with pytest.raises(EmptyCollection):
            refine(BoxCollection.empty(2), cfg(M_max=4), ONES)

    def test_union_is_preserved(self, rng):
        for _ in range(100):
            collection = random_collection(rng, int(rng.integers(1, 8)))
            m_max = int(rng.integers(1, 40))
            result = refine(collection, cfg(M_max=m_max, K_split=int(rng.integers(1, 30))), ONES)
            assert len(result) <= max(m_max, len(collection))
            points = rng.uniform(-1, 14, size=(2000, 2))
            np.testing.assert_array_equal(collection.contains_points(points),
                                          result.contains_points(points))


class TestPrune:
    def test_nested_box_in_same_bin_is_removed(self):
        collection = BoxCollection([[0, 0], [1, 1]], [[4, 4], [3, 3]])
        result = prune(collection, cfg(), ONES)
        assert result.boxes == [Box([0, 0], [4, 4])]

    def test_disjoint_boxes_are_kept(self):
        collection = BoxCollection([[0, 0], [3, 3]], [[1, 1], [4, 4]])
        assert prune(collection, cfg(), ONES) is collection

    def test_representative_is_never_removed(self):
        collection = BoxCollection([[1, 1], [0, 0]], [[3, 3], [4, 4]])
        result = prune(collection, cfg(), ONES)
        assert result.boxes == [Box([0, 0], [4, 4])]

    def test_duplicate_boxes_keep_the_first(self):
        collection = BoxCollection([[0, 0], [0, 0], [5, 5]], [[1, 1], [1, 1], [6, 6]])
        result = prune(collection, cfg(K_prune=1), ONES)
        assert len(result) == 2

    def test_containment_across_bins_is_ignored(self):
        # centers 0.5 and 5 fall in different bins along the first component
        collection = BoxCollection([[0, 0], [0, 0]], [[1, 1], [10, 1]])
        assert len(prune(collection, cfg(K_prune=20), ONES)) == 2
        assert len(prune(collection, cfg(K_prune=1), ONES)) == 1

    def test_single_box(self):
        collection = BoxCollection([[0, 0]], [[1, 1]])
        assert prune(collection, cfg(), ONES) is collection

    def test_survivors_keep_encounter_order(self):
        collection = BoxCollection([[5, 5], [0, 0], [6, 6], [1, 1]], [[6, 6], [4, 4], [7, 7], [2, 2]])
        result = prune(collection, cfg(K_prune=2), ONES)
        np.testing.assert_array_equal(result.lo, [[5, 5], [0, 0], [6, 6]])

    def test_removed_boxes_lie_in_retained_boxes(self, rng):
        for _ in range(100):
            collection = nested_collection(rng, int(rng.integers(2, 12)))
            result = prune(collection, cfg(K_prune=int(rng.integers(1, 25))), ONES)
            kept = set(map(tuple, np.hstack([result.lo, result.hi])))
            for box in collection:
                if tuple(np.concatenate([box.lo, box.hi])) not in kept:
                    assert any(box_contains(r, box) for r in result)
            points = np.vstack([sample_in_box(b, 50, rng) for b in collection])
            assert np.all(result.contains_points(points))
