import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fanghpo.pareto import ParetoArchive, dominates, hvi, hypervolume

from oracles import hv_inclusion_exclusion, nondominated_filter, random_front

outcome2 = st.tuples(
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
    st.floats(min_value=0.0, max_value=1.0, allow_nan=False),
).map(np.array)


class TestDominates:
    def test_simple_dominance(self):
        assert dominates(np.array([0.2, 0.3]), np.array([0.3, 0.3]))

    def test_equal_is_not_dominance(self):
        assert not dominates(np.array([0.2, 0.3]), np.array([0.2, 0.3]))

    def test_incomparable(self):
        a, b = np.array([0.1, 0.9]), np.array([0.9, 0.1])
        assert not dominates(a, b)
        assert not dominates(b, a)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            dominates(np.array([0.1, 0.2]), np.array([0.1, 0.2, 0.3]))

    @given(outcome2)
    @settings(max_examples=50, deadline=None)
    def test_irreflexive(self, a):
        assert not dominates(a, a)

    @given(outcome2, outcome2)
    @settings(max_examples=100, deadline=None)
    def test_antisymmetric(self, a, b):
        assert not (dominates(a, b) and dominates(b, a))

    @given(outcome2, outcome2, outcome2)
    @settings(max_examples=100, deadline=None)
    def test_transitive(self, a, b, c):
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)


class TestArchive:
    def test_insert_into_empty(self):
        archive = ParetoArchive([1.0, 1.0])
        assert archive.insert(np.zeros(2), np.array([0.5, 0.5]), 1)
        assert len(archive) == 1

    def test_dominated_insert_rejected(self):
        archive = ParetoArchive([1.0, 1.0])
        archive.insert(np.zeros(2), np.array([0.5, 0.5]), 1)
        assert not archive.insert(np.zeros(2), np.array([0.6, 0.6]), 1)
        assert len(archive) == 1

    def test_duplicate_outcome_rejected(self):
        archive = ParetoArchive([1.0, 1.0])
        archive.insert(np.zeros(2), np.array([0.5, 0.5]), 1)
        assert not archive.insert(np.ones(2), np.array([0.5, 0.5]), 1)

    def test_dominating_insert_prunes(self):
        archive = ParetoArchive([1.0, 1.0])
        archive.insert(np.zeros(2), np.array([0.5, 0.5]), 1)
        archive.insert(np.zeros(2), np.array([0.8, 0.2]), 1)
        assert archive.insert(np.zeros(2), np.array([0.7, 0.1]), 1)
        assert len(archive) == 2  # (0.5, 0.5) stays, (0.8, 0.2) pruned
        outcomes = {tuple(e.outcome) for e in archive.entries}
        assert outcomes == {(0.5, 0.5), (0.7, 0.1)}

    def test_non_finite_rejected(self):
        archive = ParetoArchive([1.0, 1.0])
        with pytest.raises(ValueError):
            archive.insert(np.zeros(2), np.array([np.nan, 0.5]), 1)

    def test_matches_bruteforce_filter_on_stream(self):
        rng = np.random.default_rng(17)
        stream = rng.random((200, 2))
        archive = ParetoArchive([1.0, 1.0])
        for i, y in enumerate(stream):
            archive.insert(np.zeros(2), y, 1)
        expected = {tuple(stream[i]) for i in nondominated_filter(stream)}
        got = {tuple(e.outcome) for e in archive.entries}
        assert got == expected

    def test_outside_reference_archived_but_not_counted(self):
        archive = ParetoArchive([1.0, 1.0])
        archive.insert(np.zeros(2), np.array([0.2, 1.5]), 1)
        assert len(archive) == 1
        assert archive.hypervolume() == 0.0


class TestHypervolume:
    def test_single_box(self):
        assert hypervolume([[0.5, 0.5]], [1.0, 1.0]) == pytest.approx(0.25, abs=1e-15)

    def test_two_boxes_inclusion_exclusion(self):
        # 0.16 + 0.16 - 0.04
        assert hypervolume([[0.2, 0.8], [0.8, 0.2]], [1.0, 1.0]) == pytest.approx(
            0.28, abs=1e-12
        )

    def test_empty_front(self):
        assert hypervolume(np.empty((0, 2)), [1.0, 1.0]) == 0.0

    def test_three_objectives_matches_oracle(self):
        rng = np.random.default_rng(3)
        front = random_front(rng, 3, 8)
        r = np.array([1.0, 1.0, 1.0])
        assert hypervolume(front, r) == pytest.approx(
            hv_inclusion_exclusion(front, r), abs=1e-12
        )

    def test_monotone_under_insertion(self):
        rng = np.random.default_rng(5)
        r = np.array([1.0, 1.0])
        front = np.empty((0, 2))
        last = 0.0
        for y in rng.random((30, 2)):
            front = np.vstack([front, y])
            hv = hypervolume(front, r)
            assert hv >= last - 1e-14
            last = hv

    def test_scale_covariance(self):
        rng = np.random.default_rng(9)
        front = random_front(rng, 2, 6)
        r = np.ones(2)
        base = hypervolume(front, r)
        for t in (0.5, 0.25):
            shrunk = r + t * (front - r)
            assert hypervolume(shrunk, r) == pytest.approx(t**2 * base, rel=1e-12)

    def test_dominated_and_duplicate_points_ignored(self):
        r = np.ones(2)
        base = hypervolume([[0.2, 0.6], [0.6, 0.2]], r)
        padded = hypervolume([[0.2, 0.6], [0.6, 0.2], [0.7, 0.7], [0.2, 0.6]], r)
        assert padded == pytest.approx(base, abs=1e-15)


class TestHvi:
    def test_dominated_candidate(self):
        assert hvi([[0.5, 0.5]], [1.0, 1.0], [0.6, 0.6]) == 0.0

    def test_box_arithmetic(self):
        assert hvi([[0.5, 0.5]], [1.0, 1.0], [0.25, 0.25]) == pytest.approx(
            0.3125, abs=1e-12
        )

    def test_empty_front_reduces_to_hypervolume(self):
        assert hvi(np.empty((0, 2)), [1.0, 1.0], [0.5, 0.5]) == pytest.approx(0.25)

    def test_outside_reference_box(self):
        assert hvi([[0.5, 0.5]], [1.0, 1.0], [1.2, 0.1]) == 0.0

    def test_nonnegative_on_random_candidates(self):
        rng = np.random.default_rng(23)
        front = random_front(rng, 2, 6)
        for y in rng.random((50, 2)) * 1.3:
            assert hvi(front, np.ones(2), y) >= 0.0
