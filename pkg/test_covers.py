"""
Unit tests for covers module.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covers import (
    ColoredCover,
    Cover,
    NotACoverError,
    NotARefinementError,
    SpaceMismatchError,
    WindowTooSmallError,
    ball_cover,
    brick_color,
    brick_cover_Z,
    brick_cover_Z2,
    dimension,
    is_r_disjoint,
    is_refinement,
    lebesgue_number,
    mesh,
    multiplicity,
    shrink_to_indexed,
)
from metric_core import from_coordinates, interval_space


@pytest.fixture
def line():
    return interval_space(0, 9)


@pytest.fixture
def two_halves(line):
    return Cover(line, [range(0, 7), range(4, 10)])


def singletons(space):
    return Cover(space, [[p] for p in space.points])


@st.composite
def interval_covers(draw):
    """Covers of [0, 19] by random intervals, completed by singletons where needed."""
    space = interval_space(0, 19)
    members = []
    for _ in range(draw(st.integers(min_value=1, max_value=6))):
        start = draw(st.integers(min_value=0, max_value=19))
        length = draw(st.integers(min_value=1, max_value=12))
        members.append(range(start, min(start + length, 20)))
    covered = set(p for member in members for p in member)
    members.extend([p] for p in space.points if p not in covered)
    return Cover(space, members)


class TestCover:
    """Test cases for cover construction."""

    def test_uncovered_point(self):
        """Members must cover every point."""
        with pytest.raises(NotACoverError, match="not covered") as excinfo:
            Cover(interval_space(0, 3), [[0, 1]])
        assert excinfo.value.witness == 2

    def test_empty_members_allowed(self, line):
        """Empty members are kept but ignored by the statistics."""
        cover = Cover(line, [range(0, 7), [], range(4, 10)])
        assert len(cover) == 3
        assert cover.nonempty_members() == [0, 2]
        assert lebesgue_number(cover).value == 2.0
        assert mesh(cover) == 6.0

    def test_from_masks_and_restrict(self, line, two_halves):
        """Mask construction matches the member construction."""
        rebuilt = Cover.from_masks(line, two_halves.masks)
        assert rebuilt.members == two_halves.members
        sub = line.subspace([0, 5, 9])
        restricted = two_halves.restrict(sub)
        assert restricted.members == (frozenset({0, 5}), frozenset({5, 9}))


class TestLebesgueNumber:
    """Test cases for Lebesgue numbers."""

    def test_two_halves(self, two_halves):
        """{0..6} and {4..9} on [0, 9] give 2, attained at 5."""
        report = lebesgue_number(two_halves)
        assert report.value == 2.0
        assert report.critical_point == 5

    def test_whole_space_member(self, line):
        """A member equal to the space gives an infinite Lebesgue number."""
        report = lebesgue_number(Cover(line, [line.points, [0, 1]]))
        assert report.is_infinite
        assert math.isinf(report.value)

    def test_singletons(self, line):
        """The open unit ball of an integer point is the point itself."""
        assert lebesgue_number(singletons(line)).value == 1.0

    def test_ball_cover(self, line):
        """The cover by open r-balls has Lebesgue number at least r."""
        assert lebesgue_number(ball_cover(line, 3)).value >= 3.0

    def test_permutation_invariance(self, line, two_halves):
        """Reordering members does not change the statistics."""
        swapped = Cover(line, [range(4, 10), range(0, 7)])
        assert lebesgue_number(swapped).value == lebesgue_number(two_halves).value
        assert mesh(swapped) == mesh(two_halves)

    @settings(max_examples=30, deadline=None)
    @given(interval_covers())
    def test_refinement_does_not_raise_lebesgue(self, cover):
        """A refinement never has a larger Lebesgue number."""
        fine = singletons(cover.space)
        assert is_refinement(fine, cover)
        assert lebesgue_number(fine).value <= lebesgue_number(cover).value


class TestMultiplicityAndMesh:
    """Test cases for multiplicity, dimension and mesh."""

    def test_chain(self):
        """Point 1 lies in two members."""
        cover = Cover(interval_space(0, 3), [[0, 1], [1, 2], [2, 3]])
        assert multiplicity(cover) == 2
        assert dimension(cover) == 1

    def test_whole_space(self, line):
        """The trivial cover has dimension 0."""
        cover = Cover(line, [line.points])
        assert multiplicity(cover) == 1
        assert dimension(cover) == 0

    def test_mesh(self, line, two_halves):
        """Mesh is the largest member diameter."""
        assert mesh(two_halves) == 6.0
        assert mesh(singletons(line)) == 0.0


class TestRefinement:
    """Test cases for refinement checks."""

    def test_singletons_refine(self, line, two_halves):
        """Singletons refine any cover, each into its lowest container."""
        report = is_refinement(singletons(line), two_halves)
        assert report.refines
        assert report.witness[5] == 0
        assert report.witness[8] == 1

    def test_self_refinement(self, two_halves):
        """A cover refines itself with the identity witness."""
        report = is_refinement(two_halves, two_halves)
        assert report.refines
        assert report.witness == {0: 0, 1: 1}

    def test_straddling_member(self, line):
        """{0, 5} lies in neither {0..3} nor {4..9}."""
        fine = Cover(line, [[0, 5], range(0, 10)])
        coarse = Cover(line, [range(0, 4), range(4, 10)])
        report = is_refinement(fine, coarse)
        assert not report
        assert report.failing_member == 0

    def test_space_mismatch(self):
        """Covers of different spaces cannot be compared."""
        a = singletons(interval_space(0, 3))
        b = singletons(interval_space(0, 4))
        with pytest.raises(SpaceMismatchError):
            is_refinement(a, b)


class TestDisjointness:
    """Test cases for r-disjointness."""

    @pytest.fixture
    def far_pair(self):
        return from_coordinates([[0.0], [100.0]], points=[0, 100])

    def test_far_members(self, far_pair):
        """Members 100 apart are 50-disjoint."""
        assert is_r_disjoint([[0], [100]], 50, far_pair)

    def test_strictness(self, far_pair):
        """Distance exactly r is not r-disjoint."""
        report = is_r_disjoint([[0], [100]], 100, far_pair)
        assert not report
        assert report.violating_pair == (0, 1)
        assert report.witness_points == (0, 100)
        assert report.distance == 100.0

    def test_empty_members_ignored(self, far_pair):
        """Empty members never violate disjointness."""
        assert is_r_disjoint([[0], [], [100]], 50, far_pair)


class TestShrinkToIndexed:
    """Test cases for shrinking a refinement to the original indexing."""

    def test_identity(self, two_halves):
        """A cover shrunk into itself is unchanged."""
        shrunk = shrink_to_indexed(two_halves, two_halves)
        assert shrunk.members == two_halves.members

    def test_singletons_partition(self, line, two_halves):
        """Singletons go to the lowest containing index."""
        shrunk = shrink_to_indexed(singletons(line), two_halves)
        assert shrunk.members == (frozenset(range(0, 7)), frozenset({7, 8, 9}))
        assert multiplicity(shrunk) == 1

    def test_not_a_refinement(self, line, two_halves):
        """The original must be refined by the input."""
        coarse = Cover(line, [line.points])
        with pytest.raises(NotARefinementError):
            shrink_to_indexed(coarse, two_halves)

    @settings(max_examples=30, deadline=None)
    @given(interval_covers(), st.integers(min_value=1, max_value=4))
    def test_postconditions(self, original, r):
        """Members shrink, the space stays covered, statistics do not worsen."""
        space = original.space
        even = frozenset(p for p in space.points if (p // r) % 2 == 0)
        odd = frozenset(space.points) - even
        refinement = Cover(
            space, [member & block for member in original.members for block in (even, odd)]
        )
        shrunk = shrink_to_indexed(refinement, original)
        assert len(shrunk) == len(original)
        assert not (shrunk.masks & ~original.masks).any()
        assert shrunk.masks.any(axis=0).all()
        assert multiplicity(shrunk) <= multiplicity(refinement)
        assert lebesgue_number(shrunk).value >= lebesgue_number(refinement).value


class TestBrickCovers:
    """Test cases for the brick cover generators."""

    def test_brick_Z_contract(self):
        """Scale 10 on [0, 200]: two 10-disjoint families, Leb >= 10, multiplicity 2."""
        colored = brick_cover_Z((0, 200), 10)
        assert len(colored.families) == 2
        for family in colored.families:
            assert is_r_disjoint(family, 10, colored.space)
        flat = colored.flattened
        assert lebesgue_number(flat).value >= 10
        assert mesh(flat) <= 49
        assert multiplicity(flat) <= 2

    def test_brick_Z_gap_is_eleven(self):
        """The gap inside a family is 11: 10-disjoint but not 12-disjoint."""
        colored = brick_cover_Z((0, 200), 10)
        report = is_r_disjoint(colored.families[0], 12, colored.space)
        assert not report
        assert report.distance == 11.0

    def test_brick_Z_unit_scale(self):
        """The same contract holds at L = 1."""
        colored = brick_cover_Z((0, 20), 1)
        assert lebesgue_number(colored.flattened).value >= 1
        assert multiplicity(colored.flattened) <= 2

    def test_brick_Z_window_too_small(self):
        """Windows shorter than 8L are refused."""
        with pytest.raises(WindowTooSmallError, match="shorter than 8L"):
            brick_cover_Z((0, 79), 10)

    def test_brick_Z_bad_scale(self):
        """L must be a positive integer."""
        with pytest.raises(ValueError, match="positive integer"):
            brick_cover_Z((0, 100), 0)

    def test_brick_Z2_contract(self):
        """Scale 4 on [0, 128]^2: three 4-disjoint families, multiplicity <= 3."""
        colored = brick_cover_Z2((0, 128), 4)
        assert len(colored.families) == 3
        for family in colored.families:
            assert is_r_disjoint(family, 4, colored.space)
        flat = colored.flattened
        assert lebesgue_number(flat).value >= 4
        assert mesh(flat) <= 80
        assert multiplicity(flat) <= 3

    def test_brick_Z2_unit_scale(self):
        """The contract also holds at L = 1 on [0, 32]^2."""
        colored = brick_cover_Z2((0, 32), 1)
        assert lebesgue_number(colored.flattened).value >= 1
        assert multiplicity(colored.flattened) <= 3

    def test_brick_Z2_window_too_small(self):
        """Degenerate windows are refused."""
        with pytest.raises(WindowTooSmallError):
            brick_cover_Z2((0, 10), 1)

    def test_brick_colors_differ_on_neighbors(self):
        """Row neighbors and bricks overlapping in the next row get other colors."""
        for row in range(6):
            for column in range(6):
                color = brick_color(row, column)
                assert color != brick_color(row, column + 1)
                # in an odd row brick c sits over columns c and c + 1 of the even rows
                below = (column, column + 1) if row % 2 else (column - 1, column)
                for other in below:
                    assert color != brick_color(row + 1, other)

    def test_colored_cover_indexing(self):
        """Flattened indices follow the family order."""
        space = interval_space(0, 3)
        colored = ColoredCover(space, (([0, 1], [3]), ([2],)), 1.0)
        assert colored.family_indices() == [[0, 1], [2]]
        assert colored.family_of_member == [0, 0, 1]
        assert np.array_equal(colored.flattened.point_multiplicities(), [1, 1, 1, 1])


if __name__ == "__main__":
    pytest.main([__file__])
