"""
Unit tests for metric_core module.
"""

import itertools
from unittest.mock import patch

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metric_core import (
    AsymmetricMatrixError,
    DegenerateDistanceError,
    DimensionMismatchError,
    DisconnectedGraphError,
    MetricError,
    NegativeDistanceError,
    NonpositiveMError,
    NonpositiveWeightError,
    NotInSimplexError,
    PointFunction,
    SimplexPoint,
    TriangleViolationError,
    UnknownPointError,
    ball,
    constant_function,
    from_coordinates,
    from_distance_matrix,
    from_graph,
    grid_space,
    interval_space,
    l1_distance,
    macro_version,
    micro_version,
)


def _assert_metric(D: np.ndarray):
    n = D.shape[0]
    assert np.allclose(D, D.T)
    assert np.allclose(np.diag(D), 0.0)
    for i, j, k in itertools.product(range(n), repeat=3):
        assert D[i, k] <= D[i, j] + D[j, k] + 1e-9


@st.composite
def graph_metrics(draw):
    """Shortest-path metrics of random connected weighted graphs on 2 to 10 nodes."""
    n = draw(st.integers(min_value=2, max_value=10))
    weights = st.floats(min_value=0.1, max_value=10.0, allow_nan=False)
    edges = [(i, i + 1, draw(weights)) for i in range(n - 1)]
    for u, v in draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=8)):
        if u != v:
            edges.append((u, v, draw(weights)))
    return from_graph(list(range(n)), edges)


class TestFromDistanceMatrix:
    """Test cases for building spaces from distance matrices."""

    def test_two_point_space(self):
        """The smallest nontrivial metric space."""
        space = from_distance_matrix([[0, 1], [1, 0]])
        assert len(space) == 2
        assert space.dist(0, 1) == 1.0
        assert space.dist(1, 0) == 1.0

    def test_custom_point_ids_and_basepoint(self):
        """Point ids and basepoint are carried through."""
        space = from_distance_matrix([[0, 2], [2, 0]], points=["a", "b"], basepoint="b")
        assert space.dist("a", "b") == 2.0
        assert space.basepoint == "b"
        assert "a" in space

    def test_asymmetric_matrix(self):
        """An asymmetric matrix is rejected with the offending pair."""
        with pytest.raises(AsymmetricMatrixError) as excinfo:
            from_distance_matrix([[0, 1], [2, 0]])
        assert excinfo.value.witness == (0, 1)

    def test_negative_distance(self):
        """Negative entries are rejected before symmetry is checked."""
        with pytest.raises(NegativeDistanceError, match="Negative distance"):
            from_distance_matrix([[0, -1], [-1, 0]])

    def test_triangle_violation_witness(self):
        """dist(0, 2) = 3 > 1 + 1 is reported as the triple (0, 1, 2)."""
        with pytest.raises(TriangleViolationError, match="exceeds.*via 1") as excinfo:
            from_distance_matrix([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
        assert excinfo.value.witness == (0, 1, 2)

    def test_degenerate_distances(self):
        """Nonzero diagonals and coincident distinct points are rejected."""
        with pytest.raises(DegenerateDistanceError, match="is not zero"):
            from_distance_matrix([[1, 1], [1, 0]])
        with pytest.raises(DegenerateDistanceError, match="at distance 0"):
            from_distance_matrix([[0, 0], [0, 0]])

    def test_malformed_matrices(self):
        """Non-square, empty and non-finite input raise MetricError."""
        with pytest.raises(MetricError, match="must be square"):
            from_distance_matrix([[0, 1, 2], [1, 0, 1]])
        with pytest.raises(MetricError, match="at least one point"):
            from_distance_matrix(np.zeros((0, 0)))
        with pytest.raises(MetricError, match="not finite"):
            from_distance_matrix([[0, float("inf")], [float("inf"), 0]])

    def test_duplicate_ids_and_unknown_basepoint(self):
        """Point ids must be unique and the basepoint must be a point."""
        with pytest.raises(MetricError, match="Duplicate point id"):
            from_distance_matrix([[0, 1], [1, 0]], points=["a", "a"])
        with pytest.raises(UnknownPointError):
            from_distance_matrix([[0, 1], [1, 0]], basepoint=7)


class TestFromGraph:
    """Test cases for shortest-path metrics."""

    def test_path_metric(self):
        """Unit path 0-1-2 gives dist(0, 2) = 2."""
        space = from_graph([0, 1, 2], [(0, 1, 1), (1, 2, 1)])
        assert space.dist(0, 2) == 2.0

    def test_shortest_path_beats_heavy_edge(self):
        """A detour of length 2 beats a direct edge of weight 3."""
        space = from_graph(["a", "b", "c"], [("a", "b", 1), ("b", "c", 1), ("a", "c", 3)])
        assert space.dist("a", "c") == 2.0

    def test_unweighted_edges_default_to_one(self):
        """A bare (u, v) pair has weight 1."""
        space = from_graph([0, 1], [(0, 1)])
        assert space.dist(0, 1) == 1.0

    def test_disconnected_graph(self):
        """Two components are rejected."""
        with pytest.raises(DisconnectedGraphError, match="2 connected components"):
            from_graph([0, 1, 2, 3], [(0, 1, 1), (2, 3, 1)])

    def test_bad_edges(self):
        """Nonpositive weights and unknown endpoints are rejected."""
        with pytest.raises(NonpositiveWeightError):
            from_graph([0, 1], [(0, 1, 0)])
        with pytest.raises(UnknownPointError):
            from_graph([0, 1], [(0, 5, 1)])

    @settings(max_examples=30, deadline=None)
    @given(graph_metrics())
    def test_graph_metric_satisfies_triangle_inequality(self, space):
        """Shortest-path distances pass the exhaustive triple check."""
        _assert_metric(space.distance_matrix())


class TestCoordinateSpaces:
    """Test cases for coordinate, interval and grid spaces."""

    def test_interval_space(self):
        """Integer window with point ids equal to the integers."""
        space = interval_space(0, 9)
        assert len(space) == 10
        assert space.dist(2, 7) == 5.0
        assert space.diameter == 9.0

    def test_empty_interval(self):
        """An empty window is rejected."""
        with pytest.raises(MetricError, match="Empty integer window"):
            interval_space(5, 4)

    def test_grid_space_norms(self):
        """Sup and l1 norms on Z^2."""
        assert grid_space((0, 2)).dist((0, 0), (2, 1)) == 2.0
        assert grid_space((0, 2), norm="l1").dist((0, 0), (2, 1)) == 3.0
        assert len(grid_space((0, 3), (0, 1))) == 8

    def test_shared_coordinates(self):
        """Distinct ids at the same coordinates are rejected."""
        with pytest.raises(DegenerateDistanceError, match="share coordinates"):
            from_coordinates([[0.0], [1.0], [0.0]])

    def test_unknown_norm(self):
        """Only the supported norms are accepted."""
        with pytest.raises(MetricError, match="Unknown norm"):
            from_coordinates([[0.0], [1.0]], norm="l7")

    def test_subspace_and_basepoint(self):
        """Subspaces keep distances; with_basepoint changes only the basepoint."""
        space = interval_space(0, 9)
        sub = space.subspace([2, 5, 9])
        assert len(sub) == 3
        assert sub.dist(2, 9) == 7.0
        assert space.with_basepoint(4).basepoint == 4
        with pytest.raises(UnknownPointError):
            space.index_of(42)

    @pytest.mark.parametrize(
        "norm, reference",
        [
            ("sup", lambda diff: np.abs(diff).max(axis=-1)),
            ("l1", lambda diff: np.abs(diff).sum(axis=-1)),
            ("euclidean", lambda diff: np.sqrt((diff * diff).sum(axis=-1))),
        ],
    )
    def test_blocks_computed_on_demand(self, norm, reference):
        """Spaces too large for a dense matrix compute distance blocks under their norm."""
        coords = np.random.default_rng(7).uniform(-5, 5, size=(40, 3))
        expected = reference(coords[:, None, :] - coords[None, :, :])
        with patch("config.DENSE_MATRIX_LIMIT", 0):
            space = from_coordinates(coords, norm=norm)
            assert np.allclose(space.distance_rows(0, 40), expected)
            rows, cols = np.array([3, 0, 17]), np.array([39, 5])
            assert np.allclose(space.distance_block(rows, cols), expected[np.ix_(rows, cols)])
            assert space.dist(3, 39) == pytest.approx(expected[3, 39])

    def test_separation_and_discreteness(self):
        """Separation is the smallest nonzero distance."""
        space = from_coordinates([[0.0], [3.0], [10.0]])
        assert space.separation == 3.0
        assert space.is_discrete(3.0)
        assert not space.is_discrete(3.5)


class TestMetricTransforms:
    """Test cases for micro and macro versions."""

    def test_micro_truncates(self):
        """Distances above M are cut to M, smaller ones are unchanged."""
        space = from_coordinates([[0.0], [2.0], [5.0]])
        micro = micro_version(space, 3)
        assert micro.dist(0, 2) == 3.0
        assert micro.dist(0, 1) == 2.0

    def test_macro_discretizes(self):
        """Distances below M are raised to M, larger ones are unchanged."""
        space = from_coordinates([[0.0], [0.5], [7.5]])
        macro = macro_version(space, 1)
        assert macro.dist(0, 1) == 1.0
        assert macro.dist(1, 2) == 7.0

    def test_nonpositive_M(self):
        """M must be positive for both transforms."""
        space = interval_space(0, 3)
        with pytest.raises(NonpositiveMError, match="M must be positive"):
            micro_version(space, 0)
        with pytest.raises(NonpositiveMError):
            macro_version(space, -1)

    def test_literal_zeroing_counterexample_is_a_metric_after_discretizing(self):
        """d = (0.7, 0.7, 1.2) with M = 1 gives a metric under max(d, M)."""
        space = from_coordinates([[0.0], [0.7], [1.2]])
        macro = macro_version(space, 1)
        _assert_metric(macro.distance_matrix())
        assert macro.dist(0, 2) == 1.2

    @settings(max_examples=100, deadline=None)
    @given(graph_metrics(), st.floats(min_value=0.05, max_value=12.0))
    def test_transform_invariants(self, space, M):
        """Both versions are metrics; macro is M-discrete and within M of the original."""
        D = space.distance_matrix()
        micro = micro_version(space, M)
        macro = macro_version(space, M)
        _assert_metric(micro.distance_matrix())
        _assert_metric(macro.distance_matrix())

        assert np.allclose(micro_version(micro, M).distance_matrix(), micro.distance_matrix())

        E = macro.distance_matrix()
        off = ~np.eye(len(space), dtype=bool)
        assert (E[off] >= M - 1e-9).all()
        assert (D <= E + 1e-9).all()
        assert (E <= D + M + 1e-9).all()

    @settings(max_examples=20, deadline=None)
    @given(graph_metrics(), st.floats(min_value=0.1, max_value=3.0))
    def test_macro_of_micro_keeps_both_properties(self, space, M):
        """Discretizing at M below a truncation at 2M stays bounded and discrete."""
        E = macro_version(micro_version(space, 2 * M), M).distance_matrix()
        off = ~np.eye(len(space), dtype=bool)
        assert (E[off] >= M - 1e-9).all()
        assert (E <= 2 * M + 1e-9).all()


class TestBall:
    """Test cases for open balls."""

    def test_open_ball_excludes_radius(self):
        """B(5, 2) in [0, 9] is {4, 5, 6}."""
        assert ball(interval_space(0, 9), 5, 2) == frozenset({4, 5, 6})

    def test_radius_zero_is_empty(self):
        """The open ball of radius 0 is empty."""
        assert ball(interval_space(0, 9), 5, 0) == frozenset()

    def test_large_radius_is_everything(self):
        """A radius beyond the diameter gives every point."""
        space = interval_space(0, 9)
        assert ball(space, 0, 11) == frozenset(space.points)

    def test_unknown_center(self):
        """The center must be a point of the space."""
        with pytest.raises(UnknownPointError):
            ball(interval_space(0, 9), 20, 1)


class TestSimplexPoints:
    """Test cases for simplex points and the l1 distance."""

    def test_l1_distance_examples(self):
        """Opposite vertices, identity and a mixed example."""
        p = SimplexPoint((1.0, 0.0))
        q = SimplexPoint((0.0, 1.0))
        assert l1_distance(p, q) == 2.0
        assert l1_distance(p, p) == 0.0
        assert l1_distance(SimplexPoint((0.5, 0.5, 0.0)), SimplexPoint((0.0, 0.5, 0.5))) == 1.0

    def test_dimension_mismatch(self):
        """Points of different lengths cannot be compared."""
        with pytest.raises(DimensionMismatchError):
            l1_distance(SimplexPoint((1.0,)), SimplexPoint((0.5, 0.5)))

    def test_invalid_coordinates(self):
        """Negative coordinates or sums other than 1 are rejected."""
        with pytest.raises(NotInSimplexError, match="Negative"):
            SimplexPoint((1.5, -0.5))
        with pytest.raises(NotInSimplexError, match="do not sum to 1"):
            SimplexPoint((0.5, 0.6))

    def test_boundary_and_support(self):
        """Boundary membership follows the smallest coordinate."""
        vertex = SimplexPoint.vertex(1, 3)
        assert vertex.on_boundary
        assert vertex.support == frozenset({1})
        assert not SimplexPoint((0.2, 0.3, 0.5)).on_boundary

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=3, max_size=3), min_size=3, max_size=3))
    def test_l1_triangle_inequality(self, rows):
        """l1_distance is a metric on sampled simplex points."""
        points = []
        for row in rows:
            total = sum(row)
            if total <= 0:
                row, total = [1.0, 0.0, 0.0], 1.0
            points.append(SimplexPoint(tuple(v / total for v in row)))
        p, q, r = points
        assert l1_distance(p, r) <= l1_distance(p, q) + l1_distance(q, r) + 1e-9
        assert l1_distance(p, q) == pytest.approx(l1_distance(q, p))


class TestPointFunction:
    """Test cases for functions on finite spaces."""

    def test_from_mapping_scalar(self):
        """Scalar functions have width 1."""
        space = interval_space(0, 2)
        f = PointFunction.from_mapping(space, {0: 0.0, 1: 0.5, 2: 1.0})
        assert f.width == 1
        assert f.scalar(1) == 0.5
        assert f.as_mapping() == {0: 0.0, 1: 0.5, 2: 1.0}

    def test_function_must_be_total(self):
        """Missing points and unknown points are rejected."""
        space = interval_space(0, 2)
        with pytest.raises(ValueError, match="not total"):
            PointFunction.from_mapping(space, {0: 0.0})
        with pytest.raises(UnknownPointError):
            PointFunction.from_mapping(space, {0: 0, 1: 0, 2: 0, 3: 0})

    def test_simplex_valued(self):
        """SimplexPoint values make a simplex-valued function."""
        space = interval_space(0, 1)
        f = PointFunction.from_mapping(
            space, {0: SimplexPoint.vertex(0, 2), 1: SimplexPoint((0.5, 0.5))}
        )
        assert f.simplex_valued
        assert f.simplex_point(1) == SimplexPoint((0.5, 0.5))
        assert list(f.boundary_mask()) == [True, False]

    def test_simplex_validation(self):
        """Rows off the simplex are rejected when simplex_valued is set."""
        space = interval_space(0, 1)
        with pytest.raises(NotInSimplexError):
            PointFunction(space, np.array([[1.0, 0.0], [0.7, 0.7]]), simplex_valued=True)

    def test_restrict_and_image_distances(self):
        """Restriction keeps values; image distances are l1."""
        space = interval_space(0, 3)
        f = PointFunction.from_callable(space, lambda x: (x, 2 * x))
        sub = space.subspace([1, 3])
        g = f.restrict(sub)
        assert list(g(3)) == [3.0, 6.0]
        block = f.image_distance_block(np.array([0]), np.array([1, 3]))
        assert block.tolist() == [[3.0, 9.0]]

    def test_constant_function(self):
        """A constant function takes one value everywhere."""
        f = constant_function(interval_space(0, 4), 0.25)
        assert set(f.as_mapping().values()) == {0.25}


if __name__ == "__main__":
    pytest.main([__file__])
