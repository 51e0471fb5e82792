"""
Finite metric spaces, metric transforms, balls and simplex geometry.

A FiniteMetricSpace is either backed by an explicit distance matrix (verified
exhaustively on construction) or by integer/real coordinates under a norm
(sup, l1 or euclidean), in which case distances are computed on demand in row
blocks. Both kinds expose the same block interface, which is what every other
module uses.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import (
    Any,
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import networkx as nx
import numpy as np
from scipy.spatial.distance import cdist

import config
import pair_batches

logger = logging.getLogger(__name__)

NORMS = ("sup", "l1", "euclidean")
_CDIST_METRICS = {"sup": "chebyshev", "l1": "cityblock", "euclidean": "euclidean"}


class CoarseGeometryError(ValueError):
    """Base error of the toolkit; carries an optional witness."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class VerificationError(CoarseGeometryError):
    """A bound claimed by a construction failed its runtime check."""

    pass


class MetricError(CoarseGeometryError):
    """Raised when input data does not define a metric."""

    pass


class AsymmetricMatrixError(MetricError):
    """Raised when dist(x, y) != dist(y, x)."""

    pass


class NegativeDistanceError(MetricError):
    """Raised when a distance is negative."""

    pass


class DegenerateDistanceError(MetricError):
    """Raised when dist(x, x) != 0 or two distinct points are at distance 0."""

    pass


class TriangleViolationError(MetricError):
    """Raised when dist(x, z) > dist(x, y) + dist(y, z)."""

    pass


class DisconnectedGraphError(MetricError):
    """Raised when a graph metric is requested for a disconnected graph."""

    pass


class NonpositiveWeightError(MetricError):
    """Raised when a graph edge has a nonpositive weight."""

    pass


class NonpositiveMError(CoarseGeometryError):
    """Raised when a micro/macro scale M is not positive."""

    pass


class UnknownPointError(CoarseGeometryError):
    """Raised when a point id is not part of the space."""

    pass


class DimensionMismatchError(CoarseGeometryError):
    """Raised when barycentric vectors have different lengths."""

    pass


class NotInSimplexError(CoarseGeometryError):
    """Raised when a vector is not a point of the standard simplex."""

    pass


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """
    Indexed finite point set with a verified metric and optional basepoint.

    Use the module constructors (from_distance_matrix, from_graph,
    from_coordinates, interval_space, grid_space) rather than calling this
    directly; they are the ones that verify the metric axioms.
    """

    points: Tuple[Hashable, ...]
    matrix: Optional[np.ndarray] = None
    coordinates: Optional[np.ndarray] = None
    norm: str = "sup"
    basepoint: Optional[Hashable] = None

    def __post_init__(self):
        index = {}
        for i, point in enumerate(self.points):
            if point in index:
                raise MetricError(f"Duplicate point id: {point!r}", witness=point)
            index[point] = i
        object.__setattr__(self, "_index", index)
        if self.basepoint is not None and self.basepoint not in index:
            raise UnknownPointError(
                f"Basepoint {self.basepoint!r} is not a point of the space",
                witness=self.basepoint,
            )

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, point: Hashable) -> bool:
        return point in self._index

    def __repr__(self) -> str:
        kind = "matrix" if self.matrix is not None else f"{self.norm} coordinates"
        return f"FiniteMetricSpace(n={len(self)}, {kind})"

    # -- indexing -----------------------------------------------------------

    def index_of(self, point: Hashable) -> int:
        """Return the row index of a point id."""
        try:
            return self._index[point]
        except (KeyError, TypeError):
            raise UnknownPointError(f"Unknown point: {point!r}", witness=point)

    def indices_of(self, points: Iterable[Hashable]) -> np.ndarray:
        """Return sorted row indices of a collection of point ids."""
        return np.array(sorted(self.index_of(p) for p in points), dtype=np.int64)

    def mask_of(self, points: Iterable[Hashable]) -> np.ndarray:
        """Boolean membership mask over the points of the space."""
        mask = np.zeros(len(self), dtype=bool)
        for p in points:
            mask[self.index_of(p)] = True
        return mask

    def points_at(self, indices: Iterable[int]) -> FrozenSet[Hashable]:
        return frozenset(self.points[int(i)] for i in indices)

    # -- distances ----------------------------------------------------------

    def dist(self, x: Hashable, y: Hashable) -> float:
        i, j = self.index_of(x), self.index_of(y)
        return float(self.distance_block(np.array([i]), np.array([j]))[0, 0])

    @cached_property
    def _dense(self) -> Optional[np.ndarray]:
        if self.matrix is not None:
            return self.matrix
        if len(self) <= config.DENSE_MATRIX_LIMIT:
            idx = np.arange(len(self))
            return self._coordinate_block(idx, idx)
        return None

    def _coordinate_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return cdist(
            self.coordinates[rows], self.coordinates[cols], metric=_CDIST_METRICS[self.norm]
        )

    def distance_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Distances between the points at ``rows`` and the points at ``cols``."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        dense = self._dense
        if dense is not None:
            return dense[np.ix_(rows, cols)]
        return self._coordinate_block(rows, cols)

    def distance_rows(self, start: int, stop: int) -> np.ndarray:
        """Rows start..stop-1 of the distance matrix."""
        dense = self._dense
        if dense is not None:
            return dense[start:stop]
        return self._coordinate_block(np.arange(start, stop), np.arange(len(self)))

    def distances_from(self, point: Hashable) -> np.ndarray:
        i = self.index_of(point)
        return self.distance_rows(i, i + 1)[0]

    def distance_matrix(self) -> np.ndarray:
        """Full distance matrix (materialized for coordinate spaces)."""
        dense = self._dense
        if dense is not None:
            return dense
        idx = np.arange(len(self))
        return self._coordinate_block(idx, idx)

    @cached_property
    def diameter(self) -> float:
        if len(self) < 2:
            return 0.0
        parts = pair_batches.run_batched(
            len(self),
            lambda a, b: float(self.distance_rows(a, b).max()),
            desc="Diameter",
        )
        return max(parts)

    @cached_property
    def separation(self) -> float:
        """Least distance between distinct points (inf for a one-point space)."""
        if len(self) < 2:
            return float("inf")

        def worker(a: int, b: int) -> float:
            block = self.distance_rows(a, b).copy()
            block[np.arange(b - a), np.arange(a, b)] = np.inf
            return float(block.min())

        return min(pair_batches.run_batched(len(self), worker, desc="Separation"))

    def is_discrete(self, M: float = 1.0) -> bool:
        """True when every nonzero distance is at least M."""
        return self.separation >= M - config.TOLERANCE

    def pairs_within(
        self, radius: float, strict: bool = False
    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Index pairs i < j with dist <= radius (or < radius when strict).

        Pairs come back in lexicographic order of (i, j).

        Returns:
            Tuple (I, J, D) of equal-length arrays
        """
        n = len(self)
        tol = config.TOLERANCE

        def worker(a: int, b: int):
            block = self.distance_rows(a, b)
            if strict:
                mask = block < radius - tol
            else:
                mask = block <= radius + tol
            mask &= np.arange(n)[None, :] > np.arange(a, b)[:, None]
            ii, jj = np.nonzero(mask)
            return ii + a, jj, block[ii, jj]

        parts = pair_batches.run_batched(n, worker, desc="Pairs")
        if not parts:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty, np.zeros(0)
        I = np.concatenate([p[0] for p in parts]).astype(np.int64)
        J = np.concatenate([p[1] for p in parts]).astype(np.int64)
        D = np.concatenate([p[2] for p in parts]).astype(float)
        return I, J, D

    # -- derived spaces -----------------------------------------------------

    def subspace(self, points: Iterable[Hashable]) -> "FiniteMetricSpace":
        """Restrict the (already verified) metric to a nonempty subset."""
        idx = np.unique(np.array([self.index_of(p) for p in points], dtype=np.int64))
        if idx.size == 0:
            raise MetricError("A subspace needs at least one point")
        sub_points = tuple(self.points[i] for i in idx)
        basepoint = self.basepoint if self.basepoint in set(sub_points) else None
        if self.matrix is not None:
            return FiniteMetricSpace(
                points=sub_points,
                matrix=_readonly(self.matrix[np.ix_(idx, idx)]),
                basepoint=basepoint,
            )
        return FiniteMetricSpace(
            points=sub_points,
            coordinates=_readonly(self.coordinates[idx]),
            norm=self.norm,
            basepoint=basepoint,
        )

    def with_basepoint(self, basepoint: Hashable) -> "FiniteMetricSpace":
        return FiniteMetricSpace(
            points=self.points,
            matrix=self.matrix,
            coordinates=self.coordinates,
            norm=self.norm,
            basepoint=basepoint,
        )

    def same_as(self, other: "FiniteMetricSpace") -> bool:
        """True when both spaces have the same points and the same metric."""
        if self is other:
            return True
        if not isinstance(other, FiniteMetricSpace) or self.points != other.points:
            return False
        if self.matrix is not None and other.matrix is not None:
            return bool(np.array_equal(self.matrix, other.matrix))
        if self.coordinates is not None and other.coordinates is not None:
            return self.norm == other.norm and bool(
                np.array_equal(self.coordinates, other.coordinates)
            )
        return bool(
            np.allclose(
                self.distance_matrix(), other.distance_matrix(), atol=config.TOLERANCE
            )
        )


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


def _first_index(mask: np.ndarray) -> Tuple[int, int]:
    i, j = np.argwhere(mask)[0]
    return int(i), int(j)


def from_distance_matrix(
    matrix: Union[Sequence[Sequence[float]], np.ndarray],
    points: Optional[Sequence[Hashable]] = None,
    basepoint: Optional[Hashable] = None,
) -> FiniteMetricSpace:
    """
    Build a space from a square distance matrix, verifying every metric axiom.

    The triangle inequality is checked over all triples, batched over the
    middle point.

    Args:
        matrix: Square matrix of distances
        points: Point ids (defaults to 0..n-1)
        basepoint: Optional basepoint id

    Returns:
        Verified FiniteMetricSpace

    Raises:
        MetricError: If the matrix is not square, empty or not finite
        NegativeDistanceError: If some entry is negative
        AsymmetricMatrixError: If the matrix is not symmetric
        DegenerateDistanceError: If the diagonal is nonzero or distinct points coincide
        TriangleViolationError: If some triple violates the triangle inequality;
            the witness (x, y, z) has dist(x, z) > dist(x, y) + dist(y, z)

    Examples:
        >>> from_distance_matrix([[0, 1], [1, 0]]).dist(0, 1)
        1.0
    """
    try:
        D = np.array(matrix, dtype=float)
    except (TypeError, ValueError) as e:
        raise MetricError(f"Distance matrix is not numeric: {e}")
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise MetricError(f"Distance matrix must be square, got shape {D.shape}")
    n = D.shape[0]
    if n == 0:
        raise MetricError("A metric space needs at least one point")
    if points is None:
        points = list(range(n))
    points = tuple(points)
    if len(points) != n:
        raise MetricError(f"Got {len(points)} point ids for a {n}x{n} matrix")
    if not np.all(np.isfinite(D)):
        i, j = _first_index(~np.isfinite(D))
        raise MetricError(
            f"Distance between {points[i]!r} and {points[j]!r} is not finite",
            witness=(points[i], points[j]),
        )

    tol = config.TOLERANCE
    if (D < -tol).any():
        i, j = _first_index(D < -tol)
        raise NegativeDistanceError(
            f"Negative distance {D[i, j]} between {points[i]!r} and {points[j]!r}",
            witness=(points[i], points[j]),
        )
    asym = np.abs(D - D.T) > tol
    if asym.any():
        i, j = _first_index(asym)
        raise AsymmetricMatrixError(
            f"dist({points[i]!r}, {points[j]!r}) = {D[i, j]} but "
            f"dist({points[j]!r}, {points[i]!r}) = {D[j, i]}",
            witness=(points[i], points[j]),
        )
    diagonal = np.abs(np.diag(D)) > tol
    if diagonal.any():
        i = int(np.argmax(diagonal))
        raise DegenerateDistanceError(
            f"dist({points[i]!r}, {points[i]!r}) = {D[i, i]} is not zero",
            witness=(points[i], points[i]),
        )
    coincide = (D <= tol) & ~np.eye(n, dtype=bool)
    if coincide.any():
        i, j = _first_index(coincide)
        raise DegenerateDistanceError(
            f"Distinct points {points[i]!r} and {points[j]!r} are at distance 0",
            witness=(points[i], points[j]),
        )

    D = (D + D.T) / 2.0
    np.fill_diagonal(D, 0.0)

    def worker(a: int, b: int) -> Optional[Tuple[int, int, int]]:
        for k in range(a, b):
            via = D[:, k, None] + D[None, k, :]
            bad = D > via + tol
            if bad.any():
                i, j = _first_index(bad)
                return i, k, j
        return None

    for hit in pair_batches.run_batched(n, worker, desc="Triangle check"):
        if hit is not None:
            i, k, j = hit
            raise TriangleViolationError(
                f"dist({points[i]!r}, {points[j]!r}) = {D[i, j]} exceeds "
                f"{D[i, k]} + {D[k, j]} via {points[k]!r}",
                witness=(points[i], points[k], points[j]),
            )

    return FiniteMetricSpace(points=points, matrix=_readonly(D), basepoint=basepoint)


def from_graph(
    vertices: Sequence[Hashable],
    weighted_edges: Iterable[Sequence[Any]],
    basepoint: Optional[Hashable] = None,
) -> FiniteMetricSpace:
    """
    Shortest-path metric of a connected graph with positive edge weights.

    Edges are (u, v, w) triples; a bare (u, v) pair has weight 1. Parallel
    edges keep the smallest weight.

    Raises:
        UnknownPointError: If an edge names a vertex not in ``vertices``
        NonpositiveWeightError: If a weight is not positive
        DisconnectedGraphError: If the graph is not connected
    """
    graph = nx.Graph()
    graph.add_nodes_from(vertices)
    known = set(vertices)
    for edge in weighted_edges:
        if len(edge) == 2:
            u, v, w = edge[0], edge[1], 1.0
        else:
            u, v, w = edge[0], edge[1], float(edge[2])
        for endpoint in (u, v):
            if endpoint not in known:
                raise UnknownPointError(
                    f"Edge ({u!r}, {v!r}) uses unknown vertex {endpoint!r}",
                    witness=endpoint,
                )
        if not w > 0:
            raise NonpositiveWeightError(
                f"Edge ({u!r}, {v!r}) has nonpositive weight {w}", witness=(u, v)
            )
        if u == v:
            continue
        if graph.has_edge(u, v):
            w = min(w, graph[u][v]["weight"])
        graph.add_edge(u, v, weight=w)

    if graph.number_of_nodes() == 0:
        raise MetricError("A metric space needs at least one point")
    if not nx.is_connected(graph):
        components = [sorted(c, key=repr) for c in nx.connected_components(graph)]
        raise DisconnectedGraphError(
            f"Graph has {len(components)} connected components",
            witness=(components[0][0], components[1][0]),
        )

    order = list(vertices)
    position = {v: i for i, v in enumerate(order)}
    D = np.zeros((len(order), len(order)))
    for source, lengths in nx.all_pairs_dijkstra_path_length(graph, weight="weight"):
        row = position[source]
        for target, length in lengths.items():
            D[row, position[target]] = length
    logger.debug(f"Graph metric on {len(order)} vertices computed")
    return from_distance_matrix(D, points=order, basepoint=basepoint)


def from_coordinates(
    coordinates: Union[Sequence[Sequence[float]], np.ndarray],
    points: Optional[Sequence[Hashable]] = None,
    norm: str = "sup",
    basepoint: Optional[Hashable] = None,
) -> FiniteMetricSpace:
    """
    Space of distinct points in R^d under a norm (sup, l1 or euclidean).

    A norm-induced distance satisfies the metric axioms once the points are
    distinct, so only distinctness and finiteness are verified here.
    """
    if norm not in NORMS:
        raise MetricError(f"Unknown norm {norm!r}; expected one of {NORMS}")
    coords = np.array(coordinates, dtype=float)
    if coords.ndim == 1:
        coords = coords[:, None]
    if coords.ndim != 2 or coords.shape[0] == 0 or coords.shape[1] == 0:
        raise MetricError(f"Coordinates must be a nonempty n x d array, got {coords.shape}")
    if not np.all(np.isfinite(coords)):
        raise MetricError("Coordinates must be finite")
    n = coords.shape[0]
    if points is None:
        points = list(range(n))
    points = tuple(points)
    if len(points) != n:
        raise MetricError(f"Got {len(points)} point ids for {n} coordinate rows")

    _, first, counts = np.unique(coords, axis=0, return_index=True, return_counts=True)
    if (counts > 1).any():
        duplicated = coords[first[int(np.argmax(counts > 1))]]
        same = np.nonzero(np.all(coords == duplicated, axis=1))[0]
        raise DegenerateDistanceError(
            f"Points {points[same[0]]!r} and {points[same[1]]!r} share coordinates",
            witness=(points[same[0]], points[same[1]]),
        )

    return FiniteMetricSpace(
        points=points, coordinates=_readonly(coords), norm=norm, basepoint=basepoint
    )


def interval_space(
    lo: int, hi: int, basepoint: Optional[Hashable] = None
) -> FiniteMetricSpace:
    """Integer window [lo, hi] with the absolute-value metric; point ids are the integers."""
    if hi < lo:
        raise MetricError(f"Empty integer window [{lo}, {hi}]")
    values = list(range(int(lo), int(hi) + 1))
    return from_coordinates(
        np.array(values, dtype=float)[:, None], points=values, basepoint=basepoint
    )


def grid_space(
    x_window: Tuple[int, int],
    y_window: Optional[Tuple[int, int]] = None,
    norm: str = "sup",
    basepoint: Optional[Hashable] = None,
) -> FiniteMetricSpace:
    """
    Integer grid window in Z^2; point ids are (x, y) tuples in row-major order.

    Examples:
        >>> space = grid_space((0, 2))
        >>> len(space), space.dist((0, 0), (2, 1))
        (9, 2.0)
    """
    if y_window is None:
        y_window = x_window
    (x_lo, x_hi), (y_lo, y_hi) = x_window, y_window
    if x_hi < x_lo or y_hi < y_lo:
        raise MetricError(f"Empty grid window {x_window} x {y_window}")
    points = [
        (x, y) for x in range(int(x_lo), int(x_hi) + 1) for y in range(int(y_lo), int(y_hi) + 1)
    ]
    return from_coordinates(
        np.array(points, dtype=float), points=points, norm=norm, basepoint=basepoint
    )


def micro_version(space: FiniteMetricSpace, M: float) -> FiniteMetricSpace:
    """
    Truncate the metric at M: new dist = min(dist, M).

    Raises:
        NonpositiveMError: If M <= 0
    """
    if not M > 0:
        raise NonpositiveMError(f"M must be positive, got {M}")
    D = np.minimum(space.distance_matrix(), M)
    np.fill_diagonal(D, 0.0)
    return from_distance_matrix(D, points=space.points, basepoint=space.basepoint)


def macro_version(space: FiniteMetricSpace, M: float) -> FiniteMetricSpace:
    """
    Discretize the metric below M: new dist = max(dist, M) for distinct points.

    The result is M-discrete and d <= d^M <= d + M, so the identity map is a
    coarse equivalence.

    Raises:
        NonpositiveMError: If M <= 0
    """
    if not M > 0:
        raise NonpositiveMError(f"M must be positive, got {M}")
    D = np.maximum(space.distance_matrix(), M)
    np.fill_diagonal(D, 0.0)
    return from_distance_matrix(D, points=space.points, basepoint=space.basepoint)


def ball(space: FiniteMetricSpace, center: Hashable, r: float) -> FrozenSet[Hashable]:
    """
    Open ball B(center, r) = {y : dist(center, y) < r}.

    Examples:
        >>> sorted(ball(interval_space(0, 9), 5, 2))
        [4, 5, 6]
    """
    if r < 0:
        raise ValueError(f"Radius must be nonnegative, got {r}")
    row = space.distances_from(center)
    return space.points_at(np.nonzero(row < r - config.TOLERANCE)[0])


@dataclass(frozen=True)
class SimplexPoint:
    """Barycentric coordinates of a point of the standard simplex (l1 metric)."""

    coords: Tuple[float, ...]

    def __post_init__(self):
        coords = tuple(float(c) for c in self.coords)
        object.__setattr__(self, "coords", coords)
        if not coords:
            raise NotInSimplexError("A simplex point needs at least one coordinate")
        tol = config.TOLERANCE
        if min(coords) < -tol:
            raise NotInSimplexError(f"Negative barycentric coordinate in {coords}")
        if abs(sum(coords) - 1.0) > tol:
            raise NotInSimplexError(f"Coordinates {coords} do not sum to 1")

    @classmethod
    def vertex(cls, i: int, size: int) -> "SimplexPoint":
        coords = [0.0] * size
        coords[i] = 1.0
        return cls(tuple(coords))

    def __len__(self) -> int:
        return len(self.coords)

    @property
    def on_boundary(self) -> bool:
        return min(self.coords) <= config.TOLERANCE

    @property
    def support(self) -> FrozenSet[int]:
        return frozenset(i for i, c in enumerate(self.coords) if c > config.TOLERANCE)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


def l1_distance(p: SimplexPoint, q: SimplexPoint) -> float:
    """
    Sum of coordinatewise absolute differences.

    Raises:
        DimensionMismatchError: If p and q have different lengths
    """
    if len(p) != len(q):
        raise DimensionMismatchError(
            f"Cannot compare simplex points of lengths {len(p)} and {len(q)}"
        )
    return float(sum(abs(a - b) for a, b in zip(p.coords, q.coords)))


@dataclass(frozen=True, eq=False)
class PointFunction:
    """
    Total map from the points of a space to real vectors (l1 target metric).

    ``values`` has one row per point, in the order of ``space.points``.
    Scalar functions have a single column. When ``simplex_valued`` is set
    every row is validated as a SimplexPoint.
    """

    space: FiniteMetricSpace
    values: np.ndarray
    simplex_valued: bool = False

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != len(self.space):
            raise ValueError(
                f"Expected {len(self.space)} rows of values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Function values must be finite")
        if self.simplex_valued:
            tol = config.TOLERANCE
            bad = (values.min(axis=1) < -tol) | (np.abs(values.sum(axis=1) - 1.0) > tol)
            if bad.any():
                point = self.space.points[int(np.argmax(bad))]
                raise NotInSimplexError(
                    f"Value at {point!r} is not a simplex point", witness=point
                )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_mapping(
        cls,
        space: FiniteMetricSpace,
        mapping: Mapping[Hashable, Any],
        simplex_valued: Optional[bool] = None,
    ) -> "PointFunction":
        """Build from {point: scalar | sequence | SimplexPoint}, which must be total."""
        missing = [p for p in space.points if p not in mapping]
        if missing:
            raise ValueError(
                f"Function is not total: {len(missing)} points missing, e.g. {missing[0]!r}"
            )
        extra = [p for p in mapping if p not in space]
        if extra:
            raise UnknownPointError(f"Unknown point: {extra[0]!r}", witness=extra[0])
        rows = []
        for p in space.points:
            value = mapping[p]
            if isinstance(value, SimplexPoint):
                value = value.coords
            rows.append(np.atleast_1d(np.array(value, dtype=float)))
        widths = {row.shape[0] for row in rows}
        if len(widths) != 1:
            raise DimensionMismatchError(f"Function values have mixed widths {widths}")
        if simplex_valued is None:
            simplex_valued = all(isinstance(v, SimplexPoint) for v in mapping.values())
        return cls(space, np.vstack(rows), simplex_valued)

    @classmethod
    def from_callable(
        cls,
        space: FiniteMetricSpace,
        fn: Callable[[Hashable], Any],
        simplex_valued: bool = False,
    ) -> "PointFunction":
        return cls.from_mapping(space, {p: fn(p) for p in space.points}, simplex_valued)

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    def __call__(self, point: Hashable) -> np.ndarray:
        return self.values[self.space.index_of(point)].copy()

    def scalar(self, point: Hashable) -> float:
        return float(self.values[self.space.index_of(point), 0])

    def simplex_point(self, point: Hashable) -> SimplexPoint:
        return SimplexPoint(tuple(self(point)))

    def as_mapping(self) -> Dict[Hashable, Union[float, Tuple[float, ...]]]:
        if self.width == 1 and not self.simplex_valued:
            return {p: float(v[0]) for p, v in zip(self.space.points, self.values)}
        return {p: tuple(float(c) for c in v) for p, v in zip(self.space.points, self.values)}

    def restrict(self, subspace: FiniteMetricSpace) -> "PointFunction":
        """Restriction to a subspace whose points belong to this function's space."""
        idx = [self.space.index_of(p) for p in subspace.points]
        return PointFunction(subspace, self.values[idx], self.simplex_valued)

    def image_distance_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """l1 distances between the values at ``rows`` and at ``cols``."""
        a = self.values[np.asarray(rows, dtype=np.int64)]
        b = self.values[np.asarray(cols, dtype=np.int64)]
        out = np.abs(a[:, None, 0] - b[None, :, 0])
        for k in range(1, self.width):
            out += np.abs(a[:, None, k] - b[None, :, k])
        return out

    def boundary_mask(self) -> np.ndarray:
        """Points whose value has a coordinate within tolerance of 0."""
        return self.values.min(axis=1) <= config.TOLERANCE


def constant_function(space: FiniteMetricSpace, value: Any) -> PointFunction:
    simplex = isinstance(value, SimplexPoint)
    return PointFunction.from_mapping(space, {p: value for p in space.points}, simplex)
