"""
Covers of finite metric spaces and their statistics.

Lebesgue numbers use open balls: Leb = min over x of max over members U of
dist(x, X \\ U). A member equal to the whole space makes the Lebesgue number
infinite (``math.inf``), serialized as "inf".
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

import config
import pair_batches
from metric_core import (
    CoarseGeometryError,
    FiniteMetricSpace,
    VerificationError,
    ball,
    grid_space,
    interval_space,
)

logger = logging.getLogger(__name__)

INFINITE = math.inf


class NotACoverError(CoarseGeometryError):
    """Raised when the members do not cover every point of the space."""

    pass


class SpaceMismatchError(CoarseGeometryError):
    """Raised when two covers live on different spaces."""

    pass


class NotARefinementError(CoarseGeometryError):
    """Raised when a cover was expected to refine another one but does not."""

    pass


class WindowTooSmallError(CoarseGeometryError):
    """Raised when a brick window is too small for the requested scale."""

    pass


class ConstructionInvalidError(VerificationError):
    """Raised when a generated cover fails its own contract."""

    pass


class VerificationFailedError(VerificationError):
    """Raised when a postcondition of a construction fails."""

    pass


@dataclass(frozen=True, eq=False)
class Cover:
    """Indexed family of point subsets whose union is the whole space."""

    space: FiniteMetricSpace
    members: Tuple[FrozenSet[Hashable], ...]

    def __post_init__(self):
        members = tuple(frozenset(m) for m in self.members)
        object.__setattr__(self, "members", members)
        masks = np.zeros((len(members), len(self.space)), dtype=bool)
        for i, member in enumerate(members):
            for point in member:
                masks[i, self.space.index_of(point)] = True
        self._finish(masks)

    def _finish(self, masks: np.ndarray):
        uncovered = ~masks.any(axis=0) if masks.size else np.ones(len(self.space), bool)
        if uncovered.any():
            point = self.space.points[int(np.argmax(uncovered))]
            raise NotACoverError(
                f"{int(uncovered.sum())} points are not covered, e.g. {point!r}",
                witness=point,
            )
        masks.setflags(write=False)
        object.__setattr__(self, "masks", masks)

    @classmethod
    def from_masks(cls, space: FiniteMetricSpace, masks: np.ndarray) -> "Cover":
        """Build a cover from a (members x points) boolean matrix."""
        masks = np.array(masks, dtype=bool).reshape(-1, len(space))
        cover = object.__new__(cls)
        object.__setattr__(cover, "space", space)
        object.__setattr__(
            cover,
            "members",
            tuple(space.points_at(np.nonzero(row)[0]) for row in masks),
        )
        cover._finish(masks)
        return cover

    def __len__(self) -> int:
        return len(self.members)

    def member_indices(self, i: int) -> np.ndarray:
        return np.nonzero(self.masks[i])[0]

    def nonempty_members(self) -> List[int]:
        return [i for i in range(len(self)) if self.masks[i].any()]

    def point_multiplicities(self) -> np.ndarray:
        return self.masks.sum(axis=0)

    def restrict(self, subspace: FiniteMetricSpace) -> "Cover":
        """Trace of the cover on a subspace, member indices preserved."""
        idx = [self.space.index_of(p) for p in subspace.points]
        return Cover.from_masks(subspace, self.masks[:, idx])

    @cached_property
    def complement_distances(self) -> np.ndarray:
        """(members x points) matrix of dist(x, X \\ U); 0 off U, inf when U = X."""
        return _complement_distances(self.space, self.masks)


def _min_distance_rows(
    space: FiniteMetricSpace, rows: np.ndarray, cols: np.ndarray, desc: str
) -> np.ndarray:
    """For each row index, the least distance to the points at ``cols``."""
    parts = pair_batches.run_batched(
        len(rows),
        lambda a, b: space.distance_block(rows[a:b], cols).min(axis=1),
        desc=desc,
    )
    return np.concatenate(parts) if parts else np.zeros(0)


def _complement_distances(space: FiniteMetricSpace, masks: np.ndarray) -> np.ndarray:
    F = np.zeros(masks.shape, dtype=float)
    for i, mask in enumerate(masks):
        inside = np.nonzero(mask)[0]
        outside = np.nonzero(~mask)[0]
        if inside.size == 0:
            continue
        if outside.size == 0:
            F[i, inside] = INFINITE
            continue
        F[i, inside] = _min_distance_rows(space, inside, outside, "Complement distances")
    return F


@dataclass(frozen=True)
class LebesgueReport:
    """Lebesgue number of a cover and a point where it is attained."""

    value: float
    critical_point: Optional[Hashable]

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


def lebesgue_number(cover: Cover) -> LebesgueReport:
    """
    Lebesgue number of a cover under the open-ball convention.

    Returns:
        LebesgueReport with the value (math.inf when some member is the whole
        space) and the first point attaining the minimum

    Examples:
        >>> space = interval_space(0, 9)
        >>> report = lebesgue_number(Cover(space, [range(0, 7), range(4, 10)]))
        >>> report.value, report.critical_point
        (2.0, 5)
    """
    best = cover.complement_distances.max(axis=0)
    value = float(best.min())
    if math.isinf(value):
        return LebesgueReport(INFINITE, None)
    return LebesgueReport(value, cover.space.points[int(np.argmin(best))])


def multiplicity(cover: Cover) -> int:
    """Largest number of members containing a single point."""
    return int(cover.point_multiplicities().max())


def dimension(cover: Cover) -> int:
    return multiplicity(cover) - 1


def _set_diameter(space: FiniteMetricSpace, idx: np.ndarray) -> float:
    if idx.size < 2:
        return 0.0
    parts = pair_batches.run_batched(
        idx.size,
        lambda a, b: float(space.distance_block(idx[a:b], idx).max()),
        desc="Member diameter",
    )
    return max(parts)


def mesh(cover: Cover) -> float:
    """Largest member diameter; 0 for a cover by singletons."""
    return max(
        (_set_diameter(cover.space, cover.member_indices(i)) for i in range(len(cover))),
        default=0.0,
    )


@dataclass(frozen=True)
class RefinementReport:
    refines: bool
    witness: Dict[int, int]
    failing_member: Optional[int] = None

    def __bool__(self) -> bool:
        return self.refines


def _check_same_space(a: FiniteMetricSpace, b: FiniteMetricSpace):
    if not a.same_as(b):
        raise SpaceMismatchError("Covers are defined on different spaces")


def containment_matrix(fine: Cover, coarse: Cover) -> np.ndarray:
    """contained[i, j] is True when fine member i is a subset of coarse member j."""
    _check_same_space(fine.space, coarse.space)
    overflow = fine.masks.astype(float) @ (~coarse.masks).astype(float).T
    return overflow == 0


def is_refinement(fine: Cover, coarse: Cover) -> RefinementReport:
    """
    Check that every nonempty member of ``fine`` lies in some member of ``coarse``.

    The witness maps each fine member to the lowest index of a coarse member
    containing it.

    Raises:
        SpaceMismatchError: If the covers are on different spaces
    """
    contained = containment_matrix(fine, coarse)
    witness = {}
    for i in range(len(fine)):
        candidates = np.nonzero(contained[i])[0]
        if candidates.size == 0:
            return RefinementReport(False, witness, failing_member=i)
        witness[i] = int(candidates[0])
    return RefinementReport(True, witness)


@dataclass(frozen=True)
class DisjointnessReport:
    disjoint: bool
    violating_pair: Optional[Tuple[int, int]] = None
    witness_points: Optional[Tuple[Hashable, Hashable]] = None
    distance: Optional[float] = None

    def __bool__(self) -> bool:
        return self.disjoint


def _box_gap(coords: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """Lower bound on the distance between two point sets from their bounding boxes."""
    ca, cb = coords[a], coords[b]
    gaps = np.maximum(ca.min(axis=0) - cb.max(axis=0), cb.min(axis=0) - ca.max(axis=0))
    return float(max(gaps.max(), 0.0))


def is_r_disjoint(
    family: Sequence[Iterable[Hashable]], r: float, space: FiniteMetricSpace
) -> DisjointnessReport:
    """
    Check that distinct nonempty members are at distance > r from each other.

    Returns:
        DisjointnessReport; on failure, the lexicographically first violating
        pair of member indices together with a closest pair of points
    """
    indices = [space.indices_of(member) for member in family]
    tol = config.TOLERANCE
    for i in range(len(indices)):
        if indices[i].size == 0:
            continue
        for j in range(i + 1, len(indices)):
            if indices[j].size == 0:
                continue
            if space.coordinates is not None and (
                _box_gap(space.coordinates, indices[i], indices[j]) > r + tol
            ):
                continue
            nearest = _min_distance_rows(space, indices[i], indices[j], "Disjointness")
            row = int(np.argmin(nearest))
            d = float(nearest[row])
            if d <= r + tol:
                col_row = space.distance_block(indices[i][row : row + 1], indices[j])[0]
                col = int(np.argmin(col_row))
                return DisjointnessReport(
                    False,
                    (i, j),
                    (space.points[indices[i][row]], space.points[indices[j][col]]),
                    d,
                )
    return DisjointnessReport(True)


def shrink_to_indexed(refinement: Cover, original: Cover) -> Cover:
    """
    Merge a refinement into a cover indexed like ``original``.

    Member W_i is the union of the refinement members whose lowest containing
    original index is i. W_i is a subset of U_i, the union is the space, and
    neither multiplicity nor Lebesgue number gets worse; all four are checked.

    Raises:
        NotARefinementError: If ``refinement`` does not refine ``original``
        VerificationFailedError: If a postcondition fails
    """
    report = is_refinement(refinement, original)
    if not report:
        raise NotARefinementError(
            f"Member {report.failing_member} of the refinement lies in no original member",
            witness=report.failing_member,
        )
    masks = np.zeros(original.masks.shape, dtype=bool)
    for fine_index, coarse_index in report.witness.items():
        masks[coarse_index] |= refinement.masks[fine_index]
    shrunk = Cover.from_masks(original.space, masks)

    if (shrunk.masks & ~original.masks).any():
        raise VerificationFailedError("Shrunk member escapes its original member")
    if multiplicity(shrunk) > multiplicity(refinement):
        raise VerificationFailedError("Shrinking increased the multiplicity")
    before = lebesgue_number(refinement).value
    after = lebesgue_number(shrunk)
    if after.value < before - config.TOLERANCE:
        raise VerificationFailedError(
            f"Shrinking lowered the Lebesgue number from {before} to {after.value}",
            witness=after.critical_point,
        )
    return shrunk


def ball_cover(space: FiniteMetricSpace, r: float) -> Cover:
    """Cover by the open r-balls around every point; its Lebesgue number is at least r."""
    return Cover(space, [ball(space, p, r) for p in space.points])


@dataclass(frozen=True, eq=False)
class ColoredCover:
    """
    Cover split into families meant to be r-disjoint.

    Construction checks that the flattened family covers the space;
    r-disjointness is what verify_ostrand (or the brick generators) certify.
    """

    space: FiniteMetricSpace
    families: Tuple[Tuple[FrozenSet[Hashable], ...], ...]
    r: float
    _flat: Cover = field(init=False, repr=False)

    def __post_init__(self):
        families = tuple(tuple(frozenset(m) for m in family) for family in self.families)
        object.__setattr__(self, "families", families)
        flat = [member for family in families for member in family]
        object.__setattr__(self, "_flat", Cover(self.space, flat))

    @property
    def flattened(self) -> Cover:
        return self._flat

    @property
    def family_of_member(self) -> List[int]:
        return [i for i, family in enumerate(self.families) for _ in family]

    def family_indices(self) -> List[List[int]]:
        """Flattened member indices of each family."""
        out, start = [], 0
        for family in self.families:
            out.append(list(range(start, start + len(family))))
            start += len(family)
        return out


def _verify_contract(
    colored: ColoredCover, L: float, mesh_bound: float, mult_bound: int
) -> ColoredCover:
    for f, family in enumerate(colored.families):
        report = is_r_disjoint(family, L, colored.space)
        if not report:
            raise ConstructionInvalidError(
                f"Family {f} is not {L}-disjoint: members {report.violating_pair} "
                f"at distance {report.distance}",
                witness=report.witness_points,
            )
    flat = colored.flattened
    leb = lebesgue_number(flat)
    if leb.value < L - config.TOLERANCE:
        raise ConstructionInvalidError(
            f"Lebesgue number {leb.value} is below {L}", witness=leb.critical_point
        )
    measured_mesh = mesh(flat)
    if measured_mesh > mesh_bound + config.TOLERANCE:
        raise ConstructionInvalidError(f"Mesh {measured_mesh} exceeds {mesh_bound}")
    counts = flat.point_multiplicities()
    if counts.max() > mult_bound:
        point = colored.space.points[int(np.argmax(counts))]
        raise ConstructionInvalidError(
            f"Multiplicity {int(counts.max())} exceeds {mult_bound}", witness=point
        )
    logger.info(
        f"Brick cover verified: {len(flat)} members, Leb {leb.value}, "
        f"mesh {measured_mesh}, multiplicity {int(counts.max())}"
    )
    return colored


def _check_scale(L: int):
    if int(L) != L or L < 1:
        raise ValueError(f"Brick scale L must be a positive integer, got {L}")


def brick_cover_Z(window: Tuple[int, int], L: int) -> ColoredCover:
    """
    Two-family interval cover of an integer window at scale L.

    Family 1 holds the intervals [6kL, 6kL + 5L) and family 2 the intervals
    [6kL + 3L, 6kL + 8L), positions measured from the window start and
    clipped to the window. Each family is L-disjoint (gap L + 1), the
    Lebesgue number is at least L, the mesh at most 5L - 1 and the
    multiplicity at most 2; all of it is re-verified before returning.

    Args:
        window: Integer interval (lo, hi), both ends included
        L: Positive integer scale

    Raises:
        WindowTooSmallError: If hi - lo < 8L
        ConstructionInvalidError: If the generated cover fails verification
    """
    _check_scale(L)
    lo, hi = int(window[0]), int(window[1])
    if hi - lo < 8 * L:
        raise WindowTooSmallError(
            f"Window [{lo}, {hi}] is shorter than 8L = {8 * L}", witness=(lo, hi)
        )
    space = interval_space(lo, hi)
    rel = space.coordinates[:, 0] - lo
    period, length = 6 * L, 5 * L
    families = []
    for offset in (0, 3 * L):
        masks = []
        for start in range(offset - period, hi - lo + 1, period):
            mask = (rel >= start) & (rel < start + length)
            if mask.any():
                masks.append(mask)
        families.append(tuple(space.points_at(np.nonzero(m)[0]) for m in masks))
    colored = ColoredCover(space, tuple(families), float(L))
    return _verify_contract(colored, L, mesh_bound=5 * L - 1, mult_bound=2)


def brick_color(row: int, column: int) -> int:
    """
    Color of brick ``column`` in brick row ``row``.

    Bricks touch their two row neighbors and two bricks in each adjacent row,
    so the adjacency is a triangular lattice; this is its 3-coloring.
    """
    position = 2 * column + (row % 2)
    lattice_column = (position + row) // 2
    return (lattice_column + row) % 3


def brick_cover_Z2(window: Tuple[int, int], L: int) -> ColoredCover:
    """
    Three-family brick-wall cover of the square window [lo, hi]^2 (sup metric).

    Base bricks are 8L wide and 3L high, alternate rows are shifted by 4L,
    and every brick is enlarged by L on each side. Same-colored bricks are at
    distance > L, every open L-ball sits inside the enlargement of its own
    brick, the mesh is 10L - 1 and at most three enlarged bricks meet. The
    contract (L-disjoint families, Leb >= L, mesh <= 20L, multiplicity <= 3)
    is verified before the cover is returned.

    Raises:
        WindowTooSmallError: If the window side is below 16L
        ConstructionInvalidError: If the generated cover fails verification
    """
    _check_scale(L)
    lo, hi = int(window[0]), int(window[1])
    if hi - lo < 16 * L:
        raise WindowTooSmallError(
            f"Window side {hi - lo} is below 16L = {16 * L}", witness=(lo, hi)
        )
    space = grid_space((lo, hi))
    rx = space.coordinates[:, 0] - lo
    ry = space.coordinates[:, 1] - lo
    width, height, shift, margin = 8 * L, 3 * L, 4 * L, L
    side = hi - lo

    families: List[List[np.ndarray]] = [[], [], []]
    for row in range(-1, side // height + 2):
        y0 = row * height
        in_rows = (ry >= y0 - margin) & (ry < y0 + height + margin)
        if not in_rows.any():
            continue
        offset = (row % 2) * shift
        for column in range(-1, side // width + 2):
            x0 = offset + column * width
            mask = in_rows & (rx >= x0 - margin) & (rx < x0 + width + margin)
            if mask.any():
                families[brick_color(row, column)].append(mask)

    colored = ColoredCover(
        space,
        tuple(tuple(space.points_at(np.nonzero(m)[0]) for m in family) for family in families),
        float(L),
    )
    return _verify_contract(colored, L, mesh_bound=20 * L, mult_bound=3)
