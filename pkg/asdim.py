"""
Asymptotic-dimension witnesses at finite scale.

Ostrand verification of colored covers, the colored-to-plain conversion,
dimension reduction through a refiner, promotion of a refiner to covers with
one more member, and a deterministic search that serves as the ground-truth
refiner on small instances.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from covers import (
    ColoredCover,
    Cover,
    DisjointnessReport,
    VerificationFailedError,
    is_r_disjoint,
    is_refinement,
    lebesgue_number,
    mesh,
    multiplicity,
    shrink_to_indexed,
)
from extension import (
    CoverRejectedError,
    PreconditionError,
    RefinerFailedError,
    RefinerOracle,
)
from metric_core import CoarseGeometryError, FiniteMetricSpace

logger = logging.getLogger(__name__)


class FamilyCountMismatchError(CoarseGeometryError):
    """Raised when a colored cover does not have the expected number of families."""

    pass


class OstrandFailedError(CoarseGeometryError):
    """Raised when a colored cover fails the Ostrand check it is required to pass."""

    pass


class InputRefinerFailedError(RefinerFailedError):
    """Raised when the refiner wrapped by a promoted refiner fails."""

    pass


# -- Ostrand witnesses --------------------------------------------------------


@dataclass(frozen=True)
class OstrandReport:
    """Per-family disjointness, Lebesgue number and mesh of a colored cover at scale r."""

    r: float
    families_checked: int
    disjointness: Tuple[DisjointnessReport, ...]
    lebesgue: float
    lebesgue_point: Optional[object]
    mesh: float

    @property
    def verdict(self) -> bool:
        return (
            all(self.disjointness)
            and self.lebesgue >= self.r - config.TOLERANCE
            and math.isfinite(self.mesh)
        )

    def __bool__(self) -> bool:
        return self.verdict


def verify_ostrand(colored: ColoredCover, r: float, n: int) -> OstrandReport:
    """
    Check that a colored cover with n + 1 families has r-disjoint families and
    Lebesgue number at least r.

    Raises:
        FamilyCountMismatchError: If the cover does not have n + 1 families
    """
    if len(colored.families) != n + 1:
        raise FamilyCountMismatchError(
            f"Expected {n + 1} families, got {len(colored.families)}"
        )
    disjointness = tuple(
        is_r_disjoint(family, r, colored.space) for family in colored.families
    )
    leb = lebesgue_number(colored.flattened)
    report = OstrandReport(
        r=float(r),
        families_checked=len(colored.families),
        disjointness=disjointness,
        lebesgue=leb.value,
        lebesgue_point=leb.critical_point,
        mesh=mesh(colored.flattened),
    )
    logger.info(
        f"Ostrand check at r={r}: Leb {report.lebesgue}, mesh {report.mesh}, "
        f"verdict {report.verdict}"
    )
    return report


def colored_to_plain(colored: ColoredCover) -> Cover:
    """One member per family: the union of that family."""
    flat = colored.flattened
    masks = np.zeros((len(colored.families), len(colored.space)), dtype=bool)
    for f, members in enumerate(colored.family_indices()):
        if members:
            masks[f] = flat.masks[members].any(axis=0)
    return Cover.from_masks(colored.space, masks)


def reduce_dimension(
    space: FiniteMetricSpace, colored: ColoredCover, refiner: RefinerOracle
) -> Cover:
    """
    Turn an n + 2 family Ostrand witness at scale t = colored.r into a
    uniformly bounded cover of dimension <= n.

    The plain cover of the families is refined, and every refined member V
    is cut by the members of the family i(V) whose union contains it. The
    output's mesh is at most the colored cover's mesh, its dimension at most
    n and its Lebesgue number at least min(s, t/2); each is checked.

    Raises:
        PreconditionError: If refiner.s > t/2
        OstrandFailedError: If the colored cover fails verify_ostrand at t
        RefinerFailedError: If the refiner fails
        VerificationFailedError: If the output fails a postcondition
    """
    if not colored.space.same_as(space):
        raise PreconditionError("Colored cover is defined on a different space")
    t = colored.r
    n = len(colored.families) - 2
    if n < 0:
        raise PreconditionError("Dimension reduction needs at least two families")
    if refiner.s > t / 2 + config.TOLERANCE:
        raise PreconditionError(f"Refiner s = {refiner.s} exceeds t/2 = {t / 2}")
    report = verify_ostrand(colored, t, n + 1)
    if not report:
        raise OstrandFailedError(
            f"Colored cover is not an Ostrand witness at scale {t}",
            witness=report.lebesgue_point,
        )

    plain = colored_to_plain(colored)
    try:
        refined = refiner(plain)
    except CoverRejectedError as e:
        raise RefinerFailedError(f"Refiner {refiner.name} rejected the cover: {e}") from e
    owner = is_refinement(refined, plain).witness
    flat = colored.flattened
    family_members = colored.family_indices()

    pieces = []
    for v in refined.nonempty_members():
        for w in family_members[owner[v]]:
            piece = refined.masks[v] & flat.masks[w]
            if piece.any():
                pieces.append(piece)
    output = Cover.from_masks(space, np.array(pieces))

    if not is_refinement(output, flat):
        raise VerificationFailedError("Reduced cover does not refine the colored cover")
    bound = report.mesh
    measured_mesh = mesh(output)
    if measured_mesh > bound + config.TOLERANCE:
        raise VerificationFailedError(f"Mesh {measured_mesh} exceeds {bound}")
    mult = multiplicity(output)
    if mult > n + 1:
        raise VerificationFailedError(f"Dimension {mult - 1} exceeds {n}")
    leb = lebesgue_number(output)
    target = min(refiner.s, t / 2)
    if leb.value < target - config.TOLERANCE:
        raise VerificationFailedError(
            f"Lebesgue number {leb.value} is below {target}", witness=leb.critical_point
        )
    logger.info(
        f"Reduced to {len(output)} members: dimension {mult - 1}, mesh {measured_mesh}, "
        f"Leb {leb.value}"
    )
    return output


# -- refiner promotion --------------------------------------------------------


def _near_region(space: FiniteMetricSpace, seeds: np.ndarray, radius: float) -> np.ndarray:
    """Points within open distance ``radius`` of some seed point."""
    region = np.zeros(len(space), dtype=bool)
    if seeds.size == 0:
        return region
    for start in range(0, seeds.size, config.MIN_BATCH_SIZE):
        block = space.distance_block(seeds[start : start + config.MIN_BATCH_SIZE], np.arange(len(space)))
        region |= (block < radius - config.TOLERANCE).any(axis=0)
    return region


def promote_refiner(space: FiniteMetricSpace, refiner: RefinerOracle) -> RefinerOracle:
    """
    Promote a refiner for (n+2)-member covers at (s, t) to (n+3)-member covers
    at (min(s, 2t), 4t) with dimension n + 1.

    For a cover W with Lebesgue number >= 4t, A is the union of the balls
    B(x, 2t) with B(x, 4t) not inside the last member. The first n + 2
    members are cut to A and padded with X \\ A, the input refiner refines
    that cover, and its members cut back to A are returned together with the
    last member of W.

    Raises:
        PreconditionError: If the input refiner does not state its member count
    """
    n = refiner.dimension
    members = refiner.members if refiner.members is not None else n + 2
    if members != n + 2:
        raise PreconditionError(
            f"Refiner {refiner.name} refines {members}-member covers but has dimension {n}"
        )
    t = refiner.t
    q = min(refiner.s, 2 * t)

    def capability(cover: Cover) -> Cover:
        if not cover.space.same_as(space):
            raise PreconditionError("Cover is defined on a different space")
        masks = cover.masks
        last = masks[-1]
        shallow = np.nonzero(cover.complement_distances[-1] < 4 * t - config.TOLERANCE)[0]
        region = _near_region(space, shallow, 2 * t)
        if not region.any():
            logger.info("Last member contains every 4t-ball; promotion is vacuous")
            out = np.zeros(masks.shape, dtype=bool)
            out[-1] = last
            return Cover.from_masks(space, out)

        inner = masks[:-1] & region
        sub = space.subspace(space.points_at(np.nonzero(region)[0]))
        sub_cover = Cover.from_masks(sub, inner[:, region])
        sub_leb = lebesgue_number(sub_cover)
        if sub_leb.value < 2 * t - config.TOLERANCE:
            raise VerificationFailedError(
                f"Cover cut to A has Lebesgue number {sub_leb.value} < 2t = {2 * t}",
                witness=sub_leb.critical_point,
            )
        padded = Cover.from_masks(space, inner | ~region)
        _check_ball_containment(space, region, t)
        padded_leb = lebesgue_number(padded)
        if padded_leb.value < t - config.TOLERANCE:
            raise VerificationFailedError(
                f"Padded cover has Lebesgue number {padded_leb.value} < t = {t}",
                witness=padded_leb.critical_point,
            )

        try:
            refined = shrink_to_indexed(refiner(padded), padded)
        except (RefinerFailedError, CoverRejectedError) as e:
            raise InputRefinerFailedError(f"Input refiner {refiner.name} failed: {e}") from e
        out = np.vstack([refined.masks & region, last[None, :]])
        return Cover.from_masks(space, out)

    return RefinerOracle(
        name=f"promoted:{refiner.name}",
        capability=capability,
        s=q,
        t=4 * t,
        dimension=n + 1,
        members=n + 3,
    )


def _check_ball_containment(space: FiniteMetricSpace, region: np.ndarray, t: float):
    """Every t-ball meeting A meets it inside a 2t-ball around one of its points of A."""
    inside = np.nonzero(region)[0]
    for start in range(0, len(space), config.MIN_BATCH_SIZE):
        rows = np.arange(start, min(start + config.MIN_BATCH_SIZE, len(space)))
        near = space.distance_block(rows, inside) < t - config.TOLERANCE
        for r, hits in zip(rows, near):
            idx = inside[hits]
            if idx.size == 0:
                continue
            spread = space.distance_block(idx[:1], idx)[0]
            if (spread >= 2 * t - config.TOLERANCE).any():
                point = space.points[int(r)]
                raise VerificationFailedError(
                    f"B({point!r}, t) meets A outside a 2t-ball", witness=point
                )


# -- refinement search --------------------------------------------------------


class _BudgetExhausted(Exception):
    pass


class _RefinementSearch:
    """Point-removal search for an indexed refinement with bounded multiplicity."""

    def __init__(self, cover: Cover, target_leb: float, target_mult: int, budget: int, seed: int):
        self.cover = cover
        self.space = cover.space
        self.target_leb = target_leb
        self.target_mult = target_mult
        self.budget = budget
        self.steps = 0
        self.depth = cover.complement_distances
        self.tiebreak = np.random.default_rng(seed).permutation(len(cover))
        self._balls: Dict[int, np.ndarray] = {}

    def ball(self, x: int) -> np.ndarray:
        if x not in self._balls:
            row = self.space.distance_rows(x, x + 1)[0]
            self._balls[x] = np.nonzero(row < self.target_leb - config.TOLERANCE)[0]
        return self._balls[x]

    def good(self, masks: np.ndarray, x: int) -> bool:
        return bool(masks[:, self.ball(x)].all(axis=1).any())

    def _spend(self):
        self.steps += 1
        if self.steps > self.budget:
            raise _BudgetExhausted()

    def _shallow_members(self, masks: np.ndarray, y: int) -> List[int]:
        members = np.nonzero(masks[:, y])[0]
        return sorted(members, key=lambda i: (self.depth[i, y], self.tiebreak[i]))

    def _try_remove(self, masks: np.ndarray, member: int, y: int) -> bool:
        self._spend()
        masks[member, y] = False
        if masks[:, y].any() and all(self.good(masks, x) for x in self.ball(y)):
            return True
        masks[member, y] = True
        return False

    def greedy(self, rounds: int = 3) -> Optional[np.ndarray]:
        """Remove points from their shallowest members; restart with stuck points first."""
        n = len(self.space)
        counts = self.cover.point_multiplicities()
        order = sorted(range(n), key=lambda y: (-counts[y], y))
        for attempt in range(rounds):
            masks = np.array(self.cover.masks)
            for y in order:
                for i in self._shallow_members(masks, y):
                    if masks[:, y].sum() <= self.target_mult:
                        break
                    self._try_remove(masks, i, y)
            stuck = [y for y in range(n) if masks[:, y].sum() > self.target_mult]
            if not stuck:
                return masks
            logger.debug(f"Greedy round {attempt + 1}: {len(stuck)} points over multiplicity")
            stuck_set = set(stuck)
            order = stuck + [y for y in order if y not in stuck_set]
        return None

    def exhaustive(self) -> Optional[np.ndarray]:
        """Backtracking over per-point member subsets, pruned by completed balls."""
        n = len(self.space)
        k = len(self.cover)
        finished: Dict[int, List[int]] = {}
        for x in range(n):
            ball = self.ball(x)
            finished.setdefault(int(ball.max()) if ball.size else x, []).append(x)
        options = []
        for y in range(n):
            members = np.nonzero(self.cover.masks[:, y])[0].tolist()
            choices = []
            for size in range(min(len(members), self.target_mult), 0, -1):
                choices.extend(itertools.combinations(members, size))
            options.append(choices)
        masks = np.zeros((k, n), dtype=bool)

        def assign(y: int) -> bool:
            if y == n:
                return True
            for choice in options[y]:
                self._spend()
                masks[:, y] = False
                masks[list(choice), y] = True
                if all(self.good(masks, x) for x in finished.get(y, [])) and assign(y + 1):
                    return True
            masks[:, y] = False
            return False

        return masks if assign(0) else None


def search_refinement(
    space: FiniteMetricSpace,
    cover: Cover,
    target_leb: float,
    target_mult: int,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> Optional[Cover]:
    """
    Search for an indexed refinement with Lebesgue number >= target_leb and
    multiplicity <= target_mult.

    Greedy point removal runs first (points by descending multiplicity, then
    index; members shallowest first, ties by a seeded permutation), restarting
    with stuck points first; spaces with at most
    config.EXHAUSTIVE_SEARCH_MAX_POINTS points fall back to exhaustive
    backtracking. The result is verified before it is returned.

    Args:
        space: Space of the cover
        cover: Cover to refine
        target_leb: Required Lebesgue number
        target_mult: Allowed multiplicity (at least 1)
        budget: Maximum number of search steps
        seed: Tie-break seed

    Returns:
        The refinement (the input itself when it already meets the targets),
        or None when the search is exhausted

    Examples:
        >>> from metric_core import interval_space
        >>> cover = Cover(interval_space(0, 9), [range(0, 7), range(4, 10)])
        >>> multiplicity(search_refinement(cover.space, cover, 1, 1))
        1
    """
    if target_mult < 1:
        raise ValueError(f"Target multiplicity must be at least 1, got {target_mult}")
    if not cover.space.same_as(space):
        raise PreconditionError("Cover is defined on a different space")
    budget = config.DEFAULT_SEARCH_BUDGET if budget is None else budget
    seed = config.DEFAULT_SEED if seed is None else seed

    leb = lebesgue_number(cover)
    if leb.value < target_leb - config.TOLERANCE:
        logger.info(f"Lebesgue number {leb.value} is already below {target_leb}")
        return None
    if multiplicity(cover) <= target_mult:
        return cover

    search = _RefinementSearch(cover, target_leb, target_mult, budget, seed)
    masks = None
    try:
        masks = search.greedy()
        if masks is None and len(space) <= config.EXHAUSTIVE_SEARCH_MAX_POINTS:
            logger.warning("Greedy refinement search stuck; falling back to exhaustive search")
            masks = search.exhaustive()
    except _BudgetExhausted:
        logger.warning(f"Refinement search exhausted its budget of {budget} steps")
        return None
    if masks is None:
        return None

    result = Cover.from_masks(space, masks)
    if not is_refinement(result, cover):
        raise VerificationFailedError("Search result does not refine the cover")
    if multiplicity(result) > target_mult:
        raise VerificationFailedError("Search result exceeds the target multiplicity")
    result_leb = lebesgue_number(result)
    if result_leb.value < target_leb - config.TOLERANCE:
        raise VerificationFailedError(
            f"Search result has Lebesgue number {result_leb.value}",
            witness=result_leb.critical_point,
        )
    logger.debug(f"Refinement found after {search.steps} steps")
    return result


# -- refiner factories --------------------------------------------------------


def search_refiner(
    s: float,
    t: float,
    dimension: int,
    members: Optional[int] = None,
    budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> RefinerOracle:
    """Refiner backed by search_refinement with targets (s, dimension + 1)."""
    return RefinerOracle(
        name="search",
        capability=lambda cover: search_refinement(
            cover.space, cover, s, dimension + 1, budget, seed
        ),
        s=s,
        t=t,
        dimension=dimension,
        members=members,
    )


def singleton_refiner(space: FiniteMetricSpace, s: Optional[float] = None) -> RefinerOracle:
    """
    Refiner returning the cover by singletons, whose Lebesgue number is the
    separation of the space; ``s`` defaults to that separation.
    """
    claimed = space.separation if s is None else s
    singletons = Cover.from_masks(space, np.eye(len(space), dtype=bool))
    return RefinerOracle(
        name="singleton", capability=lambda cover: singletons, s=claimed, t=0.0, dimension=0
    )


def brick_refiner(colored: ColoredCover) -> RefinerOracle:
    """
    Refiner returning the plain brick cover, which refines every cover whose
    Lebesgue number exceeds its mesh.
    """
    flat = colored.flattened
    return RefinerOracle(
        name="brick",
        capability=lambda cover: flat,
        s=lebesgue_number(flat).value,
        t=mesh(flat) + 1.0,
        dimension=multiplicity(flat) - 1,
    )
