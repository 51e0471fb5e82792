"""
Lipschitz extension machinery.

McShane extension for real-valued data, coordinatewise McShane followed by
Euclidean projection for simplex-valued data (extension constant C = m + 2),
the sphere-valued extension that splices a radial projection with the
barycentric map of a refined cover, and its dual: refining a cover by
extending its barycentric map off the interior.

Every claimed bound is re-checked at runtime; a failed check raises a
VerificationError subclass carrying a witness.
"""

import logging
import math
from dataclasses import asdict, dataclass
from typing import Any, Callable, Hashable, Mapping, Optional, Tuple, Union

import numpy as np
import polars as pl

import config
import pair_batches
from covers import (
    Cover,
    VerificationFailedError,
    is_refinement,
    lebesgue_number,
    multiplicity,
    shrink_to_indexed,
)
from metric_core import (
    CoarseGeometryError,
    FiniteMetricSpace,
    PointFunction,
    SimplexPoint,
    VerificationError,
)
from nerve import barycentric_lipschitz_bound, barycentric_map

logger = logging.getLogger(__name__)


class NotLipschitzOnAError(CoarseGeometryError):
    """Raised when partial data violates the requested Lipschitz condition."""

    pass


class EmptyAError(CoarseGeometryError):
    """Raised when an extension is requested from an empty set."""

    pass


class PreconditionError(CoarseGeometryError):
    """Raised when the inputs of a construction miss one of its hypotheses."""

    pass


class NotDiscreteError(PreconditionError):
    """Raised when a space is not 1-discrete."""

    pass


class CoverRejectedError(CoarseGeometryError):
    """Raised when a refiner is handed a cover outside its domain."""

    pass


class BoundaryViolationError(VerificationError):
    """Raised when an extension leaves the boundary of the simplex."""

    pass


class LebesgueAssertionFailedError(VerificationError):
    """Raised when the intermediate Lebesgue bound of the sphere extension fails."""

    pass


class RefinerFailedError(VerificationError):
    """Raised when a refiner returns nothing or an output that fails verification."""

    pass


class LipschitzBoundViolationError(VerificationError):
    """Raised when a measured Lipschitz constant exceeds its proven bound."""

    pass


class LebesgueTooSmallError(CoarseGeometryError):
    """Raised when a cover's Lebesgue number is below what a construction needs."""

    pass


class ExtenderFailedError(VerificationError):
    """Raised when an extension capability fails or breaks its contract."""

    pass


class EpsilonNotBelowMError(CoarseGeometryError):
    """Raised when epsilon is not strictly between 0 and M."""

    pass


# -- Lipschitz checks ---------------------------------------------------------


@dataclass(frozen=True)
class LipschitzReport:
    """Outcome of an exhaustive (lam, c)-Lipschitz check."""

    lam: float
    c: float
    satisfied: bool
    worst_pair: Optional[Tuple[Hashable, Hashable]]
    worst_ratio: float


def check_lipschitz(
    space: FiniteMetricSpace, f: PointFunction, lam: float, c: float = 0.0
) -> LipschitzReport:
    """
    Check |f(x) - f(y)|_1 <= lam * dist(x, y) + c over all unordered pairs.

    Args:
        space: Domain of ``f``
        f: Function to check
        lam: Multiplicative constant (math.inf accepts everything)
        c: Additive constant

    Returns:
        LipschitzReport; worst_pair maximizes (image distance - c) / dist and
        worst_ratio is that maximum, floored at 0

    Examples:
        >>> from metric_core import interval_space
        >>> space = interval_space(0, 9)
        >>> f = PointFunction.from_callable(space, lambda x: 2 * x)
        >>> check_lipschitz(space, f, 1.0).satisfied
        False
    """
    if f.space is not space and not f.space.same_as(space):
        raise ValueError("Function is not defined on the given space")
    n = len(space)
    tol = config.TOLERANCE

    def worker(a: int, b: int):
        D = space.distance_rows(a, b)
        T = f.image_distance_block(np.arange(a, b), np.arange(n))
        upper = np.arange(n)[None, :] > np.arange(a, b)[:, None]
        # inf * 0 on the diagonal would warn
        violated = not math.isinf(lam) and bool((upper & (T > lam * D + c + tol)).any())
        ratio = np.full(D.shape, -np.inf)
        np.divide(T - c, D, out=ratio, where=upper)
        flat = int(np.argmax(ratio))
        best = float(ratio.flat[flat])
        if not math.isfinite(best):
            return violated, None
        return violated, (best, a + flat // n, flat % n)

    violated = False
    worst = None
    for batch_violated, candidate in pair_batches.run_batched(n, worker, desc="Lipschitz check"):
        violated = violated or batch_violated
        if candidate is not None and (worst is None or candidate[0] > worst[0]):
            worst = candidate
    if worst is None:
        return LipschitzReport(lam, c, not violated, None, 0.0)
    ratio, i, j = worst
    return LipschitzReport(
        lam,
        c,
        not violated,
        (space.points[i], space.points[j]),
        max(0.0, ratio),
    )


def lipschitz_constant(space: FiniteMetricSpace, f: PointFunction) -> float:
    """Exact l1-Lipschitz constant of ``f`` over all pairs."""
    return check_lipschitz(space, f, math.inf, 0.0).worst_ratio


# -- constants ----------------------------------------------------------------


def extension_constant(m: int) -> int:
    """Constant C = m + 2 of the simplex extension into a simplex with m + 2 vertices."""
    return m + 2


def sphere_lipschitz_bound(m: int, delta: float) -> float:
    """(m+2)^3 (82C + 4) delta: bound on Lip(h) of the sphere extension."""
    C = extension_constant(m)
    return (m + 2) ** 3 * (82 * C + 4) * delta


def sphere_lebesgue_bound(m: int, delta: float) -> float:
    """1 / (24 delta C (m+2)): lower bound on the Lebesgue number of the spliced cover."""
    return 1.0 / (24.0 * delta * extension_constant(m) * (m + 2))


def sphere_delta(epsilon: float, m: int) -> float:
    """Input scale delta_1 = epsilon / ((m+2)^3 (82C + 4)) giving Lip(h) <= epsilon."""
    C = extension_constant(m)
    return epsilon / ((m + 2) ** 3 * (82 * C + 4))


def continuity_from_lipschitz(delta: float, S: float) -> float:
    """A (delta, delta)-Lipschitz map is (mu, S)-continuous for mu = delta * (S + 1)."""
    return delta * (S + 1.0)


def discrete_lipschitz_constant(delta: float, M: float) -> float:
    """On an M-discrete space a (delta, delta)-Lipschitz map is (delta + delta / M)-Lipschitz."""
    if not M > 0:
        raise ValueError(f"M must be positive, got {M}")
    return delta + delta / M


# -- McShane and simplex extension -------------------------------------------


def _as_partial(
    space: FiniteMetricSpace,
    data: Union[PointFunction, Mapping[Hashable, Any]],
    simplex_valued: Optional[bool] = None,
) -> PointFunction:
    if isinstance(data, PointFunction):
        for point in data.space.points:
            space.index_of(point)
        return data
    if not data:
        raise EmptyAError("Cannot extend from an empty set")
    return PointFunction.from_mapping(space.subspace(data.keys()), data, simplex_valued)


def _mcshane_columns(
    space: FiniteMetricSpace, partial: PointFunction, lam: float
) -> np.ndarray:
    anchors = space.indices_of(partial.space.points)
    order = np.argsort([space.index_of(p) for p in partial.space.points])
    data = partial.values[order]

    def worker(a: int, b: int) -> np.ndarray:
        block = lam * space.distance_block(np.arange(a, b), anchors)
        return np.stack(
            [(block + data[None, :, k]).min(axis=1) for k in range(partial.width)],
            axis=1,
        )

    G = np.vstack(pair_batches.run_batched(len(space), worker, desc="McShane"))
    G[anchors] = data
    return G


def _require_lipschitz_on_a(partial: PointFunction, lam: float, c: float = 0.0):
    report = check_lipschitz(partial.space, partial, lam, c)
    if not report.satisfied:
        raise NotLipschitzOnAError(
            f"Data on A is not ({lam}, {c})-Lipschitz: ratio {report.worst_ratio} "
            f"at {report.worst_pair}",
            witness=report.worst_pair,
        )


def mcshane_extend(
    space: FiniteMetricSpace,
    values: Union[PointFunction, Mapping[Hashable, float]],
    lam: float,
    clamp: Optional[Tuple[float, float]] = None,
) -> PointFunction:
    """
    Largest lam-Lipschitz extension g(x) = min_a (values(a) + lam * dist(x, a)).

    Args:
        space: Space to extend over
        values: Data on A, as a PointFunction on a subspace or a {point: value} mapping
        lam: Nonnegative Lipschitz constant
        clamp: Optional (lo, hi) interval applied after extending

    Returns:
        PointFunction on ``space`` equal to the data on A

    Raises:
        EmptyAError: If A is empty
        NotLipschitzOnAError: If the data is not lam-Lipschitz on A
        VerificationFailedError: If the extension fails its Lipschitz re-check

    Examples:
        >>> from metric_core import from_coordinates
        >>> space = from_coordinates([[0], [5], [10]], points=[0, 5, 10])
        >>> mcshane_extend(space, {0: 0.0, 10: 1.0}, 0.1).scalar(5)
        0.5
    """
    if lam < 0:
        raise ValueError(f"Lipschitz constant must be nonnegative, got {lam}")
    partial = _as_partial(space, values, simplex_valued=False)
    _require_lipschitz_on_a(partial, lam)
    G = _mcshane_columns(space, partial, lam)
    if clamp is not None:
        lo, hi = clamp
        if lo > hi:
            raise ValueError(f"Empty clamp interval {clamp}")
        G = np.clip(G, lo, hi)
    g = PointFunction(space, G)
    report = check_lipschitz(space, g, lam)
    if not report.satisfied:
        raise VerificationFailedError(
            f"McShane extension is not {lam}-Lipschitz at {report.worst_pair}",
            witness=report.worst_pair,
        )
    return g


def project_rows_to_simplex(V: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row of V onto the standard simplex."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n, k = V.shape
    U = -np.sort(-V, axis=1)
    cssv = np.cumsum(U, axis=1) - 1.0
    positive = U - cssv / np.arange(1, k + 1) > 0
    rho = k - 1 - np.argmax(positive[:, ::-1], axis=1)
    theta = cssv[np.arange(n), rho] / (rho + 1.0)
    return np.maximum(V - theta[:, None], 0.0)


def project_to_simplex(v) -> SimplexPoint:
    """
    Nearest point of the standard simplex in the Euclidean norm.

    Examples:
        >>> project_to_simplex([1, 1]).coords
        (0.5, 0.5)
        >>> project_to_simplex([2, 0]).coords
        (1.0, 0.0)
    """
    v = np.asarray(v, dtype=float).ravel()
    if v.size == 0:
        raise ValueError("Cannot project an empty vector")
    return SimplexPoint(tuple(project_rows_to_simplex(v[None, :])[0]))


def simplex_extend(
    space: FiniteMetricSpace,
    f: Union[PointFunction, Mapping[Hashable, SimplexPoint]],
    lam: float,
) -> PointFunction:
    """
    Extend simplex-valued data: coordinatewise McShane, then project to the simplex.

    The result is (m+2)*lam-Lipschitz in l1 (m+2 coordinates), which is
    checked before returning.

    Raises:
        NotLipschitzOnAError: If the data is not lam-Lipschitz on A
        VerificationFailedError: If the measured constant exceeds (m+2)*lam
    """
    partial = _as_partial(space, f, simplex_valued=True)
    if not partial.simplex_valued:
        raise ValueError("simplex_extend needs simplex-valued data")
    _require_lipschitz_on_a(partial, lam)
    G = project_rows_to_simplex(_mcshane_columns(space, partial, lam))
    G[space.indices_of(partial.space.points)] = partial.values[
        np.argsort([space.index_of(p) for p in partial.space.points])
    ]
    g = PointFunction(space, G, simplex_valued=True)
    bound = partial.width * lam
    report = check_lipschitz(space, g, bound)
    if not report.satisfied:
        raise VerificationFailedError(
            f"Simplex extension exceeds {bound}-Lipschitz at {report.worst_pair}",
            witness=report.worst_pair,
        )
    return g


# -- refiners -----------------------------------------------------------------


@dataclass(frozen=True)
class RefinerOracle:
    """
    Capability turning a cover with Lebesgue number >= t into a verified
    refinement with Lebesgue number >= s and dimension <= ``dimension``.
    """

    name: str
    capability: Callable[[Cover], Optional[Cover]]
    s: float
    t: float
    dimension: int
    members: Optional[int] = None

    def __call__(self, cover: Cover) -> Cover:
        if self.members is not None and len(cover) != self.members:
            raise CoverRejectedError(
                f"Refiner {self.name} expects {self.members} members, got {len(cover)}"
            )
        leb = lebesgue_number(cover)
        if leb.value < self.t - config.TOLERANCE:
            raise CoverRejectedError(
                f"Refiner {self.name} needs Lebesgue number >= {self.t}, got {leb.value}",
                witness=leb.critical_point,
            )
        try:
            result = self.capability(cover)
        except RefinerFailedError:
            raise
        except CoarseGeometryError as e:
            raise RefinerFailedError(f"Refiner {self.name} failed: {e}") from e
        if result is None:
            raise RefinerFailedError(f"Refiner {self.name} found no refinement")
        return verify_refiner_output(result, cover, self.s, self.dimension, self.name)


def verify_refiner_output(
    refined: Cover, cover: Cover, s: float, dimension: int, name: str = "refiner"
) -> Cover:
    """Re-check refinement, multiplicity and Lebesgue number of a refiner output."""
    report = is_refinement(refined, cover)
    if not report:
        raise RefinerFailedError(
            f"{name}: member {report.failing_member} is in no input member",
            witness=report.failing_member,
        )
    mult = multiplicity(refined)
    if mult > dimension + 1:
        raise RefinerFailedError(
            f"{name}: multiplicity {mult} exceeds {dimension + 1}",
            witness=refined.space.points[int(np.argmax(refined.point_multiplicities()))],
        )
    leb = lebesgue_number(refined)
    if leb.value < s - config.TOLERANCE:
        raise RefinerFailedError(
            f"{name}: Lebesgue number {leb.value} is below {s}", witness=leb.critical_point
        )
    return refined


# -- sphere extension ---------------------------------------------------------


@dataclass
class CertBundle:
    """Per-stage measurements of a sphere extension run."""

    m: int
    delta: float
    identity: bool = False
    lebesgue_u: Optional[float] = None
    lebesgue_u_bound: Optional[float] = None
    refiner: Optional[str] = None
    refined_members: Optional[int] = None
    refined_multiplicity: Optional[int] = None
    refined_lebesgue: Optional[float] = None
    lip_g: Optional[float] = None
    lip_g_bound: Optional[float] = None
    lip_phi: Optional[float] = None
    lip_phi_bound: Optional[float] = None
    lip_h: Optional[float] = None
    lip_h_bound: Optional[float] = None
    agreement_ok: bool = False
    boundary_ok: bool = False

    @property
    def passed(self) -> bool:
        checks = [self.agreement_ok, self.boundary_ok]
        checks.append(self.lip_h is not None and self.lip_h <= self.lip_h_bound + config.TOLERANCE)
        if not self.identity:
            checks.append(self.lebesgue_u >= self.lebesgue_u_bound - config.TOLERANCE)
        return all(checks)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out

    def stages(self) -> pl.DataFrame:
        """One row per checked stage: measured value against its bound."""
        rows = [
            ("lebesgue_u", self.lebesgue_u, self.lebesgue_u_bound, "min"),
            ("lip_g", self.lip_g, self.lip_g_bound, "max"),
            ("lip_phi", self.lip_phi, self.lip_phi_bound, "max"),
            ("lip_h", self.lip_h, self.lip_h_bound, "max"),
        ]
        records = []
        for stage, measured, bound, kind in rows:
            if measured is None or bound is None:
                continue
            if kind == "min":
                ok = measured >= bound - config.TOLERANCE
            else:
                ok = measured <= bound + config.TOLERANCE
            records.append(
                {"stage": stage, "measured": float(measured), "bound": float(bound), "passed": ok}
            )
        return pl.DataFrame(
            records,
            schema={"stage": pl.Utf8, "measured": pl.Float64, "bound": pl.Float64, "passed": pl.Boolean},
        )


def _splice_weights(alpha: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    beta = np.clip(3.0 * alpha - 1.0, 0.0, 1.0)
    factor = np.zeros_like(alpha)
    open_part = beta < 1.0
    factor[open_part] = (1.0 - beta[open_part]) / (1.0 - alpha[open_part])
    return beta, factor


def sphere_extend(
    space: FiniteMetricSpace,
    f: Union[PointFunction, Mapping[Hashable, SimplexPoint]],
    delta: float,
    refiner: RefinerOracle,
) -> Tuple[PointFunction, CertBundle]:
    """
    Extend boundary-valued data f: A -> boundary of the simplex to all of X.

    Steps: g = simplex_extend(f, 2 delta); alpha = (m+2) min_i g_i;
    beta(z) = clip(3z - 1, 0, 1); U_i = {g_i > alpha/(m+2) or alpha > 2/3};
    V = shrink_to_indexed(refiner(U), U); phi = barycentric_map(V);
    h = (g - alpha/(m+2)) (1 - beta)/(1 - alpha) + beta phi, with the first
    term dropped where beta = 1.

    Args:
        space: 1-discrete space
        f: Boundary-valued simplex data on A
        delta: f must be (delta, delta)-Lipschitz on A
        refiner: Refiner for (m+2)-member covers with t <= 1/(24 delta C (m+2))
            and dimension <= m

    Returns:
        Tuple (h, CertBundle)

    Raises:
        NotDiscreteError: If the space is not 1-discrete
        PreconditionError: If f leaves the boundary or the refiner is incompatible
        NotLipschitzOnAError: If f is not (delta, delta)-Lipschitz on A
        LebesgueAssertionFailedError: If Leb(U) is below 1/(24 delta C (m+2))
        RefinerFailedError: If the refiner fails
        BoundaryViolationError: If some h(x) is off the boundary
        LipschitzBoundViolationError: If Lip(h) exceeds (m+2)^3 (82C + 4) delta
    """
    partial = _as_partial(space, f, simplex_valued=True)
    if not partial.simplex_valued:
        raise PreconditionError("sphere_extend needs simplex-valued data")
    m = partial.width - 2
    if m < 0:
        raise PreconditionError("Simplex data needs at least two coordinates")
    if not delta > 0:
        raise PreconditionError(f"delta must be positive, got {delta}")
    if not space.is_discrete(1.0):
        raise NotDiscreteError(
            f"Space is not 1-discrete (least distance {space.separation}); "
            "apply macro_version(space, 1) first"
        )
    off_boundary = ~partial.boundary_mask()
    if off_boundary.any():
        point = partial.space.points[int(np.argmax(off_boundary))]
        raise PreconditionError(f"f({point!r}) is not on the boundary", witness=point)
    C = extension_constant(m)
    r_bound = sphere_lebesgue_bound(m, delta)
    if refiner.t > r_bound + config.TOLERANCE:
        raise PreconditionError(
            f"Refiner {refiner.name} needs t = {refiner.t} but the spliced cover is "
            f"only guaranteed Lebesgue number {r_bound}"
        )
    if refiner.dimension > m:
        raise PreconditionError(
            f"Refiner {refiner.name} has dimension {refiner.dimension} > m = {m}"
        )
    _require_lipschitz_on_a(partial, delta, delta)

    cert = CertBundle(m=m, delta=delta, lip_h_bound=sphere_lipschitz_bound(m, delta))
    anchors = space.indices_of(partial.space.points)
    data = partial.values[np.argsort([space.index_of(p) for p in partial.space.points])]

    if len(anchors) == len(space):
        H = data.copy()
        cert.identity = True
        logger.info("A is the whole space; returning f")
    else:
        g = simplex_extend(space, partial, 2.0 * delta)
        cert.lip_g = lipschitz_constant(space, g)
        cert.lip_g_bound = 2.0 * delta * C
        G = g.values
        alpha = (m + 2) * G.min(axis=1)
        beta, factor = _splice_weights(alpha)

        U = (G > alpha[:, None] / (m + 2) + config.TOLERANCE) | (alpha[:, None] > 2.0 / 3.0)
        cover_u = Cover.from_masks(space, U.T)
        leb_u = lebesgue_number(cover_u)
        cert.lebesgue_u, cert.lebesgue_u_bound = leb_u.value, r_bound
        if leb_u.value < r_bound - config.TOLERANCE:
            raise LebesgueAssertionFailedError(
                f"Leb(U) = {leb_u.value} is below 1/(24 delta C (m+2)) = {r_bound}",
                witness=leb_u.critical_point,
            )

        refined = shrink_to_indexed(refiner(cover_u), cover_u)
        cert.refiner = refiner.name
        cert.refined_members = len(refined.nonempty_members())
        cert.refined_multiplicity = multiplicity(refined)
        cert.refined_lebesgue = lebesgue_number(refined).value
        phi = barycentric_map(refined)
        cert.lip_phi_bound = barycentric_lipschitz_bound(refined)
        cert.lip_phi = lipschitz_constant(space, phi)

        H = (G - alpha[:, None] / (m + 2)) * factor[:, None] + beta[:, None] * phi.values
        H = np.maximum(H, 0.0)
        drift = float(np.abs(H[anchors] - data).max())
        if drift > config.TOLERANCE:
            raise VerificationFailedError(
                f"Extension differs from f on A by {drift}",
                witness=space.points[int(anchors[np.argmax(np.abs(H[anchors] - data).max(axis=1))])],
            )
        H[anchors] = data
        logger.debug(
            f"Spliced cover Leb {leb_u.value:.6g} >= {r_bound:.6g}; "
            f"refined into {cert.refined_members} members"
        )

    sums = np.abs(H.sum(axis=1) - 1.0)
    if (sums > config.TOLERANCE).any():
        point = space.points[int(np.argmax(sums))]
        raise BoundaryViolationError(f"h({point!r}) does not sum to 1", witness=point)
    off = H.min(axis=1) > config.TOLERANCE
    if off.any():
        point = space.points[int(np.argmax(off))]
        raise BoundaryViolationError(f"h({point!r}) is in the open simplex", witness=point)
    cert.agreement_ok = True
    cert.boundary_ok = True

    h = PointFunction(space, H, simplex_valued=True)
    report = check_lipschitz(space, h, cert.lip_h_bound)
    cert.lip_h = report.worst_ratio
    if not report.satisfied:
        raise LipschitzBoundViolationError(
            f"Lip(h) = {report.worst_ratio} exceeds {cert.lip_h_bound}",
            witness=report.worst_pair,
        )
    logger.info(f"Sphere extension verified: Lip(h) {cert.lip_h:.6g} <= {cert.lip_h_bound:.6g}")
    return h, cert


@dataclass(frozen=True)
class SphereExtender:
    """sphere_extend packaged as an extension capability at a fixed delta."""

    delta: float
    refiner: RefinerOracle

    def extend(
        self, space: FiniteMetricSpace, partial: PointFunction
    ) -> Tuple[PointFunction, CertBundle]:
        return sphere_extend(space, partial, self.delta, self.refiner)

    def __call__(self, space: FiniteMetricSpace, partial: PointFunction) -> PointFunction:
        return self.extend(space, partial)[0]


def refine_via_extension(
    space: FiniteMetricSpace, cover: Cover, extender, epsilon: float
) -> Cover:
    """
    Refine an (m+2)-member cover by extending its barycentric map off the interior.

    phi = barycentric_map(cover); A = points where phi is on the boundary;
    g = extender(phi restricted to A); V_i = {g_i > 0}. When A is empty every
    member is X and g is the constant vertex e_0. The output refines the
    cover member by member, has dimension <= m and Lebesgue number
    >= s = 1 / (2 epsilon (m+1)); all three are checked.

    Args:
        space: Space of the cover
        cover: Cover with m + 2 members
        extender: Callable (space, partial) -> PointFunction with a ``delta`` attribute
        epsilon: Positive scale; fixes s = 1 / (2 epsilon (m+1))

    Raises:
        LebesgueTooSmallError: If Leb(cover) < 4 (m+2)^2 / delta
        ExtenderFailedError: If the extender fails or leaves the boundary
        VerificationFailedError: If the output fails a postcondition
    """
    m = len(cover) - 2
    if m < 0:
        raise PreconditionError("refine_via_extension needs at least two members")
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    delta = float(extender.delta)
    needed = 4.0 * (m + 2) ** 2 / delta
    leb = lebesgue_number(cover)
    if leb.value < needed - config.TOLERANCE:
        raise LebesgueTooSmallError(
            f"Lebesgue number {leb.value} is below 4(m+2)^2/delta = {needed}",
            witness=leb.critical_point,
        )
    s = 1.0 / (2.0 * epsilon * (m + 1))

    phi = barycentric_map(cover)
    on_boundary = phi.boundary_mask()
    if on_boundary.all():
        g = phi
    elif not on_boundary.any():
        # phi is interior everywhere only when every member is the whole space
        logger.info("phi has no boundary points; extending by the constant vertex e_0")
        g = PointFunction(
            space,
            np.tile(SimplexPoint.vertex(0, m + 2).as_array(), (len(space), 1)),
            simplex_valued=True,
        )
    else:
        subspace = space.subspace(space.points_at(np.nonzero(on_boundary)[0]))
        try:
            g = extender(space, phi.restrict(subspace))
        except CoarseGeometryError as e:
            raise ExtenderFailedError(f"Extender failed: {e}") from e
        if (g.values.min(axis=1) > config.TOLERANCE).any():
            raise ExtenderFailedError("Extender left the boundary of the simplex")

    refined = Cover.from_masks(space, (g.values > config.TOLERANCE).T)
    escaped = refined.masks & ~cover.masks
    if escaped.any():
        i, x = np.argwhere(escaped)[0]
        raise VerificationFailedError(
            f"V_{i} is not inside U_{i}", witness=space.points[int(x)]
        )
    mult = multiplicity(refined)
    if mult > m + 1:
        raise VerificationFailedError(f"Refinement has multiplicity {mult} > {m + 1}")
    refined_leb = lebesgue_number(refined)
    if refined_leb.value < s - config.TOLERANCE:
        raise VerificationFailedError(
            f"Refinement Lebesgue number {refined_leb.value} is below s = {s}",
            witness=refined_leb.critical_point,
        )
    logger.info(
        f"Refined {len(cover)}-member cover: multiplicity {mult}, Leb {refined_leb.value}"
    )
    return refined


# -- composition threshold ----------------------------------------------------


def _evaluate_modulus(alpha, t: float) -> float:
    if isinstance(alpha, Mapping):
        for key, value in alpha.items():
            if abs(float(key) - t) <= config.TOLERANCE:
                return float(value)
        raise ValueError(f"Modulus table has no entry at {t}")
    try:
        return float(alpha(t))
    except KeyError as e:
        raise ValueError(f"Modulus is not defined at {t}: {e}") from e


def composition_threshold(M: float, epsilon: float, alpha) -> float:
    """
    Threshold delta* = epsilon / (alpha((M - epsilon) / epsilon) + 1).

    If g is alpha-Lipschitz and f, with target of diameter <= M, is
    (delta, delta)-Lipschitz for some delta < delta*, then f o g is
    (epsilon, epsilon)-Lipschitz.

    Args:
        M: Bound on the diameter of the target of f
        epsilon: Requested constant, 0 < epsilon < M
        alpha: Nondecreasing modulus, as a callable or a {t: alpha(t)} table

    Raises:
        EpsilonNotBelowMError: If epsilon is not in (0, M)

    Examples:
        >>> composition_threshold(2.0, 1.0, lambda t: t)
        0.5
    """
    if not (0 < epsilon < M):
        raise EpsilonNotBelowMError(f"Need 0 < epsilon < M, got epsilon={epsilon}, M={M}")
    return epsilon / (_evaluate_modulus(alpha, (M - epsilon) / epsilon) + 1.0)
