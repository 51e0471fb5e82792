"""
Finite-scale oscillation certificates.

(epsilon, delta)-continuity checks, continuity moduli, variation profiles
beyond a basepoint radius, the squares counterexample with its witness
search, and the annulus-pasting extension of [0, 1]-valued data.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Hashable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import polars as pl

import config
import pair_batches
from extension import (
    ExtenderFailedError,
    lipschitz_constant,
    mcshane_extend,
)
from metric_core import (
    CoarseGeometryError,
    FiniteMetricSpace,
    PointFunction,
    VerificationError,
    constant_function,
    interval_space,
)

logger = logging.getLogger(__name__)


class NoBasepointError(CoarseGeometryError):
    """Raised when a basepoint is needed but neither given nor set on the space."""

    pass


class NmaxTooSmallError(CoarseGeometryError):
    """Raised when the squares instance is requested with Nmax < 2."""

    pass


class PreconditionViolatedError(CoarseGeometryError):
    """Raised when annulus pasting is called on data outside its hypotheses."""

    pass


class PastingVerificationFailedError(VerificationError):
    """Raised when the pasted extension fails its continuity or agreement check."""

    pass


def _resolve_basepoint(space: FiniteMetricSpace, basepoint: Optional[Hashable]) -> Hashable:
    if basepoint is None:
        basepoint = space.basepoint
    if basepoint is None:
        raise NoBasepointError("A basepoint is required; pass one or set it on the space")
    space.index_of(basepoint)
    return basepoint


def _pair_image_distances(f: PointFunction, I: np.ndarray, J: np.ndarray) -> np.ndarray:
    if I.size == 0:
        return np.zeros(0)
    return np.abs(f.values[I] - f.values[J]).sum(axis=1)


# -- continuity ---------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityReport:
    """Outcome of an (epsilon, delta)-continuity check."""

    epsilon: float
    delta: float
    continuous: bool
    witness: Optional[Tuple[Hashable, Hashable]] = None
    image_distance: Optional[float] = None

    def __bool__(self) -> bool:
        return self.continuous


def continuity_check(
    space: FiniteMetricSpace, f: PointFunction, epsilon: float, delta: float
) -> ContinuityReport:
    """
    Check that dist(x, y) < delta implies |f(x) - f(y)| < epsilon.

    Both inequalities are strict, so pairs at distance exactly delta are
    unconstrained. On failure the witness is the violating pair with the
    largest image distance, the lexicographically first among ties.

    Examples:
        >>> space = interval_space(0, 9)
        >>> f = PointFunction.from_callable(space, lambda x: x * x)
        >>> continuity_check(space, f, 3, 2).witness
        (8, 9)
    """
    I, J, _ = space.pairs_within(delta, strict=True)
    T = _pair_image_distances(f, I, J)
    violating = T >= epsilon
    if not violating.any():
        return ContinuityReport(epsilon, delta, True)
    T = np.where(violating, T, -np.inf)
    k = int(np.argmax(T))
    return ContinuityReport(
        epsilon,
        delta,
        False,
        (space.points[I[k]], space.points[J[k]]),
        float(T[k]),
    )


@dataclass(frozen=True)
class ModulusTable:
    """Sampled continuity modulus delta -> alpha(delta), nondecreasing."""

    deltas: Tuple[float, ...]
    alphas: Tuple[float, ...]

    def __call__(self, delta: float) -> float:
        for d, a in zip(self.deltas, self.alphas):
            if abs(d - delta) <= config.TOLERANCE:
                return a
        raise KeyError(f"delta={delta} was not sampled")

    def at(self, delta: float) -> float:
        """Upper bound for alpha(delta) from the smallest sampled delta' >= delta."""
        candidates = [a for d, a in zip(self.deltas, self.alphas) if d >= delta - config.TOLERANCE]
        if not candidates:
            raise KeyError(f"delta={delta} is beyond the sampled range")
        return min(candidates)

    def as_dict(self) -> Dict[float, float]:
        return dict(zip(self.deltas, self.alphas))

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame({"delta": list(self.deltas), "alpha": list(self.alphas)})


def modulus(space: FiniteMetricSpace, f: PointFunction, deltas: Sequence[float]) -> ModulusTable:
    """
    alpha(delta) = largest image distance over pairs with dist < delta (0 if none).

    f is then (alpha(delta) + eta, delta)-continuous for every eta > 0.
    """
    deltas = sorted(float(d) for d in deltas)
    if not deltas or deltas[-1] <= 0:
        return ModulusTable(tuple(deltas), tuple(0.0 for _ in deltas))
    I, J, D = space.pairs_within(deltas[-1], strict=True)
    T = _pair_image_distances(f, I, J)
    order = np.argsort(D, kind="stable")
    D, T = D[order], T[order]
    running = np.maximum.accumulate(T) if T.size else T
    alphas = []
    for delta in deltas:
        count = int(np.searchsorted(D, delta - config.TOLERANCE, side="left"))
        alphas.append(float(running[count - 1]) if count > 0 else 0.0)
    return ModulusTable(tuple(deltas), tuple(alphas))


# -- slow oscillation ---------------------------------------------------------


@dataclass(frozen=True)
class VariationProfile:
    """
    entry(N) = largest image distance over pairs with dist <= R whose nearer
    point is at distance >= N from the basepoint.
    """

    R: float
    basepoint: Hashable
    entries: Tuple[Tuple[float, float], ...]

    def entry(self, N: float) -> float:
        for n, value in self.entries:
            if abs(n - N) <= config.TOLERANCE:
                return value
        raise KeyError(f"N={N} was not sampled")

    def certifies(self, epsilon: float, N: float) -> bool:
        """Slowly oscillating at scale (epsilon, R) beyond N: entry(N) < epsilon."""
        return self.entry(N) < epsilon

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "N": [n for n, _ in self.entries],
                "value": [v for _, v in self.entries],
                "R": [float(self.R)] * len(self.entries),
            }
        )


def variation_profile(
    space: FiniteMetricSpace,
    f: PointFunction,
    R: float,
    Ns: Sequence[float],
    basepoint: Optional[Hashable] = None,
) -> VariationProfile:
    """
    Variation of f over R-balls as their centers move away from the basepoint.

    Balls are centered at the moving points, not at the basepoint.

    Args:
        space: Domain of f
        f: Function to profile
        R: Pair radius (pairs with dist <= R)
        Ns: Basepoint radii to sample
        basepoint: Defaults to the space's basepoint

    Raises:
        NoBasepointError: If no basepoint is available

    Examples:
        >>> space = interval_space(0, 100, basepoint=0)
        >>> f = PointFunction.from_callable(space, float)
        >>> variation_profile(space, f, 1, [0, 50]).entries
        ((0.0, 1.0), (50.0, 1.0))
    """
    basepoint = _resolve_basepoint(space, basepoint)
    d0 = space.distances_from(basepoint)
    I, J, _ = space.pairs_within(R)
    T = _pair_image_distances(f, I, J)
    key = np.minimum(d0[I], d0[J]) if I.size else np.zeros(0)
    order = np.argsort(key, kind="stable")
    key, T = key[order], T[order]
    suffix = np.maximum.accumulate(T[::-1])[::-1] if T.size else T

    entries = []
    for N in sorted(float(n) for n in Ns):
        start = int(np.searchsorted(key, N - config.TOLERANCE, side="left"))
        entries.append((N, float(suffix[start]) if start < key.size else 0.0))
    logger.debug(f"Variation profile at R={R}: {len(entries)} samples, {I.size} pairs")
    return VariationProfile(float(R), basepoint, tuple(entries))


class SquaresInstance(NamedTuple):
    """The window [0, Nmax^2], its subset of squares and the inclusion on it."""

    space: FiniteMetricSpace
    squares: FiniteMetricSpace
    inclusion: PointFunction


def squares_instance(Nmax: int) -> SquaresInstance:
    """
    Integer window [0, Nmax^2] with basepoint 0, the squares k^2 (0 <= k <= Nmax)
    and the inclusion of the squares into the reals.

    Raises:
        NmaxTooSmallError: If Nmax < 2
    """
    if int(Nmax) != Nmax or Nmax < 2:
        raise NmaxTooSmallError(f"Nmax must be an integer >= 2, got {Nmax}")
    Nmax = int(Nmax)
    space = interval_space(0, Nmax * Nmax, basepoint=0)
    squares = space.subspace(k * k for k in range(Nmax + 1))
    inclusion = PointFunction.from_callable(squares, float)
    return SquaresInstance(space, squares, inclusion)


def oscillation_witness(
    space: FiniteMetricSpace,
    g: PointFunction,
    epsilon: float,
    R: float,
    N: float,
    basepoint: Optional[Hashable] = None,
) -> Optional[Tuple[Hashable, Hashable]]:
    """
    First pair (lexicographic) with dist <= R, both points at distance >= N
    from the basepoint, and image distance >= epsilon; None if there is none.
    """
    basepoint = _resolve_basepoint(space, basepoint)
    d0 = space.distances_from(basepoint)
    I, J, _ = space.pairs_within(R)
    if I.size == 0:
        return None
    far = np.minimum(d0[I], d0[J]) >= N - config.TOLERANCE
    hits = far & (_pair_image_distances(g, I, J) >= epsilon)
    if not hits.any():
        return None
    k = int(np.argmax(hits))
    return space.points[I[k]], space.points[J[k]]


# -- built-in extenders -------------------------------------------------------


def _anchor_data(space: FiniteMetricSpace, partial: PointFunction) -> Tuple[np.ndarray, np.ndarray]:
    anchors = np.array([space.index_of(p) for p in partial.space.points], dtype=np.int64)
    order = np.argsort(anchors)
    return anchors[order], partial.values[order]


def linear_extension(space: FiniteMetricSpace, partial: PointFunction) -> PointFunction:
    """
    Piecewise-linear interpolation of data on a one-dimensional coordinate space,
    constant beyond the outermost data points.
    """
    if space.coordinates is None or space.coordinates.shape[1] != 1:
        raise ValueError("Linear interpolation needs a one-dimensional coordinate space")
    anchors, data = _anchor_data(space, partial)
    x = space.coordinates[:, 0]
    xa = x[anchors]
    order = np.argsort(xa)
    columns = [np.interp(x, xa[order], data[order, k]) for k in range(partial.width)]
    values = np.stack(columns, axis=1)
    values[anchors] = data
    return PointFunction(space, values, partial.simplex_valued)


def nearest_point_extension(space: FiniteMetricSpace, partial: PointFunction) -> PointFunction:
    """Value of the nearest data point; ties go to the data point listed first in the space."""
    anchors, data = _anchor_data(space, partial)

    def worker(a: int, b: int) -> np.ndarray:
        return np.argmin(space.distance_block(np.arange(a, b), anchors), axis=1)

    nearest = np.concatenate(pair_batches.run_batched(len(space), worker, desc="Nearest point"))
    return PointFunction(space, data[nearest], partial.simplex_valued)


@dataclass(frozen=True)
class McShaneBoundedExtender:
    """
    McShane extension at lam = max(lam_hint, Lip(data)), clamped to ``clamp``.

    Without data the result is the constant ``fill``.
    """

    lam_hint: float = 0.0
    clamp: Tuple[float, float] = (0.0, 1.0)

    def __call__(
        self,
        space: FiniteMetricSpace,
        partial: Optional[PointFunction],
        fill: float = 0.0,
    ) -> PointFunction:
        if partial is None:
            return constant_function(space, float(np.clip(fill, *self.clamp)))
        lam = max(self.lam_hint, lipschitz_constant(partial.space, partial))
        return mcshane_extend(space, partial, lam, clamp=self.clamp)


# -- annulus pasting ----------------------------------------------------------


def _band(d0: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return (d0 >= lo - config.TOLERANCE) & (d0 < hi - config.TOLERANCE)


def _run_extender(
    extender,
    space: FiniteMetricSpace,
    region: np.ndarray,
    data: Dict[int, np.ndarray],
    fill: float,
    epsilon: float,
    M: float,
    label: str,
) -> np.ndarray:
    """Extend ``data`` (global index -> value) over ``region``; return values on the region."""
    sub = space.subspace(space.points_at(np.nonzero(region)[0]))
    partial = None
    if data:
        known = sub.subspace(space.points[i] for i in data)
        partial = PointFunction(
            known, np.vstack([data[space.index_of(p)] for p in known.points])
        )
    try:
        g = extender(sub, partial, fill)
    except CoarseGeometryError as e:
        raise ExtenderFailedError(f"{label}: extender failed: {e}") from e
    if partial is not None:
        drift = np.abs(g.restrict(partial.space).values - partial.values).max()
        if drift > config.TOLERANCE:
            raise ExtenderFailedError(f"{label}: extension moved the data by {drift}")
    report = continuity_check(sub, g, epsilon, M)
    if not report:
        raise ExtenderFailedError(
            f"{label}: extension is not ({epsilon}, {M})-continuous", witness=report.witness
        )
    return g.values


def annulus_extend(
    space: FiniteMetricSpace,
    f: PointFunction,
    R: float,
    mu: float,
    S: float,
    epsilon: float,
    M: float,
    bounded_extender=None,
    lam: Optional[float] = None,
    basepoint: Optional[Hashable] = None,
) -> PointFunction:
    """
    Extend [0, 1]-valued data f on A to an (epsilon, M)-continuous function on X.

    With d0 the distance to the basepoint, the annuli
    C_k = {(2k - 1)R <= d0 < (2k + 2)R} are extended one at a time into g_k.
    Each h_k then extends, over {2kR <= d0 < (2k + 3)R}, the values of g_k on
    {2kR <= d0 < (2k + 1)R}, of g_(k+1) on {(2k + 2)R <= d0 < (2k + 3)R} and of
    f on A. The result takes g_k on the first band and h_k on
    {(2k + 1)R <= d0 < (2k + 2)R}.

    Args:
        space: Domain X
        f: Data on a subspace A, values in [0, 1]
        R: Annulus width; M < R and S < R / 3 are required
        mu: Input continuity constant of the bounded extender
        S: Input continuity scale of the bounded extender
        epsilon: Output continuity constant
        M: Output continuity scale
        bounded_extender: Callable (space, partial or None, fill) -> PointFunction;
            defaults to McShaneBoundedExtender()
        lam: Optional second constant; f must be (min(mu, lam), 4R)-continuous
        basepoint: Defaults to the space's basepoint

    Raises:
        NoBasepointError: If no basepoint is available
        PreconditionViolatedError: If a hypothesis on f or the parameters fails
        ExtenderFailedError: If a stage extension fails its contract
        PastingVerificationFailedError: If the pasted function fails verification
    """
    basepoint = _resolve_basepoint(space, basepoint)
    extender = bounded_extender or McShaneBoundedExtender()
    if f.width != 1:
        raise PreconditionViolatedError("Annulus pasting extends scalar data")
    if not (R > 0 and mu > 0 and epsilon > 0 and M > 0 and S > 0):
        raise PreconditionViolatedError("R, mu, S, epsilon and M must be positive")
    if M >= R:
        raise PreconditionViolatedError(f"Need M < R, got M={M}, R={R}")
    if S >= R / 3:
        raise PreconditionViolatedError(f"Need S < R/3, got S={S}, R={R}")
    if f.values.min() < -config.TOLERANCE or f.values.max() > 1 + config.TOLERANCE:
        raise PreconditionViolatedError("Data must take values in [0, 1]")
    delta = mu if lam is None else min(mu, lam)
    report = continuity_check(f.space, f, delta, 4 * R)
    if not report:
        raise PreconditionViolatedError(
            f"Data is not ({delta}, {4 * R})-continuous on A", witness=report.witness
        )

    anchors = np.array([space.index_of(p) for p in f.space.points], dtype=np.int64)
    on_a = np.zeros(len(space), dtype=bool)
    on_a[anchors] = True
    a_values = {int(i): f.values[k] for k, i in enumerate(anchors)}
    if on_a.all():
        logger.info("A is the whole space; returning f")
        return f.restrict(space) if f.space is not space else f

    d0 = space.distances_from(basepoint)
    last = int(math.floor(float(d0.max()) / (2 * R)))

    def fill_for(region: np.ndarray) -> float:
        idx = np.nonzero(region)[0]
        nearest = space.distance_block(idx[:1], anchors)[0]
        return float(f.values[int(np.argmin(nearest)), 0])

    g: Dict[int, np.ndarray] = {}
    for k in range(last + 2):
        region = _band(d0, (2 * k - 1) * R, (2 * k + 2) * R)
        if not region.any():
            continue
        data = {i: v for i, v in a_values.items() if region[i]}
        values = _run_extender(
            extender, space, region, data, fill_for(region), epsilon, M, f"annulus {k}"
        )
        full = np.full(len(space), np.nan)
        full[region] = values[:, 0]
        g[k] = full

    out = np.full(len(space), np.nan)
    for k in range(last + 1):
        inner = _band(d0, 2 * k * R, (2 * k + 1) * R)
        middle = _band(d0, (2 * k + 1) * R, (2 * k + 2) * R)
        outer = _band(d0, (2 * k + 2) * R, (2 * k + 3) * R)
        if inner.any():
            out[inner] = g[k][inner]
        if not middle.any():
            continue
        region = inner | middle | outer
        data = {i: v for i, v in a_values.items() if region[i]}
        for i in np.nonzero(inner)[0]:
            data.setdefault(int(i), np.array([g[k][i]]))
        for i in np.nonzero(outer)[0]:
            data.setdefault(int(i), np.array([g[k + 1][i]]))
        values = _run_extender(
            extender, space, region, data, fill_for(region), epsilon, M, f"bridge {k}"
        )
        bridged = np.full(len(space), np.nan)
        bridged[region] = values[:, 0]
        out[middle] = bridged[middle]

    if np.isnan(out).any():
        point = space.points[int(np.argmax(np.isnan(out)))]
        raise PastingVerificationFailedError(f"No annulus covers {point!r}", witness=point)
    drift = np.abs(out[anchors] - f.values[:, 0])
    if drift.max() > config.TOLERANCE:
        point = f.space.points[int(np.argmax(drift))]
        raise PastingVerificationFailedError(
            f"Pasted extension differs from f at {point!r}", witness=point
        )
    out[anchors] = f.values[:, 0]
    pasted = PointFunction(space, out)
    report = continuity_check(space, pasted, epsilon, M)
    if not report:
        raise PastingVerificationFailedError(
            f"Pasted extension is not ({epsilon}, {M})-continuous at {report.witness}",
            witness=report.witness,
        )
    logger.info(f"Pasted {len(g)} annulus extensions; ({epsilon}, {M})-continuity verified")
    return pasted
