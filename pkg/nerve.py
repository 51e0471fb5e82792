"""Nerve complexes of covers and the barycentric map into them."""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import FrozenSet, List

import numpy as np

import config
from covers import Cover, lebesgue_number, multiplicity
from metric_core import CoarseGeometryError, PointFunction

logger = logging.getLogger(__name__)


class ZeroLebesgueError(CoarseGeometryError):
    """Raised when a cover has Lebesgue number 0, so the barycentric map is undefined."""

    pass


@dataclass(frozen=True)
class NerveComplex:
    """Simplicial complex on member indices; a simplex is a set of members with a common point."""

    vertices: FrozenSet[int]
    simplices: FrozenSet[FrozenSet[int]]

    @property
    def dimension(self) -> int:
        return max((len(s) for s in self.simplices), default=0) - 1

    def is_simplex(self, members) -> bool:
        return frozenset(members) in self.simplices

    @property
    def maximal_simplices(self) -> List[FrozenSet[int]]:
        maximal = [
            s for s in self.simplices if not any(s < other for other in self.simplices)
        ]
        return sorted(maximal, key=lambda s: (len(s), sorted(s)))

    def faces_of_dimension(self, k: int) -> List[FrozenSet[int]]:
        return sorted((s for s in self.simplices if len(s) == k + 1), key=sorted)


def nerve_of(cover: Cover) -> NerveComplex:
    """
    Enumerate the nerve of a cover.

    Every simplex is a subset of the membership signature of some point, so
    the complex is generated from the distinct signatures.

    Examples:
        >>> from metric_core import interval_space
        >>> nerve = nerve_of(Cover(interval_space(0, 2), [{0, 1}, {1, 2}]))
        >>> sorted(map(sorted, nerve.simplices))
        [[0], [0, 1], [1]]
    """
    signatures = {frozenset(np.nonzero(column)[0].tolist()) for column in cover.masks.T}
    simplices = set()
    for signature in signatures:
        members = sorted(signature)
        for size in range(1, len(members) + 1):
            for face in itertools.combinations(members, size):
                simplices.add(frozenset(face))
    vertices = frozenset(i for i in range(len(cover)) if cover.masks[i].any())
    return NerveComplex(vertices, frozenset(simplices))


def barycentric_lipschitz_bound(cover: Cover) -> float:
    """Bound 4 m^2 / Leb on the l1-Lipschitz constant of the barycentric map."""
    leb = lebesgue_number(cover).value
    if math.isinf(leb):
        return math.inf
    return 4.0 * multiplicity(cover) ** 2 / leb


def barycentric_map(cover: Cover) -> PointFunction:
    """
    Partition of unity phi_i(x) = f_i(x) / sum_t f_t(x) with f_i = dist(x, X \\ U_i).

    A member equal to the whole space has no complement; its distance is
    capped at diameter + 1 so the map stays defined.

    Raises:
        ZeroLebesgueError: If the Lebesgue number is 0
    """
    leb = lebesgue_number(cover)
    if leb.value <= config.TOLERANCE:
        raise ZeroLebesgueError(
            "Barycentric map needs a positive Lebesgue number", witness=leb.critical_point
        )
    F = cover.complement_distances.copy()
    F[np.isinf(F)] = cover.space.diameter + 1.0
    phi = (F / F.sum(axis=0)).T
    logger.debug(f"Barycentric map into a {len(cover)}-vertex nerve computed")
    return PointFunction(cover.space, phi, simplex_valued=True)


def support_is_simplex(phi: PointFunction, nerve: NerveComplex) -> bool:
    """True when the support of every phi(x) is a simplex of the nerve."""
    for row in phi.values:
        support = frozenset(np.nonzero(row > config.TOLERANCE)[0].tolist())
        if support not in nerve.simplices:
            return False
    return True
