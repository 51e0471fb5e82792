#!/usr/bin/env python3
"""
Example usage of the coarse extension toolkit.

This script demonstrates:
1. Cover invariants (Lebesgue number, multiplicity, mesh) and the nerve
2. Brick covers and dimension reduction
3. Sphere-valued extension with its certificate
4. The squares counterexample for naive extensions
5. Annulus pasting of slowly oscillating data
6. Error handling
"""

import math

from asdim import reduce_dimension, search_refiner, verify_ostrand
from covers import (
    Cover,
    NotACoverError,
    brick_cover_Z,
    brick_cover_Z2,
    lebesgue_number,
    mesh,
    multiplicity,
)
from extension import (
    NotLipschitzOnAError,
    check_lipschitz,
    sphere_extend,
    sphere_lebesgue_bound,
    sphere_lipschitz_bound,
)
from metric_core import MetricError, PointFunction, SimplexPoint, from_distance_matrix, interval_space
from nerve import barycentric_lipschitz_bound, barycentric_map, nerve_of
from oscillation import (
    annulus_extend,
    continuity_check,
    linear_extension,
    nearest_point_extension,
    oscillation_witness,
    squares_instance,
)


def example_cover_invariants():
    """Lebesgue number, multiplicity, mesh and the barycentric map of two halves."""
    print("\n" + "=" * 60)
    print("🚀 EXAMPLE 1: Cover invariants")
    print("=" * 60)

    space = interval_space(0, 9)
    cover = Cover(space, [range(0, 7), range(4, 10)])
    report = lebesgue_number(cover)
    print(f"\n📏 Leb = {report.value} (attained at {report.critical_point})")
    print(f"📊 multiplicity = {multiplicity(cover)}, mesh = {mesh(cover)}")

    nerve = nerve_of(cover)
    print(f"🔺 nerve: {len(nerve.vertices)} vertices, dimension {nerve.dimension}")

    phi = barycentric_map(cover)
    print(f"🎯 phi(5) = {tuple(phi(5))}, Lipschitz bound {barycentric_lipschitz_bound(cover)}")


def example_bricks():
    """Brick covers are Ostrand witnesses; dimension reduction flattens them."""
    print("\n" + "=" * 60)
    print("🧱 EXAMPLE 2: Brick covers and dimension reduction")
    print("=" * 60)

    bricks = brick_cover_Z((0, 200), 10)
    for r in (10, 12):
        report = verify_ostrand(bricks, r, 1)
        print(f"\n  Z bricks at r = {r}: verdict {report.verdict}, mesh {report.mesh}")

    wall = brick_cover_Z2((0, 32), 2)
    print(f"\n  Z^2 wall: {len(wall.flattened)} bricks in {len(wall.families)} families")
    refiner = search_refiner(s=1, t=2, dimension=1, members=3)
    reduced = reduce_dimension(wall.space, wall, refiner)
    print(
        f"  reduced: multiplicity {multiplicity(reduced)}, "
        f"Leb {lebesgue_number(reduced).value}, mesh {mesh(reduced)}"
    )


def example_sphere_extension():
    """Extend data at both ends of [0, 600] into the boundary of the 2-simplex."""
    print("\n" + "=" * 60)
    print("🌐 EXAMPLE 3: Sphere-valued extension")
    print("=" * 60)

    delta = 1e-3
    space = interval_space(0, 600)
    ends = list(range(0, 21)) + list(range(580, 601))
    data = {x: SimplexPoint((1 - x / 2400, x / 2400, 0.0)) for x in ends}
    refiner = search_refiner(s=1, t=sphere_lebesgue_bound(1, delta), dimension=1, members=3)

    print(f"\n🔧 refiner t = {refiner.t:.2f}")
    h, cert = sphere_extend(space, data, delta, refiner)
    print(f"✅ certificate passed: {cert.passed}")
    print(cert.stages())
    bound = sphere_lipschitz_bound(1, delta)
    print(f"  h is {bound:.3f}-Lipschitz: {check_lipschitz(space, h, bound).satisfied}")


def example_squares_counterexample():
    """Naive extensions of the squares inclusion never stop oscillating."""
    print("\n" + "=" * 60)
    print("🔢 EXAMPLE 4: Squares counterexample")
    print("=" * 60)

    instance = squares_instance(20)
    for name, extend in (("linear", linear_extension), ("nearest", nearest_point_extension)):
        g = extend(instance.space, instance.inclusion)
        witnesses = [oscillation_witness(instance.space, g, 1, 1, N) for N in (0, 200, 370)]
        print(f"\n  {name}: witnesses {witnesses}")


def example_annulus_pasting():
    """frac(sqrt x) on its middle halves extends continuously."""
    print("\n" + "=" * 60)
    print("🌀 EXAMPLE 5: Annulus pasting")
    print("=" * 60)

    k0 = 100
    space = interval_space(k0 * k0, (k0 + 5) ** 2, basepoint=k0 * k0)

    def frac_sqrt(x):
        return math.sqrt(x) - math.floor(math.sqrt(x))

    on_a = [x for x in space.points if 0.25 <= frac_sqrt(x) <= 0.75]
    f = PointFunction.from_callable(space.subspace(on_a), frac_sqrt)
    g = annulus_extend(space, f, R=12, mu=0.3, S=3, epsilon=0.5, M=2)
    print(f"\n  |A| = {len(on_a)} of {len(space)} points")
    print(f"  extension is (0.5, 2)-continuous: {bool(continuity_check(space, g, 0.5, 2))}")


def example_error_handling():
    """Inputs are checked and failures carry a witness."""
    print("\n" + "=" * 60)
    print("⚠️  EXAMPLE 6: Error handling")
    print("=" * 60)

    try:
        from_distance_matrix([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    except MetricError as e:
        print(f"\n  MetricError: {e} (witness {e.witness})")

    space = interval_space(0, 9)
    try:
        Cover(space, [range(0, 5)])
    except NotACoverError as e:
        print(f"  NotACoverError: {e}")

    jumpy = {0: SimplexPoint((1.0, 0.0, 0.0)), 1: SimplexPoint((0.0, 1.0, 0.0))}
    refiner = search_refiner(s=1, t=sphere_lebesgue_bound(1, 1e-3), dimension=1, members=3)
    try:
        sphere_extend(space, jumpy, 1e-3, refiner)
    except NotLipschitzOnAError as e:
        print(f"  NotLipschitzOnAError: {e}")


def main():
    """Run all examples."""
    print("🎯 Coarse Extension Toolkit - Example Usage")

    try:
        example_cover_invariants()
        example_bricks()
        example_sphere_extension()
        example_squares_counterexample()
        example_annulus_pasting()
        example_error_handling()

        print("\n" + "=" * 60)
        print("🎉 All examples completed successfully!")
        print("=" * 60)

    except Exception as e:
        print(f"\n❌ Example failed with error: {e}")
        raise


if __name__ == "__main__":
    main()
