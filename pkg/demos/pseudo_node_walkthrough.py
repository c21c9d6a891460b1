"""
A pseudo-node, step by step
===========================

F+ = (x, -1) above y = 0 and F- = (x, 1) below it.  Both pieces push
orbits onto the x-axis, where they slide away from the origin.
"""

import math

from filippov import (
    PlanarFilippovField,
    RegularizedField,
    TransitionFunction,
    ball_index,
    classify_sigma_point,
    find_singularities,
    index_at_singularity,
    regularized_index,
    sliding_field,
)

Z = PlanarFilippovField.from_strings(("x", "-1"), ("x", "1"), "y")

# what the switching line looks like at a few points
for x in (-0.6, 0.0, 0.3):
    c = classify_sigma_point(Z, (x, 0.0))
    print(f"x={x:+.1f}  {c.tag.value:<10} Lie+={c.lie_plus:+.2f} Lie-={c.lie_minus:+.2f}"
          f"  sliding field={sliding_field(Z, (x, 0.0))}")

sings = find_singularities(Z)
for s in sings:
    print(f"\n{s.kind.value} at {s.location}, index {index_at_singularity(Z, s, sings)}")

# the index on the unit circle, broken into its pieces
b = ball_index(Z, (0.0, 0.0), 1.0)
print(f"\nunit circle meets y=0 at t = {[round(t, 4) for t in b.crossings]}")
for sign, t0, t1, angle in b.arcs:
    print(f"  arc with F{'+' if sign > 0 else '-'}: t in [{t0:.3f}, {t1:.3f}] turns {angle / math.pi:+.4f} pi")
for point, before, after, angle in b.corners:
    x, y = point
    print(f"  corner at ({x:+.3f}, {y:+.3f}): F{before:+d} -> F{after:+d} turns {angle / math.pi:+.4f} pi")
print(f"  total / 2 pi = {b.raw:+.12f}  ->  index {b.index}")

# a smoothed version of the field has the same rotation number
for kind in ("polynomial", "trigonometric"):
    for eps in (0.1, 0.01, 0.001):
        R = RegularizedField(Z, eps, TransitionFunction.named(kind))
        print(f"{kind:<13} eps={eps:<6} index {regularized_index(R, (0.0, 0.0), 1.0)}")
