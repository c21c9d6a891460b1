"""
How robust is the index?
========================

Small changes that respect the four perturbation bounds keep the index,
and so does any deformation that never puts a singularity on the circle.
"""

import numpy as np

from filippov import PlanarFilippovField, filippov_index_on_ball, verify_perturbation_bounds

P = PlanarFilippovField.from_strings
Z = P(("x", "-1"), ("x", "1"), "y")
center, radius = (0.0, 0.0), 0.9

rng = np.random.default_rng(3)
for _ in range(5):
    a, b, c, d = np.round(rng.normal(0, 0.15, 4), 3)
    Zt = P((f"x+{a}", f"-1+{b}*x"), (f"x+{c}", f"1+{d}*y"), "y")
    rep = verify_perturbation_bounds(Z, Zt, center, radius)
    verdict = "admissible" if rep.passed else f"violates {', '.join(rep.failed)}"
    print(f"shift {a:+.3f} {b:+.3f} {c:+.3f} {d:+.3f}: {verdict:<32}"
          f" index {filippov_index_on_ball(Zt, center, radius):+d}")

# slide the pseudo-node along y = 0; the index changes only once it leaves the ball
print()
for shift in np.linspace(0.0, 1.4, 8):
    W = P((f"x-{shift:.2f}", "-1"), (f"x-{shift:.2f}", "1"), "y", domain=(-1, -1, 2.5, 1))
    try:
        k = filippov_index_on_ball(W, center, radius)
    except Exception as exc:
        k = type(exc).__name__
    print(f"pseudo-node at x={shift:.2f}: index {k}")
