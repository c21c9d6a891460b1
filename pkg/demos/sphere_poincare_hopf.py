"""
Counting singularities on a sphere
==================================

Two hemispheres glued along the equator, each carrying a vector field in
its own stereographic chart.  The equator is the switching curve.
"""

from filippov import poincare_hopf_check, sphere_field, torus_field

# rotation about the poles with a slight pull toward each pole
spin = ("-y-0.1*x", "x-0.1*y")
# a field whose equator slides, creating two pseudo-equilibria
drift = ("0.1*x-x*y", "0.1*y+x^2")

for label, north in (("spin", spin), ("drift", drift)):
    report = poincare_hopf_check(sphere_field(north, north, label))
    print(f"sphere / {label}")
    for s in report.singularities:
        x, y = s.location
        print(f"  {s.kind:<20} chart {s.chart:<5} ({x:+.4f}, {y:+.4f})  index {s.index:+d}"
              f"  seen in {', '.join(s.seen_in)}")
    print(f"  {report.summary_line()}\n")

# on the torus the indices cancel
report = poincare_hopf_check(torus_field(("sin(2*pi*x)", "-1"), ("sin(2*pi*x)", "1"), "sin(2*pi*y)"))
print("torus")
for s in report.singularities:
    print(f"  {s.kind:<20} chart {s.chart}  index {s.index:+d}")
print(f"  {report.summary_line()}")
