"""
Where does the surface stop crossing itself?
=============================================

Small side lengths behave like the flat construction and intersect within a
few iterations. Longer sides push the growth toward the boundary fast enough
that no crossings appear. ``ITERATIONS = 11`` reproduces the full-scale run
(about ten seconds per side length on one core).
"""

from hypsurface.sweep import find_threshold, run_experiment

ITERATIONS = 8

for s in (0.1, 0.3, 0.4, 0.45, 0.48, 0.5, 0.54, 0.75):
    r = run_experiment(s, ITERATIONS)
    state = f"intersects at iteration {r.first_iteration}" if r.intersecting else "clean"
    print(f"s = {s:4.2f}: {state:28s} {r.triangle_count:7d} triangles  {r.wall_time:5.1f}s")

res = find_threshold(0.30, 0.60, iterations=ITERATIONS, tol=0.01)
print(f"threshold after {ITERATIONS} iterations in ({res.bracket_low:.4f}, {res.bracket_high:.4f}]")
