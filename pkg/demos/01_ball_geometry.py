"""
Distances, mirrors and geodesics in the Poincare ball
======================================================

A hyperbolic reflection is an inversion in a sphere orthogonal to the unit
sphere. Reflecting across the bisector of p and O swaps the two points.
"""

import numpy as np

from hypsurface import hypermath as hm

p = np.array([0.5, 0.0, 0.0])
print("d(O, p)       =", hm.hyp_distance(hm.ORIGIN, p), "(ln 3 =", np.log(3), ")")

m = hm.bisector_with_origin(p)
print("mirror        :", m)
print("|c|^2 - r^2   =", m.center @ m.center - m.radius**2)
print("reflect(m, p) =", hm.reflect(m, p))

# distances survive any chain of reflections and rotations
rng = np.random.default_rng(0)
x, y = rng.uniform(-0.4, 0.4, (2, 3))
chain = hm.Isometry((m, hm.bisector_with_origin([0.1, 0.3, -0.2])))
print("before/after  :", hm.hyp_distance(x, y), hm.hyp_distance(chain(x), chain(y)))

# points along a geodesic are evenly spaced in hyperbolic length
u, v = np.array([-0.6, 0.2, 0.0]), np.array([0.7, 0.1, 0.3])
ts = np.linspace(0, 1, 6)
pts = np.array([hm.geodesic_point(u, v, t) for t in ts])
print("steps         :", np.round(hm.hyp_distance(pts[:-1], pts[1:]), 12))
