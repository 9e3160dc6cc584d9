"""
Growing the {3,7} surface
=========================

Seed: one prism at the origin with an antiprism on each square. Every
iteration glues a prism to each open square and two antiprisms to each new
prism. Seven triangles meet at every vertex away from the frontier.
"""

import numpy as np

from hypsurface.assembly import build_complex, expected_counts, merge_vertices, vertex_valence
from hypsurface.solids import SolidKind

side = 0.53
for n in range(5):
    cx = build_complex(side, n)
    table = merge_vertices(cx)
    valence, on_open = vertex_valence(cx, table)
    print(f"iteration {n}: {cx.count(SolidKind.TRIANGULAR_PRISM):5d} prisms "
          f"{cx.count(SolidKind.SQUARE_ANTIPRISM):5d} antiprisms "
          f"{len(cx.open_frames):4d} open squares "
          f"{len(table):6d} vertices, interior valences {sorted(set(valence[~on_open].tolist()))}")

print("closed form at 11 iterations:", expected_counts(11))

# the frontier runs off toward the boundary sphere
radii = np.linalg.norm(cx.all_vertices(), axis=1)
print("max |x| after 4 iterations: %.6f" % radii.max())
