"""
Writing meshes and scenes
=========================

OBJ for any mesh viewer, a POV-Ray scene with one CSG intersection per curved
triangle, and a JSON dump that reloads bit-exactly.
"""

import os
import tempfile

import numpy as np

from hypsurface.assembly import build_complex, merge_vertices
from hypsurface.surface_io import export_json, export_obj, export_povray, load_json

cx = build_complex(0.53, 3)
out = tempfile.mkdtemp(prefix="hypsurface-")

export_obj(cx, 1, os.path.join(out, "surface.obj"))
export_povray(cx, os.path.join(out, "surface.pov"), view="top")
export_json(cx, None, os.path.join(out, "surface.json"))

dump = load_json(os.path.join(out, "surface.json"))
print("files in", out, ":", sorted(os.listdir(out)))
print("json vertices identical:", np.array_equal(dump.vertices, merge_vertices(cx).coords))
print("render with: povray +W1200 +H1200 Declare=View=1", os.path.join(out, "surface.pov"), "(View 0 top, 1 side)")
