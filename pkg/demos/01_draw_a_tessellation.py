# %% [markdown]
# # Drawing planar and spatial tessellations
#
# Cells are split one at a time: every live cell waits an exponential time with
# rate equal to its hyperplane capacity, then splits along a random hitting
# hyperplane.  We grow one planar and one spatial example and export them.

# %%
import numpy as np

from stit import ConvexPolytope, HyperplaneMeasureSpec, run_mnw
from stit.harness.render import render

rng = np.random.default_rng(7)
square = ConvexPolytope.cube(2, 10.0)
planar = run_mnw(square, HyperplaneMeasureSpec.isotropic(2), 1.0, rng)
print(planar.n_cells, "cells, total edge length", planar.measures.sum())

# %%
render(planar, "svg", "planar.svg", color_by_birth=True)

# %% [markdown]
# Axis-parallel cuts in a cube use the box engine; the OBJ file holds the
# window faces and every maximal polygon.

# %%
cube = ConvexPolytope.cube(3, 4.0)
spatial = run_mnw(cube, HyperplaneMeasureSpec.axis_aligned(3), 1.0, rng)
render(spatial, "obj", "spatial.obj")
print(spatial.n_facets, "maximal polygons")

# %% [markdown]
# Continuing a state keeps its history, so snapshots at several times belong
# to one trajectory.

# %%
from stit import continue_mnw

later = continue_mnw(planar, 2.0, rng)
assert np.array_equal(later.births[:planar.n_facets], planar.births)
print(planar.n_facets, "->", later.n_facets, "segments")
