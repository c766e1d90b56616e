# %% [markdown]
# # Exact moments against simulation
#
# The mean total facet area at time t is t times the window volume (for the
# measures normalized to unit surface density).  The variance has an integral
# representation that we evaluate by randomized quasi-Monte Carlo.

# %%
import numpy as np

from stit import ConvexPolytope, FaceFunctional, HyperplaneMeasureSpec, surface_totals, variance_exact

square = ConvexPolytope.cube(2)
axis = HyperplaneMeasureSpec.axis_aligned(2)
rng = np.random.default_rng(1)
totals = np.array([surface_totals(square, axis, [1.0], rng)[0] for _ in range(20000)])
print("mean", totals.mean(), "expected", axis.surface_density)

# %%
exact, err = variance_exact(axis, square, 1.0, FaceFunctional.constant())
print(f"variance: simulated {totals.var(ddof=1):.4f}, exact {exact:.6f} +- {err:.1e}")

# %% [markdown]
# The time derivative of the variance is the mean section compensator, which a
# Monte Carlo over random hitting lines estimates on any simulated state.

# %%
from stit import estimate_a_phi2, expected_compensator, run_mnw

state = run_mnw(square, axis, 0.5, rng)
print("one state:", estimate_a_phi2(state, axis, FaceFunctional.constant(), 2000, rng))
print("mean over states:", expected_compensator(axis, square, 0.5, FaceFunctional.constant()))
