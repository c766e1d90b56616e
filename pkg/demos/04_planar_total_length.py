# %% [markdown]
# # Total edge length in the plane
#
# Including the earliest segments, the variance of the total edge length in R W
# grows like pi R^2 log R.  Convergence of the ratio is slow.

# %%
import numpy as np

from stit.harness import default_config, run_experiment

res = run_experiment("total_length_2d", default_config("total_length_2d", replications=2000))
for R in (8, 16, 32, 64):
    s = res.statistics[f"R={R}"]
    ref = res.references[f"normalized_variance_R={R}"]["value"]
    print(f"R={R:3d}  Var/(R^2 log R pi) = {s['normalized_variance'] / np.pi:.3f} "
          f"(exact {ref / np.pi:.3f}), early-time share {s['correction_variance_share']:.2f}")
