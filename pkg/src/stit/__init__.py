"""Simulation of STIT tessellations by recursive cell division, facet
functionals, exact second-order moments and Monte Carlo checks of their
limit behaviour."""
from .exact import (IntegratorConfig, expected_compensator, increment_variance_profile, tau,
                    v_w_empirical, v_w_isotropic, variance_exact, xi_variance)
from .functionals import (FaceFunctional, centred_sigma, estimate_a_phi2, section_power_sums,
                          section_tessellation, sigma_phi, sigma_phi_path)
from .geometry import ConvexPolytope, Hyperplane, split, volume
from .measures import HyperplaneMeasureSpec, capacity, sample_hitting
from .mnw import (Tessellation, continue_mnw, rescale_tessellation, run_mnw,
                  run_with_checkpoints, surface_totals)

__version__ = "0.1.0"
