"""Closed-form optimal measures for the three kernel families.

The optimal measure nu* minimizes the energy double integral of the kernel;
for these families it is known exactly: endpoint atoms plus an absolutely
continuous part. The script prints each measure and its optimal energy
sigma*^2, then cross-checks the energy by quadrature.
"""

import numpy as np

from gaussmin import (
    ModulatedBrownian,
    OrnsteinUhlenbeck,
    PowerScale,
    ShiftedRootScale,
    energy,
    normalize,
    ou_measure,
    ou_sigma_star_sq,
    power_law_measure,
    sigma_star_from_mu,
    tbm_measure,
)


def describe(name, measure, sigma_sq):
    print(f"\n{name}")
    print(f"  sigma*^2 = {sigma_sq:.10f}")
    for loc, mass in measure.atoms:
        print(f"  atom at {loc:g}: mass {mass:.6f}")
    if measure.density is not None:
        lo, hi = measure.density.lo, measure.density.hi
        xs = np.linspace(lo, hi, 5)
        vals = ", ".join(f"f({x:.2f})={v:.4f}"
                         for x, v in zip(xs, measure.density.eval(xs)))
        print(f"  density on [{lo:g}, {hi:g}]: {vals}")
    print(f"  total mass = {measure.total_mass:.10f}")


# exponential kernel on [0, 1]: equal endpoint atoms plus a uniform density
nu = ou_measure(0.0, 1.0)
describe("Ornstein-Uhlenbeck on [0, 1]", nu, ou_sigma_star_sq(0.0, 1.0))
print(f"  quadrature check: energy = {energy(OrnsteinUhlenbeck(), nu):.10f}")

# Brownian motion scaled by g(t) = sqrt(t): both endpoint atoms survive
# (case A) and the density is -g g'' = 1/(4x)
res = tbm_measure(PowerScale(0.5), 1.0, 4.0)
kern = ModulatedBrownian(PowerScale(0.5), 1.0, 4.0)
sigma_sq = sigma_star_from_mu(kern, res.measure)
describe(f"B(t)/sqrt(t) on [1, 4] (case {res.case})", res.measure, sigma_sq)
print(f"  explicit power family agrees: "
      f"{np.allclose(dict(res.measure.atoms)[1.0], dict(power_law_measure(0.5, 1.0, 4.0).atoms)[1.0])}")

# g(t) = sqrt(t - 1) on [1.5, 4]: h(t) = g - t g' is negative at the left
# endpoint, so the left atom vanishes and the support starts at the root
# a0 = 2 of h (case B)
g = ShiftedRootScale(1.0)
res_b = tbm_measure(g, 1.5, 4.0)
kern_b = ModulatedBrownian(g, 1.5, 4.0)
describe(f"B(t)/sqrt(t-1) on [1.5, 4] (case {res_b.case}, a0 = {res_b.a0:.6f})",
         res_b.measure, sigma_star_from_mu(kern_b, res_b.measure))
print(f"  quadrature check: energy of normalized measure = "
      f"{energy(kern_b, normalize(res_b.measure)):.10f}")
