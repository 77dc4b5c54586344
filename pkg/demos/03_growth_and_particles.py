"""
Growth of the droplet and a particle check
==========================================

For fixed b the ellipses grow with t = 1/(1+2a). The t-derivative of the
droplet measure is a boundary measure rho_t; the t-derivative of the line
measure is omega_t. Finally a small Coulomb gas on the sphere is compared
with the predicted droplet.
"""

# %%
import numpy as np

from droplet_lab import ProblemParams, build_droplet
from droplet_lab.dynamics import GrowthFamily, reconstruct_potentials, direct_potentials, rho_t_build

b, t = 2.0, 1 / 3
rho = rho_t_build(b, t)
print("rho_t mass:", rho.total_mass, " balayage constant:", rho.constant)

# %%
# Integrating the potentials of rho_s and omega_s over s recovers the
# potentials of the measures at time t.
I_rho, I_om = reconstruct_potentials(b, t, 10.0)
D_om, D_v = direct_potentials(b, t, 10.0)
print("from rho_s:", I_rho[0], " direct:", D_om[0])
print("from omega_s:", I_om[0], " direct:", D_v[0])

# %%
# The family is nested.
fam = GrowthFamily.uniform(b, 10)
print("nesting violations:", fam.nesting_violations())
for row in fam.records()[::3]:
    print(f"t = {row['t']:.4f}  p = {row['p']:.4f}  q = {row['q']:.4f}  area = {row['area_mass']:.6f}")

# %%
# A Coulomb gas of 200 charges settles inside the predicted ellipse.
from droplet_lab.particles import fraction_inside, minimize

p = ProblemParams(b, 1.0)
config = minimize(200, p, seed=0)
print("converged:", config.converged, " iterations:", config.iterations)
print("share inside D (slack 0.03):", fraction_inside(config, build_droplet(p)))
