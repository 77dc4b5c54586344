"""
The droplet in its three regimes
================================

Two equal charges of strength a sit at the preimages of +ib and -ib on the
unit sphere. The equilibrium measure is uniform on a droplet D whose shape
depends on where a sits relative to a_cr = 1/(b^2 - 1).
"""

# %%
# Parameters and regimes
import numpy as np

from droplet_lab import ProblemParams, LineEquilibrium, build_droplet

for a in (0.25, 1 / 3, 1.0):
    p = ProblemParams(2.0, a)
    print(f"a = {a:.4f}  regime = {p.regime}  t = {p.t:.4f}  t_cr = {p.t_cr:.4f}")

# %%
# Above a_cr the plane image of D is an ellipse whose foci are the
# endpoints of the line equilibrium support.
p = ProblemParams(2.0, 1.0)
eq = LineEquilibrium(p)
d = build_droplet(p)
print("A, C =", eq.A, eq.C)
print("p^2, q^2 =", d.ellipse.p ** 2, d.ellipse.q ** 2, " focus r =", d.ellipse.r)

# %%
# Volume law: the droplet has normalised area 1/(1+2a) in every regime.
for a in (0.25, 1 / 3, 1.0):
    d = build_droplet(ProblemParams(2.0, a))
    print(f"{d.shape:16s} area = {d.region().total_mass:.12f}  expected {1 / (1 + 2 * a):.12f}")

# %%
# Below a_cr the complement of D is a pair of spherical caps around the charges.
d = build_droplet(ProblemParams(2.0, 0.25))
for cap in d.caps:
    print("cap centre", np.round(cap.center.as_array(), 6), "radius", round(cap.geodesic_radius, 6),
          "area", cap.area)

# %%
# The density of the line equilibrium measure at the origin.
print("density at 0:", eq.density(0.0), " closed form:", np.sqrt(11.25) / np.pi)
