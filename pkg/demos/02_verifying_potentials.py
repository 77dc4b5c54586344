"""
Checking the variational conditions numerically
===============================================

Every identity and inequality is evaluated on point grids and summarised
in a VerificationReport with the recovered constants.
"""

# %%
from droplet_lab import ProblemParams
from droplet_lab.droplet import verify_schwarz_identity
from droplet_lab.potentials import (
    verify_frostman_sphere, verify_mother_body, verify_quadrature_domain, verify_stieltjes_identities,
)

p = ProblemParams(2.0, 1.0)

# %%
# Frostman: (1+2a) U^{lambda_D} + Q is constant on D and larger off D.
rep = verify_frostman_sphere(p, n_grid=200)
print(rep.summary(), " l_a =", rep.constants["ell_a"])

# %%
# The mother body on the equidistant great circle reproduces the exterior potential.
rep = verify_mother_body(p, n_grid=200)
print(rep.summary())
print("constant from the dual problem:", rep.constants["dual_constant"],
      " predicted:", rep.constants["dual_constant_predicted"])

# %%
# D* is a quadrature domain with nodes at the two charges.
print(verify_quadrature_domain(p).summary())

# %%
# The ellipse-specific identities.
print(verify_schwarz_identity(p).summary())
print(verify_stieltjes_identities(p).summary())

# %%
# The same checks run below the critical value, where D* is two caps.
q = ProblemParams(2.0, 0.25)
for rep in (verify_frostman_sphere(q, n_grid=200), verify_mother_body(q, n_grid=200)):
    print(rep.summary())
