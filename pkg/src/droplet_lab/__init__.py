"""Equilibrium measures on the unit sphere under two point charges.

The charges sit at the lifts of ``+-ib`` with strength ``a``. Depending on
``a`` the droplet is the complement of two caps, a strip or the preimage of
an ellipse, and the dual problem on the real line has a closed-form
equilibrium density. This package evaluates those closed forms and checks
them against independent quadrature and a discrete particle oracle.
"""

from .geometry import (
    INFINITY, PlanePoint, SphericalCap, SpherePoint, chordal, chordal_distance, geodesic_distance,
    inverse_stereo, project, stereo, unproject,
)
from .line_equilibrium import (
    CRITICAL, POSTCRITICAL, SUBCRITICAL, LineEquilibrium, ProblemParams, R_function,
    compute_A_C, density_muV, external_field_V, stieltjes_transform,
)
from .droplet import (
    Droplet, EllipseGeometry, boundary_sample, build_droplet, classical_schwarz_S0, contains,
    parameter_identities, spherical_schwarz_S, verify_schwarz_identity,
)
from .potentials import (
    build_mother_body, charge_measure, log_potential, mu_omega, sphere_log_potential,
    verify_frostman_sphere, verify_mother_body, verify_quadrature_domain,
    verify_stieltjes_identities,
)
from .dynamics import (
    GrowthFamily, omega_t_density, reconstruct_potentials, rho_t_build, verify_dynamics,
    verify_growth_inequalities,
)
from .particles import Configuration, discrete_energy, empirical_density_check, minimize
from .report import VerificationReport

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "PlanePoint", "SphericalCap", "SpherePoint", "chordal", "chordal_distance",
    "geodesic_distance", "inverse_stereo", "project", "stereo", "unproject",
    "CRITICAL", "POSTCRITICAL", "SUBCRITICAL", "LineEquilibrium", "ProblemParams", "R_function",
    "compute_A_C", "density_muV", "external_field_V", "stieltjes_transform",
    "Droplet", "EllipseGeometry", "boundary_sample", "build_droplet", "classical_schwarz_S0",
    "contains", "parameter_identities", "spherical_schwarz_S", "verify_schwarz_identity",
    "build_mother_body", "charge_measure", "log_potential", "mu_omega", "sphere_log_potential",
    "verify_frostman_sphere", "verify_mother_body", "verify_quadrature_domain",
    "verify_stieltjes_identities",
    "GrowthFamily", "omega_t_density", "reconstruct_potentials", "rho_t_build", "verify_dynamics",
    "verify_growth_inequalities",
    "Configuration", "discrete_energy", "empirical_density_check", "minimize",
    "VerificationReport",
]
