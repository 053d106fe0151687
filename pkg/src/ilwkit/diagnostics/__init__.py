"""Conserved quantities, weighted-mass functionals, weights and virial terms."""
from .functionals import (
    REGIONS,
    T_LARGE,
    DiagnosticsFlags,
    DiagnosticsRow,
    VirialParams,
    compute_row,
    compute_rows,
    fit_envelope,
    functional_I,
    functional_I_envelope,
    functional_I_rho,
    functional_J,
    invariant_I1,
    invariant_I2,
    invariant_I3,
    invariant_I4,
    invariants,
    mu,
    mu1,
    mu1_log_derivative,
    mu_log_derivative,
    phi_lambda,
    psi_sigma,
    region_mass,
    rho,
    smoothing_flux,
    virial_param_violations,
)
from .virial import (
    VirialTerms,
    check_remainder_bounds,
    chi_ray,
    chi_ray_dt,
    commutator,
    neighbor_triplets,
    remainder_battery,
    virial_decomposition,
    virial_terms,
    weighted_mass,
)
from .weights import WeightFamily, chi, phi, psi, psi_sup, smooth_step, zeta, zeta_n
